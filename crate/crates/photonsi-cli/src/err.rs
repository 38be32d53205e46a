/// Failure classes, mapped onto exit codes: a breached numerical check
/// exits 1, anything wrong with inputs or the filesystem exits 2.
#[derive(Debug)]
pub enum Fail {
    Config(String),
    Assertion(String),
}

impl Fail {
    pub fn exit_code(&self) -> u8 {
        match self {
            Fail::Assertion(_) => 1,
            Fail::Config(_) => 2,
        }
    }
}

impl std::fmt::Display for Fail {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Fail::Config(msg) => write!(f, "{msg}"),
            Fail::Assertion(msg) => write!(f, "check failed: {msg}"),
        }
    }
}

impl From<photonsi::Error> for Fail {
    fn from(e: photonsi::Error) -> Self {
        Fail::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail::Config(format!("config: {e}"))
    }
}
