use crate::err::Fail;

/// In-memory result table. Rendered in one piece so a run writes its whole
/// output or nothing.
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Csv { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest decimal string that parses back to exactly the same f64.
pub fn num(x: f64) -> Result<String, Fail> {
    if !x.is_finite() {
        return Err(Fail::Config(format!("refusing to serialize non-finite value {x}")));
    }
    Ok(format!("{x}"))
}

pub fn int(x: impl std::fmt::Display) -> String {
    x.to_string()
}
