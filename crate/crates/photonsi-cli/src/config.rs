use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use photonsi::analysis::{PipelineCircuit, PipelineStage};
use photonsi::channel::{DensityMatrix, InjectionSpec};
use photonsi::circuit::{universal_mesh, BsConvention, Gate, MeshStyle, Param, ParamCircuit};
use photonsi::{FockBasis, FockState};

use crate::err::Fail;

pub const SCHEMA_VERSION: u64 = 1;

/// One parsed experiment configuration.
pub enum Config {
    DofCurve(DofCurveCfg),
    DofMax(DofMaxCfg),
    PurityBounds(PurityCfg),
    Birthday(BirthdayCfg),
    ProbEstim(ProbEstimCfg),
    PermBench(PermBenchCfg),
}

#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DofCurveCfg {
    #[allow(dead_code)]
    schema_version: u64,
    #[allow(dead_code)]
    experiment: String,
    pub seed: u64,
    pub pipeline: PipelineSpec,
    #[serde(default)]
    pub compare_without_injection: bool,
}

#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DofMaxCfg {
    #[allow(dead_code)]
    schema_version: u64,
    #[allow(dead_code)]
    experiment: String,
    pub seed: u64,
    pub trials: usize,
    pub pipeline: PipelineSpec,
}

#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PurityCfg {
    #[allow(dead_code)]
    schema_version: u64,
    #[allow(dead_code)]
    experiment: String,
    pub seed: u64,
    pub modes: usize,
    pub photons: u32,
    pub layers: Vec<usize>,
    pub draws: usize,
}

#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BirthdayCfg {
    #[allow(dead_code)]
    schema_version: u64,
    #[allow(dead_code)]
    experiment: String,
    pub seed: u64,
    pub modes: Vec<usize>,
    pub photons: u32,
    pub draws: usize,
}

#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbEstimCfg {
    #[allow(dead_code)]
    schema_version: u64,
    #[allow(dead_code)]
    experiment: String,
    pub seed: u64,
    pub modes: usize,
    pub photons: u32,
    /// One interferometer per layer, first layer first; the read-and-replace
    /// count is one less than the layer count.
    pub layer_seeds: Vec<u64>,
    pub input: Vec<u32>,
    pub samples: usize,
    /// When set, the run fails (exit 1) if any output probability estimate
    /// sits further than this many standard errors from the exact value.
    #[serde(default)]
    pub max_sigma: Option<f64>,
}

#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermBenchCfg {
    #[allow(dead_code)]
    schema_version: u64,
    #[allow(dead_code)]
    experiment: String,
    pub seed: u64,
    pub side: usize,
    pub samples: Vec<usize>,
}

/// Pipeline description: an input occupation plus a list of stages.
#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSpec {
    pub modes: usize,
    pub photons: u32,
    pub input: Vec<u32>,
    pub stages: Vec<StageSpec>,
}

#[derive(Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StageSpec {
    /// Universal mesh, one fresh parameter slot per element.
    Mesh { style: MeshStyle },
    /// `count` beam-splitters on random mode pairs drawn from `seed`.
    ExtraBs { count: usize, seed: u64 },
    /// Read the listed modes and put the same counts back.
    Inject { modes: Vec<usize> },
    /// Inline circuit, `{"modes": m, "gates": [...]}`.
    Circuit { circuit: serde_json::Value },
}

impl PipelineSpec {
    pub fn build(&self) -> Result<(PipelineCircuit, DensityMatrix), Fail> {
        if self.input.len() != self.modes {
            return Err(Fail::Config(format!(
                "input has {} entries for {} modes",
                self.input.len(),
                self.modes
            )));
        }
        let held: u32 = self.input.iter().sum();
        if held != self.photons {
            return Err(Fail::Config(format!(
                "input holds {held} photons, pipeline declares {}",
                self.photons
            )));
        }
        let mut stages = Vec::with_capacity(self.stages.len());
        for spec in &self.stages {
            stages.push(match spec {
                StageSpec::Mesh { style } => {
                    PipelineStage::Linear(universal_mesh(self.modes, *style)?)
                }
                StageSpec::ExtraBs { count, seed } => {
                    PipelineStage::Linear(random_couplers(self.modes, *count, *seed)?)
                }
                StageSpec::Inject { modes } => {
                    PipelineStage::Injection(InjectionSpec::identity(modes.clone())?)
                }
                StageSpec::Circuit { circuit } => {
                    PipelineStage::Linear(ParamCircuit::from_json(&circuit.to_string())?)
                }
            });
        }
        let pc = PipelineCircuit::new(self.modes, self.photons, stages)?;
        let basis = FockBasis::new(self.modes, self.photons)?;
        let input = DensityMatrix::from_basis_state(basis, &FockState::new(self.input.clone()))?;
        Ok((pc, input))
    }
}

fn random_couplers(modes: usize, count: usize, seed: u64) -> Result<ParamCircuit, Fail> {
    if modes < 2 {
        return Err(Fail::Config("extra-bs needs at least two modes".into()));
    }
    if count == 0 {
        return Err(Fail::Config("extra-bs needs count >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gates = (0..count)
        .map(|i| {
            let a = rng.random_range(0..modes - 1);
            let b = rng.random_range(a + 1..modes);
            Gate::BeamSplitter {
                modes: (a, b),
                angle: Param::Slot(i),
                convention: BsConvention::Rotation,
            }
        })
        .collect();
    Ok(ParamCircuit::new(modes, gates, count)?)
}

pub fn parse_config(text: &str) -> Result<Config, Fail> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let top = value
        .as_object()
        .ok_or_else(|| Fail::Config("config: top level must be a JSON object".into()))?;
    let version = top
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Fail::Config("config: missing integer field 'schema_version'".into()))?;
    if version != SCHEMA_VERSION {
        return Err(Fail::Config(format!(
            "config: schema_version {version} is not supported, expected {SCHEMA_VERSION}"
        )));
    }
    let experiment = top
        .get("experiment")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Fail::Config("config: missing string field 'experiment'".into()))?;
    Ok(match experiment {
        "dof-curve" => Config::DofCurve(serde_json::from_value(value.clone())?),
        "dof-max" => Config::DofMax(serde_json::from_value(value.clone())?),
        "purity-bounds" => Config::PurityBounds(serde_json::from_value(value.clone())?),
        "birthday" => Config::Birthday(serde_json::from_value(value.clone())?),
        "probestim" => Config::ProbEstim(serde_json::from_value(value.clone())?),
        "perm-bench" => Config::PermBench(serde_json::from_value(value.clone())?),
        other => return Err(Fail::Config(format!("config: unknown experiment '{other}'"))),
    })
}
