//! Parameterized single-photon optics.
//!
//! Circuits are ordered lists of two-mode beam-splitters and single-mode
//! phase shifters. List order is temporal order: the product runs
//! right-to-left, W = G_g ··· G_2 G_1. Gate angles either bind to a shared
//! parameter slot or are fixed constants; derivatives are exact, via the
//! product rule with closed-form per-gate generators.
//!
//! Two beam-splitter conventions are supported. The default is the real
//! rotation [[cosθ, −sinθ], [sinθ, cosθ]], which keeps purely
//! beam-splitter circuits orthogonal; the symmetric complex form
//! [[cosθ, i·sinθ], [i·sinθ, cosθ]] is selectable per gate.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn eye(m: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((m, m), |(i, j)| if i == j { one() } else { zero() })
}

/// Where a gate angle comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    /// Index into the circuit's shared parameter vector.
    Slot(usize),
    /// Constant angle in [0, 2π).
    Fixed(f64),
}

/// Beam-splitter matrix convention.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BsConvention {
    #[default]
    Rotation,
    SymmetricComplex,
}

/// One optical element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGate", into = "RawGate")]
pub enum Gate {
    BeamSplitter {
        modes: (usize, usize),
        angle: Param,
        convention: BsConvention,
    },
    PhaseShifter {
        mode: usize,
        phase: Param,
    },
}

// JSON shape: {"kind":"bs","modes":[i,j],"slot":a|"fixed":θ,"convention":...}
//             {"kind":"ps","mode":i,"slot":a|"fixed":φ}
#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGate {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    modes: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slot: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fixed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    convention: Option<BsConvention>,
}

impl TryFrom<RawGate> for Gate {
    type Error = Error;

    fn try_from(raw: RawGate) -> Result<Gate> {
        let param = match (raw.slot, raw.fixed) {
            (Some(a), None) => Param::Slot(a),
            (None, Some(v)) => Param::Fixed(v),
            _ => {
                return Err(Error::InvalidCircuit(
                    "gate needs exactly one of \"slot\" or \"fixed\"".into(),
                ))
            }
        };
        match raw.kind.as_str() {
            "bs" => {
                let modes = raw.modes.ok_or_else(|| {
                    Error::InvalidCircuit("beam-splitter needs \"modes\": [i, j]".into())
                })?;
                if raw.mode.is_some() {
                    return Err(Error::InvalidCircuit("\"mode\" is a phase-shifter field".into()));
                }
                Ok(Gate::BeamSplitter {
                    modes: (modes[0], modes[1]),
                    angle: param,
                    convention: raw.convention.unwrap_or_default(),
                })
            }
            "ps" => {
                let mode = raw.mode.ok_or_else(|| {
                    Error::InvalidCircuit("phase-shifter needs \"mode\"".into())
                })?;
                if raw.modes.is_some() || raw.convention.is_some() {
                    return Err(Error::InvalidCircuit(
                        "\"modes\"/\"convention\" are beam-splitter fields".into(),
                    ));
                }
                Ok(Gate::PhaseShifter { mode, phase: param })
            }
            other => Err(Error::InvalidCircuit(format!("unknown gate kind {other:?}"))),
        }
    }
}

impl From<Gate> for RawGate {
    fn from(gate: Gate) -> RawGate {
        let (kind, modes, mode, param, convention) = match gate {
            Gate::BeamSplitter { modes, angle, convention } => {
                ("bs", Some([modes.0, modes.1]), None, angle, Some(convention))
            }
            Gate::PhaseShifter { mode, phase } => ("ps", None, Some(mode), phase, None),
        };
        let (slot, fixed) = match param {
            Param::Slot(a) => (Some(a), None),
            Param::Fixed(v) => (None, Some(v)),
        };
        RawGate { kind: kind.into(), modes, mode, slot, fixed, convention }
    }
}

impl Gate {
    /// The bound slot, if the angle is a parameter.
    pub fn slot(&self) -> Option<usize> {
        match self.param() {
            Param::Slot(a) => Some(a),
            Param::Fixed(_) => None,
        }
    }

    /// The gate angle under a parameter vector (slot-indexed).
    pub fn value(&self, theta: &[f64]) -> f64 {
        match self.param() {
            Param::Slot(a) => theta[a],
            Param::Fixed(v) => v,
        }
    }

    fn param(&self) -> Param {
        match *self {
            Gate::BeamSplitter { angle, .. } => angle,
            Gate::PhaseShifter { phase, .. } => phase,
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        match *self {
            Gate::BeamSplitter { modes: (i, j), .. } => {
                if i >= m || j >= m {
                    return Err(Error::InvalidCircuit(format!(
                        "beam-splitter modes ({i}, {j}) out of range for {m} modes"
                    )));
                }
                if i == j {
                    return Err(Error::InvalidCircuit(format!(
                        "beam-splitter modes must be distinct, got ({i}, {j})"
                    )));
                }
            }
            Gate::PhaseShifter { mode, .. } => {
                if mode >= m {
                    return Err(Error::InvalidCircuit(format!(
                        "phase-shifter mode {mode} out of range for {m} modes"
                    )));
                }
            }
        }
        if let Param::Fixed(v) = self.param() {
            if !v.is_finite() || !(0.0..TAU).contains(&v) {
                return Err(Error::InvalidCircuit(format!(
                    "fixed angle {v} outside [0, 2π)"
                )));
            }
        }
        Ok(())
    }

    /// The gate's m×m matrix at the given angle.
    pub fn matrix(&self, m: usize, value: f64) -> Array2<Complex64> {
        let mut u = eye(m);
        match *self {
            Gate::BeamSplitter { modes: (i, j), convention, .. } => {
                let (c, s) = (value.cos(), value.sin());
                match convention {
                    BsConvention::Rotation => {
                        u[[i, i]] = Complex64::new(c, 0.0);
                        u[[i, j]] = Complex64::new(-s, 0.0);
                        u[[j, i]] = Complex64::new(s, 0.0);
                        u[[j, j]] = Complex64::new(c, 0.0);
                    }
                    BsConvention::SymmetricComplex => {
                        u[[i, i]] = Complex64::new(c, 0.0);
                        u[[i, j]] = Complex64::new(0.0, s);
                        u[[j, i]] = Complex64::new(0.0, s);
                        u[[j, j]] = Complex64::new(c, 0.0);
                    }
                }
            }
            Gate::PhaseShifter { mode, .. } => {
                u[[mode, mode]] = Complex64::from_polar(1.0, value);
            }
        }
        u
    }

    /// d(matrix)/d(angle) at the given angle. Zero outside the gate block.
    pub fn derivative(&self, m: usize, value: f64) -> Array2<Complex64> {
        let mut d = Array2::from_elem((m, m), zero());
        match *self {
            Gate::BeamSplitter { modes: (i, j), convention, .. } => {
                let (c, s) = (value.cos(), value.sin());
                match convention {
                    BsConvention::Rotation => {
                        d[[i, i]] = Complex64::new(-s, 0.0);
                        d[[i, j]] = Complex64::new(-c, 0.0);
                        d[[j, i]] = Complex64::new(c, 0.0);
                        d[[j, j]] = Complex64::new(-s, 0.0);
                    }
                    BsConvention::SymmetricComplex => {
                        d[[i, i]] = Complex64::new(-s, 0.0);
                        d[[i, j]] = Complex64::new(0.0, c);
                        d[[j, i]] = Complex64::new(0.0, c);
                        d[[j, j]] = Complex64::new(-s, 0.0);
                    }
                }
            }
            Gate::PhaseShifter { mode, .. } => {
                d[[mode, mode]] = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, value);
            }
        }
        d
    }
}

/// An ordered gate list over a shared parameter vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit", into = "RawCircuit")]
pub struct ParamCircuit {
    modes: usize,
    gates: Vec<Gate>,
    parameter_count: usize,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    modes: usize,
    gates: Vec<Gate>,
}

impl TryFrom<RawCircuit> for ParamCircuit {
    type Error = Error;

    fn try_from(raw: RawCircuit) -> Result<ParamCircuit> {
        // Slot count is implied by the JSON: highest slot + 1.
        let count = raw
            .gates
            .iter()
            .filter_map(Gate::slot)
            .max()
            .map_or(0, |a| a + 1);
        ParamCircuit::new(raw.modes, raw.gates, count)
    }
}

impl From<ParamCircuit> for RawCircuit {
    fn from(c: ParamCircuit) -> RawCircuit {
        RawCircuit { modes: c.modes, gates: c.gates }
    }
}

impl ParamCircuit {
    /// Every slot in 0..parameter_count must be referenced by some gate.
    pub fn new(modes: usize, gates: Vec<Gate>, parameter_count: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::NoModes);
        }
        let mut seen = vec![false; parameter_count];
        for gate in &gates {
            gate.validate(modes)?;
            if let Some(a) = gate.slot() {
                if a >= parameter_count {
                    return Err(Error::InvalidCircuit(format!(
                        "slot {a} out of range (parameter count {parameter_count})"
                    )));
                }
                seen[a] = true;
            }
        }
        if let Some(unused) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidCircuit(format!("slot {unused} bound to no gate")));
        }
        Ok(ParamCircuit { modes, gates, parameter_count })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_count
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidCircuit(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialization cannot fail")
    }

    fn resolve(&self, gate: &Gate, theta: &[f64]) -> f64 {
        gate.value(theta)
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.parameter_count {
            return Err(Error::ParamCount {
                expected: self.parameter_count,
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// W¹(θ): ordered product of gate matrices, first gate rightmost.
    pub fn single_photon_unitary(&self, theta: &[f64]) -> Result<Array2<Complex64>> {
        self.check_theta(theta)?;
        let mut w = eye(self.modes);
        for gate in &self.gates {
            w = gate.matrix(self.modes, self.resolve(gate, theta)).dot(&w);
        }
        Ok(w)
    }

    /// ∂W¹/∂θ_a for every slot a, exact. Gates sharing a slot sum their
    /// product-rule contributions.
    pub fn single_photon_jacobian(&self, theta: &[f64]) -> Result<Vec<Array2<Complex64>>> {
        self.check_theta(theta)?;
        let m = self.modes;
        let g = self.gates.len();
        // prefix[i] = G_{i-1}···G_0, suffix[i] = G_{g-1}···G_i.
        let mut prefix = Vec::with_capacity(g + 1);
        prefix.push(eye(m));
        for gate in &self.gates {
            let u = gate.matrix(m, self.resolve(gate, theta));
            let last = prefix.last().unwrap();
            prefix.push(u.dot(last));
        }
        let mut suffix = vec![eye(m); g + 1];
        for i in (0..g).rev() {
            let u = self.gates[i].matrix(m, self.resolve(&self.gates[i], theta));
            suffix[i] = suffix[i + 1].dot(&u);
        }
        let mut out = vec![Array2::from_elem((m, m), zero()); self.parameter_count];
        for (i, gate) in self.gates.iter().enumerate() {
            if let Some(a) = gate.slot() {
                let d = gate.derivative(m, self.resolve(gate, theta));
                out[a] = &out[a] + &suffix[i + 1].dot(&d).dot(&prefix[i]);
            }
        }
        Ok(out)
    }
}

/// Universal mesh flavors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshStyle {
    /// m(m−1)/2 real-rotation beam-splitters: covers the orthogonal group.
    TriangularRotations,
    /// Adds a phase per beam-splitter plus m output phases: m² slots,
    /// covers the full unitary group.
    RotationsPlusPhases,
}

/// Triangular mesh of adjacent-pair elements with one fresh slot per gate.
pub fn universal_mesh(modes: usize, style: MeshStyle) -> Result<ParamCircuit> {
    if modes < 2 {
        return Err(Error::InvalidCircuit(format!(
            "mesh needs at least 2 modes, got {modes}"
        )));
    }
    let mut gates = Vec::new();
    let mut slot = 0;
    let mut fresh = || {
        let a = slot;
        slot += 1;
        Param::Slot(a)
    };
    for col in 0..modes - 1 {
        for row in (col + 1..modes).rev() {
            if style == MeshStyle::RotationsPlusPhases {
                gates.push(Gate::PhaseShifter { mode: row - 1, phase: fresh() });
            }
            gates.push(Gate::BeamSplitter {
                modes: (row - 1, row),
                angle: fresh(),
                convention: BsConvention::Rotation,
            });
        }
    }
    if style == MeshStyle::RotationsPlusPhases {
        for mode in 0..modes {
            gates.push(Gate::PhaseShifter { mode, phase: fresh() });
        }
    }
    ParamCircuit::new(modes, gates, slot)
}

/// Haar-random m×m unitary, deterministic per seed.
pub fn haar_unitary(modes: usize, seed: u64) -> Array2<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_from_rng(modes, &mut rng)
}

/// Haar draw from caller-provided RNG state (used for substreams).
pub(crate) fn haar_from_rng<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Array2<Complex64> {
    assert!(modes >= 1, "haar_unitary needs at least one mode");
    let m = modes;
    let ginibre = Array2::from_shape_fn((m, m), |_| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) / 2.0f64.sqrt()
    });
    // Gram-Schmidt gives the unique Q whose R has a positive real diagonal,
    // which is exactly the phase convention that makes Q Haar-distributed.
    // Two orthogonalization passes keep orthonormality near machine level.
    let mut q: Vec<Array1<Complex64>> = Vec::with_capacity(m);
    for j in 0..m {
        let mut v = ginibre.column(j).to_owned();
        for _ in 0..2 {
            for qi in &q {
                let overlap: Complex64 = qi.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                v = v - qi.mapv(|z| z * overlap);
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        debug_assert!(norm > 1e-100, "degenerate Gaussian draw");
        q.push(v.mapv(|z| z / norm));
    }
    Array2::from_shape_fn((m, m), |(i, j)| q[j][i])
}

/// Unitary relabeling modes: the content of mode i moves to mode perm[i].
pub fn mode_permutation_matrix(perm: &[usize]) -> Result<Array2<Complex64>> {
    let m = perm.len();
    if m == 0 {
        return Err(Error::NoModes);
    }
    let mut seen = vec![false; m];
    for &p in perm {
        if p >= m || seen[p] {
            return Err(Error::InvalidCircuit(format!("not a permutation: {perm:?}")));
        }
        seen[p] = true;
    }
    let mut u = Array2::from_elem((m, m), zero());
    for (i, &p) in perm.iter().enumerate() {
        u[[p, i]] = one();
    }
    Ok(u)
}
