//! Sector density matrices and the measure-and-reinject channel.
//!
//! The channel measures photon counts on a set of modes, then replaces the
//! measured occupations through a photon-conserving rule. Coherence between
//! distinct measurement outcomes is destroyed; the identity rule (put back
//! what was read) is pure outcome dephasing.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::fock::{FockBasis, FockState};
use crate::lift::LiftedUnitary;
use crate::linalg;
use crate::{Error, Result};

const HERMITICITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
// Slightly negative eigenvalues from roundoff are tolerated, never clipped.
const EIGEN_FLOOR: f64 = -1e-9;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// A density matrix on one (modes, photons) Fock sector.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    basis: FockBasis,
    mat: Array2<Complex64>,
}

impl DensityMatrix {
    /// Validates hermiticity and unit trace to 1e-10 and rejects
    /// eigenvalues below −1e-9.
    pub fn new(basis: FockBasis, mat: Array2<Complex64>) -> Result<Self> {
        let d = basis.dim();
        if mat.dim() != (d, d) {
            return Err(Error::DimensionMismatch { expected: d, got: mat.nrows() });
        }
        let mut herm = 0.0f64;
        for i in 0..d {
            for j in 0..=i {
                herm = herm.max((mat[[i, j]] - mat[[j, i]].conj()).norm());
            }
        }
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidDensity(format!(
                "hermiticity defect {herm:.3e} exceeds {HERMITICITY_TOL:.0e}"
            )));
        }
        let trace: Complex64 = (0..d).map(|i| mat[[i, i]]).sum();
        if (trace - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!(
                "trace {trace} is not 1 within {TRACE_TOL:.0e}"
            )));
        }
        let min_eig = linalg::hermitian_eigenvalues(&mat)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min_eig < EIGEN_FLOOR {
            return Err(Error::InvalidDensity(format!(
                "minimum eigenvalue {min_eig:.3e} below {EIGEN_FLOOR:.0e}"
            )));
        }
        Ok(DensityMatrix { basis, mat })
    }

    /// Skips validation; for internal steps that preserve validity.
    pub(crate) fn new_unchecked(basis: FockBasis, mat: Array2<Complex64>) -> Self {
        DensityMatrix { basis, mat }
    }

    /// |ψ⟩⟨ψ| from a normalized sector vector.
    pub fn pure(basis: FockBasis, psi: &Array1<Complex64>) -> Result<Self> {
        let d = basis.dim();
        if psi.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: psi.len() });
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::OutOfRange(format!(
                "state vector norm {norm} is not 1 within 1e-10"
            )));
        }
        let mat = Array2::from_shape_fn((d, d), |(i, j)| psi[i] * psi[j].conj());
        Ok(DensityMatrix { basis, mat })
    }

    /// |s⟩⟨s| for a basis occupation state.
    pub fn from_basis_state(basis: FockBasis, state: &FockState) -> Result<Self> {
        let idx = basis.index_of(state)?;
        let d = basis.dim();
        let mut mat = Array2::from_elem((d, d), czero());
        mat[[idx, idx]] = Complex64::new(1.0, 0.0);
        Ok(DensityMatrix { basis, mat })
    }

    /// I/d on the sector.
    pub fn maximally_mixed(basis: FockBasis) -> Self {
        let d = basis.dim();
        let mat = Array2::from_shape_fn((d, d), |(i, j)| {
            if i == j {
                Complex64::new(1.0 / d as f64, 0.0)
            } else {
                czero()
            }
        });
        DensityMatrix { basis, mat }
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.mat[[i, i]]).sum()
    }

    /// Tr ρ² = Σ|ρ_ij|² for Hermitian ρ.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.mat)
    }

    /// W ρ W†.
    pub fn evolve(&self, w: &LiftedUnitary) -> Result<DensityMatrix> {
        if w.basis() != &self.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(DensityMatrix::new_unchecked(self.basis.clone(), w.conjugate(&self.mat)?))
    }
}

/// A measure-and-reinject rule: which modes are read and what occupations
/// replace the reading. The rule must conserve the photon count of every
/// outcome it is actually applied to.
#[derive(Clone)]
pub struct InjectionSpec {
    measured_modes: Vec<usize>,
    rule: Arc<dyn Fn(&[u32]) -> Vec<u32> + Send + Sync>,
    label: String,
}

impl fmt::Debug for InjectionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InjectionSpec")
            .field("measured_modes", &self.measured_modes)
            .field("label", &self.label)
            .finish()
    }
}

impl InjectionSpec {
    pub fn new<F>(measured_modes: Vec<usize>, label: impl Into<String>, rule: F) -> Result<Self>
    where
        F: Fn(&[u32]) -> Vec<u32> + Send + Sync + 'static,
    {
        if measured_modes.is_empty() {
            return Err(Error::InvalidInjection("no measured modes".into()));
        }
        let mut sorted = measured_modes.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInjection(format!(
                "repeated measured mode in {measured_modes:?}"
            )));
        }
        Ok(InjectionSpec { measured_modes, rule: Arc::new(rule), label: label.into() })
    }

    /// Reads occupations and puts them straight back: outcome dephasing.
    pub fn identity(measured_modes: Vec<usize>) -> Result<Self> {
        Self::new(measured_modes, "identity", |o: &[u32]| o.to_vec())
    }

    pub fn measured_modes(&self) -> &[usize] {
        &self.measured_modes
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Precomputed action of one injection on one sector basis: outcome groups
/// of basis indices and the post-injection index of every basis state.
pub(crate) struct InjectionPlan {
    pub groups: Vec<Vec<usize>>,
    pub outcomes: Vec<Vec<u32>>,
    pub target: Vec<usize>,
}

pub(crate) fn plan_injection(basis: &FockBasis, spec: &InjectionSpec) -> Result<InjectionPlan> {
    let m = basis.modes();
    for &mode in spec.measured_modes() {
        if mode >= m {
            return Err(Error::InvalidInjection(format!(
                "measured mode {mode} out of range for {m} modes"
            )));
        }
    }
    let d = basis.dim();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut outcomes: Vec<Vec<u32>> = Vec::new();
    let mut target = vec![0usize; d];
    let mut group_of: std::collections::HashMap<Vec<u32>, usize> = std::collections::HashMap::new();
    for i in 0..d {
        let s = basis.state(i);
        let outcome: Vec<u32> = spec.measured_modes().iter().map(|&q| s[q]).collect();
        let injected = (spec.rule)(&outcome);
        if injected.len() != outcome.len() {
            return Err(Error::InvalidInjection(format!(
                "rule returned {} occupations for {} measured modes",
                injected.len(),
                outcome.len()
            )));
        }
        if injected.iter().sum::<u32>() != outcome.iter().sum::<u32>() {
            return Err(Error::NonConserving { outcome: outcome.clone(), injected });
        }
        let mut occ = s.occupations().to_vec();
        for (&q, &r) in spec.measured_modes().iter().zip(injected.iter()) {
            occ[q] = r;
        }
        target[i] = basis.index_of(&FockState::new(occ))?;
        let g = *group_of.entry(outcome.clone()).or_insert_with(|| {
            groups.push(Vec::new());
            outcomes.push(outcome.clone());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    Ok(InjectionPlan { groups, outcomes, target })
}

/// The channel as a linear map on raw sector matrices. Coherence between
/// outcome groups is dropped; within a group, rows and columns move to
/// their post-injection indices.
pub(crate) fn apply_plan(plan: &InjectionPlan, mat: &Array2<Complex64>) -> Array2<Complex64> {
    let d = mat.nrows();
    let mut out = Array2::from_elem((d, d), czero());
    for group in &plan.groups {
        for &i in group {
            for &j in group {
                out[[plan.target[i], plan.target[j]]] += mat[[i, j]];
            }
        }
    }
    out
}

/// Apply the measure-and-reinject channel.
pub fn state_injection(rho: &DensityMatrix, spec: &InjectionSpec) -> Result<DensityMatrix> {
    let plan = plan_injection(rho.basis(), spec)?;
    Ok(DensityMatrix::new_unchecked(rho.basis().clone(), apply_plan(&plan, rho.matrix())))
}

/// Probability of each measurement outcome, in first-appearance basis order.
pub fn outcome_distribution(
    rho: &DensityMatrix,
    spec: &InjectionSpec,
) -> Result<Vec<(Vec<u32>, f64)>> {
    let plan = plan_injection(rho.basis(), spec)?;
    Ok(plan
        .groups
        .iter()
        .zip(plan.outcomes.iter())
        .map(|(group, outcome)| {
            let p: f64 = group.iter().map(|&i| rho.matrix()[[i, i]].re).sum();
            (outcome.clone(), p)
        })
        .collect())
}

/// ‖ρ−σ‖₁, the sum of absolute eigenvalues of the difference. Range [0, 2].
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.basis() != b.basis() {
        return Err(Error::BasisMismatch);
    }
    let diff = a.matrix() - b.matrix();
    Ok(linalg::hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum())
}

/// Upper bound 2·√d·√(γ − 1/d) on the trace distance between any two states
/// whose purities are at most γ.
pub fn distinguishability_bound(dim: usize, purity: f64) -> Result<f64> {
    if dim == 0 {
        return Err(Error::NoModes);
    }
    let floor = 1.0 / dim as f64;
    if purity < floor - 1e-12 || purity > 1.0 + 1e-12 {
        return Err(Error::OutOfRange(format!(
            "purity {purity} outside [{floor}, 1]"
        )));
    }
    Ok(2.0 * (dim as f64).sqrt() * (purity - floor).max(0.0).sqrt())
}

const DUMP_MAGIC: &[u8; 4] = b"PSDM";
const DUMP_VERSION: u32 = 1;

/// Binary snapshot: magic, version, sector shape, row-major little-endian
/// (re, im) pairs.
pub fn dump_density(rho: &DensityMatrix) -> Vec<u8> {
    let d = rho.dim();
    let mut out = Vec::with_capacity(16 + 16 * d * d);
    out.extend_from_slice(DUMP_MAGIC);
    out.extend_from_slice(&DUMP_VERSION.to_le_bytes());
    out.extend_from_slice(&(rho.basis().modes() as u32).to_le_bytes());
    out.extend_from_slice(&rho.basis().photons().to_le_bytes());
    for i in 0..d {
        for j in 0..d {
            let z = rho.matrix()[[i, j]];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

/// Reads a dump back and re-validates the matrix.
pub fn load_density(bytes: &[u8]) -> Result<DensityMatrix> {
    let fail = |msg: &str| Error::BadDump(msg.to_string());
    if bytes.len() < 16 {
        return Err(fail("truncated header"));
    }
    if &bytes[0..4] != DUMP_MAGIC {
        return Err(fail("bad magic"));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    if word(4) != DUMP_VERSION {
        return Err(fail("unsupported version"));
    }
    let modes = word(8) as usize;
    let photons = word(12);
    let basis = FockBasis::new(modes, photons)?;
    let d = basis.dim();
    if bytes.len() != 16 + 16 * d * d {
        return Err(fail("payload length does not match sector dimension"));
    }
    let mut mat = Array2::from_elem((d, d), czero());
    let mut at = 16;
    for i in 0..d {
        for j in 0..d {
            let re = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
            let im = f64::from_le_bytes(bytes[at + 8..at + 16].try_into().unwrap());
            mat[[i, j]] = Complex64::new(re, im);
            at += 16;
        }
    }
    DensityMatrix::new(basis, mat)
}
