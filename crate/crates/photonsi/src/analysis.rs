//! Pipelines mixing unitary stages with measure-and-reinject stages, their
//! exact parameter Jacobians, and the derived experiment drivers:
//! degrees-of-freedom counts, purity decay under repeated injection, and
//! output-collision statistics.
//!
//! The Jacobian is propagated gate by gate. A gate's lifted matrix W and
//! its exact derivative dW update the running state and every derivative
//! slice; injections are linear maps, so they apply unchanged to both.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{apply_plan, plan_injection, DensityMatrix, InjectionSpec};
use crate::circuit::{haar_from_rng, Gate, ParamCircuit};
use crate::fock::{FockBasis, FockState};
use crate::lift::{lift_derivative, lift_unitary, transition_probability};
use crate::linalg;
use crate::parallel::par_collect;
use crate::{Error, Result};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-7;

/// One stage of a pipeline.
#[derive(Clone, Debug)]
pub enum PipelineStage {
    Linear(ParamCircuit),
    Injection(InjectionSpec),
}

/// An alternation of parameterized circuits and injection channels on one
/// sector. Parameter slots of the linear stages are concatenated into a
/// single global vector, in stage order.
#[derive(Clone, Debug)]
pub struct PipelineCircuit {
    modes: usize,
    photons: u32,
    stages: Vec<PipelineStage>,
    offsets: Vec<usize>,
    parameter_count: usize,
}

impl PipelineCircuit {
    pub fn new(modes: usize, photons: u32, stages: Vec<PipelineStage>) -> Result<Self> {
        if modes == 0 {
            return Err(Error::NoModes);
        }
        let mut offsets = Vec::with_capacity(stages.len());
        let mut acc = 0usize;
        for stage in &stages {
            offsets.push(acc);
            match stage {
                PipelineStage::Linear(circ) => {
                    if circ.modes() != modes {
                        return Err(Error::ModeMismatch { expected: modes, got: circ.modes() });
                    }
                    acc += circ.parameter_count();
                }
                PipelineStage::Injection(spec) => {
                    for &q in spec.measured_modes() {
                        if q >= modes {
                            return Err(Error::InvalidInjection(format!(
                                "measured mode {q} out of range for {modes} modes"
                            )));
                        }
                    }
                }
            }
        }
        Ok(PipelineCircuit { modes, photons, stages, offsets, parameter_count: acc })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photons(&self) -> u32 {
        self.photons
    }

    pub fn stages(&self) -> &[PipelineStage] {
        &self.stages
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_count
    }

    pub fn basis(&self) -> Result<FockBasis> {
        FockBasis::new(self.modes, self.photons)
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.parameter_count {
            return Err(Error::ParamCount { expected: self.parameter_count, got: theta.len() });
        }
        Ok(())
    }

    fn check_input(&self, input: &DensityMatrix) -> Result<()> {
        if input.basis().modes() != self.modes || input.basis().photons() != self.photons {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    /// Atomic steps in temporal order: individual gates (with the global
    /// slot offset of their stage) and injections.
    fn atoms(&self) -> impl Iterator<Item = Atom<'_>> {
        self.stages.iter().zip(self.offsets.iter()).flat_map(|(stage, &offset)| {
            let out: Box<dyn Iterator<Item = Atom<'_>>> = match stage {
                PipelineStage::Linear(circ) => {
                    Box::new(circ.gates().iter().map(move |gate| Atom::Gate { gate, offset }))
                }
                PipelineStage::Injection(spec) => {
                    Box::new(std::iter::once(Atom::Inject(spec)))
                }
            };
            out
        })
    }
}

enum Atom<'a> {
    Gate { gate: &'a Gate, offset: usize },
    Inject(&'a InjectionSpec),
}

impl Atom<'_> {
    fn kind(&self) -> &'static str {
        match self {
            Atom::Gate { gate: Gate::BeamSplitter { .. }, .. } => "bs",
            Atom::Gate { gate: Gate::PhaseShifter { .. }, .. } => "ps",
            Atom::Inject(_) => "inject",
        }
    }
}

// Running state plus, optionally, one derivative slice per global slot.
struct Propagator {
    basis: FockBasis,
    rho: Array2<Complex64>,
    drho: Vec<Array2<Complex64>>,
}

impl Propagator {
    fn new(pc: &PipelineCircuit, input: &DensityMatrix, with_derivatives: bool) -> Self {
        let basis = input.basis().clone();
        let d = basis.dim();
        let slots = if with_derivatives { pc.parameter_count } else { 0 };
        Propagator {
            basis,
            rho: input.matrix().clone(),
            drho: vec![Array2::from_elem((d, d), Complex64::new(0.0, 0.0)); slots],
        }
    }

    fn apply(&mut self, pc: &PipelineCircuit, atom: &Atom<'_>, theta: &[f64]) -> Result<()> {
        match atom {
            Atom::Gate { gate, offset } => {
                let value = gate.value(&theta[*offset..]);
                let u = gate.matrix(pc.modes, value);
                let w = lift_unitary(&u, pc.photons)?;
                // Product-rule term from this gate, on the pre-gate state.
                let gate_term = match gate.slot() {
                    Some(_) if !self.drho.is_empty() => {
                        let dw = lift_derivative(&u, &gate.derivative(pc.modes, value), pc.photons)?;
                        let wdag = w.matrix().t().mapv(|z| z.conj());
                        let dwdag = dw.t().mapv(|z| z.conj());
                        Some(dw.dot(&self.rho).dot(&wdag) + w.matrix().dot(&self.rho).dot(&dwdag))
                    }
                    _ => None,
                };
                for slice in &mut self.drho {
                    *slice = w.conjugate(slice)?;
                }
                if let (Some(term), Some(a)) = (gate_term, gate.slot()) {
                    let global = offset + a;
                    self.drho[global] = &self.drho[global] + &term;
                }
                self.rho = w.conjugate(&self.rho)?;
            }
            Atom::Inject(spec) => {
                let plan = plan_injection(&self.basis, spec)?;
                self.rho = apply_plan(&plan, &self.rho);
                for slice in &mut self.drho {
                    *slice = apply_plan(&plan, slice);
                }
            }
        }
        Ok(())
    }

    fn rank(&self) -> usize {
        realified_rank(&self.drho)
    }
}

/// Stack derivative slices into a real matrix (2d² rows, one column per
/// slot) and count singular values above RANK_TOL of the largest.
fn realified_rank(drho: &[Array2<Complex64>]) -> usize {
    if drho.is_empty() {
        return 0;
    }
    let d = drho[0].nrows();
    let mut j = Array2::<f64>::zeros((2 * d * d, drho.len()));
    for (a, slice) in drho.iter().enumerate() {
        for i in 0..d {
            for k in 0..d {
                let idx = i * d + k;
                j[[idx, a]] = slice[[i, k]].re;
                j[[d * d + idx, a]] = slice[[i, k]].im;
            }
        }
    }
    let sv = linalg::singular_values(&j);
    let max = sv.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}

/// Run the pipeline forward.
pub fn pipeline_state(
    pc: &PipelineCircuit,
    input: &DensityMatrix,
    theta: &[f64],
) -> Result<DensityMatrix> {
    pc.check_theta(theta)?;
    pc.check_input(input)?;
    let mut prop = Propagator::new(pc, input, false);
    for atom in pc.atoms() {
        prop.apply(pc, &atom, theta)?;
    }
    Ok(DensityMatrix::new_unchecked(prop.basis, prop.rho))
}

/// Final state and exact ∂ρ/∂θ_a for every global slot.
pub fn state_jacobian(
    pc: &PipelineCircuit,
    input: &DensityMatrix,
    theta: &[f64],
) -> Result<(DensityMatrix, Vec<Array2<Complex64>>)> {
    pc.check_theta(theta)?;
    pc.check_input(input)?;
    let mut prop = Propagator::new(pc, input, true);
    for atom in pc.atoms() {
        prop.apply(pc, &atom, theta)?;
    }
    Ok((DensityMatrix::new_unchecked(prop.basis, prop.rho), prop.drho))
}

/// Rank of the realified Jacobian at one parameter point.
pub fn dof_at(pc: &PipelineCircuit, input: &DensityMatrix, theta: &[f64]) -> Result<usize> {
    let (_, drho) = state_jacobian(pc, input, theta)?;
    Ok(realified_rank(&drho))
}

fn draw_theta(count: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}

/// Jacobian rank at independently drawn parameter points.
pub fn dof_trials(
    pc: &PipelineCircuit,
    input: &DensityMatrix,
    seed: u64,
    trials: usize,
) -> Result<Vec<usize>> {
    if trials == 0 {
        return Err(Error::ZeroSamples);
    }
    par_collect(trials, |t| {
        let theta = draw_theta(pc.parameter_count(), seed, t as u64);
        dof_at(pc, input, &theta)
    })
    .into_iter()
    .collect()
}

/// The accessible dimension: the largest rank over the trial draws.
pub fn dof_max(
    pc: &PipelineCircuit,
    input: &DensityMatrix,
    seed: u64,
    trials: usize,
) -> Result<usize> {
    Ok(dof_trials(pc, input, seed, trials)?.into_iter().max().unwrap_or(0))
}

/// One row of a rank-growth curve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvePoint {
    pub step: usize,
    pub gates_applied: usize,
    pub kind: &'static str,
    pub rank: usize,
}

/// Jacobian rank after every atomic step, at one drawn parameter point.
pub fn dof_curve(
    pc: &PipelineCircuit,
    input: &DensityMatrix,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    let theta = draw_theta(pc.parameter_count(), seed, 0);
    pc.check_input(input)?;
    let mut prop = Propagator::new(pc, input, true);
    let mut points = vec![CurvePoint { step: 0, gates_applied: 0, kind: "start", rank: 0 }];
    let mut gates = 0usize;
    for (i, atom) in pc.atoms().enumerate() {
        prop.apply(pc, &atom, &theta)?;
        if matches!(atom, Atom::Gate { .. }) {
            gates += 1;
        }
        points.push(CurvePoint {
            step: i + 1,
            gates_applied: gates,
            kind: atom.kind(),
            rank: prop.rank(),
        });
    }
    Ok(points)
}

/// Purity decay under alternating Haar layers and one identity injection.
#[derive(Clone, Copy, Debug)]
pub struct PurityCascade {
    pub modes: usize,
    pub photons: u32,
    pub layers: usize,
    pub draws: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct PurityReport {
    pub purities: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
    /// (n+1)^(−L): no single-mode reading has more than n+1 outcomes.
    pub worst_case_bound: f64,
    /// Mean-purity lower bound for Haar layers, defined when m > 2n².
    pub haar_mean_bound: Option<f64>,
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Start in |n,0,…,0⟩, repeat L times: Haar layer, then read-and-replace
/// mode 0. Reports the final purity of each draw.
pub fn purity_cascade(cfg: &PurityCascade) -> Result<PurityReport> {
    if cfg.draws == 0 {
        return Err(Error::ZeroSamples);
    }
    if cfg.layers == 0 || cfg.photons == 0 {
        return Err(Error::OutOfRange("need at least one layer and one photon".into()));
    }
    let basis = FockBasis::new(cfg.modes, cfg.photons)?;
    let mut start = vec![0u32; cfg.modes];
    start[0] = cfg.photons;
    let input = DensityMatrix::from_basis_state(basis.clone(), &FockState::new(start))?;
    let spec = InjectionSpec::identity(vec![0])?;
    let plan = plan_injection(&basis, &spec)?;
    let purities: Vec<f64> = par_collect(cfg.draws, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let mut rho = input.matrix().clone();
        for _ in 0..cfg.layers {
            let w = lift_unitary(&haar_from_rng(cfg.modes, &mut rng), cfg.photons)
                .expect("sector already materialized");
            rho = w.conjugate(&rho).expect("dimensions fixed");
            rho = apply_plan(&plan, &rho);
        }
        rho.iter().map(|z| z.norm_sqr()).sum()
    });
    let (mean, std_error) = mean_and_se(&purities);
    let n = cfg.photons as f64;
    let m = cfg.modes as f64;
    let worst_case_bound = (n + 1.0).powi(-(cfg.layers as i32));
    let haar_mean_bound = if m > 2.0 * n * n {
        Some(((m - 2.0 * n * n) / (2.0f64.sqrt() * m)).powi(2 * cfg.layers as i32))
    } else {
        None
    };
    Ok(PurityReport { purities, mean, std_error, worst_case_bound, haar_mean_bound })
}

/// Output-collision probability of n single-photon inputs through Haar
/// interferometers, against the 2n²/m birthday ceiling.
#[derive(Clone, Debug)]
pub struct BirthdayReport {
    pub collision_probs: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
    pub bound: f64,
}

pub fn birthday_collision(
    modes: usize,
    photons: u32,
    draws: usize,
    seed: u64,
) -> Result<BirthdayReport> {
    if draws == 0 {
        return Err(Error::ZeroSamples);
    }
    if photons == 0 || photons as usize > modes {
        return Err(Error::OutOfRange(format!(
            "need 1..={modes} photons for distinct input modes, got {photons}"
        )));
    }
    let basis = FockBasis::new(modes, photons)?;
    let mut occ = vec![0u32; modes];
    for slot in occ.iter_mut().take(photons as usize) {
        *slot = 1;
    }
    let input = FockState::new(occ);
    let colliding: Vec<&FockState> =
        basis.states().iter().filter(|s| s.has_collision()).collect();
    let collision_probs: Vec<f64> = par_collect(draws, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let u = haar_from_rng(modes, &mut rng);
        colliding
            .iter()
            .map(|s| transition_probability(&u, &input, s).expect("sector shapes fixed"))
            .sum()
    });
    let (mean, std_error) = mean_and_se(&collision_probs);
    let bound = 2.0 * (photons as f64).powi(2) / modes as f64;
    Ok(BirthdayReport { collision_probs, mean, std_error, bound })
}
