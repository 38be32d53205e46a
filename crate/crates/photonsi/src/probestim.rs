//! Equivalent joint-interferometer model for read-and-replace pipelines.
//!
//! A pipeline of k+1 unitary layers with an identity read-and-replace on
//! the last mode between layers (followed by a cyclic relabel that parks
//! the replaced mode at index 0) is equivalent to one passive
//! interferometer on m+k wires: layer l sits at wire offset k−l, each
//! measured mode freezes into a dedicated output wire, and each
//! replacement enters on a dedicated input wire carrying the same count.
//! Joint probabilities then reduce to single permanents, output
//! probabilities to sums over readout patterns.
//!
//! The module also grades asymptotic parameter regimes by whether that
//! pattern sum stays polynomial.

use ndarray::Array2;
use num_complex::Complex64;

use crate::circuit::mode_permutation_matrix;
use crate::fock::{occupation_factorial, FockBasis, FockState};
use crate::lift::lift_unitary;
use crate::permanent::{glynn, gurvits_estimate, EXACT_CAP};
use crate::{Error, Result};

const UNITARITY_TOL: f64 = 1e-8;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn check_unitary(u: &Array2<Complex64>) -> Result<usize> {
    let (r, c) = u.dim();
    if r != c {
        return Err(Error::NotSquare { rows: r, cols: c });
    }
    if r == 0 {
        return Err(Error::NoModes);
    }
    let mut defect = 0.0f64;
    for i in 0..r {
        for j in 0..r {
            let dot: Complex64 = (0..r).map(|k| u[[k, i]].conj() * u[[k, j]]).sum();
            let expected = if i == j { Complex64::new(1.0, 0.0) } else { czero() };
            defect = defect.max((dot - expected).norm());
        }
    }
    if defect > UNITARITY_TOL {
        return Err(Error::NotUnitary { deviation: defect });
    }
    Ok(r)
}

fn embed(u: &Array2<Complex64>, offset: usize, total: usize) -> Array2<Complex64> {
    let m = u.nrows();
    let mut out = Array2::from_shape_fn((total, total), |(i, j)| {
        if i == j { Complex64::new(1.0, 0.0) } else { czero() }
    });
    for i in 0..m {
        for j in 0..m {
            out[[offset + i, offset + j]] = u[[i, j]];
        }
    }
    out
}

/// Where the pipeline's logical ports live on the joint interferometer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeMap {
    /// Input wire carrying the q-th replacement.
    pub ancilla_inputs: Vec<usize>,
    /// Input wires of the primary modes, in mode order.
    pub primary_inputs: Vec<usize>,
    /// Output wires of the primary modes, in mode order.
    pub primary_outputs: Vec<usize>,
    /// Output wire where the q-th readout freezes.
    pub measured_outputs: Vec<usize>,
}

/// The joint interferometer for a (k+1)-layer pipeline.
#[derive(Clone, Debug)]
pub struct EquivalentModel {
    primary_modes: usize,
    injections: usize,
    unitary: Array2<Complex64>,
    mode_map: ModeMap,
}

/// Build the joint model from the pipeline's unitary layers, first layer
/// first. k = layers.len() − 1 read-and-replace steps are implied between
/// consecutive layers.
pub fn build_equivalent(layers: &[Array2<Complex64>]) -> Result<EquivalentModel> {
    let k = layers
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::InvalidInjection("need at least one layer".into()))?;
    let m = check_unitary(&layers[0])?;
    for layer in &layers[1..] {
        let lm = check_unitary(layer)?;
        if lm != m {
            return Err(Error::ModeMismatch { expected: m, got: lm });
        }
    }
    let total = m + k;
    let mut unitary = embed(&layers[0], k, total);
    for (l, layer) in layers.iter().enumerate().skip(1) {
        unitary = embed(layer, k - l, total).dot(&unitary);
    }
    let mode_map = ModeMap {
        ancilla_inputs: (0..k).map(|q| k - 1 - q).collect(),
        primary_inputs: (0..m).map(|i| k + i).collect(),
        primary_outputs: (0..m).collect(),
        measured_outputs: (0..k).map(|q| k + m - 1 - q).collect(),
    };
    Ok(EquivalentModel { primary_modes: m, injections: k, unitary, mode_map })
}

impl EquivalentModel {
    pub fn primary_modes(&self) -> usize {
        self.primary_modes
    }

    pub fn injections(&self) -> usize {
        self.injections
    }

    pub fn total_modes(&self) -> usize {
        self.primary_modes + self.injections
    }

    pub fn unitary(&self) -> &Array2<Complex64> {
        &self.unitary
    }

    pub fn mode_map(&self) -> &ModeMap {
        &self.mode_map
    }

    // Expanded submatrix for one (input, output, pattern) event plus the
    // normalization s!·t!·(p!)².
    fn expanded(
        &self,
        input: &FockState,
        output: &FockState,
        pattern: &[u32],
    ) -> Result<(Array2<Complex64>, f64)> {
        let m = self.primary_modes;
        let k = self.injections;
        if input.modes() != m || output.modes() != m {
            return Err(Error::ModeMismatch {
                expected: m,
                got: input.modes().max(output.modes()),
            });
        }
        if input.photons() != output.photons() {
            return Err(Error::PhotonMismatch { left: input.photons(), right: output.photons() });
        }
        if pattern.len() != k {
            return Err(Error::InvalidInjection(format!(
                "pattern has {} entries for {k} readouts",
                pattern.len()
            )));
        }
        let injected: u32 = pattern.iter().sum();
        let photons = (input.photons() + injected) as usize;
        if photons > EXACT_CAP {
            return Err(Error::PermanentCap { side: photons, cap: EXACT_CAP });
        }
        let total = self.total_modes();
        let mut in_occ = vec![0u32; total];
        let mut out_occ = vec![0u32; total];
        for q in 0..k {
            in_occ[self.mode_map.ancilla_inputs[q]] = pattern[q];
            out_occ[self.mode_map.measured_outputs[q]] = pattern[q];
        }
        for i in 0..m {
            in_occ[self.mode_map.primary_inputs[i]] = input[i];
            out_occ[self.mode_map.primary_outputs[i]] = output[i];
        }
        let mut sub = Array2::from_elem((photons, photons), czero());
        let mut rows = Vec::with_capacity(photons);
        for (i, &occ) in out_occ.iter().enumerate() {
            for _ in 0..occ {
                rows.push(i);
            }
        }
        let mut cols = Vec::with_capacity(photons);
        for (j, &occ) in in_occ.iter().enumerate() {
            for _ in 0..occ {
                cols.push(j);
            }
        }
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                sub[[a, b]] = self.unitary[[i, j]];
            }
        }
        let pattern_fact = occupation_factorial(&FockState::new(pattern.to_vec()))? as f64;
        let norm = occupation_factorial(input)? as f64
            * occupation_factorial(output)? as f64
            * pattern_fact
            * pattern_fact;
        Ok((sub, norm))
    }

    /// Probability of seeing `output` on the primary modes AND the readout
    /// `pattern` on the k measurements, for the given primary input.
    pub fn joint_probability(
        &self,
        input: &FockState,
        output: &FockState,
        pattern: &[u32],
    ) -> Result<f64> {
        let (sub, norm) = self.expanded(input, output, pattern)?;
        Ok(glynn(&sub).norm_sqr() / norm)
    }

    /// Pr[output | input], marginalized over readout patterns.
    pub fn output_probability(
        &self,
        input: &FockState,
        output: &FockState,
        method: ProbMethod,
    ) -> Result<ProbEstimate> {
        let patterns = enumerate_patterns(self.injections, input.photons());
        match method {
            ProbMethod::Exact => {
                let mut value = 0.0;
                for p in &patterns {
                    value += self.joint_probability(input, output, p)?;
                }
                Ok(ProbEstimate {
                    value,
                    bias_corrected: None,
                    std_error: None,
                    patterns: patterns.len(),
                })
            }
            ProbMethod::Gurvits { samples, seed } => {
                let mut value = 0.0;
                let mut corrected = 0.0;
                let mut var = 0.0;
                for (pi, p) in patterns.iter().enumerate() {
                    let (sub, norm) = self.expanded(input, output, p)?;
                    let est = gurvits_estimate(&sub, samples, seed.wrapping_add(pi as u64))?;
                    let sq = est.value.norm_sqr();
                    let se = est.empirical_std_error;
                    value += sq / norm;
                    // E[|est|²] = |per|² + Var(est): subtract the variance.
                    corrected += (sq - se * se) / norm;
                    var += (2.0 * est.value.norm() * se / norm).powi(2);
                }
                Ok(ProbEstimate {
                    value,
                    bias_corrected: Some(corrected),
                    std_error: Some(var.sqrt()),
                    patterns: patterns.len(),
                })
            }
        }
    }
}

/// How to evaluate a pattern-summed probability.
#[derive(Clone, Copy, Debug)]
pub enum ProbMethod {
    Exact,
    Gurvits { samples: usize, seed: u64 },
}

/// A pattern-summed probability, with sampling diagnostics when estimated.
#[derive(Clone, Debug)]
pub struct ProbEstimate {
    pub value: f64,
    pub bias_corrected: Option<f64>,
    pub std_error: Option<f64>,
    pub patterns: usize,
}

/// All readout tuples in [0, max]^k, lexicographically ascending.
pub fn enumerate_patterns(injections: usize, max_per_readout: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0u32; injections];
    loop {
        out.push(current.clone());
        // Odometer increment from the last position.
        let mut pos = injections;
        while pos > 0 {
            if current[pos - 1] < max_per_readout {
                current[pos - 1] += 1;
                for slot in current.iter_mut().skip(pos) {
                    *slot = 0;
                }
                break;
            }
            pos -= 1;
        }
        if pos == 0 {
            return out;
        }
    }
}

/// Branch-by-branch reference simulation of the physical pipeline: apply a
/// layer, read the last mode, put the count back, relabel modes cyclically
/// so the replaced mode becomes mode 0, repeat. Returns every
/// (output, pattern, probability) with nonvanishing branch weight.
pub fn injection_pipeline_joint(
    layers: &[Array2<Complex64>],
    photons: u32,
    input: &FockState,
) -> Result<Vec<(FockState, Vec<u32>, f64)>> {
    if layers.is_empty() {
        return Err(Error::InvalidInjection("need at least one layer".into()));
    }
    let m = check_unitary(&layers[0])?;
    if input.modes() != m {
        return Err(Error::ModeMismatch { expected: m, got: input.modes() });
    }
    if input.photons() != photons {
        return Err(Error::PhotonMismatch { left: photons, right: input.photons() });
    }
    let basis = FockBasis::new(m, photons)?;
    let d = basis.dim();
    let lifted: Vec<_> = layers
        .iter()
        .map(|u| {
            check_unitary(u).and_then(|lm| {
                if lm != m {
                    return Err(Error::ModeMismatch { expected: m, got: lm });
                }
                lift_unitary(u, photons)
            })
        })
        .collect::<Result<_>>()?;
    let relabel: Vec<usize> = (0..m).map(|i| (i + 1) % m).collect();
    let shift = lift_unitary(&mode_permutation_matrix(&relabel)?, photons)?;
    // Basis indices grouped by the occupation of the last mode.
    let groups: Vec<Vec<usize>> = (0..=photons)
        .map(|o| (0..d).filter(|&i| basis.state(i)[m - 1] == o).collect())
        .collect();

    let start = {
        let idx = basis.index_of(input)?;
        let mut rho = Array2::from_elem((d, d), czero());
        rho[[idx, idx]] = Complex64::new(1.0, 0.0);
        lifted[0].conjugate(&rho)?
    };
    // Branch matrices stay unnormalized: their trace is the branch weight.
    let mut branches: Vec<(Vec<u32>, Array2<Complex64>)> = vec![(Vec::new(), start)];
    for w in lifted.iter().skip(1) {
        let mut next = Vec::new();
        for (pattern, rho) in &branches {
            for (o, group) in groups.iter().enumerate() {
                let weight: f64 = group.iter().map(|&i| rho[[i, i]].re).sum();
                if weight <= 1e-14 {
                    continue;
                }
                let mut block = Array2::from_elem((d, d), czero());
                for &i in group {
                    for &j in group {
                        block[[i, j]] = rho[[i, j]];
                    }
                }
                let moved = w.conjugate(&shift.conjugate(&block)?)?;
                let mut pat = pattern.clone();
                pat.push(o as u32);
                next.push((pat, moved));
            }
        }
        branches = next;
    }
    let mut out = Vec::new();
    for (pattern, rho) in &branches {
        for si in 0..d {
            out.push((basis.state(si).clone(), pattern.clone(), rho[[si, si]].re));
        }
    }
    Ok(out)
}

/// Growth class of the number of read-and-replace channels, in the mode
/// count m.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelGrowth {
    Constant,
    Logarithmic,
    Linear,
}

/// Growth class of the total photon budget moved through those channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhotonGrowth {
    Constant,
    Logarithmic,
    Linear,
    LinearLog,
    Quadratic,
}

/// Can the pattern-summed estimator stay polynomial in that regime?
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Simulable,
    Hard,
    Open,
}

impl ChannelGrowth {
    pub const ALL: [ChannelGrowth; 3] =
        [ChannelGrowth::Constant, ChannelGrowth::Logarithmic, ChannelGrowth::Linear];

    pub fn label(self) -> &'static str {
        match self {
            ChannelGrowth::Constant => "O(1)",
            ChannelGrowth::Logarithmic => "O(log m)",
            ChannelGrowth::Linear => "O(m)",
        }
    }
}

impl PhotonGrowth {
    pub const ALL: [PhotonGrowth; 5] = [
        PhotonGrowth::Constant,
        PhotonGrowth::Logarithmic,
        PhotonGrowth::Linear,
        PhotonGrowth::LinearLog,
        PhotonGrowth::Quadratic,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PhotonGrowth::Constant => "O(1)",
            PhotonGrowth::Logarithmic => "O(log m)",
            PhotonGrowth::Linear => "O(m)",
            PhotonGrowth::LinearLog => "O(m log m)",
            PhotonGrowth::Quadratic => "O(m^2)",
        }
    }
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Simulable => "simulable",
            Verdict::Hard => "hard",
            Verdict::Open => "open",
        }
    }
}

/// Classify one (channel growth, photon growth) regime.
pub fn classify_regime(channels: ChannelGrowth, photons: PhotonGrowth) -> Verdict {
    use ChannelGrowth as C;
    use PhotonGrowth as P;
    match (photons, channels) {
        (P::Constant, _) => Verdict::Simulable,
        (P::Logarithmic, C::Constant | C::Logarithmic) => Verdict::Simulable,
        (P::Logarithmic, C::Linear) => Verdict::Hard,
        (P::Linear, C::Constant) => Verdict::Simulable,
        (P::Linear, C::Logarithmic | C::Linear) => Verdict::Hard,
        (P::LinearLog, C::Constant) => Verdict::Open,
        (P::LinearLog, C::Logarithmic | C::Linear) => Verdict::Hard,
        (P::Quadratic, C::Constant | C::Logarithmic) => Verdict::Open,
        (P::Quadratic, C::Linear) => Verdict::Hard,
    }
}

/// All 15 regime cells, photon growth outer, channel growth inner.
pub fn regime_table() -> Vec<(ChannelGrowth, PhotonGrowth, Verdict)> {
    let mut out = Vec::with_capacity(15);
    for photons in PhotonGrowth::ALL {
        for channels in ChannelGrowth::ALL {
            out.push((channels, photons, classify_regime(channels, photons)));
        }
    }
    out
}
