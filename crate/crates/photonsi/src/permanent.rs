//! Matrix permanents: exact Gray-code evaluation, a naive oracle, and the
//! randomized ±1 estimator.
//!
//! The exact kernel uses the Glynn polarization identity
//!   per(A) = 2^{1-n} Σ_δ (Π_k δ_k) Π_j (Σ_i δ_i a_ij),
//! δ ∈ {±1}^n with δ_1 = +1, walked in Gray-code order so each step updates
//! the column sums in O(n). The estimator averages the same polarization
//! term over uniformly random δ (Gurvits): each sample is an unbiased
//! estimate of per(A) bounded by ‖A‖ⁿ, so the empirical mean carries an
//! additive error O(‖A‖ⁿ/√samples).

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::parallel::par_collect;
use crate::{Error, Result};

/// Hard cap for the exact kernel; 2^(n-1) terms get slow past this.
pub const EXACT_CAP: usize = 20;
/// Hard cap for the naive n! oracle.
pub const NAIVE_CAP: usize = 9;

/// Samples per independent RNG stream. Fixed so the estimate is identical
/// no matter how chunks are scheduled across workers.
const GURVITS_CHUNK: usize = 4096;

// Compensated (Kahan) accumulators; cancellation in the Glynn sum grows
// with n, and the design calls for compensated accumulation from n ≈ 14.
#[derive(Default)]
struct KahanC {
    sum: Complex64,
    carry: Complex64,
}

impl KahanC {
    fn add(&mut self, x: Complex64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> Complex64 {
        self.sum
    }
}

#[derive(Default)]
struct KahanF {
    sum: f64,
    carry: f64,
}

impl KahanF {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

fn require_square(a: &Array2<Complex64>) -> Result<usize> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::NotSquare { rows: r, cols: c });
    }
    Ok(r)
}

/// Exact permanent, Glynn Gray-code scheme, O(2^n · n).
pub fn permanent_exact(a: &Array2<Complex64>) -> Result<Complex64> {
    let n = require_square(a)?;
    if n > EXACT_CAP {
        return Err(Error::PermanentCap { side: n, cap: EXACT_CAP });
    }
    Ok(glynn(a))
}

/// Unchecked Glynn kernel; callers guarantee a square matrix within cap.
pub(crate) fn glynn(a: &Array2<Complex64>) -> Complex64 {
    let n = a.nrows();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    // Column sums at δ = (+1, ..., +1).
    let mut col: Vec<Complex64> = (0..n).map(|j| a.column(j).sum()).collect();
    let mut delta = vec![1.0f64; n];
    let mut sign = 1.0f64;
    let mut acc = KahanC::default();
    let prod = |col: &[Complex64]| col.iter().product::<Complex64>();
    acc.add(prod(&col));
    for g in 1u64..(1u64 << (n - 1)) {
        // Gray code: step g flips δ on row (trailing zeros of g) + 1.
        let r = g.trailing_zeros() as usize + 1;
        delta[r] = -delta[r];
        let step = 2.0 * delta[r];
        for (j, c) in col.iter_mut().enumerate() {
            *c += step * a[[r, j]];
        }
        sign = -sign;
        acc.add(sign * prod(&col));
    }
    acc.value() / 2.0f64.powi(n as i32 - 1)
}

/// Permanent by direct expansion over all n! permutations. Test oracle.
pub fn permanent_naive(a: &Array2<Complex64>) -> Result<Complex64> {
    let n = require_square(a)?;
    if n > NAIVE_CAP {
        return Err(Error::PermanentCap { side: n, cap: NAIVE_CAP });
    }
    fn expand(a: &Array2<Complex64>, row: usize, used: u32) -> Complex64 {
        let n = a.nrows();
        if row == n {
            return Complex64::new(1.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for col in 0..n {
            if used & (1 << col) == 0 {
                acc += a[[row, col]] * expand(a, row + 1, used | (1 << col));
            }
        }
        acc
    }
    Ok(expand(a, 0, 0))
}

/// Randomized permanent estimate.
#[derive(Debug, Clone)]
pub struct PermanentEstimate {
    pub value: Complex64,
    pub samples: usize,
    /// Standard error of the mean, from the sample variance.
    pub empirical_std_error: f64,
}

/// Gurvits ±1 estimator: mean of X(δ) = (Π_i δ_i) Π_j (Σ_i δ_i a_ij) over
/// uniform δ ∈ {±1}^n. Unbiased; |X| ≤ ‖A‖ⁿ pointwise.
///
/// Samples are split into fixed-size chunks, one ChaCha stream per chunk,
/// reduced in chunk order: the result is bit-identical for a given
/// (matrix, samples, seed) regardless of worker count.
pub fn gurvits_estimate(
    a: &Array2<Complex64>,
    samples: usize,
    seed: u64,
) -> Result<PermanentEstimate> {
    let n = require_square(a)?;
    if samples == 0 {
        return Err(Error::ZeroSamples);
    }
    let chunks = samples.div_ceil(GURVITS_CHUNK);
    let partials: Vec<(Complex64, f64)> = par_collect(chunks, |ci| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ci as u64);
        let count = GURVITS_CHUNK.min(samples - ci * GURVITS_CHUNK);
        let mut sum = KahanC::default();
        let mut sumsq = KahanF::default();
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for _ in 0..count {
            col.fill(Complex64::new(0.0, 0.0));
            let mut dprod = 1.0f64;
            for i in 0..n {
                let d = if rng.random::<bool>() { 1.0 } else { -1.0 };
                dprod *= d;
                for (j, c) in col.iter_mut().enumerate() {
                    *c += d * a[[i, j]];
                }
            }
            let x = dprod * col.iter().product::<Complex64>();
            sum.add(x);
            sumsq.add(x.norm_sqr());
        }
        (sum.value(), sumsq.value())
    });
    let mut total = Complex64::new(0.0, 0.0);
    let mut totalsq = 0.0;
    for (s, sq) in partials {
        total += s;
        totalsq += sq;
    }
    let mean = total / samples as f64;
    let std_error = if samples > 1 {
        let var = (totalsq - samples as f64 * mean.norm_sqr()).max(0.0) / (samples as f64 - 1.0);
        (var / samples as f64).sqrt()
    } else {
        0.0
    };
    Ok(PermanentEstimate {
        value: mean,
        samples,
        empirical_std_error: std_error,
    })
}
