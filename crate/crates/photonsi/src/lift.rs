//! Lifting an m-mode matrix to its n-photon Fock-sector action.
//!
//! The lifted entry between occupation vectors is the permanent of the
//! row/column substitution matrix divided by √(s!·t!). The map is a
//! homomorphism, so a product of gates can be lifted gate by gate.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::fock::{occupation_factorial, substitution_submatrix, FockBasis, FockState};
use crate::parallel::par_collect;
use crate::permanent::{glynn, EXACT_CAP};
use crate::{Error, Result};

/// Lifted matrices above this sector dimension would not fit in memory.
pub const MAX_LIFT_DIM: usize = 5_000;

/// An m-mode matrix carried to the n-photon sector, with its basis.
#[derive(Clone, Debug)]
pub struct LiftedUnitary {
    basis: FockBasis,
    matrix: Array2<Complex64>,
}

fn check_shape(u: &Array2<Complex64>) -> Result<usize> {
    let (r, c) = u.dim();
    if r != c {
        return Err(Error::NotSquare { rows: r, cols: c });
    }
    if r == 0 {
        return Err(Error::NoModes);
    }
    Ok(r)
}

fn sector_basis(u: &Array2<Complex64>, photons: u32) -> Result<(FockBasis, Vec<f64>)> {
    let m = check_shape(u)?;
    if photons as usize > EXACT_CAP {
        return Err(Error::PermanentCap { side: photons as usize, cap: EXACT_CAP });
    }
    let basis = FockBasis::new(m, photons)?;
    if basis.dim() > MAX_LIFT_DIM {
        return Err(Error::DimensionCap { dim: basis.dim(), cap: MAX_LIFT_DIM });
    }
    let sqrt_fact: Vec<f64> = basis
        .states()
        .iter()
        .map(|s| (occupation_factorial(s).expect("photon count within factorial range") as f64).sqrt())
        .collect();
    Ok((basis, sqrt_fact))
}

/// Lift a matrix to the n-photon sector.
pub fn lift_unitary(u: &Array2<Complex64>, photons: u32) -> Result<LiftedUnitary> {
    let (basis, sqrt_fact) = sector_basis(u, photons)?;
    let d = basis.dim();
    let rows = par_collect(d, |si| {
        let s = basis.state(si);
        let mut row = Vec::with_capacity(d);
        for ti in 0..d {
            let t = basis.state(ti);
            let sub = substitution_submatrix(u, s, t)
                .expect("basis states are valid by construction");
            row.push(glynn(&sub) / (sqrt_fact[si] * sqrt_fact[ti]));
        }
        row
    });
    let mut matrix = Array2::from_elem((d, d), Complex64::new(0.0, 0.0));
    for (si, row) in rows.into_iter().enumerate() {
        for (ti, v) in row.into_iter().enumerate() {
            matrix[[si, ti]] = v;
        }
    }
    Ok(LiftedUnitary { basis, matrix })
}

/// d(lift(U))/dθ given U and dU/dθ, exact via multilinearity: the permanent
/// derivative is the sum over row positions of the permanent with that row
/// replaced by the corresponding dU row.
pub fn lift_derivative(
    u: &Array2<Complex64>,
    du: &Array2<Complex64>,
    photons: u32,
) -> Result<Array2<Complex64>> {
    if u.dim() != du.dim() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), got: du.nrows() });
    }
    let (basis, sqrt_fact) = sector_basis(u, photons)?;
    let d = basis.dim();
    let n = photons as usize;
    let rows = par_collect(d, |si| {
        let s = basis.state(si);
        let mut row = Vec::with_capacity(d);
        for ti in 0..d {
            let t = basis.state(ti);
            let sub = substitution_submatrix(u, s, t)
                .expect("basis states are valid by construction");
            let dsub = substitution_submatrix(du, s, t)
                .expect("basis states are valid by construction");
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..n {
                let mut replaced = sub.clone();
                replaced.row_mut(r).assign(&dsub.row(r));
                acc += glynn(&replaced);
            }
            row.push(acc / (sqrt_fact[si] * sqrt_fact[ti]));
        }
        row
    });
    let mut matrix = Array2::from_elem((d, d), Complex64::new(0.0, 0.0));
    for (si, row) in rows.into_iter().enumerate() {
        for (ti, v) in row.into_iter().enumerate() {
            matrix[[si, ti]] = v;
        }
    }
    Ok(matrix)
}

impl LiftedUnitary {
    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Apply to a normalized sector state vector.
    pub fn apply_to_vector(&self, psi: &Array1<Complex64>) -> Result<Array1<Complex64>> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: psi.len() });
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::OutOfRange(format!(
                "state vector norm {norm} is not 1 within 1e-10"
            )));
        }
        Ok(self.matrix.dot(psi))
    }

    /// W·X·W† on a sector matrix (density matrices and their derivatives).
    pub fn conjugate(&self, x: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        if x.dim() != (self.dim(), self.dim()) {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.nrows() });
        }
        let wdag = self.matrix.t().mapv(|z| z.conj());
        Ok(self.matrix.dot(x).dot(&wdag))
    }
}

/// |⟨s|W|t⟩|² straight from one permanent, no sector enumeration.
pub fn transition_probability(
    u: &Array2<Complex64>,
    input: &FockState,
    output: &FockState,
) -> Result<f64> {
    check_shape(u)?;
    if input.photons() as usize > EXACT_CAP {
        return Err(Error::PermanentCap { side: input.photons() as usize, cap: EXACT_CAP });
    }
    let sub = substitution_submatrix(u, output, input)?;
    let sf = occupation_factorial(input)? as f64 * occupation_factorial(output)? as f64;
    Ok(glynn(&sub).norm_sqr() / sf)
}
