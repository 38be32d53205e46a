//! Occupation-number states and the fixed-photon-number basis.
//!
//! A state is an occupation vector s = (s_1, …, s_m) with Σ s_i = n. The
//! basis of the (m, n) sector enumerates all such vectors in
//! lexicographically descending order: (n, 0, …, 0) first, (0, …, 0, n)
//! last. That ordering is part of the contract: lifted operators and
//! density matrices index rows and columns by it, and it is stable across
//! versions. The sector dimension is the stars-and-bars count
//! C(m + n - 1, n).

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Photon occupations per mode.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FockState(pub Vec<u32>);

impl FockState {
    pub fn new(occupations: Vec<u32>) -> Self {
        FockState(occupations)
    }

    /// Number of modes.
    pub fn modes(&self) -> usize {
        self.0.len()
    }

    /// Total photon number.
    pub fn photons(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    /// True if any mode holds two or more photons.
    pub fn has_collision(&self) -> bool {
        self.0.iter().any(|&c| c >= 2)
    }
}

impl fmt::Debug for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{:?}⟩", self.0)
    }
}

impl std::ops::Index<usize> for FockState {
    type Output = u32;

    fn index(&self, mode: usize) -> &u32 {
        &self.0[mode]
    }
}

/// s! = Π_i s_i!, exact. Errors on u128 overflow (first at 35!).
pub fn occupation_factorial(s: &FockState) -> Result<u128> {
    let mut acc: u128 = 1;
    for &c in &s.0 {
        for k in 2..=c as u128 {
            acc = acc.checked_mul(k).ok_or(Error::Overflow("occupation factorial"))?;
        }
    }
    Ok(acc)
}

/// All weak compositions of `total` into `parts` parts, lexicographically
/// descending. Shared by the basis enumeration and pattern enumeration.
pub(crate) fn compositions(parts: usize, total: u32) -> Vec<Vec<u32>> {
    assert!(parts >= 1);
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for head in (0..=total).rev() {
        for tail in compositions(parts - 1, total - head) {
            let mut v = Vec::with_capacity(parts);
            v.push(head);
            v.extend(tail);
            out.push(v);
        }
    }
    out
}

fn binomial(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 1..=k {
        // Exact at every step: acc holds C(n-k+i-1, i-1) * remaining factor.
        acc = acc.checked_mul((n - k + i) as u128)?;
        acc /= i as u128;
    }
    Some(acc)
}

struct BasisInner {
    modes: usize,
    photons: u32,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

/// The ordered basis of the (modes, photons) sector. Cheap to clone.
#[derive(Clone)]
pub struct FockBasis {
    inner: Arc<BasisInner>,
}

/// Guard against runaway enumeration; dense operators cap much lower.
const MAX_BASIS_DIM: usize = 200_000;

impl FockBasis {
    pub fn new(modes: usize, photons: u32) -> Result<Self> {
        if modes == 0 {
            return Err(Error::NoModes);
        }
        let dim = match binomial((modes as u64) + (photons as u64) - 1, photons as u64) {
            Some(d) if d <= MAX_BASIS_DIM as u128 => d as usize,
            Some(d) => {
                let dim = d.min(usize::MAX as u128) as usize;
                return Err(Error::DimensionCap { dim, cap: MAX_BASIS_DIM });
            }
            None => return Err(Error::Overflow("basis dimension")),
        };
        let states: Vec<FockState> = compositions(modes, photons)
            .into_iter()
            .map(FockState)
            .collect();
        debug_assert_eq!(states.len(), dim);
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(FockBasis {
            inner: Arc::new(BasisInner { modes, photons, states, index }),
        })
    }

    pub fn modes(&self) -> usize {
        self.inner.modes
    }

    pub fn photons(&self) -> u32 {
        self.inner.photons
    }

    pub fn dim(&self) -> usize {
        self.inner.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.inner.states
    }

    pub fn state(&self, i: usize) -> &FockState {
        &self.inner.states[i]
    }

    /// Position of `s` in the basis ordering.
    pub fn index_of(&self, s: &FockState) -> Result<usize> {
        if s.modes() != self.modes() {
            return Err(Error::ModeMismatch { expected: self.modes(), got: s.modes() });
        }
        if s.photons() != self.photons() {
            return Err(Error::PhotonMismatch { left: self.photons(), right: s.photons() });
        }
        self.inner.index.get(s).copied().ok_or(Error::NotInBasis)
    }
}

impl PartialEq for FockBasis {
    // Ordering is canonical, so the sector labels identify the basis.
    fn eq(&self, other: &Self) -> bool {
        self.modes() == other.modes() && self.photons() == other.photons()
    }
}

impl fmt::Debug for FockBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FockBasis(modes={}, photons={}, dim={})", self.modes(), self.photons(), self.dim())
    }
}

/// The |s|×|t| matrix taking row i of `u` s_i times and column j t_j times,
/// in mode order. per(submatrix)/√(s!·t!) is the lifted amplitude ⟨s|W|t⟩.
pub fn substitution_submatrix(
    u: &Array2<Complex64>,
    s: &FockState,
    t: &FockState,
) -> Result<Array2<Complex64>> {
    let m = u.nrows();
    if u.ncols() != m {
        return Err(Error::NotSquare { rows: u.nrows(), cols: u.ncols() });
    }
    if s.modes() != m {
        return Err(Error::ModeMismatch { expected: m, got: s.modes() });
    }
    if t.modes() != m {
        return Err(Error::ModeMismatch { expected: m, got: t.modes() });
    }
    if s.photons() != t.photons() {
        return Err(Error::PhotonMismatch { left: s.photons(), right: t.photons() });
    }
    let expand = |occ: &FockState| -> Vec<usize> {
        occ.0
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat(i).take(c as usize))
            .collect()
    };
    let rows = expand(s);
    let cols = expand(t);
    Ok(Array2::from_shape_fn((rows.len(), cols.len()), |(a, b)| {
        u[[rows[a], cols[b]]]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    // Independent dimension oracle: C(m+n-1, n) off a Pascal triangle.
    fn pascal_dim(m: usize, n: u32) -> usize {
        let mut row = vec![1u64];
        for _ in 0..(m + n as usize - 1) {
            let mut next = vec![1u64];
            for w in row.windows(2) {
                next.push(w[0] + w[1]);
            }
            next.push(1);
            row = next;
        }
        row[n as usize] as usize
    }

    #[test]
    fn dimension_matches_pascal_oracle() {
        for m in 1..=6 {
            for n in 0..=5u32 {
                let basis = FockBasis::new(m, n).unwrap();
                assert_eq!(basis.dim(), pascal_dim(m, n), "m={m} n={n}");
            }
        }
    }

    #[test]
    fn six_modes_three_photons_has_56_states() {
        let basis = FockBasis::new(6, 3).unwrap();
        assert_eq!(basis.dim(), 56);
    }

    #[test]
    fn ordering_is_descending_lex_and_complete() {
        let basis = FockBasis::new(3, 3).unwrap();
        assert_eq!(basis.state(0).occupations(), &[3, 0, 0]);
        assert_eq!(basis.state(basis.dim() - 1).occupations(), &[0, 0, 3]);
        for w in basis.states().windows(2) {
            assert!(w[0].0 > w[1].0, "not strictly descending: {:?} {:?}", w[0], w[1]);
        }
        let expected: Vec<Vec<u32>> = vec![
            vec![2, 0, 0],
            vec![1, 1, 0],
            vec![1, 0, 1],
            vec![0, 2, 0],
            vec![0, 1, 1],
            vec![0, 0, 2],
        ];
        let basis = FockBasis::new(3, 2).unwrap();
        let got: Vec<Vec<u32>> = basis.states().iter().map(|s| s.0.clone()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn index_roundtrip() {
        let basis = FockBasis::new(4, 3).unwrap();
        for (i, s) in basis.states().iter().enumerate() {
            assert_eq!(basis.index_of(s).unwrap(), i);
        }
    }

    #[test]
    fn index_rejects_wrong_sector() {
        let basis = FockBasis::new(3, 2).unwrap();
        assert!(matches!(
            basis.index_of(&FockState::new(vec![1, 1])),
            Err(Error::ModeMismatch { .. })
        ));
        assert!(matches!(
            basis.index_of(&FockState::new(vec![1, 1, 1])),
            Err(Error::PhotonMismatch { .. })
        ));
    }

    #[test]
    fn vacuum_sector_is_one_dimensional() {
        let basis = FockBasis::new(5, 0).unwrap();
        assert_eq!(basis.dim(), 1);
        assert_eq!(basis.state(0).occupations(), &[0; 5]);
    }

    #[test]
    fn zero_modes_rejected() {
        assert!(matches!(FockBasis::new(0, 2), Err(Error::NoModes)));
    }

    #[test]
    fn oversized_basis_rejected() {
        // C(59, 30) is astronomically past the cap.
        assert!(matches!(
            FockBasis::new(30, 30),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn factorials() {
        assert_eq!(occupation_factorial(&FockState::new(vec![0, 0])).unwrap(), 1);
        assert_eq!(occupation_factorial(&FockState::new(vec![2, 1, 0])).unwrap(), 2);
        assert_eq!(occupation_factorial(&FockState::new(vec![3, 2])).unwrap(), 12);
        assert_eq!(
            occupation_factorial(&FockState::new(vec![34])).unwrap(),
            (2..=34u128).product::<u128>()
        );
        assert!(matches!(
            occupation_factorial(&FockState::new(vec![35])),
            Err(Error::Overflow(_))
        ));
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn submatrix_single_photon_pairs_pick_entries() {
        let u = Array2::from_shape_vec(
            (2, 2),
            vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)],
        )
        .unwrap();
        let s = FockState::new(vec![1, 1]);
        let sub = substitution_submatrix(&u, &s, &s).unwrap();
        assert_eq!(sub, u);
    }

    #[test]
    fn submatrix_repeats_rows_and_columns() {
        let u = Array2::from_shape_vec(
            (2, 2),
            vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)],
        )
        .unwrap();
        let s = FockState::new(vec![0, 2]);
        let t = FockState::new(vec![2, 0]);
        let sub = substitution_submatrix(&u, &s, &t).unwrap();
        // rows: twice row 1; cols: twice col 0.
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(sub[[a, b]], c(3.0, 0.0));
            }
        }
    }

    #[test]
    fn submatrix_adjoint_symmetry() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let m = 4;
        let u = Array2::from_shape_fn((m, m), |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let udag = u.t().mapv(|z| z.conj());
        let s = FockState::new(vec![2, 0, 1, 0]);
        let t = FockState::new(vec![0, 1, 1, 1]);
        let a = substitution_submatrix(&u, &s, &t).unwrap();
        let b = substitution_submatrix(&udag, &t, &s).unwrap();
        let adag = a.t().mapv(|z| z.conj());
        for (x, y) in adag.iter().zip(b.iter()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn submatrix_rejects_photon_mismatch() {
        let u = Array2::from_elem((2, 2), c(1.0, 0.0));
        let s = FockState::new(vec![1, 0]);
        let t = FockState::new(vec![1, 1]);
        assert!(matches!(
            substitution_submatrix(&u, &s, &t),
            Err(Error::PhotonMismatch { .. })
        ));
    }

    #[test]
    fn submatrix_vacuum_is_empty() {
        let u = Array2::from_elem((3, 3), c(1.0, 0.0));
        let s = FockState::new(vec![0, 0, 0]);
        let sub = substitution_submatrix(&u, &s, &s).unwrap();
        assert_eq!(sub.dim(), (0, 0));
    }

    #[test]
    fn fock_state_json_is_plain_array() {
        let s = FockState::new(vec![1, 0, 2]);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,0,2]");
        let back: FockState = serde_json::from_str("[1,0,2]").unwrap();
        assert_eq!(back, s);
    }
}
