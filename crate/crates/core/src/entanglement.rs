//! Bipartite reduction of the global covariance matrix and logarithmic
//! negativity.
//!
//! Quadratures are `X = (a + a^dag)/sqrt(2)`, `Y = (a - a^dag)/(i sqrt(2))`,
//! so the vacuum has variance 1/2 and a two-mode state is separable under
//! partial transposition iff `eta_minus >= 1/2`.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use serde::Serialize;

use crate::dynamics::ModeIndex;
use crate::error::{Error, Result};
use crate::linalg::{self, det2, det4};
use crate::physics::SystemConfig;
use crate::steady_state::CovarianceMatrix;

/// Tolerance below 1/2 accepted for symplectic eigenvalues.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Tolerance on a negative radicand before it counts as an error.
pub const RADICAND_TOL: f64 = 1e-12;
/// Tabular outputs report log negativity below this as exactly zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Reduced two-mode covariance matrix `[[v1, v3], [v3^T, v2]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipartiteCM {
    pub v1: Matrix2<f64>,
    pub v2: Matrix2<f64>,
    pub v3: Matrix2<f64>,
    pub modes: Option<(ModeIndex, ModeIndex)>,
}

impl BipartiteCM {
    pub fn from_blocks(v1: Matrix2<f64>, v2: Matrix2<f64>, v3: Matrix2<f64>) -> Self {
        Self {
            v1,
            v2,
            v3,
            modes: None,
        }
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.v1);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.v2);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.v3);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.v3.transpose());
        m
    }

    /// Same state with the two modes listed in the opposite order.
    pub fn swapped(&self) -> Self {
        Self {
            v1: self.v2,
            v2: self.v1,
            v3: self.v3.transpose(),
            modes: self.modes.map(|(a, b)| (b, a)),
        }
    }

    /// One fixed representative of `{self, self.swapped()}`, so quantities that
    /// are symmetric under mode exchange are also bitwise symmetric.
    fn canonical(&self) -> Self {
        let key = |b: &Self| {
            let mut k = [0.0; 12];
            k[..4].copy_from_slice(b.v1.as_slice());
            k[4..8].copy_from_slice(b.v2.as_slice());
            k[8..].copy_from_slice(b.v3.as_slice());
            k
        };
        let other = self.swapped();
        let ord = key(self)
            .iter()
            .zip(key(&other).iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne());
        match ord {
            Some(std::cmp::Ordering::Greater) => other,
            _ => *self,
        }
    }

    /// Symplectic eigenvalues `(nu_-, nu_+)` of the two-mode state.
    ///
    /// Taken from the spectrum of `Omega V`; the closed form in `det V` loses
    /// half the digits when the spectrum is degenerate (pure states).
    pub fn symplectic_eigenvalues(&self) -> Result<(f64, f64)> {
        let m = self.to_matrix();
        let s = symplectic_eigenvalues(&DMatrix::from_column_slice(4, 4, m.as_slice()))?;
        Ok((s[0], s[1]))
    }
}

/// Treats values within `RADICAND_TOL` (relative to `scale`) below zero as zero.
fn clamp_radicand(x: f64, scale: f64) -> Result<f64> {
    if x >= 0.0 {
        Ok(x)
    } else if x >= -RADICAND_TOL * scale.abs().max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementResult {
    pub e_n: f64,
    pub eta_minus: f64,
    pub sigma: f64,
    pub modes: Option<(ModeIndex, ModeIndex)>,
}

pub fn reduce_cm(v: &CovarianceMatrix, a: ModeIndex, b: ModeIndex) -> Result<BipartiteCM> {
    if a == b {
        return Err(Error::InvalidInput(format!("cannot pair mode {a} with itself")));
    }
    let dim = v.dim();
    let (ra, rb) = (a.offset(), b.offset());
    if ra + 1 >= dim || rb + 1 >= dim {
        return Err(Error::InvalidInput(format!(
            "modes ({a}, {b}) out of range for a {dim}x{dim} covariance matrix"
        )));
    }
    let m = &v.entries;
    let block = |r: usize, c: usize| m.fixed_view::<2, 2>(r, c).clone_owned();
    Ok(BipartiteCM {
        v1: block(ra, ra),
        v2: block(rb, rb),
        v3: block(ra, rb),
        modes: Some((a, b)),
    })
}

/// `E_N = max(0, -ln(2 eta_minus))` with
/// `eta_minus = 2^{-1/2} [Sigma - sqrt(Sigma^2 - 4 det V)]^{1/2}`
/// and `Sigma = det V1 + det V2 - 2 det V3`.
pub fn log_negativity(input: &BipartiteCM) -> Result<EntanglementResult> {
    let bi = &input.canonical();
    let (nu_minus, _) = bi.symplectic_eigenvalues()?;
    if nu_minus < 0.5 - PHYSICALITY_TOL {
        return Err(Error::Unphysical(nu_minus));
    }
    let sigma = det2(&bi.v1) + det2(&bi.v2) - 2.0 * det2(&bi.v3);
    let det = det4(&bi.to_matrix());
    let disc = clamp_radicand(sigma * sigma - 4.0 * det, sigma * sigma)?;
    // eta_-^2 eta_+^2 = det V; dividing avoids cancellation in sigma - sqrt(disc).
    let eta_plus_sq = 0.5 * (sigma + disc.sqrt());
    let eta_minus = if eta_plus_sq > 0.0 {
        (clamp_radicand(det, sigma * sigma)? / eta_plus_sq).sqrt()
    } else {
        0.0
    };
    let e_n = if eta_minus > 0.0 {
        (-(2.0 * eta_minus).ln()).max(0.0)
    } else {
        f64::INFINITY
    };
    Ok(EntanglementResult {
        e_n,
        eta_minus,
        sigma,
        modes: input.modes,
    })
}

/// Symplectic eigenvalues (ascending) of an even-dimensional symmetric
/// matrix in the `(X1, Y1, X2, Y2, ...)` ordering: the moduli of the
/// eigenvalues of `Omega V`, each pair counted once.
pub fn symplectic_eigenvalues(v: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = v.nrows();
    if !dim.is_multiple_of(2) || !v.is_square() {
        return Err(Error::InvalidInput(format!(
            "symplectic spectrum needs an even square matrix, got {}x{}",
            v.nrows(),
            v.ncols()
        )));
    }
    // Omega = diag([[0, 1], [-1, 0]], ...): (Omega V) row 2k is V row 2k+1,
    // row 2k+1 is -V row 2k.
    let mut omega_v = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..dim / 2 {
        omega_v.row_mut(2 * k).copy_from(&v.row(2 * k + 1));
        omega_v.row_mut(2 * k + 1).copy_from(&(-v.row(2 * k)));
    }
    let mut mags: Vec<f64> = linalg::eigenvalues(&omega_v)?
        .iter()
        .map(|z| z.norm())
        .collect();
    mags.sort_by(f64::total_cmp);
    Ok(mags.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// Smallest symplectic eigenvalue of the full covariance matrix.
pub fn min_symplectic_eigenvalue(v: &CovarianceMatrix) -> Result<f64> {
    Ok(symplectic_eigenvalues(&v.entries)?
        .first()
        .copied()
        .unwrap_or(f64::INFINITY))
}

/// Log negativity between every pair of microwave cavities; zero diagonal.
pub fn pairwise_entanglement_map(v: &CovarianceMatrix, config: &SystemConfig) -> Result<DMatrix<f64>> {
    let n = config.n_microwaves();
    if v.dim() != config.dimension() {
        return Err(Error::InvalidInput(
            "covariance matrix does not match the configuration".into(),
        ));
    }
    let mut out = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let bi = reduce_cm(v, ModeIndex::Microwave(i), ModeIndex::Microwave(j))?;
            let e = log_negativity(&bi)?.e_n;
            out[(i, j)] = e;
            out[(j, i)] = e;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmsv(r: f64) -> BipartiteCM {
        let c = (2.0 * r).cosh() / 2.0;
        let s = (2.0 * r).sinh() / 2.0;
        BipartiteCM::from_blocks(
            Matrix2::identity() * c,
            Matrix2::identity() * c,
            Matrix2::new(s, 0.0, 0.0, -s),
        )
    }

    #[test]
    fn vacuum_is_separable() {
        let bi = BipartiteCM::from_blocks(
            Matrix2::identity() * 0.5,
            Matrix2::identity() * 0.5,
            Matrix2::zeros(),
        );
        let r = log_negativity(&bi).unwrap();
        assert_eq!(r.e_n, 0.0);
        assert!((r.eta_minus - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_mode_squeezed_vacuum() {
        // Partially transposed symplectic eigenvalue is exp(-2r)/2.
        let r = 0.5;
        let res = log_negativity(&tmsv(r)).unwrap();
        assert!((res.eta_minus - (-2.0 * r).exp() / 2.0).abs() < 1e-12);
        assert!((res.e_n - 1.0).abs() < 1e-10);
    }

    #[test]
    fn thermal_product_is_separable() {
        for nbar in [0.0, 0.3, 5.0, 120.0] {
            let b = Matrix2::identity() * (nbar + 0.5);
            let r = log_negativity(&BipartiteCM::from_blocks(b, b, Matrix2::zeros())).unwrap();
            assert_eq!(r.e_n, 0.0);
        }
    }

    #[test]
    fn rejects_unphysical_states() {
        let b = Matrix2::identity() * 0.3;
        let err = log_negativity(&BipartiteCM::from_blocks(b, b, Matrix2::zeros())).unwrap_err();
        assert!(matches!(err, Error::Unphysical(_)), "{err:?}");
    }

    #[test]
    fn reduce_extracts_blocks_in_order() {
        let dim = 8;
        let v = CovarianceMatrix::new(DMatrix::from_fn(dim, dim, |i, j| (i * 10 + j) as f64 + (j * 10 + i) as f64));
        let bi = reduce_cm(&v, ModeIndex::Microwave(1), ModeIndex::Optical).unwrap();
        assert_eq!(bi.v1[(0, 1)], v.entries[(6, 7)]);
        assert_eq!(bi.v2[(1, 1)], v.entries[(3, 3)]);
        assert_eq!(bi.v3[(1, 0)], v.entries[(7, 2)]);
        assert!(reduce_cm(&v, ModeIndex::Optical, ModeIndex::Optical).is_err());
        assert!(reduce_cm(&v, ModeIndex::Optical, ModeIndex::Microwave(2)).is_err());
    }

    #[test]
    fn vacuum_reduction() {
        let v = CovarianceMatrix::new(DMatrix::identity(8, 8) * 0.5);
        let bi = reduce_cm(&v, ModeIndex::Microwave(0), ModeIndex::Microwave(1)).unwrap();
        assert_eq!(bi.v1, Matrix2::identity() * 0.5);
        assert_eq!(bi.v2, Matrix2::identity() * 0.5);
        assert_eq!(bi.v3, Matrix2::zeros());
    }

    #[test]
    fn symplectic_spectrum_examples() {
        let s = symplectic_eigenvalues(&(DMatrix::identity(4, 4) * 0.5)).unwrap();
        assert!(s.iter().all(|x| (x - 0.5).abs() < 1e-14));
        let s = symplectic_eigenvalues(&(DMatrix::identity(6, 6) * 2.5)).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|x| (x - 2.5).abs() < 1e-13));
        let m = tmsv(0.7).to_matrix();
        let full = DMatrix::from_column_slice(4, 4, m.as_slice());
        let s = symplectic_eigenvalues(&full).unwrap();
        assert!(s.iter().all(|x| (x - 0.5).abs() < 1e-12), "{s:?}");
        let (lo, hi) = tmsv(0.7).symplectic_eigenvalues().unwrap();
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
        assert!(symplectic_eigenvalues(&DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn swap_is_exact() {
        let bi = BipartiteCM::from_blocks(
            Matrix2::new(1.2, 0.1, 0.1, 0.9),
            Matrix2::new(0.8, -0.2, -0.2, 1.4),
            Matrix2::new(0.3, 0.05, -0.1, -0.25),
        );
        let a = log_negativity(&bi).unwrap();
        let b = log_negativity(&bi.swapped()).unwrap();
        assert_eq!(a.e_n, b.e_n);
        assert_eq!(a.eta_minus, b.eta_minus);
    }
}
