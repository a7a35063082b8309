//! Test-only oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use cvpair::dynamics::{build_diffusion, build_drift, DiffusionMatrix, DriftMatrix};
use cvpair::linalg::expm;
use cvpair::physics::{derive_couplings, SystemConfig};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn system(cfg: &SystemConfig) -> (DriftMatrix, DiffusionMatrix) {
    let derived = derive_couplings(cfg).expect("valid config");
    (build_drift(cfg, &derived), build_diffusion(cfg, &derived))
}

/// Largest entrywise difference, relative to the largest entry of `b`.
pub fn max_rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = b.amax();
    (a - b).amax() / if scale > 0.0 { scale } else { 1.0 }
}

/// Composite Simpson on `[0, tau]` for `M(s) D M(s)^T`, `M(s) = exp(A s)`.
fn simpson_panel(a: &DMatrix<f64>, d: &DMatrix<f64>, tau: f64, intervals: usize) -> DMatrix<f64> {
    assert!(intervals.is_multiple_of(2));
    let h = tau / intervals as f64;
    let step = expm(a, h).expect("finite");
    let n = a.nrows();
    let mut m = DMatrix::<f64>::identity(n, n);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for k in 0..=intervals {
        let w = if k == 0 || k == intervals {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += &m * d * m.transpose() * w;
        m = &step * m;
    }
    acc * (h / 3.0)
}

/// `int_0^T exp(A s) D exp(A s)^T ds`.
///
/// Simpson on one panel of length `T / 2^doublings`, then the exact
/// identity `I(2t) = I(t) + M(t) I(t) M(t)^T` to reach `T`.
pub fn quadrature_integral(
    a: &DMatrix<f64>,
    d: &DMatrix<f64>,
    t_final: f64,
    doublings: u32,
    intervals: usize,
) -> DMatrix<f64> {
    let tau = t_final / 2f64.powi(doublings as i32);
    let mut integral = simpson_panel(a, d, tau, intervals);
    let mut m = expm(a, tau).expect("finite");
    for _ in 0..doublings {
        integral = &integral + &m * &integral * m.transpose();
        m = &m * &m;
    }
    integral
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut StdRng, n: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0) * scale)
}

/// Random Hurwitz matrix: a random matrix shifted so its spectral abscissa
/// is `-margin`.
pub fn random_stable(rng: &mut StdRng, n: usize, margin: f64) -> DMatrix<f64> {
    let g = random_matrix(rng, n, 1.0 / (n as f64).sqrt());
    let eigs = cvpair::linalg::eigenvalues(&g).unwrap();
    let alpha = cvpair::linalg::spectral_abscissa(&eigs);
    g - DMatrix::identity(n, n) * (alpha + margin)
}

/// Random positive semidefinite diffusion `B B^T`.
pub fn random_psd(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
    let b = random_matrix(rng, n, 1.0);
    &b * b.transpose()
}
