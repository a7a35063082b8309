//! Drift and diffusion matrices of the linearized fluctuation dynamics
//! `du/dt = A u + n` and the stability analysis of `A`.
//!
//! The fluctuation vector is ordered
//! `u = [dq, dp, dX_c, dY_c, dX_w1, dY_w1, ..., dX_wn, dY_wn]`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::physics::{DerivedCouplings, SystemConfig};

/// One bosonic mode of the network. Microwave cavities are 0-based here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ModeIndex {
    Mechanical,
    Optical,
    Microwave(usize),
}

impl ModeIndex {
    /// Row of the position-like quadrature; the momentum-like one follows.
    pub fn offset(self) -> usize {
        match self {
            ModeIndex::Mechanical => 0,
            ModeIndex::Optical => 2,
            ModeIndex::Microwave(j) => 4 + 2 * j,
        }
    }

    /// Mode index of the `k`-th mode in `u` (mechanics first).
    pub fn from_mode_number(k: usize) -> Self {
        match k {
            0 => ModeIndex::Mechanical,
            1 => ModeIndex::Optical,
            k => ModeIndex::Microwave(k - 2),
        }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeIndex::Mechanical => write!(f, "m"),
            ModeIndex::Optical => write!(f, "c"),
            ModeIndex::Microwave(j) => write!(f, "w{}", j + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftMatrix {
    pub entries: DMatrix<f64>,
    /// Number of microwave cavities.
    pub n: usize,
}

impl DriftMatrix {
    /// Wraps an arbitrary square matrix, e.g. for testing the analysis routines.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidInput("drift matrix must be square".into()));
        }
        let n = entries.nrows().saturating_sub(4) / 2;
        Ok(Self { entries, n })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionMatrix {
    pub diagonal: DVector<f64>,
}

impl DiffusionMatrix {
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.diagonal)
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }
}

/// Sign used for the mechanical damping entry `A[dp, dp]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingSign {
    /// `-kappa_m`, as the fluctuation equations require.
    Dissipative,
    /// `+kappa_m`, anti-damping. Kept to show what the wrong sign does.
    AntiDamping,
}

pub fn build_drift(config: &SystemConfig, derived: &DerivedCouplings) -> DriftMatrix {
    build_drift_with(config, derived, DampingSign::Dissipative)
}

pub fn build_drift_with(
    config: &SystemConfig,
    derived: &DerivedCouplings,
    damping: DampingSign,
) -> DriftMatrix {
    let n = config.n_microwaves();
    let dim = config.dimension();
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let wm = config.mech.omega_m;
    let km = config.mech.kappa_m();

    a[(0, 1)] = wm;
    a[(1, 0)] = -wm;
    a[(1, 1)] = match damping {
        DampingSign::Dissipative => -km,
        DampingSign::AntiDamping => km,
    };

    let mut cavity = |row: usize, kappa: f64, delta: f64, g: f64| {
        a[(1, row)] = g;
        a[(row, row)] = -kappa;
        a[(row, row + 1)] = delta;
        a[(row + 1, row)] = -delta;
        a[(row + 1, row + 1)] = -kappa;
        a[(row + 1, 0)] = g;
    };
    cavity(2, config.optical.kappa_c, config.optical.delta_c, derived.g_c);
    for (j, w) in config.microwaves.iter().enumerate() {
        cavity(4 + 2 * j, w.kappa_w, w.delta_w, derived.g_w[j]);
    }
    DriftMatrix { entries: a, n }
}

/// `Diag[0, k_m(2 nbar_m + 1), k_c, k_c, k_w1(2N_1 + 1), k_w1(2N_1 + 1), ...]`.
/// The optical thermal occupation is taken as zero.
pub fn build_diffusion(config: &SystemConfig, derived: &DerivedCouplings) -> DiffusionMatrix {
    let mut d = DVector::<f64>::zeros(config.dimension());
    d[1] = config.mech.kappa_m() * (2.0 * derived.nbar_m + 1.0);
    d[2] = config.optical.kappa_c;
    d[3] = config.optical.kappa_c;
    for (j, w) in config.microwaves.iter().enumerate() {
        let v = w.kappa_w * (2.0 * derived.n_thermal_w[j] + 1.0);
        d[4 + 2 * j] = v;
        d[5 + 2 * j] = v;
    }
    DiffusionMatrix { diagonal: d }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StabilityMethod {
    Eigenvalue,
    LyapunovCertificate,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Largest real part of the spectrum; absent when only the certificate ran.
    pub spectral_abscissa: Option<f64>,
    pub is_stable: bool,
    pub method: StabilityMethod,
    pub eigenvalues: Vec<Complex64>,
}

/// Lyapunov's test: `A` is Hurwitz iff `A V + V A^T = -I` has a symmetric
/// positive definite solution.
fn lyapunov_certificate(a: &DMatrix<f64>) -> Result<bool> {
    let id = DMatrix::<f64>::identity(a.nrows(), a.ncols());
    match linalg::lyapunov_vectorized(a, &id) {
        Ok(v) => Ok(v.cholesky().is_some()),
        // A singular operator means eigenvalues summing to zero, so A is not Hurwitz.
        Err(Error::Singular(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

pub fn stability_check(a: &DriftMatrix, method: StabilityMethod) -> Result<StabilityReport> {
    if !a.entries.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("drift matrix".into()));
    }
    let spectral = |a: &DMatrix<f64>| -> Result<(Vec<Complex64>, f64)> {
        let eigs = linalg::eigenvalues(a)?;
        let abscissa = linalg::spectral_abscissa(&eigs);
        Ok((eigs, abscissa))
    };
    match method {
        StabilityMethod::Eigenvalue => {
            let (eigenvalues, abscissa) = spectral(&a.entries)?;
            Ok(StabilityReport {
                spectral_abscissa: Some(abscissa),
                is_stable: abscissa < 0.0,
                method,
                eigenvalues,
            })
        }
        StabilityMethod::LyapunovCertificate => Ok(StabilityReport {
            spectral_abscissa: None,
            is_stable: lyapunov_certificate(&a.entries)?,
            method,
            eigenvalues: Vec::new(),
        }),
        StabilityMethod::Both => {
            let (eigenvalues, abscissa) = spectral(&a.entries)?;
            let by_eigs = abscissa < 0.0;
            let by_cert = lyapunov_certificate(&a.entries)?;
            if by_eigs != by_cert {
                return Err(Error::StabilityDisagreement {
                    eigenvalue: by_eigs,
                    certificate: by_cert,
                });
            }
            Ok(StabilityReport {
                spectral_abscissa: Some(abscissa),
                is_stable: by_eigs,
                method,
                eigenvalues,
            })
        }
    }
}
