//! Stationary covariance matrix from `A V + V A^T = -D`, plus the
//! time-domain covariance flow `dV/dt = A V + V A^T + D` used to check it.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dynamics::{stability_check, DiffusionMatrix, DriftMatrix, StabilityMethod};
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum SolverBackend {
    /// One dense linear solve over the packed entries of `V`.
    #[default]
    Vectorized,
    /// Bartels-Stewart on the real Schur form.
    Schur,
}

impl std::str::FromStr for SolverBackend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vectorized" => Ok(Self::Vectorized),
            "schur" => Ok(Self::Schur),
            other => Err(Error::InvalidInput(format!("unknown solver backend `{other}`"))),
        }
    }
}

/// Symmetric second-moment matrix `V_ij = <u_i u_j + u_j u_i> / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Symmetrizes its input.
    pub fn new(entries: DMatrix<f64>) -> Self {
        let sym = (&entries + entries.transpose()) * 0.5;
        Self { entries: sym }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub residual_norm: f64,
    pub relative_residual: f64,
    pub backend: SolverBackend,
}

/// Accepted solutions must satisfy this relative residual.
pub const MAX_RELATIVE_RESIDUAL: f64 = 1e-9;

pub fn lyapunov_residual(a: &DMatrix<f64>, v: &DMatrix<f64>, d: &DMatrix<f64>) -> (f64, f64) {
    let r = a * v + v * a.transpose() + d;
    let abs = r.norm();
    let scale = 2.0 * a.norm() * v.norm() + d.norm();
    let rel = if scale > 0.0 { abs / scale } else { abs };
    (abs, rel)
}

pub fn solve_lyapunov(
    a: &DriftMatrix,
    d: &DiffusionMatrix,
    backend: SolverBackend,
) -> Result<(CovarianceMatrix, SolveDiagnostics)> {
    if a.dim() != d.dim() {
        return Err(Error::InvalidInput(format!(
            "drift is {0}x{0} but diffusion has {1} entries",
            a.dim(),
            d.dim()
        )));
    }
    let report = stability_check(a, StabilityMethod::Eigenvalue)?;
    if !report.is_stable {
        return Err(Error::Unstable {
            spectral_abscissa: report.spectral_abscissa.unwrap_or(f64::NAN),
        });
    }
    solve_lyapunov_unchecked(&a.entries, &d.to_matrix(), backend)
}

/// Same as [`solve_lyapunov`] without the stability precondition, for callers
/// that already ran [`stability_check`].
pub fn solve_lyapunov_unchecked(
    a: &DMatrix<f64>,
    d: &DMatrix<f64>,
    backend: SolverBackend,
) -> Result<(CovarianceMatrix, SolveDiagnostics)> {
    let raw = match backend {
        SolverBackend::Vectorized => linalg::lyapunov_vectorized(a, d)?,
        SolverBackend::Schur => linalg::lyapunov_schur(a, d)?,
    };
    if !raw.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("Lyapunov solution".into()));
    }
    let v = CovarianceMatrix::new(raw);
    let (residual_norm, relative_residual) = lyapunov_residual(a, &v.entries, d);
    Ok((
        v,
        SolveDiagnostics {
            residual_norm,
            relative_residual,
            backend,
        },
    ))
}

/// Step size rule `min(1 / (50 max|lambda|), t_final / 1000)`.
pub fn default_ode_step(a: &DriftMatrix, t_final: f64) -> Result<f64> {
    let eigs = linalg::eigenvalues(&a.entries)?;
    let rate = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let by_rate = if rate > 0.0 { 1.0 / (50.0 * rate) } else { f64::INFINITY };
    let by_span = t_final / 1000.0;
    let dt = by_rate.min(by_span);
    if dt > 0.0 && dt.is_finite() {
        Ok(dt)
    } else {
        Ok(by_rate.min(1.0))
    }
}

fn cm_rhs(a: &DMatrix<f64>, d: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let av = a * v;
    &av + av.transpose() + d
}

fn rk4_step(a: &DMatrix<f64>, d: &DMatrix<f64>, v: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let k1 = cm_rhs(a, d, v);
    let k2 = cm_rhs(a, d, &(v + &k1 * (h / 2.0)));
    let k3 = cm_rhs(a, d, &(v + &k2 * (h / 2.0)));
    let k4 = cm_rhs(a, d, &(v + &k3 * h));
    let next = v + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    (&next + next.transpose()) * 0.5
}

/// Step counts above this switch to composing the (affine) RK4 step map by
/// repeated squaring, when the packed state is small enough.
const COMPOSE_MIN_STEPS: u64 = 4096;
const COMPOSE_MAX_STATE: usize = 400;

/// Classical fourth-order Runge-Kutta on `dV/dt = A V + V A^T + D` from
/// `V(0) = v0`, with the step shrunk so that a whole number of steps lands
/// exactly on `t_final`.
///
/// One RK4 step is an affine map of `V`. For long horizons on small systems
/// the map is assembled once and raised to the required power by squaring,
/// which yields the same iterate as stepping, up to rounding.
pub fn integrate_cm_ode(
    a: &DriftMatrix,
    d: &DiffusionMatrix,
    v0: &CovarianceMatrix,
    t_final: f64,
    dt: f64,
) -> Result<CovarianceMatrix> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "t_final must be >= 0, got {t_final}"
        )));
    }
    let dim = a.dim();
    if d.dim() != dim || v0.dim() != dim {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    if t_final == 0.0 {
        return Ok(v0.clone());
    }
    let steps_f = (t_final / dt).ceil();
    if steps_f > u64::MAX as f64 / 2.0 {
        return Err(Error::InvalidInput("too many integration steps".into()));
    }
    let steps = (steps_f as u64).max(1);
    let h = t_final / steps as f64;
    let am = &a.entries;
    let dm = d.to_matrix();

    if steps >= COMPOSE_MIN_STEPS && linalg::packed_len(dim) <= COMPOSE_MAX_STATE {
        return integrate_by_composition(am, &dm, v0, steps, h);
    }

    let mut v = v0.entries.clone();
    for k in 0..steps {
        v = rk4_step(am, &dm, &v, h);
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::IntegrationBlowup {
                time: (k + 1) as f64 * h,
            });
        }
    }
    Ok(CovarianceMatrix { entries: v })
}

fn integrate_by_composition(
    a: &DMatrix<f64>,
    d: &DMatrix<f64>,
    v0: &CovarianceMatrix,
    steps: u64,
    h: f64,
) -> Result<CovarianceMatrix> {
    let dim = a.nrows();
    let m = linalg::packed_len(dim);
    // Homogeneous form: [vech(V); 1] -> [L vech(V) + c; 1].
    let mut step_map = DMatrix::<f64>::zeros(m + 1, m + 1);
    let zero_d = DMatrix::<f64>::zeros(dim, dim);
    for col in 0..m {
        let mut e = DVector::<f64>::zeros(m);
        e[col] = 1.0;
        let basis = linalg::unpack_symmetric(&e, dim);
        let image = linalg::pack_symmetric(&rk4_step(a, &zero_d, &basis, h));
        step_map.view_mut((0, col), (m, 1)).copy_from(&image);
    }
    let offset = linalg::pack_symmetric(&rk4_step(a, d, &DMatrix::zeros(dim, dim), h));
    step_map.view_mut((0, m), (m, 1)).copy_from(&offset);
    step_map[(m, m)] = 1.0;

    let mut state = DVector::<f64>::zeros(m + 1);
    state
        .view_mut((0, 0), (m, 1))
        .copy_from(&linalg::pack_symmetric(&v0.entries));
    state[m] = 1.0;

    let mut remaining = steps;
    let mut done: u64 = 0;
    let mut power = step_map;
    let mut power_steps: u64 = 1;
    while remaining > 0 {
        if remaining & 1 == 1 {
            state = &power * state;
            done += power_steps;
            if !state.iter().all(|x| x.is_finite()) {
                return Err(Error::IntegrationBlowup {
                    time: done as f64 * h,
                });
            }
        }
        remaining >>= 1;
        if remaining > 0 {
            power = &power * &power;
            power_steps *= 2;
            if !power.iter().all(|x| x.is_finite()) {
                return Err(Error::IntegrationBlowup {
                    time: (done + power_steps) as f64 * h,
                });
            }
        }
    }
    let packed = state.rows(0, m).clone_owned();
    Ok(CovarianceMatrix {
        entries: linalg::unpack_symmetric(&packed, dim),
    })
}

/// `M(t) = exp(A t)`.
pub fn matrix_exponential_propagator(a: &DriftMatrix, t: f64) -> Result<DMatrix<f64>> {
    if t < 0.0 {
        return Err(Error::InvalidInput(format!("t must be >= 0, got {t}")));
    }
    linalg::expm(&a.entries, t)
}
