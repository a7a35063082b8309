use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::scenario::{Axis, Observable, Scenario, ScenarioId};
use crate::constants::CONSTANTS_VERSION;
use crate::dynamics::{build_diffusion, build_drift, stability_check, ModeIndex, StabilityMethod};
use crate::entanglement::{
    log_negativity, min_symplectic_eigenvalue, reduce_cm, PHYSICALITY_TOL, ZERO_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::physics::{derive_couplings, validate_config};
use crate::steady_state::{
    solve_lyapunov_unchecked, SolveDiagnostics, SolverBackend, MAX_RELATIVE_RESIDUAL,
};

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    pub backend: SolverBackend,
    /// Thread count; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: f64,
    /// One value per observable; `None` when the point is unstable or failed.
    pub entanglement: Option<Vec<f64>>,
    /// NaN when the spectrum could not be computed.
    pub spectral_abscissa: f64,
    pub stable: bool,
    pub diagnostics: Option<SolveDiagnostics>,
    /// Smallest symplectic eigenvalue of the full steady state.
    pub min_symplectic_eigenvalue: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub scenario: ScenarioId,
    pub config_hash: String,
    pub constants_version: &'static str,
    pub backend: SolverBackend,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub axis: Axis,
    pub observables: Vec<Observable>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn labels(&self) -> Vec<&str> {
        self.observables.iter().map(|o| o.label.as_str()).collect()
    }

    /// Values of one observable, skipping points with no result.
    pub fn series(&self, index: usize) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.entanglement.as_ref().map(|e| (r.axis, e[index])))
            .collect()
    }
}

/// SHA-256 of the scenario's JSON serialization.
pub fn config_hash(scenario: &Scenario) -> String {
    let json = serde_json::to_vec(scenario).expect("scenario serializes");
    let digest = Sha256::digest(&json);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn failed_row(axis: f64, abscissa: f64, stable: bool, err: &Error) -> SweepRow {
    SweepRow {
        axis,
        entanglement: None,
        spectral_abscissa: abscissa,
        stable,
        diagnostics: None,
        min_symplectic_eigenvalue: None,
        error: Some(err.to_string()),
    }
}

/// Evaluates one grid point. Errors become row annotations so that one bad
/// point never aborts a sweep.
pub fn evaluate_point(scenario: &Scenario, x: f64, backend: SolverBackend) -> SweepRow {
    let cfg = scenario.materialize(x);
    let violations = validate_config(&cfg);
    if !violations.is_empty() {
        return failed_row(x, f64::NAN, false, &Error::InvalidConfig(violations));
    }
    let derived = match derive_couplings(&cfg) {
        Ok(d) => d,
        Err(e) => return failed_row(x, f64::NAN, false, &e),
    };
    let a = build_drift(&cfg, &derived);
    let d = build_diffusion(&cfg, &derived);
    let report = match stability_check(&a, StabilityMethod::Eigenvalue) {
        Ok(r) => r,
        Err(e) => return failed_row(x, f64::NAN, false, &e),
    };
    let abscissa = report.spectral_abscissa.unwrap_or(f64::NAN);
    if !report.is_stable {
        return SweepRow {
            axis: x,
            entanglement: None,
            spectral_abscissa: abscissa,
            stable: false,
            diagnostics: None,
            min_symplectic_eigenvalue: None,
            error: None,
        };
    }
    let (v, diag) = match solve_lyapunov_unchecked(&a.entries, &d.to_matrix(), backend) {
        Ok(s) => s,
        Err(e) => return failed_row(x, abscissa, true, &e),
    };
    if !(diag.relative_residual <= MAX_RELATIVE_RESIDUAL) {
        let e = Error::InvalidInput(format!(
            "Lyapunov relative residual {:e} exceeds {:e}",
            diag.relative_residual, MAX_RELATIVE_RESIDUAL
        ));
        return failed_row(x, abscissa, true, &e);
    }
    let nu_min = match min_symplectic_eigenvalue(&v) {
        Ok(nu) if nu >= 0.5 - PHYSICALITY_TOL => nu,
        Ok(nu) => return failed_row(x, abscissa, true, &Error::Unphysical(nu)),
        Err(e) => return failed_row(x, abscissa, true, &e),
    };
    let mut values = Vec::with_capacity(scenario.observables.len());
    for o in &scenario.observables {
        let result = reduce_cm(&v, ModeIndex::Microwave(o.a), ModeIndex::Microwave(o.b))
            .and_then(|bi| log_negativity(&bi));
        match result {
            Ok(r) => values.push(if r.e_n < ZERO_THRESHOLD { 0.0 } else { r.e_n }),
            Err(e) => return failed_row(x, abscissa, true, &e),
        }
    }
    SweepRow {
        axis: x,
        entanglement: Some(values),
        spectral_abscissa: abscissa,
        stable: true,
        diagnostics: Some(diag),
        min_symplectic_eigenvalue: Some(nu_min),
        error: None,
    }
}

pub fn run_sweep(scenario: &Scenario, options: SweepOptions) -> Result<SweepResult> {
    scenario.validate()?;
    let xs = scenario.axis.values();
    let eval = || -> Vec<SweepRow> {
        xs.par_iter()
            .map(|&x| evaluate_point(scenario, x, options.backend))
            .collect()
    };
    let mut rows = match options.workers {
        Some(0) => return Err(Error::InvalidInput("workers must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(eval),
        None => eval(),
    };
    rows.sort_by(|a, b| a.axis.total_cmp(&b.axis));
    Ok(SweepResult {
        metadata: SweepMetadata {
            scenario: scenario.id,
            config_hash: config_hash(scenario),
            constants_version: CONSTANTS_VERSION,
            backend: options.backend,
        },
        axis: scenario.axis.clone(),
        observables: scenario.observables.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scenario::{scenario_fig2, scenario_fig5};

    #[test]
    fn small_sweep_is_ordered_and_complete() {
        let s = scenario_fig2(1).unwrap().with_points(5);
        let r = run_sweep(&s, SweepOptions::default()).unwrap();
        assert_eq!(r.rows.len(), 5);
        assert!(r.rows.windows(2).all(|w| w[0].axis < w[1].axis));
        for row in &r.rows {
            assert!(row.stable);
            let e = row.entanglement.as_ref().unwrap();
            assert_eq!(e.len(), 1);
            assert!(e[0] >= 0.0);
            assert!(row.diagnostics.unwrap().relative_residual <= MAX_RELATIVE_RESIDUAL);
        }
        assert_eq!(r.metadata.config_hash.len(), 64);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let s = scenario_fig5().with_points(4);
        let one = run_sweep(&s, SweepOptions { workers: Some(1), ..Default::default() }).unwrap();
        let many = run_sweep(&s, SweepOptions { workers: Some(3), ..Default::default() }).unwrap();
        assert_eq!(one.rows, many.rows);
        assert!(run_sweep(&s, SweepOptions { workers: Some(0), ..Default::default() }).is_err());
    }

    #[test]
    fn hash_tracks_configuration() {
        let a = scenario_fig2(1).unwrap();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.base_config.mech.temperature = 0.02;
        assert_ne!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn invalid_points_are_annotated_not_fatal() {
        let mut s = scenario_fig2(1).unwrap().with_points(3);
        s.base_config.mech.quality_factor = -1.0;
        let r = run_sweep(&s, SweepOptions::default()).unwrap();
        assert!(r.rows.iter().all(|row| row.error.is_some() && row.entanglement.is_none()));
    }
}
