mod common;

use common::{max_rel_diff, system};
use cvpair::dynamics::{build_drift, stability_check, StabilityMethod};
use cvpair::entanglement::{log_negativity, reduce_cm, symplectic_eigenvalues, BipartiteCM};
use cvpair::dynamics::ModeIndex;
use cvpair::harness::output::{Cell, CsvRow, CsvTable};
use cvpair::harness::sweep::{config_hash, evaluate_point};
use cvpair::harness::{run_sweep, scenario_fig2, BaselineParameters, SweepOptions};
use cvpair::linalg::eigenvalues;
use cvpair::physics::{derive_couplings, thermal_occupation, SystemConfig};
use cvpair::steady_state::{solve_lyapunov, SolverBackend, MAX_RELATIVE_RESIDUAL};
use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use proptest::prelude::*;

/// Baseline network with `pairs` pairs at 9 GHz, uniform detuning `x omega_m`
/// and bath temperature `t`.
fn network(pairs: usize, x: f64, t: f64) -> SystemConfig {
    let mut cfg = BaselineParameters::default().identical_pairs(pairs, x);
    cfg.mech.temperature = t;
    cfg
}

fn spectrum(cfg: &SystemConfig) -> Vec<Complex64> {
    let (a, _) = system(cfg);
    eigenvalues(&a.entries).unwrap()
}

fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Physical two-mode state: thermal symplectic spectrum dressed by local
/// squeezing, a beam splitter and two-mode squeezing.
fn random_state(nu: (f64, f64), r: (f64, f64, f64), theta: f64) -> BipartiteCM {
    let mut v = Matrix4::zeros();
    v[(0, 0)] = nu.0;
    v[(1, 1)] = nu.0;
    v[(2, 2)] = nu.1;
    v[(3, 3)] = nu.1;
    let local = Matrix4::from_diagonal(&nalgebra::Vector4::new(r.0.exp(), (-r.0).exp(), r.1.exp(), (-r.1).exp()));
    let (s, c) = theta.sin_cos();
    let mut bs = Matrix4::identity() * c;
    bs[(0, 2)] = s;
    bs[(1, 3)] = s;
    bs[(2, 0)] = -s;
    bs[(3, 1)] = -s;
    let (ch, sh) = (r.2.cosh(), r.2.sinh());
    let mut tms = Matrix4::identity() * ch;
    tms[(0, 2)] = sh;
    tms[(2, 0)] = sh;
    tms[(1, 3)] = -sh;
    tms[(3, 1)] = -sh;
    let sym = tms * bs * local;
    let w = sym * v * sym.transpose();
    BipartiteCM::from_blocks(
        w.fixed_view::<2, 2>(0, 0).into(),
        w.fixed_view::<2, 2>(2, 2).into(),
        w.fixed_view::<2, 2>(0, 2).into(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn occupation_is_monotone(omega in 1e6..1e12f64, t in 1e-3..1.0f64, f in 1.001..3.0f64) {
        let n = thermal_occupation(omega, t).unwrap();
        prop_assert!(thermal_occupation(omega * f, t).unwrap() < n);
        prop_assert!(thermal_occupation(omega, t * f).unwrap() > n);
    }

    #[test]
    fn couplings_nearly_even_in_detuning(x in -1.0..1.0f64, dc in 0.1..1.0f64) {
        let mut cfg = network(1, x, 0.015);
        cfg.optical.delta_c = dc * cfg.mech.omega_m;
        let d = derive_couplings(&cfg).unwrap();
        // The two cavities of the pair carry +x and -x.
        let rel = (d.g_w[0] - d.g_w[1]).abs() / d.g_w[0];
        let bound = 2.0 * (x * cfg.mech.omega_m).abs() / cfg.microwaves[0].omega_w;
        prop_assert!(rel <= bound + 1e-12, "{rel:e} > {bound:e}");

        let mut flipped = cfg.clone();
        flipped.optical.delta_c = -cfg.optical.delta_c;
        let f = derive_couplings(&flipped).unwrap();
        prop_assert!((f.g_c - d.g_c).abs() <= 1e-6 * d.g_c);
    }

    #[test]
    fn microwave_coupling_scales_as_root_power(x in -1.0..1.0f64, p in 1e-4..0.1f64) {
        let mut cfg = network(1, x, 0.015);
        for w in &mut cfg.microwaves { w.drive_power = p; }
        let g1 = derive_couplings(&cfg).unwrap().g_w;
        for w in &mut cfg.microwaves { w.drive_power = 2.0 * p; }
        let g2 = derive_couplings(&cfg).unwrap().g_w;
        for (a, b) in g1.iter().zip(&g2) {
            prop_assert!((b / a - 2f64.sqrt()).abs() <= 1e-12);
        }
    }

    #[test]
    fn static_displacement_is_nonnegative(pairs in 1usize..4, x in -1.0..1.0f64, p in 0.0..0.1f64) {
        let mut cfg = network(pairs, x, 0.015);
        cfg.optical.drive_power = p;
        prop_assert!(derive_couplings(&cfg).unwrap().q_s >= 0.0);
    }

    #[test]
    fn drift_trace_identity(pairs in 1usize..4, x in -1.0..1.0f64) {
        let cfg = network(pairs, x, 0.015);
        let (a, _) = system(&cfg);
        let expect = -cfg.mech.kappa_m() - 2.0 * cfg.optical.kappa_c
            - 2.0 * cfg.microwaves.iter().map(|w| w.kappa_w).sum::<f64>();
        prop_assert!((a.entries.trace() - expect).abs() <= 1e-9 * expect.abs());
    }

    /// Flipping every microwave detuning of a paired network swaps the two
    /// members of each pair, so the spectrum is unchanged.
    #[test]
    fn microwave_detuning_flip_is_a_relabeling(pairs in 1usize..4, x in -1.0..1.0f64) {
        let cfg = network(pairs, x, 0.015);
        let mut flipped = cfg.clone();
        for w in &mut flipped.microwaves { w.delta_w = -w.delta_w; }
        let (e1, mut e2) = (spectrum(&cfg), spectrum(&flipped));
        let scale = e1.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for a in &e1 {
            let (k, dist) = e2.iter().enumerate()
                .map(|(k, b)| (k, (a - b).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            prop_assert!(dist <= 1e-9 * scale, "{a}: nearest at {dist:e}");
            e2.swap_remove(k);
        }
    }

    #[test]
    fn accepted_solves_are_accurate_and_physical(pairs in 1usize..3, x in -1.0..1.0f64, t in 1e-3..0.25f64) {
        let cfg = network(pairs, x, t);
        let (a, d) = system(&cfg);
        prop_assume!(stability_check(&a, StabilityMethod::Eigenvalue).unwrap().is_stable);
        let (vv, dv) = solve_lyapunov(&a, &d, SolverBackend::Vectorized).unwrap();
        let (vs, ds) = solve_lyapunov(&a, &d, SolverBackend::Schur).unwrap();
        prop_assert!(dv.relative_residual <= MAX_RELATIVE_RESIDUAL);
        prop_assert!(ds.relative_residual <= MAX_RELATIVE_RESIDUAL);
        prop_assert!(max_rel_diff(&vs.entries, &vv.entries) <= 1e-8);
        let asym = (&vv.entries - vv.entries.transpose()).norm();
        prop_assert!(asym <= 1e-12 * vv.entries.norm());
        let nu = symplectic_eigenvalues(&vv.entries).unwrap();
        prop_assert!(nu.iter().all(|&n| n >= 0.5 - 1e-9), "{nu:?}");
        for j in 1..cfg.n_microwaves() {
            let bi = reduce_cm(&vv, ModeIndex::Microwave(0), ModeIndex::Microwave(j)).unwrap();
            let (lo, _) = bi.symplectic_eigenvalues().unwrap();
            prop_assert!(lo >= 0.5 - 1e-9);
        }
    }

    #[test]
    fn mode_swap_is_exact(
        n1 in 0.5..5.0f64, n2 in 0.5..5.0f64,
        r1 in -1.0..1.0f64, r2 in -1.0..1.0f64, r3 in -1.5..1.5f64, th in 0.0..6.3f64,
    ) {
        let bi = random_state((n1, n2), (r1, r2, r3), th);
        let a = log_negativity(&bi).unwrap();
        let b = log_negativity(&bi.swapped()).unwrap();
        prop_assert_eq!(a.e_n.to_bits(), b.e_n.to_bits());
        prop_assert_eq!(a.eta_minus.to_bits(), b.eta_minus.to_bits());
    }

    #[test]
    fn local_rotations_leave_eta_unchanged(
        n1 in 0.5..5.0f64, n2 in 0.5..5.0f64,
        r1 in -1.0..1.0f64, r2 in -1.0..1.0f64, r3 in -1.5..1.5f64, th in 0.0..6.3f64,
        phi1 in 0.0..6.3f64, phi2 in 0.0..6.3f64,
    ) {
        let bi = random_state((n1, n2), (r1, r2, r3), th);
        let (u1, u2) = (rotation(phi1), rotation(phi2));
        let rotated = BipartiteCM::from_blocks(
            u1 * bi.v1 * u1.transpose(),
            u2 * bi.v2 * u2.transpose(),
            u1 * bi.v3 * u2.transpose(),
        );
        let a = log_negativity(&bi).unwrap().eta_minus;
        let b = log_negativity(&rotated).unwrap().eta_minus;
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn uncorrelated_states_are_separable(
        n1 in 0.5..5.0f64, n2 in 0.5..5.0f64, r1 in -1.5..1.5f64, r2 in -1.5..1.5f64,
        phi1 in 0.0..6.3f64, phi2 in 0.0..6.3f64,
    ) {
        let sq = |n: f64, r: f64, phi: f64| {
            let u = rotation(phi);
            u * Matrix2::new(n * r.exp(), 0.0, 0.0, n * (-r).exp()) * u.transpose()
        };
        let bi = BipartiteCM::from_blocks(sq(n1, r1, phi1), sq(n2, r2, phi2), Matrix2::zeros());
        prop_assert_eq!(log_negativity(&bi).unwrap().e_n, 0.0);
    }

    #[test]
    fn config_hash_tracks_every_change(field in 0usize..6, f in 1.001..2.0f64) {
        let s = scenario_fig2(1).unwrap();
        let mut t = s.clone();
        match field {
            0 => t.base_config.mech.temperature *= f,
            1 => t.base_config.mech.quality_factor *= f,
            2 => t.base_config.optical.drive_power *= f,
            3 => t.base_config.microwaves[1].gap *= f,
            4 => t.axis.max *= f,
            _ => t.axis.points += 1,
        }
        prop_assert_ne!(config_hash(&s), config_hash(&t));
    }

    #[test]
    fn csv_round_trips(rows in proptest::collection::vec(
        (any::<f64>(), proptest::option::of(any::<f64>()), any::<f64>(), any::<bool>()), 1..20)
    ) {
        let table = CsvTable {
            labels: vec!["w1+:w1-".into()],
            rows: rows.iter().map(|&(x, e, s, stable)| CsvRow {
                axis: x,
                values: vec![e.map_or(Cell::Unstable, Cell::Value)],
                spectral_abscissa: s,
                stable,
            }).collect(),
        };
        let back = CsvTable::parse(&table.to_csv_string()).unwrap();
        prop_assert_eq!(back.rows.len(), table.rows.len());
        for (a, b) in back.rows.iter().zip(&table.rows) {
            let same = |x: f64, y: f64| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan());
            prop_assert!(same(a.axis, b.axis) && same(a.spectral_abscissa, b.spectral_abscissa));
            prop_assert_eq!(a.stable, b.stable);
            match (a.values[0], b.values[0]) {
                (Cell::Value(x), Cell::Value(y)) => prop_assert!(same(x, y)),
                (x, y) => prop_assert_eq!(x, y),
            }
        }
    }
}

#[test]
fn entanglement_is_continuous_in_detuning() {
    let s = scenario_fig2(1).unwrap();
    for x0 in [-0.55, -0.1, 0.2, 0.7] {
        let e = |x: f64| evaluate_point(&s, x, SolverBackend::Vectorized).entanglement.unwrap()[0];
        let base = e(x0);
        let gaps: Vec<f64> = [1e-3, 1e-5, 1e-7].iter().map(|d| (e(x0 + d) - base).abs()).collect();
        assert!(gaps[2] <= gaps[0] && gaps[2] < 1e-6, "x0 = {x0}: {gaps:?}");
    }
}

#[test]
fn evaluation_order_does_not_matter() {
    let s = scenario_fig2(2).unwrap().with_points(7);
    let forward: Vec<_> = s.axis.values().iter().map(|&x| evaluate_point(&s, x, SolverBackend::Vectorized)).collect();
    let mut reversed: Vec<_> = s.axis.values().iter().rev().map(|&x| evaluate_point(&s, x, SolverBackend::Vectorized)).collect();
    reversed.reverse();
    assert_eq!(forward, reversed);
}

#[test]
fn unstable_points_report_no_entanglement() {
    let mut s = scenario_fig2(1).unwrap().with_points(5);
    // A blue-detuned optical drive amplifies the mechanics.
    s.base_config.optical.delta_c = -0.5 * s.base_config.mech.omega_m;
    let r = run_sweep(&s, SweepOptions::default()).unwrap();
    assert!(r.rows.iter().all(|row| !row.stable && row.entanglement.is_none() && row.error.is_none()));
    assert!(r.rows.iter().all(|row| row.spectral_abscissa > 0.0));
    let csv = CsvTable::from_result(&r).to_csv_string();
    assert_eq!(csv.matches("unstable").count(), 5);
    let cfg = &s.base_config;
    let derived = derive_couplings(cfg).unwrap();
    assert!(!stability_check(&build_drift(cfg, &derived), StabilityMethod::Both).unwrap().is_stable);
}
