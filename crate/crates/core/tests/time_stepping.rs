//! Runs on a coarse grid: scalar genericity, dissipation, the split systems and
//! configuration checks.

use cgmem::analysis::{lipschitz_estimate, Metric};
use cgmem::dynamics::{
    band_limited, initial_data, simulate, simulate_memoryless, simulate_split, HistoryMode, HistoryProfileKind,
    MemorylessForm, RunConfig, SolverKind,
};
use cgmem::memory::HistorySpec;
use cgmem::Error;

fn coarse<T: cgmem::Real>() -> RunConfig<T> {
    let mut c = RunConfig::<T>::default();
    c.grid.nx = 16;
    c.grid.ny = 9;
    c.integration.t_end = T::from(0.2).unwrap();
    c.integration.report_stride = 5;
    c
}

#[test]
fn single_and_double_precision_agree() {
    let mut c64 = coarse::<f64>();
    let mut c32 = coarse::<f32>();
    c64.make_linear();
    c32.make_linear();
    let e64 = simulate(&c64).unwrap().into_result().unwrap().energy_series();
    let e32 = simulate(&c32).unwrap().into_result().unwrap().energy_series();
    assert_eq!(e64.len(), e32.len());
    for (a, b) in e64.iter().zip(&e32) {
        assert!((a.1 - f64::from(b.1)).abs() <= 1e-4 * a.1, "{} vs {}", a.1, b.1);
    }
}

#[test]
fn linear_energy_decreases() {
    let mut c = coarse::<f64>();
    c.make_linear();
    c.integration.report_stride = 1;
    let e = simulate(&c).unwrap().into_result().unwrap().energy_series();
    for w in e.windows(2) {
        assert!(w[1].1 <= w[0].1 * (1.0 + 1e-12), "energy rose at t = {}", w[1].0);
    }
}

#[test]
fn fft_and_cg_solvers_give_the_same_run() {
    let c = coarse::<f64>();
    let mut cg = c.clone();
    cg.integration.solver = SolverKind::Cg;
    let a = simulate(&c).unwrap().into_result().unwrap();
    let b = simulate(&cg).unwrap().into_result().unwrap();
    let diff = a.final_state.iter().zip(b.final_state.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-9, "{diff}");
}

#[test]
fn direct_history_does_not_change_the_trajectory() {
    let mut c = coarse::<f64>();
    c.initial.history = HistoryProfileKind::Linear;
    let mut d = c.clone();
    d.integration.history = HistoryMode::Direct;
    let a = simulate(&c).unwrap().into_result().unwrap();
    let b = simulate(&d).unwrap().into_result().unwrap();
    assert_eq!(a.final_state, b.final_state);
    assert!(b.reports.iter().all(|r| r.tail_sup.is_some()));
}

#[test]
fn memoryless_forms_run() {
    let c = coarse::<f64>();
    for form in [MemorylessForm::WeakLimit, MemorylessForm::Literal] {
        let t = simulate_memoryless(&c, form).unwrap().into_result().unwrap();
        assert!(t.reports.iter().all(|r| r.m1 == 0.0 && r.energy.is_finite()));
    }
}

#[test]
fn split_reconstructs_the_difference() {
    let c = coarse::<f64>();
    let grid = c.problem().unwrap().grid;
    let u1 = band_limited(&grid, 11, 1.0);
    let u2 = band_limited(&grid, 12, 1.0);
    let h = HistorySpec::zero();
    let split = simulate_split(&c, (&u1, &h), (&u2, &h), 0.2).unwrap();
    assert!(split.max_reconstruction() <= 1e-10, "{}", split.max_reconstruction());
    assert!(split.initial().smoothing.strong == 0.0);
    assert!(split.at_t_star().linear.dual < split.initial().linear.dual);
}

#[test]
fn equal_data_have_no_lipschitz_exponent() {
    let c = coarse::<f64>();
    let (u, h) = initial_data(&c).unwrap();
    let split = simulate_split(&c, (&u, &h), (&u, &h), 0.05).unwrap();
    let rows: Vec<(f64, f64)> = split.rows.iter().map(|r| (r.t, r.difference.strong)).collect();
    assert!(matches!(lipschitz_estimate(&rows, Metric::Strong), Err(Error::ZeroInitialDifference)));
}

#[test]
fn invalid_configuration_lists_every_issue() {
    let mut c = coarse::<f64>();
    c.physics.omega = 1.5;
    c.integration.dt = -1.0;
    c.kernel_boundary.rates = vec![0.0];
    let keys: Vec<String> = c.issues().into_iter().map(|i| i.key).collect();
    for key in ["physics.omega", "integration.dt", "kernel.boundary.rates"] {
        assert!(keys.iter().any(|k| k == key), "missing {key} in {keys:?}");
    }
    assert!(c.problem().is_err());
}
