//! Absorbing-ball decay, the energy identity and the history diagnostics.

use rayon::prelude::*;

use super::{steps_to, CriterionResult, Experiment, ExperimentOptions, ExperimentOutput, Series};
use crate::analysis::{absorbing_entry, c0_constant, fit_decay_rate, PlateauMode};
use crate::discretization::NormKind;
use crate::dynamics::{
    initial_field, initial_history, simulate, HistoryMode, HistoryProfileKind, RunConfig, Simulation,
};
use crate::error::{Error, Result};
use crate::kernels::{make_exponential_kernel, validate_kernel, MemoryKernel, Region};
use crate::memory::{default_taus, tail_and_norms};

/// Kernel masses and `c0` over a 5 x 5 x 5 grid in `(omega, nu, lambda_G)`,
/// against a direct evaluation of the formulas.
pub fn constants_grid() -> Result<CriterionResult> {
    let values: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
    let rates: [f64; 5] = [0.2, 0.6, 1.0, 1.4, 1.8];
    let (weights, beta) = ([0.25, 0.75], 1.0);
    let mut worst: f64 = 0.0;
    let mut flagged = 0;
    let mut mismatched = 0;
    for &omega in &values {
        for &nu in &values {
            for &lambda in &rates {
                let k = make_exponential_kernel(Region::Boundary, &weights, &[lambda, 3.0 * lambda], omega)?;
                let report = validate_kernel(&k);
                let k0 = 0.25 * lambda + 0.75 * (3.0 * lambda);
                let m = (1.0 - omega) * k0;
                worst = worst.max((report.mass - m).abs() / m).max((report.k0 - k0).abs() / k0);
                let delta = lambda.min(1.0);
                let middle = beta * nu * (2.0 - m / 2.0);
                let mut expected = 2.0 * omega;
                if middle < expected {
                    expected = middle;
                }
                if delta < expected {
                    expected = delta;
                }
                match c0_constant(omega, beta, nu, delta, m) {
                    Ok(c) if expected > 0.0 => worst = worst.max((c.value - expected).abs() / expected),
                    Err(Error::NonPositiveDecayConstant { .. }) if expected <= 0.0 => flagged += 1,
                    _ => mismatched += 1,
                }
            }
        }
    }
    let threshold = 4.0 * f64::EPSILON;
    Ok(CriterionResult::new(
        1,
        "constant-formulas",
        worst <= threshold && mismatched == 0,
        worst,
        threshold,
        format!("125 parameter sets, {flagged} flagged as violating the boundary smallness, {mismatched} mismatches"),
    ))
}

/// Linear run: `E(t) <= 1.05 E(0) exp(-c0 t)` at every report node and `rate >= c0`.
pub fn linear_decay(config: &RunConfig<f64>) -> Result<(CriterionResult, Series, f64)> {
    let mut cfg = config.clone();
    cfg.make_linear();
    cfg.integration.history = HistoryMode::Modes;
    let problem = cfg.problem()?;
    let (kb, kg) = (&problem.kernel_bulk, &problem.kernel_boundary);
    let p = problem.op.params();
    let c0 = c0_constant(p.omega, p.beta, p.nu, kb.delta().min(kg.delta()), kg.mass());
    let traj = simulate(&cfg)?.into_result()?;
    let series = Series::from_reports(&traj.reports);
    let Ok(c0) = c0 else {
        let r = CriterionResult::new(2, "linear-decay-bound", false, f64::NAN, 1.05, "c0 is not positive")
            .gated(false);
        return Ok((r, series, f64::NAN));
    };
    let c0 = c0.value;
    let e0 = traj.reports[0].energy;
    let worst = traj
        .reports
        .iter()
        .map(|r| r.energy / (e0 * (-c0 * r.t).exp()))
        .fold(0.0, f64::max);
    let rows: Vec<(f64, f64)> = traj.energy_series().into_iter().filter(|r| r.0 > 0.0).collect();
    let fit = fit_decay_rate(&rows, PlateauMode::Zero, Some(c0))?;
    let passed = worst <= 1.05 && fit.rate >= c0;
    let r = CriterionResult::new(
        2,
        "linear-decay-bound",
        passed,
        worst,
        1.05,
        format!("max E/(E0 exp(-c0 t)) = {worst:.6}, fitted rate {:.6} vs c0 = {c0}", fit.rate),
    )
    .gated(problem.smallness.assk);
    Ok((r, series, fit.rate))
}

/// Worst per-step identity residual on `t in [0.1, 0.2]` for `dt / 2^k`, `k = 0..4`,
/// and the verdict on the successive ratios.
pub fn energy_identity(config: &RunConfig<f64>) -> Result<(CriterionResult, Vec<(f64, f64)>)> {
    let mut cfg = config.clone();
    cfg.make_linear();
    cfg.integration.history = HistoryMode::Modes;
    let dts: Vec<f64> = (0..4).map(|k| config.integration.dt / f64::from(1 << k)).collect();
    let residuals: Vec<f64> = dts
        .par_iter()
        .map(|&dt| -> Result<f64> {
            let mut c = cfg.clone();
            c.integration.dt = dt;
            let problem = c.problem()?;
            let u0 = initial_field(&problem.grid, &c.initial);
            let h0 = initial_history(c.initial.history, &u0)?;
            let mut sim = Simulation::new(&problem, u0, &h0, &c.integration)?;
            let (start, end) = (steps_to(0.1, dt), steps_to(0.2, dt));
            let mut worst: f64 = 0.0;
            while sim.steps() < end {
                sim.step(None)?;
                if sim.steps() >= start {
                    worst = worst.max(sim.identity_residual().unwrap_or(0.0).abs());
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    let dev = ratios.iter().map(|r| (r - 2.0).abs()).fold(0.0, f64::max);
    let r = CriterionResult::new(
        4,
        "energy-identity-order",
        dev <= 0.3,
        dev,
        0.3,
        format!("residual ratios under halving: {ratios:.4?}"),
    );
    Ok((r, dts.into_iter().zip(residuals).collect()))
}

fn with_history(config: &RunConfig<f64>) -> RunConfig<f64> {
    let mut cfg = config.clone();
    cfg.integration.history = HistoryMode::Direct;
    if cfg.initial.history == HistoryProfileKind::Zero {
        cfg.initial.history = HistoryProfileKind::Linear;
    }
    cfg
}

/// Transport pairing against `-(delta / 2) ||Phi||^2_{M^1}` along a run with a
/// direct history, with the quadrature error measured as the gap between the
/// mode and direct evaluations.
pub fn tr_dissipativity(config: &RunConfig<f64>, horizon: f64) -> Result<CriterionResult> {
    let cfg = with_history(config);
    let problem = cfg.problem()?;
    let (kb, kg) = (&problem.kernel_bulk, &problem.kernel_boundary);
    let delta = kb.delta().min(kg.delta());
    let u0 = initial_field(&problem.grid, &cfg.initial);
    let h0 = initial_history(cfg.initial.history, &u0)?;
    let mut sim = Simulation::new(&problem, u0, &h0, &cfg.integration)?;
    let steps = steps_to(horizon, cfg.integration.dt);
    let stride = (steps / 20).max(1);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_quad: f64 = 0.0;
    let mut nodes = 0;
    loop {
        if sim.steps() % stride == 0 || sim.steps() == steps {
            let d = sim.direct().ok_or(Error::ModeOnlyHistory)?;
            let tail = tail_and_norms(d, &problem.op, kb, kg, &[1.0])?;
            let modes = sim.modes().ok_or(Error::ModeOnlyHistory)?;
            let m1 = tail.m1_squared;
            if m1 > 0.0 {
                let quad = (tail.pairing - modes.pairing()).abs();
                worst_quad = worst_quad.max(quad / m1);
                worst_excess = worst_excess.max((tail.pairing + 0.5 * delta * m1 - quad) / m1);
                nodes += 1;
            }
        }
        if sim.steps() >= steps {
            break;
        }
        sim.step(None)?;
    }
    let passed = worst_excess <= 0.0 && worst_quad <= 1e-8 && nodes > 0;
    Ok(CriterionResult::new(
        5,
        "transport-dissipativity",
        passed,
        worst_quad,
        1e-8,
        format!(
            "{nodes} nodes, max (pairing + delta/2 M1 - eps)/M1 = {worst_excess:.3e}, max eps_quad/M1 = {worst_quad:.3e}"
        ),
    ))
}

/// Rows `(t, ||U||_{V^1}, sup tau TT, ||d_s Phi||^2_{M^1}, slope bound, tail bound)`.
pub struct TailRun {
    pub rows: Vec<[f64; 6]>,
    pub k: f64,
    pub fitted_c: f64,
    /// `2 sup_tau tau int_{S_tau} (mu_O + mu_G) s^2 ds / min(alpha, beta)`.
    pub structural_c: f64,
    /// Ratio at the end of the run against a constant fitted on its first half.
    pub first_half_ratio: f64,
}

/// `int_a^b s^2 exp(-lambda s) ds`, with `b = inf` allowed.
fn s2_exp_integral(lambda: f64, a: f64, b: f64) -> f64 {
    let upper = |x: f64| (-lambda * x).exp() * (x * x / lambda + 2.0 * x / (lambda * lambda) + 2.0 / lambda.powi(3));
    let hi = if b.is_finite() { upper(b) } else { 0.0 };
    upper(a) - hi
}

/// Kernel-only constant bounding `sup_tau tau TT` of a history generated by an
/// input of `V^1` norm at most 1.
fn structural_constant(kernels: [&MemoryKernel<f64>; 2], alpha: f64, beta: f64, taus: &[f64]) -> f64 {
    let sup = taus
        .iter()
        .map(|&tau| {
            let near = tau.recip().min(tau);
            let mass: f64 = kernels
                .iter()
                .flat_map(|k| k.mu_coefficients().into_iter().zip(k.rates().iter().copied()))
                .map(|(c, l)| c * (s2_exp_integral(l, 0.0, near) + s2_exp_integral(l, tau.max(near), f64::INFINITY)))
                .sum();
            tau * mass
        })
        .fold(0.0, f64::max);
    2.0 * sup / alpha.min(beta)
}

/// Tail quantities along a run started from smooth data with a history in the
/// domain of the transport operator. The slope bound has no free constant. The
/// tail bound's constant is fitted over the run; the excess over the decaying
/// envelope must have levelled off over the last tenth of the run and the fitted
/// constant must stay below the kernel-only one.
pub fn tail_bounds(config: &RunConfig<f64>, nodes: usize) -> Result<(CriterionResult, TailRun)> {
    let cfg = with_history(config);
    let problem = cfg.problem()?;
    let (kb, kg) = (&problem.kernel_bulk, &problem.kernel_boundary);
    let p = problem.op.params();
    let delta = kb.delta().min(kg.delta());
    let mass = kb.mass() + kg.mass();
    let u0 = initial_field(&problem.grid, &cfg.initial);
    let h0 = initial_history(cfg.initial.history, &u0)?;
    let mut sim = Simulation::new(&problem, u0, &h0, &cfg.integration)?;
    let steps = cfg.steps();
    let stride = (steps / nodes.max(1)).max(1);
    let taus = default_taus(100.0, 41);
    let mut samples = Vec::new();
    let mut k2: f64 = 0.0;
    loop {
        k2 = k2.max(problem.op.norm_squared(sim.state(), NormKind::V1)?);
        if sim.steps() % stride == 0 || sim.steps() == steps {
            let d = sim.direct().ok_or(Error::ModeOnlyHistory)?;
            let tail = tail_and_norms(d, &problem.op, kb, kg, &taus)?;
            samples.push((sim.time(), tail.sup, tail.slope_m1_squared));
        }
        if sim.steps() >= steps {
            break;
        }
        sim.step(None)?;
    }
    let (_, tail0, slope0) = samples[0];
    let envelope = |t: f64| 2.0 * (t + 2.0) * (-delta * t).exp() * tail0;
    let excess = |s: &(f64, f64, f64)| ((s.1 - envelope(s.0)) / k2).max(0.0);
    let t_end = samples.last().map_or(0.0, |s| s.0);
    let fitted_c = samples.iter().map(excess).fold(0.0, f64::max);
    let first_half_c = samples.iter().filter(|s| s.0 <= t_end / 2.0).map(excess).fold(0.0, f64::max);
    let last = samples.last().map(excess).unwrap_or(0.0);
    let first_half_ratio = if first_half_c > 0.0 { last / first_half_c } else { f64::INFINITY };
    let before = samples
        .iter()
        .rev()
        .find(|s| s.0 <= 0.9 * t_end)
        .map(excess)
        .unwrap_or(0.0);
    let growth = if fitted_c > 0.0 { (last - before) / fitted_c } else { 0.0 };
    let structural_c = structural_constant([kb, kg], p.alpha, p.beta, &taus);

    let mut rows = Vec::with_capacity(samples.len());
    let mut slope_ok = true;
    for &(t, tail, slope) in &samples {
        let slope_bound = (-delta * t).exp() * slope0 + k2 * mass;
        slope_ok &= slope <= slope_bound * (1.0 + 1e-10);
        rows.push([t, k2.sqrt(), tail, slope, slope_bound, envelope(t) + fitted_c * k2]);
    }
    let k = k2.sqrt();
    let threshold = 0.05;
    let passed = slope_ok && growth <= threshold && fitted_c <= structural_c;
    let r = CriterionResult::new(
        8,
        "tail-bounds",
        passed,
        growth,
        threshold,
        format!(
            "K = {k:.6}, slope bound {}, fitted C = {fitted_c:.4e} (kernel bound {structural_c:.4e}), \
             excess growth over the last tenth {growth:.3e}",
            if slope_ok { "holds" } else { "violated" }
        ),
    )
    .gated(problem.smallness.assk);
    Ok((r, TailRun { rows, k, fitted_c, structural_c, first_half_ratio }))
}

pub fn decay(config: &RunConfig<f64>, options: &ExperimentOptions) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new(Experiment::Decay);
    out.criteria.push(constants_grid()?);
    let (crit, series, rate) = linear_decay(config)?;
    out.criteria.push(crit);
    out.series = series;
    out.metric("linear_fitted_rate", rate);
    let (crit, residuals) = energy_identity(config)?;
    out.criteria.push(crit);
    for (dt, r) in residuals {
        out.metric(&format!("identity_residual_dt_{dt:e}"), r);
    }
    out.criteria.push(tr_dissipativity(config, options.diagnostic_horizon)?);
    let (crit, tail) = tail_bounds(config, options.tail_nodes)?;
    out.criteria.push(crit);
    out.metric("tail_k", tail.k);
    out.metric("tail_fitted_c", tail.fitted_c);
    out.metric("tail_structural_c", tail.structural_c);
    out.metric("tail_first_half_ratio", tail.first_half_ratio);

    let problem = config.problem()?;
    let p = problem.op.params();
    let (kb, kg) = (&problem.kernel_bulk, &problem.kernel_boundary);
    if let Ok(c0) = c0_constant(p.omega, p.beta, p.nu, kb.delta().min(kg.delta()), kg.mass()) {
        out.metric("c0", c0.value);
    }
    let traj = simulate(config)?.into_result()?;
    let energy = traj.energy_series();
    let fit = fit_decay_rate(&energy, PlateauMode::TailMean, None)?;
    out.metric("fitted_rate", fit.rate);
    out.metric("fitted_plateau", fit.plateau);
    let radius = (fit.plateau + 1.0).sqrt();
    let entry = absorbing_entry(&energy, radius, 1e-6)?;
    out.metric("absorbing_radius", radius);
    out.metric("entry_time", entry.t_entry.unwrap_or(f64::NAN));
    out.metric("reentry_violations", entry.reentry_violations as f64);
    let ineq = traj.reports.iter().filter_map(|r| r.inequality_residual).fold(f64::NEG_INFINITY, f64::max);
    out.metric("max_inequality_residual", ineq);
    Ok(out)
}
