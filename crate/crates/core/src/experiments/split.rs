//! Splitting of the difference of two solutions into a decaying linear part and
//! a smoothing part.

use rayon::prelude::*;

use super::lipschitz::into_ball;
use super::{steps_to, CriterionResult, Experiment, ExperimentOptions, ExperimentOutput, Series};
use crate::analysis::{contraction_check, fit_decay_rate, split_time, Contraction, PlateauMode};
use crate::dynamics::{band_limited, initial_history, simulate_split, RunConfig, Simulation};
use crate::error::{Error, Result};
use crate::memory::HistorySpec;

struct Pair {
    m0: f64,
    contraction: Contraction<f64>,
    reconstruction: f64,
}

/// Decay rate of `|Lambda|^2_dual` fitted on `window`.
fn fit_m0(
    config: &RunConfig<f64>,
    u: &[f64],
    history: &HistorySpec<f64>,
    window: (f64, f64),
) -> Result<f64> {
    let mut cfg = config.clone();
    cfg.make_linear();
    let problem = cfg.problem()?;
    let mut sim = Simulation::new(&problem, u.to_vec().into(), history, &cfg.integration)?;
    let dt = cfg.integration.dt;
    let (start, end) = (steps_to(window.0, dt), steps_to(window.1, dt));
    let stride = cfg.integration.report_stride.max(1);
    let mut rows = Vec::new();
    while sim.steps() < end {
        sim.step(None)?;
        if sim.steps() >= start && sim.steps() % stride == 0 {
            let dual = sim.report(false)?.dual.ok_or(Error::IndefiniteGram)?;
            rows.push((sim.time(), dual * dual));
        }
    }
    Ok(fit_decay_rate(&rows, PlateauMode::Zero, None)?.rate)
}

fn run_pair(config: &RunConfig<f64>, options: &ExperimentOptions, index: usize) -> Result<Pair> {
    let grid = config.problem()?.grid;
    let seed = config.initial.seed.wrapping_add(2 * index as u64);
    let amplitude = config.initial.amplitude;
    let u1 = band_limited(&grid, seed, amplitude);
    let u2 = band_limited(&grid, seed + 1, amplitude);
    let h1 = initial_history(config.initial.history, &u1)?;
    let h2 = initial_history(config.initial.history, &u2)?;
    let du: Vec<f64> = u1.iter().zip(u2.iter()).map(|(a, b)| a - b).collect();
    let mut dh = h1.clone();
    for (phi, f) in h2.terms() {
        dh.push(phi.clone(), f.iter().map(|x| -x).collect::<Vec<_>>().into())?;
    }
    let m0 = fit_m0(config, &du, &dh, options.m0_window)?;
    let t_star = split_time(m0, 0.0)?;
    let split = simulate_split(config, (&u1, &h1), (&u2, &h2), t_star)?;
    let end = split.at_t_star();
    let contraction = contraction_check(split.initial().difference.dual, end.linear.dual, end.smoothing.strong, t_star);
    Ok(Pair { m0, contraction, reconstruction: split.max_reconstruction() })
}

pub fn split(config: &RunConfig<f64>, options: &ExperimentOptions) -> Result<ExperimentOutput> {
    let (scaled, ball, scale) = into_ball(config)?;
    let pairs: Vec<Pair> = (0..options.pairs.max(1))
        .into_par_iter()
        .map(|i| run_pair(&scaled, options, i))
        .collect::<Result<_>>()?;
    let kappa = pairs.iter().map(|p| p.contraction.kappa).fold(0.0, f64::max);
    let lambda = pairs.iter().map(|p| p.contraction.lambda_const).fold(0.0, f64::max);
    let reconstruction = pairs.iter().map(|p| p.reconstruction).fold(0.0, f64::max);
    let passed = pairs.iter().all(|p| p.contraction.pass) && reconstruction <= 1e-10;
    let mut out = ExperimentOutput::new(Experiment::Split);
    out.criteria.push(CriterionResult::new(
        7,
        "split-contraction",
        passed,
        kappa,
        0.5,
        format!(
            "{} pairs, max kappa = {kappa:.4}, max Lambda = {lambda:.4}, max reconstruction defect = {reconstruction:.2e}",
            pairs.len()
        ),
    ));
    out.metric("kappa_max", kappa);
    out.metric("lambda_max", lambda);
    out.metric("reconstruction_max", reconstruction);
    out.metric("absorbing_radius", ball.radius);
    out.metric("data_scale", scale);
    let mut series = Series::new(&["pair", "m0", "t_star", "kappa", "lambda", "reconstruction"]);
    for (i, p) in pairs.iter().enumerate() {
        series.push_values(&[
            i as f64,
            p.m0,
            p.contraction.t_star,
            p.contraction.kappa,
            p.contraction.lambda_const,
            p.reconstruction,
        ]);
    }
    out.series = series;
    Ok(out)
}
