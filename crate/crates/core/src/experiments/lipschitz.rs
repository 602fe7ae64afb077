//! Continuous dependence on the data, in the strong and the dual metric.

use rayon::prelude::*;

use super::{CriterionResult, Experiment, ExperimentOptions, ExperimentOutput, Series};
use crate::analysis::{absorbing_entry, fit_decay_rate, lipschitz_estimate, Metric, PlateauMode};
use crate::dynamics::{band_limited, initial_data, simulate, simulate_split, RunConfig, Simulation, SplitTrajectory};
use crate::error::Result;

/// Absorbing radius estimated from the plateau of a run of the configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorbingBall {
    pub plateau: f64,
    /// `sqrt(plateau + 1)`, in the energy norm.
    pub radius: f64,
    pub t_entry: Option<f64>,
}

pub fn absorbing_ball(config: &RunConfig<f64>) -> Result<AbsorbingBall> {
    let traj = simulate(config)?.into_result()?;
    let energy = traj.energy_series();
    let fit = fit_decay_rate(&energy, PlateauMode::TailMean, None)?;
    let plateau = fit.plateau.max(0.0);
    let radius = (plateau + 1.0).sqrt();
    let entry = absorbing_entry(&energy, radius, 1e-6)?;
    Ok(AbsorbingBall { plateau, radius, t_entry: entry.t_entry })
}

/// The configuration with its amplitude reduced so that the initial energy is at
/// most a quarter of the squared absorbing radius.
pub(super) fn into_ball(config: &RunConfig<f64>) -> Result<(RunConfig<f64>, AbsorbingBall, f64)> {
    let ball = absorbing_ball(config)?;
    let problem = config.problem()?;
    let (u0, h0) = initial_data(config)?;
    let energy = Simulation::new(&problem, u0, &h0, &config.integration)?.energy();
    let target = 0.5 * ball.radius;
    let scale = if energy.sqrt() > target { target / energy.sqrt() } else { 1.0 };
    let mut scaled = config.clone();
    scaled.initial.amplitude *= scale;
    Ok((scaled, ball, scale))
}

struct Case {
    eps: f64,
    dt: f64,
    c_hat: f64,
    split: SplitTrajectory<f64>,
}

fn sweep(config: &RunConfig<f64>, options: &ExperimentOptions, metric: Metric) -> Result<Vec<Case>> {
    let (u0, h0) = initial_data(config)?;
    let grid = config.problem()?.grid;
    let direction = band_limited(&grid, config.initial.seed.wrapping_add(1), 1.0);
    let base_dt = config.integration.dt;
    let cases: Vec<(f64, f64)> = options
        .perturbations
        .iter()
        .flat_map(|&eps| [(eps, base_dt), (eps, base_dt / 2.0)])
        .collect();
    cases
        .into_par_iter()
        .map(|(eps, dt)| {
            let mut cfg = config.clone();
            cfg.integration.dt = dt;
            cfg.integration.report_stride = config.integration.report_stride * (base_dt / dt).round() as usize;
            let u1: Vec<f64> = u0.iter().zip(direction.iter()).map(|(&a, &v)| a + eps * v).collect();
            let split = simulate_split(&cfg, (&u1.into(), &h0), (&u0, &h0), options.lipschitz_horizon)?;
            let rows: Vec<(f64, f64)> = split
                .rows
                .iter()
                .map(|r| match metric {
                    Metric::Strong => (r.t, r.difference.strong),
                    Metric::Dual => (r.t, r.difference.dual),
                })
                .collect();
            let c_hat = lipschitz_estimate(&rows, metric)?.c_hat;
            Ok(Case { eps, dt, c_hat, split })
        })
        .collect()
}

fn stability(cases: &[Case], base_dt: f64, reference_eps: f64) -> (f64, f64) {
    let reference = cases
        .iter()
        .find(|c| c.dt == base_dt && (c.eps - reference_eps).abs() <= 1e-12 * reference_eps)
        .unwrap_or(&cases[0])
        .c_hat;
    let spread = cases
        .iter()
        .map(|c| if c.c_hat.is_finite() { (c.c_hat - reference).abs() / reference.abs() } else { f64::INFINITY })
        .fold(0.0, f64::max);
    (reference, spread)
}

fn output(
    experiment: Experiment,
    id: u8,
    name: &'static str,
    cases: Vec<Case>,
    base_dt: f64,
    reference_eps: f64,
    metric: Metric,
) -> ExperimentOutput {
    let (reference, spread) = stability(&cases, base_dt, reference_eps);
    let list: Vec<String> = cases.iter().map(|c| format!("eps={:e} dt={:e}: {:.5}", c.eps, c.dt, c.c_hat)).collect();
    let bounded = cases.iter().all(|c| c.c_hat.is_finite() && c.c_hat > 0.0);
    let mut out = ExperimentOutput::new(experiment);
    out.criteria.push(CriterionResult::new(
        id,
        name,
        bounded && spread <= 0.2,
        spread,
        0.2,
        format!("C_hat relative to {reference:.5}: {}", list.join(", ")),
    ));
    out.metric("c_hat_reference", reference);
    out.metric("c_hat_spread", spread);
    for c in &cases {
        out.metric(&format!("c_hat_eps_{:e}_dt_{:e}", c.eps, c.dt), c.c_hat);
        out.metric(&format!("reconstruction_eps_{:e}_dt_{:e}", c.eps, c.dt), c.split.max_reconstruction());
    }
    let mut series = Series::new(&["eps", "dt", "t", "difference", "ratio"]);
    for c in &cases {
        let d0 = match metric {
            Metric::Strong => c.split.initial().difference.strong,
            Metric::Dual => c.split.initial().difference.dual,
        };
        for r in &c.split.rows {
            let d = match metric {
                Metric::Strong => r.difference.strong,
                Metric::Dual => r.difference.dual,
            };
            series.push_values(&[c.eps, c.dt, r.t, d, d / d0]);
        }
    }
    out.series = series;
    out
}

fn reference_eps(options: &ExperimentOptions) -> f64 {
    let p = &options.perturbations;
    p.get(p.len() / 2).copied().unwrap_or(1e-3)
}

/// Growth exponent of the difference of two nearby solutions in `X^2 x M^1`.
pub fn cde(config: &RunConfig<f64>, options: &ExperimentOptions) -> Result<ExperimentOutput> {
    let cases = sweep(config, options, Metric::Strong)?;
    Ok(output(
        Experiment::Cde,
        6,
        "lipschitz-strong",
        cases,
        config.integration.dt,
        reference_eps(options),
        Metric::Strong,
    ))
}

/// Same in `V^-1 x M^0`, with the base data scaled into half the absorbing ball.
pub fn weak_lipschitz(config: &RunConfig<f64>, options: &ExperimentOptions) -> Result<ExperimentOutput> {
    let (scaled, ball, scale) = into_ball(config)?;
    let cases = sweep(&scaled, options, Metric::Dual)?;
    let mut out = output(
        Experiment::WeakLipschitz,
        6,
        "lipschitz-dual",
        cases,
        config.integration.dt,
        reference_eps(options),
        Metric::Dual,
    );
    out.metric("absorbing_plateau", ball.plateau);
    out.metric("absorbing_radius", ball.radius);
    out.metric("data_scale", scale);
    Ok(out)
}
