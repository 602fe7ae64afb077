//! Mode and direct history representations against each other, and the direct
//! history against the closed form at sampled nodes.

use super::{CriterionResult, Experiment, ExperimentOptions, ExperimentOutput, Series};
use crate::dynamics::{initial_data, HistoryMode, HistoryProfileKind, RunConfig, Simulation};
use crate::error::{Error, Result};
use crate::memory::{exact_history_oracle, InputSeries, PiecewiseLinear};
use crate::scalar::max_abs;

const SAMPLE_NODES: usize = 8;

pub fn oracle(config: &RunConfig<f64>, options: &ExperimentOptions) -> Result<ExperimentOutput> {
    let mut cfg = config.clone();
    cfg.integration.history = HistoryMode::Direct;
    if cfg.initial.history == HistoryProfileKind::Zero {
        cfg.initial.history = HistoryProfileKind::Linear;
    }
    let problem = cfg.problem()?;
    let (kb, kg) = (&problem.kernel_bulk, &problem.kernel_boundary);
    let (u0, h0) = initial_data(&cfg)?;
    let grid = &problem.grid;
    let nodes: Vec<usize> = (0..SAMPLE_NODES)
        .map(|k| {
            let j = k * (grid.ny() - 1) / (SAMPLE_NODES - 1);
            grid.index((3 * k + 1) % grid.nx(), j)
        })
        .collect();
    let phi0: Vec<PiecewiseLinear<f64>> = nodes
        .iter()
        .map(|&n| match h0.terms() {
            [] => PiecewiseLinear::zero(),
            [(profile, field)] => profile.scaled(field[n]),
            _ => unreachable!("initial histories have at most one term"),
        })
        .collect();
    let mut sim = Simulation::new(&problem, u0, &h0, &cfg.integration)?;
    let dt = cfg.integration.dt;
    let mut inputs: Vec<Vec<f64>> = vec![Vec::with_capacity(options.oracle_steps); nodes.len()];
    let mut load_worst: f64 = 0.0;
    let mut series = Series::new(&["t", "load_relative", "eta_abs"]);
    let stride = (options.oracle_steps / 50).max(1);
    let mut eta_worst: f64 = 0.0;
    for n in 1..=options.oracle_steps {
        sim.step(None)?;
        for (input, &node) in inputs.iter_mut().zip(&nodes) {
            input.push(sim.state()[node]);
        }
        let modes = sim.modes().ok_or(Error::ModeOnlyHistory)?;
        let direct = sim.direct().ok_or(Error::ModeOnlyHistory)?;
        let a = modes.load_weak(&problem.op);
        let b = direct.load_weak(&problem.op, kb, kg);
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let scale = max_abs(&a);
        let rel = if scale > 0.0 { max_abs(&diff) / scale } else { max_abs(&diff) };
        load_worst = load_worst.max(rel);
        if n % stride == 0 || n == options.oracle_steps {
            let t = sim.time();
            let mut worst_here: f64 = 0.0;
            for s in [0.0, 0.5 * dt, 0.25 * t, 0.5 * t + 0.3 * dt, t, 1.5 * t, 2.0 * t + 1.0] {
                let eta = direct.eta(s)?;
                for ((input, &node), phi) in inputs.iter().zip(&nodes).zip(&phi0) {
                    let series = InputSeries::Steps { dt, values: input.clone() };
                    let exact = exact_history_oracle(&series, phi, t, s)?;
                    worst_here = worst_here.max((exact - eta[node]).abs());
                }
            }
            eta_worst = eta_worst.max(worst_here);
            series.push_values(&[t, rel, worst_here]);
        }
    }
    let mut out = ExperimentOutput::new(Experiment::Oracle);
    let passed = load_worst <= 1e-10 && eta_worst <= 1e-14;
    out.criteria.push(CriterionResult::new(
        3,
        "history-oracle",
        passed,
        load_worst,
        1e-10,
        format!(
            "{} steps, max relative load gap {load_worst:.3e}, max |eta - exact| {eta_worst:.3e} at {} nodes",
            options.oracle_steps,
            nodes.len()
        ),
    ));
    out.metric("load_relative_max", load_worst);
    out.metric("eta_abs_max", eta_worst);
    out.series = series;
    Ok(out)
}
