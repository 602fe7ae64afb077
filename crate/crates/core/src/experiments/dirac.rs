//! Memory-to-memoryless limit along single-mode kernels of growing rate.

use rayon::prelude::*;

use super::{steps_to, CriterionResult, Experiment, ExperimentOptions, ExperimentOutput, Series};
use crate::discretization::NormKind;
use crate::dynamics::{initial_data, KernelConfig, MemorylessForm, RunConfig, Simulation};
use crate::error::Result;

struct Sweep {
    lambda: f64,
    weak: f64,
    literal: f64,
    assk: bool,
    rows: Vec<[f64; 4]>,
}

/// `sup_t ||u_lambda - u_0||_{X^2}` against both memoryless forms.
fn distance(config: &RunConfig<f64>, lambda: f64, horizon: f64) -> Result<Sweep> {
    let mut cfg = config.clone();
    cfg.kernel_bulk = KernelConfig { weights: vec![1.0], rates: vec![lambda] };
    cfg.kernel_boundary = KernelConfig { weights: vec![1.0], rates: vec![lambda] };
    let problem = cfg.problem()?;
    let (u0, h0) = initial_data(&cfg)?;
    let integ = &cfg.integration;
    let mut memory = Simulation::new(&problem, u0.clone(), &h0, integ)?;
    let mut weak = Simulation::memoryless(&problem, u0.clone(), MemorylessForm::WeakLimit, integ)?;
    let mut literal = Simulation::memoryless(&problem, u0, MemorylessForm::Literal, integ)?;
    let op = problem.op.clone();
    let gap = |a: &Simulation<f64>, b: &Simulation<f64>| -> Result<f64> {
        let d: Vec<f64> = a.state().iter().zip(b.state().iter()).map(|(x, y)| x - y).collect();
        op.norm(&d, NormKind::X2)
    };
    let steps = steps_to(horizon, integ.dt);
    let stride = integ.report_stride.max(1);
    let (mut sup_weak, mut sup_literal) = (0.0f64, 0.0f64);
    let mut rows = Vec::new();
    for n in 1..=steps {
        memory.step(None)?;
        weak.step(None)?;
        literal.step(None)?;
        let (w, l) = (gap(&memory, &weak)?, gap(&memory, &literal)?);
        sup_weak = sup_weak.max(w);
        sup_literal = sup_literal.max(l);
        if n % stride == 0 || n == steps {
            rows.push([lambda, memory.time(), w, l]);
        }
    }
    Ok(Sweep { lambda, weak: sup_weak, literal: sup_literal, assk: problem.smallness.assk, rows })
}

pub fn dirac_limit(config: &RunConfig<f64>, options: &ExperimentOptions) -> Result<ExperimentOutput> {
    let sweeps: Vec<Sweep> = options
        .lambdas
        .par_iter()
        .map(|&l| distance(config, l, options.dirac_horizon))
        .collect::<Result<_>>()?;
    let decreasing = sweeps.windows(2).all(|w| w[1].weak < w[0].weak);
    let worst = sweeps.windows(2).map(|w| w[1].weak / w[0].weak).fold(0.0, f64::max);
    let list: Vec<String> = sweeps
        .iter()
        .map(|s| format!("lambda={}: {:.4e}{}", s.lambda, s.weak, if s.assk { "" } else { " (outside smallness)" }))
        .collect();
    let mut out = ExperimentOutput::new(Experiment::DiracLimit);
    out.criteria.push(CriterionResult::new(
        9,
        "memoryless-limit",
        decreasing && sweeps.len() >= 2,
        worst,
        1.0,
        format!("sup_t |u_lambda - u_0|_X2: {}", list.join(", ")),
    ));
    let mut series = Series::new(&["lambda", "t", "weak_limit", "literal"]);
    for s in &sweeps {
        out.metric(&format!("sup_weak_lambda_{}", s.lambda), s.weak);
        out.metric(&format!("sup_literal_lambda_{}", s.lambda), s.literal);
        for r in &s.rows {
            series.push_values(r);
        }
    }
    out.series = series;
    Ok(out)
}
