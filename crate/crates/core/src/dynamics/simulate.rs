use serde::Serialize;

use crate::discretization::StateField;
use crate::error::{Error, Result};
use crate::memory::HistorySpec;
use crate::scalar::{max_abs, Real};

use super::config::{IntegrationConfig, RunConfig};
use super::init::{initial_field, initial_history};
use super::report::Trajectory;
use super::stepper::{MemorylessForm, Simulation};

/// Steps `sim` to `steps`, reporting every `report_stride` steps and at the end.
/// A non-finite state ends the run early with `failure` set.
pub fn run<T: Real>(
    mut sim: Simulation<T>,
    steps: usize,
    integration: &IntegrationConfig<T>,
    with_tail: bool,
) -> Result<Trajectory<T>> {
    let stride = integration.report_stride.max(1);
    let mut reports = vec![sim.report(with_tail)?];
    let mut snapshots = Vec::new();
    let snap = integration.snapshot_stride;
    if snap > 0 {
        snapshots.push((sim.time(), sim.state().clone()));
    }
    let mut failure = None;
    while sim.steps() < steps {
        match sim.step(None) {
            Ok(()) => {}
            Err(e @ Error::NonFinite { .. }) => {
                failure = Some(e);
                break;
            }
            Err(e) => return Err(e),
        }
        let n = sim.steps();
        if n.is_multiple_of(stride) || n == steps {
            reports.push(sim.report(with_tail)?);
        }
        if snap > 0 && n.is_multiple_of(snap) {
            snapshots.push((sim.time(), sim.state().clone()));
        }
    }
    Ok(Trajectory {
        reports,
        snapshots,
        final_state: sim.state().clone(),
        final_modes: sim.modes().cloned(),
        final_direct: sim.direct().cloned(),
        failure,
    })
}

/// Initial state and history per the configuration.
pub fn initial_data<T: Real>(config: &RunConfig<T>) -> Result<(StateField<T>, HistorySpec<T>)> {
    let grid = config.problem()?.grid;
    let u0 = initial_field(&grid, &config.initial);
    let h0 = initial_history(config.initial.history, &u0)?;
    Ok((u0, h0))
}

pub fn simulate<T: Real>(config: &RunConfig<T>) -> Result<Trajectory<T>> {
    let problem = config.problem()?;
    let u0 = initial_field(&problem.grid, &config.initial);
    let h0 = initial_history(config.initial.history, &u0)?;
    let sim = Simulation::new(&problem, u0, &h0, &config.integration)?;
    run(sim, config.steps(), &config.integration, true)
}

pub fn simulate_memoryless<T: Real>(config: &RunConfig<T>, form: MemorylessForm) -> Result<Trajectory<T>> {
    let problem = config.problem()?;
    let u0 = initial_field(&problem.grid, &config.initial);
    let sim = Simulation::memoryless(&problem, u0, form, &config.integration)?;
    run(sim, config.steps(), &config.integration, false)
}

/// Strong and dual norms of one split component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitNorms<T> {
    /// `(||U||^2_{X^2} + ||Phi||^2_{M^1})^{1/2}`.
    pub strong: T,
    /// `(||U||^2_{V^-1} + ||Phi||^2_{M^0})^{1/2}`.
    pub dual: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitRow<T> {
    pub t: T,
    /// Linear part `Lambda`: difference data, no nonlinear forcing.
    pub linear: SplitNorms<T>,
    /// Smoothing part `Xi`: zero data, forcing `F(U1) - F(U2)`.
    pub smoothing: SplitNorms<T>,
    /// Full difference integrated as its own system.
    pub difference: SplitNorms<T>,
    /// `max |U_Lambda + U_Xi - (U1 - U2)| / max |U1 - U2|`.
    pub reconstruction: T,
    /// `max |U_D - (U1 - U2)| / max |U1 - U2|`.
    pub difference_defect: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitTrajectory<T> {
    pub rows: Vec<SplitRow<T>>,
    pub t_star: T,
}

impl<T: Real> SplitTrajectory<T> {
    pub fn initial(&self) -> &SplitRow<T> {
        &self.rows[0]
    }

    /// Last row with `t <= t*`.
    pub fn at_t_star(&self) -> &SplitRow<T> {
        let tol = self.t_star * T::epsilon() * crate::scalar::lit(16.0);
        self.rows.iter().rev().find(|r| r.t <= self.t_star + tol).unwrap_or(&self.rows[0])
    }

    pub fn max_reconstruction(&self) -> T {
        self.rows.iter().fold(T::zero(), |m, r| m.max(r.reconstruction).max(r.difference_defect))
    }
}

fn norms<T: Real>(sim: &Simulation<T>) -> Result<SplitNorms<T>> {
    let r = sim.report(false)?;
    let dual = r.dual.ok_or(Error::IndefiniteGram)?;
    Ok(SplitNorms { strong: r.energy.max(T::zero()).sqrt(), dual })
}

fn relative_defect<T: Real>(a: &[T], b: &[T], reference: &[T]) -> T {
    let scale = max_abs(reference);
    let err = a.iter().zip(b).zip(reference).fold(T::zero(), |m, ((&x, &y), &r)| m.max((x + y - r).abs()));
    if scale > T::zero() {
        err / scale
    } else {
        err
    }
}

/// Integrates two full runs and the linear/smoothing/difference systems of their
/// difference up to `t_star`, in lockstep so that every system sees the same
/// explicit forcing.
pub fn simulate_split<T: Real>(
    config: &RunConfig<T>,
    first: (&StateField<T>, &HistorySpec<T>),
    second: (&StateField<T>, &HistorySpec<T>),
    t_star: T,
) -> Result<SplitTrajectory<T>> {
    if !(t_star > T::zero()) {
        return Err(Error::InvalidTiming(format!("t* must be positive, got {t_star}")));
    }
    let problem = config.problem()?;
    let mut linear_config = config.clone();
    linear_config.make_linear();
    let linear_problem = linear_config.problem()?;
    let integ = &config.integration;
    let grid = &problem.grid;
    grid.check(first.0)?;
    grid.check(second.0)?;

    let diff_u: StateField<T> = first.0.iter().zip(second.0.iter()).map(|(&a, &b)| a - b).collect::<Vec<T>>().into();
    let mut diff_h = first.1.clone();
    for (phi, f) in second.1.terms() {
        let neg: Vec<T> = f.iter().map(|&x| -x).collect();
        diff_h.push(phi.clone(), neg.into())?;
    }
    let mut u1 = Simulation::new(&problem, first.0.clone(), first.1, integ)?;
    let mut u2 = Simulation::new(&problem, second.0.clone(), second.1, integ)?;
    let mut lin = Simulation::new(&linear_problem, diff_u.clone(), &diff_h, integ)?;
    let mut smooth = Simulation::new(&linear_problem, grid.zeros(), &HistorySpec::zero(), integ)?;
    let mut diff = Simulation::new(&linear_problem, diff_u, &diff_h, integ)?;

    let steps = (t_star / integ.dt).round().to_usize().unwrap_or(0).max(1);
    let stride = integ.report_stride.max(1);
    let row = |u1: &Simulation<T>, u2: &Simulation<T>, lin: &Simulation<T>, smooth: &Simulation<T>, diff: &Simulation<T>| -> Result<SplitRow<T>> {
        let true_diff: Vec<T> = u1.state().iter().zip(u2.state().iter()).map(|(&a, &b)| a - b).collect();
        let zero = vec![T::zero(); true_diff.len()];
        Ok(SplitRow {
            t: lin.time(),
            linear: norms(lin)?,
            smoothing: norms(smooth)?,
            difference: norms(diff)?,
            reconstruction: relative_defect(lin.state(), smooth.state(), &true_diff),
            difference_defect: relative_defect(diff.state(), &zero, &true_diff),
        })
    };
    let mut rows = vec![row(&u1, &u2, &lin, &smooth, &diff)?];
    for n in 1..=steps {
        let f1 = u1.forcing(u1.state());
        let f2 = u2.forcing(u2.state());
        let extra: Vec<T> = f1.iter().zip(&f2).map(|(&a, &b)| a - b).collect();
        u1.step(None)?;
        u2.step(None)?;
        lin.step(None)?;
        smooth.step(Some(&extra))?;
        diff.step(Some(&extra))?;
        if n.is_multiple_of(stride) || n == steps {
            rows.push(row(&u1, &u2, &lin, &smooth, &diff)?);
        }
    }
    Ok(SplitTrajectory { rows, t_star })
}
