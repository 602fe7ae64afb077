//! IMEX time stepping.
//!
//! Each step solves `(M + dt K) U+ = M U - dt (L(H) + F(U) + G)` with `K` the implicit
//! form, `L(H)` the weak memory load, `F` the weak nonlinearity and `G` an optional
//! extra forcing, then advances the history with `U+` held over the step.

use crate::analysis::c0_constant;
use crate::discretization::{cg_solve, Grid, NormKind, StateField, StiffnessForm, StripSolver, WentzellOperator};
use crate::error::{Error, Result};
use crate::kernels::MemoryKernel;
use crate::memory::{default_taus, tail_and_norms, DirectHistory, HistorySpec, ModeHistory};
use crate::scalar::{dot, from_usize, lit, to_f64, Real};

use super::config::{HistoryMode, IntegrationConfig, Problem, SolverKind};
use super::nonlinearity::{Nonlinearity, Polynomial};
use super::report::EnergyReport;

const CG_MAX_ITER: usize = 20_000;

/// Memoryless systems the memory problem is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemorylessForm {
    /// Limit of the discrete memory system as the kernels concentrate at `s = 0`:
    /// forms `(omega (2 - omega), alpha omega (1 - omega), nu (2 - omega), nu beta (2 - omega))`
    /// with forcing `(f, g~)`.
    WeakLimit,
    /// Unit bulk and boundary diffusion, reactions `alpha (1 - omega)` and
    /// `beta (1 - omega)`, forcing `(f, g)`.
    Literal,
}

#[derive(Debug, Clone)]
enum LinearSolver<T: Real> {
    Fft(StripSolver<T>),
    Cg { tol: T },
}

/// A run in progress; owns its state exclusively.
#[derive(Debug, Clone)]
pub struct Simulation<T: Real> {
    op: WentzellOperator<T>,
    kernel_bulk: MemoryKernel<T>,
    kernel_boundary: MemoryKernel<T>,
    nonlinearity: Nonlinearity<T>,
    implicit: StiffnessForm<T>,
    boundary_poly: Polynomial<T>,
    solver: LinearSolver<T>,
    dt: T,
    u: StateField<T>,
    modes: Option<ModeHistory<T>>,
    direct: Option<DirectHistory<T>>,
    time: T,
    steps: usize,
    energy: T,
    energy_rate: Option<T>,
    identity_residual: Option<T>,
    c0: Option<T>,
    absorb_constant: T,
}

impl<T: Real> Simulation<T> {
    /// Problem with memory, started from `(u0, eta0)`.
    pub fn new(
        problem: &Problem<T>,
        u0: StateField<T>,
        history: &HistorySpec<T>,
        integration: &IntegrationConfig<T>,
    ) -> Result<Self> {
        let op = problem.op.clone();
        let (kb, kg) = (&problem.kernel_bulk, &problem.kernel_boundary);
        let modes = ModeHistory::init(&op, kb, kg, history)?;
        let direct = match integration.history {
            HistoryMode::Modes => None,
            HistoryMode::Direct => {
                let s_max = DirectHistory::window_for(kb, kg, integration.s_max_tol);
                Some(DirectHistory::new(op.grid(), history.clone(), s_max)?)
            }
        };
        let implicit = op.dynamic_form();
        let g_tilde = problem.nonlinearity.g_tilde().clone();
        Self::assemble(problem, op, implicit, g_tilde, Some(modes), direct, u0, integration)
    }

    /// Memoryless comparison system; the kernels are kept only for reporting.
    pub fn memoryless(
        problem: &Problem<T>,
        u0: StateField<T>,
        form: MemorylessForm,
        integration: &IntegrationConfig<T>,
    ) -> Result<Self> {
        let op = problem.op.clone();
        let p = op.params();
        let one = T::one();
        let two: T = lit(2.0);
        let (implicit, boundary) = match form {
            MemorylessForm::WeakLimit => {
                let s = two - p.omega;
                (
                    StiffnessForm::new(p.omega * s, p.alpha * p.omega * (one - p.omega), p.nu * s, p.nu * p.beta * s),
                    problem.nonlinearity.g_tilde().clone(),
                )
            }
            MemorylessForm::Literal => (
                StiffnessForm::new(one, p.alpha * (one - p.omega), one, p.beta * (one - p.omega)),
                problem.nonlinearity.g().clone(),
            ),
        };
        Self::assemble(problem, op, implicit, boundary, None, None, u0, integration)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        problem: &Problem<T>,
        op: WentzellOperator<T>,
        implicit: StiffnessForm<T>,
        boundary_poly: Polynomial<T>,
        modes: Option<ModeHistory<T>>,
        direct: Option<DirectHistory<T>>,
        u0: StateField<T>,
        integration: &IntegrationConfig<T>,
    ) -> Result<Self> {
        op.grid().check(&u0)?;
        let dt = integration.dt;
        if !(dt > T::zero() && dt.is_finite()) {
            return Err(Error::InvalidTiming(format!("dt must be positive, got {dt}")));
        }
        let solver = match integration.solver {
            SolverKind::Fft => LinearSolver::Fft(StripSolver::new(op.grid(), &implicit.scaled(dt), T::one())?),
            SolverKind::Cg => LinearSolver::Cg { tol: T::solve_tolerance() },
        };
        let p = op.params();
        let (kb, kg) = (&problem.kernel_bulk, &problem.kernel_boundary);
        let c0 = c0_constant(p.omega, p.beta, p.nu, kb.delta().min(kg.delta()), kg.mass())
            .ok()
            .map(|c| c.value);
        let k = problem.nonlinearity.constants();
        let grid = op.grid();
        let absorb_constant = lit::<T>(2.0) * (k.kappa2 * grid.area() + k.kappa4 * grid.perimeter());
        let mut sim = Simulation {
            kernel_bulk: kb.clone(),
            kernel_boundary: kg.clone(),
            nonlinearity: problem.nonlinearity.clone(),
            implicit,
            boundary_poly,
            solver,
            dt,
            u: u0,
            modes,
            direct,
            time: T::zero(),
            steps: 0,
            energy: T::zero(),
            energy_rate: None,
            identity_residual: None,
            c0,
            absorb_constant,
            op,
        };
        sim.energy = sim.current_energy();
        Ok(sim)
    }

    pub fn op(&self) -> &WentzellOperator<T> {
        &self.op
    }

    pub fn grid(&self) -> &Grid<T> {
        self.op.grid()
    }

    pub fn kernels(&self) -> (&MemoryKernel<T>, &MemoryKernel<T>) {
        (&self.kernel_bulk, &self.kernel_boundary)
    }

    pub fn nonlinearity(&self) -> &Nonlinearity<T> {
        &self.nonlinearity
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn state(&self) -> &StateField<T> {
        &self.u
    }

    pub fn modes(&self) -> Option<&ModeHistory<T>> {
        self.modes.as_ref()
    }

    pub fn direct(&self) -> Option<&DirectHistory<T>> {
        self.direct.as_ref()
    }

    pub fn is_memoryless(&self) -> bool {
        self.modes.is_none()
    }

    /// The `c0` used in the inequality residual, when the boundary kernel allows one.
    pub fn c0(&self) -> Option<T> {
        self.c0
    }

    /// `||U||^2_{X^2} + ||Phi||^2_{M^1}`.
    pub fn energy(&self) -> T {
        self.energy
    }

    /// Residual of the discrete energy identity over the last step.
    pub fn identity_residual(&self) -> Option<T> {
        self.identity_residual
    }

    fn current_energy(&self) -> T {
        let x2: T = self.u.iter().zip(self.op.mass()).map(|(&u, &m)| u * u * m).sum();
        x2 + self.modes.as_ref().map_or(T::zero(), ModeHistory::m1_squared)
    }

    /// Weak nonlinearity: `f(u)` against the bulk weights plus the boundary
    /// polynomial against the surface weights.
    pub fn forcing(&self, u: &[T]) -> Vec<T> {
        let g = self.grid();
        let hx = g.hx();
        let f = self.nonlinearity.f();
        let mut out = Vec::with_capacity(g.nodes());
        for j in 0..g.ny() {
            let w = hx * g.wy(j);
            let boundary = g.is_boundary_row(j);
            let row = g.index(0, j)..g.index(0, j) + g.nx();
            out.extend(u[row].iter().map(|&v| {
                let mut x = w * f.eval(v);
                if boundary {
                    x = x + hx * self.boundary_poly.eval(v);
                }
                x
            }));
        }
        out
    }

    /// Memory load in weak form (zero for memoryless runs).
    pub fn load(&self) -> Vec<T> {
        match &self.modes {
            Some(h) => h.load_weak(&self.op),
            None => vec![T::zero(); self.grid().nodes()],
        }
    }

    fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        match &self.solver {
            LinearSolver::Fft(s) => Ok(s.solve(rhs)),
            LinearSolver::Cg { tol } => {
                let mut x = self.u.to_vec();
                let scaled = self.implicit.scaled(self.dt);
                cg_solve(self.grid(), &scaled, T::one(), rhs, &mut x, *tol, CG_MAX_ITER)?;
                Ok(x)
            }
        }
    }

    /// One step; `extra` is an additional weak forcing evaluated by the caller.
    pub fn step(&mut self, extra: Option<&[T]>) -> Result<()> {
        let n = self.grid().nodes();
        if let Some(e) = extra {
            self.grid().check(e)?;
        }
        let dt = self.dt;
        let mut forcing = self.forcing(&self.u);
        if let Some(e) = extra {
            for (f, &x) in forcing.iter_mut().zip(e) {
                *f = *f + x;
            }
        }
        let load = self.load();
        let mut rhs = Vec::with_capacity(n);
        for k in 0..n {
            rhs.push(self.op.mass()[k] * self.u[k] - dt * (load[k] + forcing[k]));
        }
        let next = self.solve(&rhs)?;
        let next_step = self.steps + 1;
        let next_time = from_usize::<T>(next_step) * dt;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: to_f64(next_time), step: next_step });
        }
        if let Some(h) = self.modes.as_mut() {
            h.step_modes(&self.op, &next, dt)?;
        }
        if let Some(d) = self.direct.as_mut() {
            d.step_direct(&next, dt)?;
        }
        let old_energy = self.energy;
        self.u = StateField(next);
        self.steps = next_step;
        self.time = next_time;
        self.energy = self.current_energy();
        if !self.energy.is_finite() || !self.modes.as_ref().is_none_or(ModeHistory::is_finite) {
            return Err(Error::NonFinite { time: to_f64(next_time), step: next_step });
        }
        let pairing = self.modes.as_ref().map_or(T::zero(), ModeHistory::pairing);
        let rate = (self.energy - old_energy) / dt;
        self.energy_rate = Some(rate);
        self.identity_residual = Some(
            rate * lit(0.5) + self.implicit.energy(self.grid(), &self.u) - pairing + dot(&forcing, &self.u),
        );
        Ok(())
    }

    /// Normed quantities at the current time. The tail supremum is computed only
    /// when a direct history is kept and `with_tail` is set.
    pub fn report(&self, with_tail: bool) -> Result<EnergyReport<T>> {
        let op = &self.op;
        let g = op.grid();
        let u = &self.u;
        let x2 = op.norm_squared(u, NormKind::X2)?;
        let v1 = op.norm_squared(u, NormKind::V1)?;
        let (m1, m0, pairing) = match &self.modes {
            Some(h) => (h.m1_squared(), h.m0_squared(), h.pairing()),
            None => (T::zero(), T::zero(), T::zero()),
        };
        let dual = match op.norm_squared(u, NormKind::Vminus1) {
            Ok(v) => Some((v + m0).sqrt()),
            Err(Error::IndefiniteGram) => None,
            Err(e) => return Err(e),
        };
        let tail_sup = match (&self.direct, with_tail) {
            (Some(d), true) => {
                let taus = default_taus(lit(100.0), 41);
                Some(tail_and_norms(d, op, &self.kernel_bulk, &self.kernel_boundary, &taus)?.sup)
            }
            _ => None,
        };
        let l4 = g.bulk_power(u, 4);
        let lr = g.boundary_power(u, self.nonlinearity.r());
        let k = self.nonlinearity.constants();
        let two: T = lit(2.0);
        let inequality_residual = match (self.energy_rate, self.c0) {
            (Some(rate), Some(c0)) if self.modes.is_some() => {
                Some(rate + c0 * (v1 + m1) + two * k.kappa1 * l4 + two * k.kappa3 * lr - self.absorb_constant)
            }
            _ => None,
        };
        Ok(EnergyReport {
            t: self.time,
            step: self.steps,
            x2,
            v1,
            m1,
            m0,
            energy: x2 + m1,
            dual,
            pairing,
            tail_sup,
            identity_residual: self.identity_residual,
            inequality_residual,
            l4,
            lr,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::config::{HistoryProfileKind, RunConfig};
    use crate::dynamics::init::{band_limited, initial_history};
    use crate::memory::PiecewiseLinear;

    fn small(mut c: RunConfig<f64>) -> RunConfig<f64> {
        c.grid.nx = 16;
        c.grid.ny = 9;
        c
    }

    #[test]
    fn equilibrium_stays_zero() {
        let c = small(RunConfig::default());
        let p = c.problem().unwrap();
        let mut sim = Simulation::new(&p, p.grid.zeros(), &HistorySpec::zero(), &c.integration).unwrap();
        for _ in 0..5 {
            sim.step(None).unwrap();
        }
        assert!(sim.state().iter().all(|&v| v == 0.0));
        assert_eq!(sim.energy(), 0.0);
        assert_eq!(sim.time(), 5e-3);
    }

    #[test]
    fn constants_are_invariant() {
        let mut c = small(RunConfig::default());
        c.physics.alpha = 0.0;
        c.physics.beta = 0.0;
        c.make_linear();
        let p = c.problem().unwrap();
        let u0 = p.grid.constant(0.7);
        let h = HistorySpec::single(PiecewiseLinear::linear(), u0.clone()).unwrap();
        let mut sim = Simulation::new(&p, u0.clone(), &h, &c.integration).unwrap();
        for _ in 0..20 {
            sim.step(None).unwrap();
        }
        assert!(sim.state().iter().all(|&v| (v - 0.7).abs() < 1e-13));
        for form in [MemorylessForm::WeakLimit, MemorylessForm::Literal] {
            let mut m = Simulation::memoryless(&p, u0.clone(), form, &c.integration).unwrap();
            m.step(None).unwrap();
            assert!(m.state().iter().all(|&v| (v - 0.7).abs() < 1e-13));
        }
    }

    fn final_state(dt: f64, t_end: f64) -> (StateField<f64>, crate::discretization::Grid<f64>, WentzellOperator<f64>) {
        let mut c = small(RunConfig::linear());
        c.integration.dt = dt;
        let p = c.problem().unwrap();
        let u0 = band_limited(&p.grid, 4, 1.0);
        let h = initial_history(HistoryProfileKind::Saturating(0.5), &u0).unwrap();
        let mut sim = Simulation::new(&p, u0, &h, &c.integration).unwrap();
        let steps = (t_end / dt).round() as usize;
        for _ in 0..steps {
            sim.step(None).unwrap();
        }
        (sim.state().clone(), p.grid.clone(), p.op.clone())
    }

    #[test]
    fn first_order_self_convergence() {
        let t_end = 0.2;
        let (reference, _, op) = final_state(0.0125 / 4.0, t_end);
        let defect = |dt: f64| {
            let (u, _, _) = final_state(dt, t_end);
            let d: Vec<f64> = u.iter().zip(reference.iter()).map(|(a, b)| a - b).collect();
            op.norm(&d, NormKind::X2).unwrap()
        };
        let (coarse, fine) = (defect(0.05), defect(0.025));
        let ratio = coarse / fine;
        assert!((ratio - 2.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn fft_and_cg_agree() {
        let c = small(RunConfig::default());
        let p = c.problem().unwrap();
        let u0 = band_limited(&p.grid, 2, 1.5);
        let mut cg_cfg = c.integration.clone();
        cg_cfg.solver = SolverKind::Cg;
        let mut a = Simulation::new(&p, u0.clone(), &HistorySpec::zero(), &c.integration).unwrap();
        let mut b = Simulation::new(&p, u0, &HistorySpec::zero(), &cg_cfg).unwrap();
        for _ in 0..10 {
            a.step(None).unwrap();
            b.step(None).unwrap();
        }
        let err = a.state().iter().zip(b.state().iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn identity_residual_is_small_and_shrinks() {
        let residual = |dt: f64| {
            let mut c = small(RunConfig::linear());
            c.integration.dt = dt;
            let p = c.problem().unwrap();
            let u0 = band_limited(&p.grid, 9, 1.0);
            let mut sim = Simulation::new(&p, u0, &HistorySpec::zero(), &c.integration).unwrap();
            let mut worst: f64 = 0.0;
            while sim.time() < 0.2 - 1e-12 {
                sim.step(None).unwrap();
                if sim.time() > 0.1 {
                    worst = worst.max(sim.identity_residual().unwrap().abs());
                }
            }
            worst
        };
        let (a, b) = (residual(2e-3), residual(1e-3));
        assert!(b < a && a / b > 1.5, "{a} {b}");
    }

    #[test]
    fn non_finite_state_aborts() {
        let mut c = small(RunConfig::default());
        c.integration.dt = 0.5;
        let p = c.problem().unwrap();
        let u0 = band_limited(&p.grid, 1, 200.0);
        let mut sim = Simulation::new(&p, u0, &HistorySpec::zero(), &c.integration).unwrap();
        let mut err = None;
        for _ in 0..50 {
            if let Err(e) = sim.step(None) {
                err = Some(e);
                break;
            }
        }
        let steps = sim.steps();
        assert!(matches!(err, Some(Error::NonFinite { step, .. }) if step == steps + 1));
        assert!(sim.state().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn report_entries_nonnegative() {
        let mut c = small(RunConfig::default());
        c.integration.history = HistoryMode::Direct;
        let p = c.problem().unwrap();
        let u0 = band_limited(&p.grid, 5, 1.0);
        let h = initial_history(HistoryProfileKind::Linear, &u0).unwrap();
        let mut sim = Simulation::new(&p, u0, &h, &c.integration).unwrap();
        sim.step(None).unwrap();
        let r = sim.report(true).unwrap();
        for v in [r.x2, r.v1, r.m1, r.m0, r.dual.unwrap(), r.tail_sup.unwrap(), r.l4, r.lr] {
            assert!(v >= 0.0);
        }
        assert_eq!(r.energy, r.x2 + r.m1);
        assert!(r.pairing <= 0.0);
    }
}
