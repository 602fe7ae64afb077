use serde::Serialize;

use crate::discretization::{assemble_wentzell, build_grid, Grid, WentzellOperator};
use crate::error::{Error, Result};
use crate::kernels::{check_smallness, make_exponential_kernel, MemoryKernel, Region, SmallnessFlags};
use crate::scalar::{lit, Real};

use super::nonlinearity::{make_nonlinearity, Nonlinearity, Polynomial};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridConfig<T> {
    pub nx: usize,
    pub ny: usize,
    pub lx: T,
    pub ly: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelConfig<T> {
    pub weights: Vec<T>,
    pub rates: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicsConfig<T> {
    pub alpha: T,
    pub beta: T,
    pub nu: T,
    pub omega: T,
    /// Growth exponent of the boundary nonlinearity.
    pub r: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlinearityConfig<T> {
    /// Ascending coefficients of `f`.
    pub f: Vec<T>,
    /// Ascending coefficients of `g`.
    pub g: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HistoryMode {
    /// Exponential modes only.
    Modes,
    /// Modes plus the cumulative-integral record for diagnostics.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Fft,
    Cg,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrationConfig<T> {
    pub dt: T,
    pub t_end: T,
    /// Steps between energy reports.
    pub report_stride: usize,
    /// Steps between stored state snapshots; 0 disables snapshots.
    pub snapshot_stride: usize,
    pub history: HistoryMode,
    /// Window cutoff: `mu(s_max) <= s_max_tol * mu(0)`.
    pub s_max_tol: T,
    pub solver: SolverKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Zero,
    Constant,
    BandLimited,
}

/// Shape `phi` of the initial history `eta_0(s) = phi(s) u_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HistoryProfileKind<T> {
    Zero,
    /// `phi(s) = s`: the past held at `u_0`.
    Linear,
    /// `phi(s) = min(s, a)`.
    Saturating(T),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialConfig<T> {
    pub generator: Generator,
    pub seed: u64,
    /// X^2 norm of `u_0` (value of the field for `Constant`).
    pub amplitude: T,
    pub history: HistoryProfileKind<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig<T> {
    pub grid: GridConfig<T>,
    pub kernel_bulk: KernelConfig<T>,
    pub kernel_boundary: KernelConfig<T>,
    pub physics: PhysicsConfig<T>,
    pub nonlinearity: NonlinearityConfig<T>,
    pub integration: IntegrationConfig<T>,
    pub initial: InitialConfig<T>,
}

/// One violated constraint, keyed by `section.key`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

impl ConfigIssue {
    fn new(key: &str, message: impl Into<String>) -> Self {
        ConfigIssue { key: key.to_string(), message: message.into() }
    }
}

impl<T: Real> Default for RunConfig<T> {
    fn default() -> Self {
        RunConfig {
            grid: GridConfig { nx: 64, ny: 33, lx: T::PI() + T::PI(), ly: T::one() },
            kernel_bulk: KernelConfig { weights: vec![T::one()], rates: vec![T::one()] },
            kernel_boundary: KernelConfig { weights: vec![T::one()], rates: vec![lit(3.5)] },
            physics: PhysicsConfig { alpha: T::one(), beta: T::one(), nu: lit(0.5), omega: lit(0.5), r: lit(4.0) },
            nonlinearity: NonlinearityConfig {
                f: vec![T::zero(), -T::one(), T::zero(), T::one()],
                g: vec![T::zero(), -T::one(), T::zero(), T::one()],
            },
            integration: IntegrationConfig {
                dt: lit(1e-3),
                t_end: lit(10.0),
                report_stride: 10,
                snapshot_stride: 0,
                history: HistoryMode::Modes,
                s_max_tol: lit(1e-14),
                solver: SolverKind::Fft,
            },
            initial: InitialConfig {
                generator: Generator::BandLimited,
                seed: 1,
                amplitude: T::one(),
                history: HistoryProfileKind::Zero,
            },
        }
    }
}

/// Everything a run needs, built from a validated configuration.
#[derive(Debug)]
pub struct Problem<T: Real> {
    pub grid: Grid<T>,
    pub op: WentzellOperator<T>,
    pub kernel_bulk: MemoryKernel<T>,
    pub kernel_boundary: MemoryKernel<T>,
    pub nonlinearity: Nonlinearity<T>,
    pub smallness: SmallnessFlags,
}

impl<T: Real> RunConfig<T> {
    /// Defaults with `F = 0`: `f = 0` and `g = omega beta s`, so that `g~ = 0`.
    pub fn linear() -> Self {
        let mut c = Self::default();
        c.make_linear();
        c
    }

    pub fn make_linear(&mut self) {
        self.nonlinearity.f = Vec::new();
        self.nonlinearity.g = vec![T::zero(), self.physics.omega * self.physics.beta];
    }

    /// Every violated constraint, not just the first.
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut out = Vec::new();
        let g = &self.grid;
        if g.nx < 4 {
            out.push(ConfigIssue::new("grid.nx", format!("must be >= 4 (got {})", g.nx)));
        }
        if g.ny < 4 {
            out.push(ConfigIssue::new("grid.ny", format!("must be >= 4 (got {})", g.ny)));
        }
        for (key, v) in [("grid.lx", g.lx), ("grid.ly", g.ly)] {
            if !(v > T::zero() && v.is_finite()) {
                out.push(ConfigIssue::new(key, format!("must be positive (got {v})")));
            }
        }
        let p = &self.physics;
        for (key, v) in [("physics.omega", p.omega), ("physics.nu", p.nu)] {
            if !(v > T::zero() && v < T::one()) {
                out.push(ConfigIssue::new(key, format!("must lie in (0, 1) (got {v})")));
            }
        }
        for (key, v) in [("physics.alpha", p.alpha), ("physics.beta", p.beta)] {
            if !(v >= T::zero() && v.is_finite()) {
                out.push(ConfigIssue::new(key, format!("must be >= 0 (got {v})")));
            }
        }
        if !(p.r >= lit(2.0)) {
            out.push(ConfigIssue::new("physics.r", format!("must be >= 2 (got {})", p.r)));
        }
        let omega_ok = p.omega > T::zero() && p.omega < T::one();
        for (section, k, region) in [
            ("kernel.bulk", &self.kernel_bulk, Region::Bulk),
            ("kernel.boundary", &self.kernel_boundary, Region::Boundary),
        ] {
            let omega = if omega_ok { p.omega } else { lit(0.5) };
            if let Err(e) = make_exponential_kernel(region, &k.weights, &k.rates, omega) {
                let key = match e {
                    Error::NonPositiveRate { .. } => "rates",
                    _ => "weights",
                };
                out.push(ConfigIssue::new(&format!("{section}.{key}"), e.to_string()));
            }
        }
        let n = &self.nonlinearity;
        if omega_ok {
            if let Err(Error::Nonlinearity { which, reason }) = make_nonlinearity(
                Polynomial::new(n.f.clone()),
                Polynomial::new(n.g.clone()),
                p.omega,
                p.beta,
                p.r.max(lit(2.0)),
            ) {
                let key = if which == "f" { "nonlinearity.f" } else { "nonlinearity.g" };
                out.push(ConfigIssue::new(key, format!("{which}: {reason}")));
            }
        }
        let i = &self.integration;
        if !(i.dt > T::zero() && i.dt.is_finite()) {
            out.push(ConfigIssue::new("integration.dt", format!("must be positive (got {})", i.dt)));
        }
        if !(i.t_end >= T::zero() && i.t_end.is_finite()) {
            out.push(ConfigIssue::new("integration.t_end", format!("must be >= 0 (got {})", i.t_end)));
        }
        if i.report_stride == 0 {
            out.push(ConfigIssue::new("integration.report_stride", "must be >= 1"));
        }
        if !(i.s_max_tol > T::zero() && i.s_max_tol < T::one()) {
            out.push(ConfigIssue::new("integration.s_max_tol", format!("must lie in (0, 1) (got {})", i.s_max_tol)));
        }
        let init = &self.initial;
        if !(init.amplitude.is_finite()) || (init.generator == Generator::BandLimited && init.amplitude < T::zero()) {
            out.push(ConfigIssue::new("initial.amplitude", format!("must be finite and >= 0 (got {})", init.amplitude)));
        }
        if let HistoryProfileKind::Saturating(a) = init.history {
            if !(a > T::zero()) {
                out.push(ConfigIssue::new("initial.history", format!("saturation level must be positive (got {a})")));
            }
        }
        out
    }

    pub fn steps(&self) -> usize {
        (self.integration.t_end / self.integration.dt).round().to_usize().unwrap_or(0)
    }

    /// Builds grid, operator, kernels and nonlinearity; the first error wins.
    pub fn problem(&self) -> Result<Problem<T>> {
        let g = &self.grid;
        let grid = build_grid(g.nx, g.ny, g.lx, g.ly)?;
        let p = &self.physics;
        if !(p.omega > T::zero() && p.omega < T::one()) {
            return Err(Error::OmegaOutOfRange { omega: crate::scalar::to_f64(p.omega), range: "(0, 1)" });
        }
        let op = assemble_wentzell(&grid, p.alpha, p.beta, p.nu, p.omega)?;
        let kernel_bulk =
            make_exponential_kernel(Region::Bulk, &self.kernel_bulk.weights, &self.kernel_bulk.rates, p.omega)?;
        let kernel_boundary = make_exponential_kernel(
            Region::Boundary,
            &self.kernel_boundary.weights,
            &self.kernel_boundary.rates,
            p.omega,
        )?;
        let nonlinearity = make_nonlinearity(
            Polynomial::new(self.nonlinearity.f.clone()),
            Polynomial::new(self.nonlinearity.g.clone()),
            p.omega,
            p.beta,
            p.r,
        )?;
        let smallness = check_smallness(&kernel_boundary, p.omega, p.nu)?;
        if !(self.integration.dt > T::zero()) {
            return Err(Error::InvalidTiming(format!("dt = {}", self.integration.dt)));
        }
        Ok(Problem { grid, op, kernel_bulk, kernel_boundary, nonlinearity, smallness })
    }
}
