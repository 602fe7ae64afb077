use serde::Serialize;

use super::forms::{BoundaryForm, StiffnessForm};
use super::grid::Grid;
use super::solver::StripSolver;
use crate::error::{Error, Result};
use crate::scalar::{dot, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormKind {
    X2,
    V1,
    Vminus1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WentzellParams<T> {
    pub alpha: T,
    pub beta: T,
    pub nu: T,
    pub omega: T,
}

impl<T: Real> WentzellParams<T> {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name, v: T| {
            if v >= T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::ParameterDomain { name, value: to_f64(v), constraint: ">= 0" })
            }
        };
        let unit = |name, v: T| {
            if v > T::zero() && v < T::one() {
                Ok(())
            } else {
                Err(Error::ParameterDomain { name, value: to_f64(v), constraint: "(0, 1)" })
            }
        };
        nonneg("alpha", self.alpha)?;
        nonneg("beta", self.beta)?;
        unit("nu", self.nu)?;
        unit("omega", self.omega)
    }
}

/// Discrete Wentzell operator and the quadratic forms derived from it.
#[derive(Debug, Clone)]
pub struct WentzellOperator<T: Real> {
    grid: Grid<T>,
    params: WentzellParams<T>,
    mass: Vec<T>,
    gram: Option<StripSolver<T>>,
}

pub fn assemble_wentzell<T: Real>(
    grid: &Grid<T>,
    alpha: T,
    beta: T,
    nu: T,
    omega: T,
) -> Result<WentzellOperator<T>> {
    let params = WentzellParams { alpha, beta, nu, omega };
    params.validate()?;
    let gram = match StripSolver::new(grid, &v1_form(alpha, beta), T::zero()) {
        Ok(s) => Some(s),
        Err(Error::IndefiniteGram) => None,
        Err(e) => return Err(e),
    };
    Ok(WentzellOperator { grid: grid.clone(), params, mass: grid.mass(), gram })
}

/// Gram form of the V^1 norm.
pub fn v1_form<T: Real>(alpha: T, beta: T) -> StiffnessForm<T> {
    StiffnessForm::new(T::one(), alpha, T::one(), beta)
}

impl<T: Real> WentzellOperator<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn params(&self) -> WentzellParams<T> {
        self.params
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    /// `A_W^{alpha,beta,nu,omega}`.
    pub fn full_form(&self) -> StiffnessForm<T> {
        let p = self.params;
        StiffnessForm::new(p.omega, p.alpha * p.omega, p.nu, p.nu * p.beta)
    }

    /// `A_W^{alpha,0,0,omega}`: the bulk block carrying the memory flux.
    pub fn bulk_form(&self) -> StiffnessForm<T> {
        let p = self.params;
        StiffnessForm::new(p.omega, p.alpha * p.omega, T::zero(), T::zero())
    }

    /// `A_W^{0,beta,nu,omega}`: the instantaneous part treated implicitly.
    pub fn dynamic_form(&self) -> StiffnessForm<T> {
        let p = self.params;
        StiffnessForm::new(p.omega, T::zero(), p.nu, p.nu * p.beta)
    }

    /// `B = -Delta_Gamma + beta` on trace vectors.
    pub fn boundary_form(&self) -> BoundaryForm<T> {
        BoundaryForm::new(T::one(), self.params.beta)
    }

    pub fn v1_form(&self) -> StiffnessForm<T> {
        v1_form(self.params.alpha, self.params.beta)
    }

    /// Nodal values of `A_W U`, i.e. `M^{-1} K U`.
    pub fn apply(&self, u: &[T]) -> Result<Vec<T>> {
        self.apply_form(&self.full_form(), u)
    }

    pub fn apply_form(&self, form: &StiffnessForm<T>, u: &[T]) -> Result<Vec<T>> {
        self.grid.check(u)?;
        let mut out = form.apply(&self.grid, u);
        for (o, &m) in out.iter_mut().zip(&self.mass) {
            *o = *o / m;
        }
        Ok(out)
    }

    /// `B v` as nodal values on the trace.
    pub fn apply_boundary(&self, v: &[T]) -> Result<Vec<T>> {
        self.grid.check_boundary(v)?;
        let hx = self.grid.hx();
        Ok(self.boundary_form().apply(&self.grid, v).into_iter().map(|x| x / hx).collect())
    }

    pub fn inner_x2(&self, u: &[T], v: &[T]) -> Result<T> {
        self.grid.check(u)?;
        self.grid.check(v)?;
        Ok(u.iter().zip(v).zip(&self.mass).map(|((&a, &b), &m)| a * b * m).sum())
    }

    pub fn norm_squared(&self, u: &[T], which: NormKind) -> Result<T> {
        self.grid.check(u)?;
        match which {
            NormKind::X2 => self.inner_x2(u, u),
            NormKind::V1 => Ok(self.v1_form().energy(&self.grid, u)),
            NormKind::Vminus1 => {
                let gram = self.gram.as_ref().ok_or(Error::IndefiniteGram)?;
                let mu: Vec<T> = u.iter().zip(&self.mass).map(|(&a, &m)| a * m).collect();
                let g = gram.solve(&mu);
                Ok(dot(&g, &mu).max(T::zero()))
            }
        }
    }

    pub fn norm(&self, u: &[T], which: NormKind) -> Result<T> {
        self.norm_squared(u, which).map(T::sqrt)
    }
}

/// X^2 inner product on a bare grid.
pub fn inner_x2<T: Real>(grid: &Grid<T>, u: &[T], v: &[T]) -> Result<T> {
    grid.check(u)?;
    grid.check(v)?;
    Ok(u.iter().zip(v).zip(&grid.mass()).map(|((&a, &b), &m)| a * b * m).sum())
}

/// Norm of `u` with the V^1 weights `alpha`, `beta`.
pub fn norm<T: Real>(grid: &Grid<T>, u: &[T], which: NormKind, alpha: T, beta: T) -> Result<T> {
    grid.check(u)?;
    match which {
        NormKind::X2 => inner_x2(grid, u, u).map(T::sqrt),
        NormKind::V1 => Ok(v1_form(alpha, beta).energy(grid, u).sqrt()),
        NormKind::Vminus1 => {
            if !(alpha > T::zero() || beta > T::zero()) {
                return Err(Error::IndefiniteGram);
            }
            let gram = StripSolver::new(grid, &v1_form(alpha, beta), T::zero())?;
            let mu: Vec<T> = u.iter().zip(&grid.mass()).map(|(&a, &m)| a * m).collect();
            Ok(dot(&gram.solve(&mu), &mu).max(T::zero()).sqrt())
        }
    }
}
