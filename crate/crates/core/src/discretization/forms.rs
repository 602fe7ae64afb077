//! Symmetric quadratic forms on the strip.
//!
//! Each form is defined by its energy, a weighted sum of squared differences, and
//! its matrix `K` is the stencil whose quadratic form reproduces that energy exactly.
//! The operator seen by the X^2 inner product is `M^{-1} K`.

use super::grid::Grid;
use crate::scalar::{lit, Real};

/// `E(u) = d_b |grad u|^2_Omega + r_b |u|^2_Omega + d_g |grad_G u|^2_Gamma + r_g |u|^2_Gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StiffnessForm<T> {
    pub bulk_diffusion: T,
    pub bulk_reaction: T,
    pub boundary_diffusion: T,
    pub boundary_reaction: T,
}

impl<T: Real> StiffnessForm<T> {
    pub fn new(bulk_diffusion: T, bulk_reaction: T, boundary_diffusion: T, boundary_reaction: T) -> Self {
        StiffnessForm { bulk_diffusion, bulk_reaction, boundary_diffusion, boundary_reaction }
    }

    pub fn scaled(self, c: T) -> Self {
        StiffnessForm::new(
            c * self.bulk_diffusion,
            c * self.bulk_reaction,
            c * self.boundary_diffusion,
            c * self.boundary_reaction,
        )
    }

    /// Bulk and boundary L^2 masses, i.e. the X^2 quadrature.
    pub fn mass() -> Self {
        StiffnessForm::new(T::zero(), T::one(), T::zero(), T::one())
    }

    /// `out = K u`.
    pub fn apply_into(&self, grid: &Grid<T>, u: &[T], out: &mut [T]) {
        let (nx, ny) = (grid.nx(), grid.ny());
        let (hx, hy) = (grid.hx(), grid.hy());
        let two: T = lit(2.0);
        let cy = self.bulk_diffusion * hx / hy;
        for j in 0..ny {
            let wy = grid.wy(j);
            let cx = self.bulk_diffusion * wy / hx;
            let cr = self.bulk_reaction * hx * wy;
            let boundary = grid.is_boundary_row(j);
            let gx = self.boundary_diffusion / hx;
            let gr = self.boundary_reaction * hx;
            for i in 0..nx {
                let k = grid.index(i, j);
                let left = grid.index((i + nx - 1) % nx, j);
                let right = grid.index((i + 1) % nx, j);
                let lap_x = two * u[k] - u[left] - u[right];
                let mut acc = cx * lap_x + cr * u[k];
                if j > 0 {
                    acc = acc + cy * (u[k] - u[k - nx]);
                }
                if j + 1 < ny {
                    acc = acc + cy * (u[k] - u[k + nx]);
                }
                if boundary {
                    acc = acc + gx * lap_x + gr * u[k];
                }
                out[k] = acc;
            }
        }
    }

    pub fn apply(&self, grid: &Grid<T>, u: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); u.len()];
        self.apply_into(grid, u, &mut out);
        out
    }

    /// The energy evaluated from squared differences, independent of the stencil.
    pub fn energy(&self, grid: &Grid<T>, u: &[T]) -> T {
        self.bilinear(grid, u, u)
    }

    /// Polarized energy `b(u, v)` from products of differences.
    pub fn bilinear(&self, grid: &Grid<T>, u: &[T], v: &[T]) -> T {
        let parts = FormParts::evaluate(grid, u, v);
        self.bulk_diffusion * parts.grad
            + self.bulk_reaction * parts.bulk_l2
            + self.boundary_diffusion * parts.grad_gamma
            + self.boundary_reaction * parts.boundary_l2
    }
}

/// The four elementary bilinear quantities the forms are built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormParts<T> {
    pub grad: T,
    pub bulk_l2: T,
    pub grad_gamma: T,
    pub boundary_l2: T,
}

impl<T: Real> FormParts<T> {
    pub fn evaluate(grid: &Grid<T>, u: &[T], v: &[T]) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let (hx, hy) = (grid.hx(), grid.hy());
        let mut grad_x = T::zero();
        let mut grad_y = T::zero();
        let mut bulk_l2 = T::zero();
        let mut grad_gamma = T::zero();
        let mut boundary_l2 = T::zero();
        for j in 0..ny {
            let mut gx = T::zero();
            let mut l2 = T::zero();
            for i in 0..nx {
                let k = grid.index(i, j);
                let r = grid.index((i + 1) % nx, j);
                gx = gx + (u[r] - u[k]) * (v[r] - v[k]);
                l2 = l2 + u[k] * v[k];
            }
            grad_x = grad_x + gx * grid.wy(j);
            bulk_l2 = bulk_l2 + l2 * grid.wy(j);
            if grid.is_boundary_row(j) {
                grad_gamma = grad_gamma + gx;
                boundary_l2 = boundary_l2 + l2;
            }
            if j + 1 < ny {
                let mut gy = T::zero();
                for i in 0..nx {
                    let k = grid.index(i, j);
                    gy = gy + (u[k + nx] - u[k]) * (v[k + nx] - v[k]);
                }
                grad_y = grad_y + gy;
            }
        }
        FormParts {
            grad: grad_x / hx + grad_y * hx / hy,
            bulk_l2: bulk_l2 * hx,
            grad_gamma: grad_gamma / hx,
            boundary_l2: boundary_l2 * hx,
        }
    }
}

/// `E(v) = d |grad_G v|^2_Gamma + r |v|^2_Gamma` on trace vectors of length `2 nx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryForm<T> {
    pub diffusion: T,
    pub reaction: T,
}

impl<T: Real> BoundaryForm<T> {
    pub fn new(diffusion: T, reaction: T) -> Self {
        BoundaryForm { diffusion, reaction }
    }

    pub fn apply_into(&self, grid: &Grid<T>, v: &[T], out: &mut [T]) {
        let nx = grid.nx();
        let hx = grid.hx();
        let two: T = lit(2.0);
        let cd = self.diffusion / hx;
        let cr = self.reaction * hx;
        for b in 0..2 {
            let base = b * nx;
            for i in 0..nx {
                let k = base + i;
                let lap = two * v[k] - v[base + (i + nx - 1) % nx] - v[base + (i + 1) % nx];
                out[k] = cd * lap + cr * v[k];
            }
        }
    }

    pub fn apply(&self, grid: &Grid<T>, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); v.len()];
        self.apply_into(grid, v, &mut out);
        out
    }

    pub fn bilinear(&self, grid: &Grid<T>, v: &[T], w: &[T]) -> T {
        let nx = grid.nx();
        let mut grad = T::zero();
        let mut l2 = T::zero();
        for b in 0..2 {
            let base = b * nx;
            for i in 0..nx {
                let k = base + i;
                let r = base + (i + 1) % nx;
                grad = grad + (v[r] - v[k]) * (w[r] - w[k]);
                l2 = l2 + v[k] * w[k];
            }
        }
        self.diffusion * grad / grid.hx() + self.reaction * l2 * grid.hx()
    }

    pub fn energy(&self, grid: &Grid<T>, v: &[T]) -> T {
        self.bilinear(grid, v, v)
    }

    /// The same form lifted to full fields: acts on the boundary rows only.
    pub fn lifted(&self) -> StiffnessForm<T> {
        StiffnessForm::new(T::zero(), T::zero(), self.diffusion, self.reaction)
    }
}
