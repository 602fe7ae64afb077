//! Direct solver for `(a M + K) x = b` on the strip.
//!
//! The forms have x-independent coefficients, so a DFT along each row diagonalizes
//! the x-coupling and leaves one real symmetric tridiagonal system in y per
//! wavenumber. The Thomas factors are computed once at construction.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::forms::StiffnessForm;
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

#[derive(Clone)]
pub struct StripSolver<T: Real> {
    nx: usize,
    ny: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    off: T,
    /// Thomas factors, indexed `j * nx + k`.
    inv_pivot: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> fmt::Debug for StripSolver<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StripSolver").field("nx", &self.nx).field("ny", &self.ny).finish()
    }
}

impl<T: Real> StripSolver<T> {
    /// Factorizes `shift * M + K_form`; fails with `IndefiniteGram` when singular.
    pub fn new(grid: &Grid<T>, form: &StiffnessForm<T>, shift: T) -> Result<Self> {
        let (nx, ny) = (grid.nx(), grid.ny());
        let (hx, hy) = (grid.hx(), grid.hy());
        let two: T = lit(2.0);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(nx);
        let inverse = planner.plan_fft_inverse(nx);
        let cy = form.bulk_diffusion * hx / hy;
        let off = -cy;
        let mass = grid.mass();
        let mut inv_pivot = vec![T::zero(); nx * ny];
        let mut upper = vec![T::zero(); nx * ny];
        let mut scale = T::zero();
        for k in 0..nx {
            let theta = two * T::PI() * from_usize::<T>(k) / from_usize::<T>(nx);
            // eigenvalue of the periodic difference 2u_i - u_{i-1} - u_{i+1}
            let lap = two - two * theta.cos();
            let mut prev_upper = T::zero();
            for j in 0..ny {
                let wy = grid.wy(j);
                let mut diag = shift * mass[grid.index(0, j)]
                    + form.bulk_diffusion * wy / hx * lap
                    + form.bulk_reaction * hx * wy;
                let neighbours = if j == 0 || j + 1 == ny { 1.0 } else { 2.0 };
                diag = diag + cy * lit(neighbours);
                if grid.is_boundary_row(j) {
                    diag = diag + form.boundary_diffusion / hx * lap + form.boundary_reaction * hx;
                }
                scale = scale.max(diag.abs());
                let pivot = if j == 0 { diag } else { diag - off * prev_upper };
                if !(pivot.abs() > scale * lit(1e-11)) {
                    return Err(Error::IndefiniteGram);
                }
                let inv = T::one() / pivot;
                inv_pivot[j * nx + k] = inv;
                prev_upper = off * inv;
                upper[j * nx + k] = prev_upper;
            }
        }
        Ok(StripSolver { nx, ny, forward, inverse, off, inv_pivot, upper })
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); rhs.len()];
        self.solve_into(rhs, &mut out);
        out
    }

    pub fn solve_into(&self, rhs: &[T], out: &mut [T]) {
        let (nx, ny) = (self.nx, self.ny);
        let mut spec: Vec<Complex<T>> = rhs.iter().map(|&r| Complex::new(r, T::zero())).collect();
        for row in spec.chunks_exact_mut(nx) {
            self.forward.process(row);
        }
        for k in 0..nx {
            let mut prev = Complex::new(T::zero(), T::zero());
            for j in 0..ny {
                let idx = j * nx + k;
                let d = (spec[idx] - prev * self.off) * self.inv_pivot[idx];
                spec[idx] = d;
                prev = d;
            }
            for j in (0..ny - 1).rev() {
                let idx = j * nx + k;
                let next = spec[idx + nx];
                spec[idx] = spec[idx] - next * self.upper[idx];
            }
        }
        let norm = T::one() / from_usize::<T>(nx);
        for (row, dst) in spec.chunks_exact_mut(nx).zip(out.chunks_exact_mut(nx)) {
            self.inverse.process(row);
            for (o, c) in dst.iter_mut().zip(row.iter()) {
                *o = c.re * norm;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::grid::build_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn residual(grid: &Grid<f64>, form: &StiffnessForm<f64>, shift: f64, x: &[f64], b: &[f64]) -> f64 {
        let kx = form.apply(grid, x);
        let m = grid.mass();
        let r: f64 = (0..x.len()).map(|i| (shift * m[i] * x[i] + kx[i] - b[i]).powi(2)).sum();
        let bn: f64 = b.iter().map(|v| v * v).sum();
        (r / bn).sqrt()
    }

    #[test]
    fn solves_shifted_system() {
        let g = build_grid(16, 9, 6.0, 1.0).unwrap();
        let form = StiffnessForm::new(0.5, 0.0, 0.5, 0.5);
        let solver = StripSolver::new(&g, &form, 1e-3f64.recip()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b: Vec<f64> = (0..g.nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = solver.solve(&b);
        assert!(residual(&g, &form, 1e3, &x, &b) < 1e-13);
    }

    #[test]
    fn solves_unshifted_definite_system() {
        let g = build_grid(8, 6, 1.0, 2.0).unwrap();
        let form = StiffnessForm::new(1.0, 0.0, 1.0, 2.0);
        let solver = StripSolver::new(&g, &form, 0.0).unwrap();
        let b: Vec<f64> = (0..g.nodes()).map(|k| (k as f64 * 0.37).sin()).collect();
        let x = solver.solve(&b);
        assert!(residual(&g, &form, 0.0, &x, &b) < 1e-12);
    }

    #[test]
    fn singular_form_rejected() {
        let g = build_grid(8, 6, 1.0, 1.0).unwrap();
        let form = StiffnessForm::new(1.0, 0.0, 1.0, 0.0);
        assert!(matches!(StripSolver::new(&g, &form, 0.0), Err(Error::IndefiniteGram)));
    }

    #[test]
    fn f32_solve() {
        let g = build_grid(8, 5, 1.0f32, 1.0).unwrap();
        let form = StiffnessForm::new(1.0f32, 1.0, 1.0, 1.0);
        let s = StripSolver::new(&g, &form, 0.0).unwrap();
        let b = g.mass();
        let x = s.solve(&b);
        // constants are eigenvectors: K 1 = M 1, so x = 1
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-5));
    }
}
