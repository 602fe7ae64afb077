//! Jacobi-preconditioned conjugate gradients for `(a M + K) x = b`.

use super::forms::StiffnessForm;
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, lit, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome<T> {
    pub iterations: usize,
    pub residual: T,
}

impl<T: Real> StiffnessForm<T> {
    /// Diagonal entries of the stencil matrix.
    pub fn diagonal(&self, grid: &Grid<T>) -> Vec<T> {
        let (hx, hy) = (grid.hx(), grid.hy());
        let two: T = lit(2.0);
        let cy = self.bulk_diffusion * hx / hy;
        let mut d = Vec::with_capacity(grid.nodes());
        for j in 0..grid.ny() {
            let wy = grid.wy(j);
            let neighbours: T = if j == 0 || j + 1 == grid.ny() { T::one() } else { two };
            let mut v = two * self.bulk_diffusion * wy / hx + self.bulk_reaction * hx * wy + cy * neighbours;
            if grid.is_boundary_row(j) {
                v = v + two * self.boundary_diffusion / hx + self.boundary_reaction * hx;
            }
            d.extend(std::iter::repeat_n(v, grid.nx()));
        }
        d
    }
}

/// Solves `(shift M + K) x = b` starting from `x`, to relative residual `tol`.
pub fn cg_solve<T: Real>(
    grid: &Grid<T>,
    form: &StiffnessForm<T>,
    shift: T,
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> Result<CgOutcome<T>> {
    let n = b.len();
    let mass = grid.mass();
    let precond: Vec<T> = form
        .diagonal(grid)
        .iter()
        .zip(&mass)
        .map(|(&d, &m)| T::one() / (d + shift * m))
        .collect();
    let apply = |v: &[T], out: &mut [T]| {
        form.apply_into(grid, v, out);
        for ((o, &vi), &mi) in out.iter_mut().zip(v).zip(&mass) {
            *o = *o + shift * mi * vi;
        }
    };
    let b_norm = dot(b, b).sqrt();
    if b_norm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(CgOutcome { iterations: 0, residual: T::zero() });
    }
    let mut r = vec![T::zero(); n];
    apply(x, &mut r);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<T> = r.iter().zip(&precond).map(|(&a, &p)| a * p).collect();
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        let res = dot(&r, &r).sqrt() / b_norm;
        if res <= tol {
            return Ok(CgOutcome { iterations: it, residual: res });
        }
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        for ((zi, &ri), &pi) in z.iter_mut().zip(&r).zip(&precond) {
            *zi = ri * pi;
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, &zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    let res = dot(&r, &r).sqrt() / b_norm;
    if res <= tol {
        Ok(CgOutcome { iterations: max_iter, residual: res })
    } else {
        Err(Error::SolverNonConvergence { residual: to_f64(res), iterations: max_iter })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::grid::build_grid;
    use crate::discretization::solver::StripSolver;

    #[test]
    fn diagonal_matches_unit_vectors() {
        let g = build_grid(6, 5, 1.0f64, 1.0).unwrap();
        let form = StiffnessForm::new(0.3, 0.7, 1.1, 0.2);
        let d = form.diagonal(&g);
        for k in [0, 7, 14, 29] {
            let mut e = vec![0.0; g.nodes()];
            e[k] = 1.0;
            assert!((form.apply(&g, &e)[k] - d[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn agrees_with_strip_solver() {
        let g = build_grid(32, 17, std::f64::consts::TAU, 1.0).unwrap();
        let form = StiffnessForm::new(0.5, 0.0, 0.5, 0.5);
        let b: Vec<f64> = (0..g.nodes()).map(|k| ((k * 7 % 13) as f64 - 6.0) / 6.0).collect();
        let direct = StripSolver::new(&g, &form, 100.0).unwrap().solve(&b);
        let mut x = vec![0.0; g.nodes()];
        let out = cg_solve(&g, &form, 100.0, &b, &mut x, 1e-13, 2000).unwrap();
        assert!(out.residual <= 1e-13);
        let err = x.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = direct.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(err <= 1e-11 * scale, "{err}");
    }

    #[test]
    fn non_convergence_reported() {
        let g = build_grid(32, 17, 1.0, 1.0).unwrap();
        let form = StiffnessForm::new(1.0, 0.0, 1.0, 1.0);
        let b = vec![1.0; g.nodes()];
        let mut x = vec![0.0; g.nodes()];
        let e = cg_solve(&g, &form, 0.0, &b, &mut x, 1e-14, 2).unwrap_err();
        assert!(matches!(e, Error::SolverNonConvergence { iterations: 2, .. }));
    }
}
