use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Periodic strip `[0, Lx) x [0, Ly]`: `nx` periodic nodes in x, `ny` nodes in y with the
/// first and last rows forming the two boundary circles.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    nx: usize,
    ny: usize,
    lx: T,
    ly: T,
    hx: T,
    hy: T,
}

pub fn build_grid<T: Real>(nx: usize, ny: usize, lx: T, ly: T) -> Result<Grid<T>> {
    let positive = |v: T| v > T::zero() && v.is_finite();
    if nx < 4 || ny < 4 || !positive(lx) || !positive(ly) {
        return Err(Error::DegenerateGrid { nx, ny, lx: to_f64(lx), ly: to_f64(ly) });
    }
    Ok(Grid { nx, ny, lx, ly, hx: lx / from_usize(nx), hy: ly / from_usize(ny - 1) })
}

impl<T: Real> Grid<T> {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> T {
        self.lx
    }

    pub fn ly(&self) -> T {
        self.ly
    }

    pub fn hx(&self) -> T {
        self.hx
    }

    pub fn hy(&self) -> T {
        self.hy
    }

    pub fn nodes(&self) -> usize {
        self.nx * self.ny
    }

    /// Number of trace values (both boundary circles).
    pub fn boundary_nodes(&self) -> usize {
        2 * self.nx
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn is_boundary_row(&self, j: usize) -> bool {
        j == 0 || j + 1 == self.ny
    }

    /// Row index of the `b`-th boundary circle (0 = bottom, 1 = top).
    #[inline]
    pub fn boundary_row(&self, b: usize) -> usize {
        if b == 0 {
            0
        } else {
            self.ny - 1
        }
    }

    pub fn x(&self, i: usize) -> T {
        from_usize::<T>(i) * self.hx
    }

    pub fn y(&self, j: usize) -> T {
        from_usize::<T>(j) * self.hy
    }

    /// Trapezoid weight in y.
    #[inline]
    pub fn wy(&self, j: usize) -> T {
        if self.is_boundary_row(j) {
            self.hy * lit(0.5)
        } else {
            self.hy
        }
    }

    pub fn area(&self) -> T {
        self.lx * self.ly
    }

    pub fn perimeter(&self) -> T {
        self.lx + self.lx
    }

    /// Diagonal X^2 mass: bulk quadrature weight plus the surface weight on boundary rows.
    pub fn mass(&self) -> Vec<T> {
        let mut m = Vec::with_capacity(self.nodes());
        for j in 0..self.ny {
            let w = self.hx * self.wy(j) + if self.is_boundary_row(j) { self.hx } else { T::zero() };
            m.extend(std::iter::repeat_n(w, self.nx));
        }
        m
    }

    pub fn zeros(&self) -> StateField<T> {
        StateField(vec![T::zero(); self.nodes()])
    }

    pub fn constant(&self, c: T) -> StateField<T> {
        StateField(vec![c; self.nodes()])
    }

    pub fn from_fn(&self, f: impl Fn(T, T) -> T) -> StateField<T> {
        let mut v = Vec::with_capacity(self.nodes());
        for j in 0..self.ny {
            for i in 0..self.nx {
                v.push(f(self.x(i), self.y(j)));
            }
        }
        StateField(v)
    }

    pub fn check(&self, values: &[T]) -> Result<()> {
        if values.len() != self.nodes() {
            return Err(Error::GridMismatch { expected: self.nodes(), found: values.len() });
        }
        Ok(())
    }

    pub fn check_boundary(&self, values: &[T]) -> Result<()> {
        if values.len() != self.boundary_nodes() {
            return Err(Error::GridMismatch { expected: self.boundary_nodes(), found: values.len() });
        }
        Ok(())
    }

    /// Copies the two boundary rows into a trace vector of length `2 nx`.
    pub fn trace(&self, u: &[T]) -> Vec<T> {
        let top = self.index(0, self.ny - 1);
        let mut v = Vec::with_capacity(self.boundary_nodes());
        v.extend_from_slice(&u[..self.nx]);
        v.extend_from_slice(&u[top..top + self.nx]);
        v
    }

    /// Adds `scale * v` into the boundary rows of `u`.
    pub fn add_trace(&self, scale: T, v: &[T], u: &mut [T]) {
        let top = self.index(0, self.ny - 1);
        for i in 0..self.nx {
            u[i] = u[i] + scale * v[i];
            u[top + i] = u[top + i] + scale * v[self.nx + i];
        }
    }

    /// `sum_bulk u v` with the bulk weights only.
    pub fn bulk_inner(&self, u: &[T], v: &[T]) -> T {
        (0..self.ny)
            .map(|j| {
                let row = self.index(0, j)..self.index(0, j) + self.nx;
                let s: T = u[row.clone()].iter().zip(&v[row]).map(|(&a, &b)| a * b).sum();
                s * self.hx * self.wy(j)
            })
            .sum()
    }

    /// Boundary inner product of two trace vectors.
    pub fn trace_inner(&self, v: &[T], w: &[T]) -> T {
        let s: T = v.iter().zip(w).map(|(&a, &b)| a * b).sum();
        s * self.hx
    }

    /// Boundary inner product read directly off the boundary rows of full fields.
    pub fn boundary_inner(&self, u: &[T], v: &[T]) -> T {
        let top = self.index(0, self.ny - 1);
        let s: T = (0..self.nx).map(|i| u[i] * v[i] + u[top + i] * v[top + i]).sum();
        s * self.hx
    }

    /// `int_Omega |u|^p` by the bulk quadrature.
    pub fn bulk_power(&self, u: &[T], p: i32) -> T {
        (0..self.ny)
            .map(|j| {
                let row = self.index(0, j)..self.index(0, j) + self.nx;
                let s: T = u[row].iter().map(|&a| a.abs().powi(p)).sum();
                s * self.hx * self.wy(j)
            })
            .sum()
    }

    /// `int_Gamma |u|^p`.
    pub fn boundary_power(&self, u: &[T], p: T) -> T {
        let top = self.index(0, self.ny - 1);
        let s: T = (0..self.nx).map(|i| u[i].abs().powf(p) + u[top + i].abs().powf(p)).sum();
        s * self.hx
    }
}

/// Nodal values on the closed strip; the boundary rows are the trace component.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateField<T>(pub Vec<T>);

impl<T> StateField<T> {
    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> Deref for StateField<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for StateField<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T> From<Vec<T>> for StateField<T> {
    fn from(v: Vec<T>) -> Self {
        StateField(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spacings() {
        let g = build_grid(64, 33, 2.0 * PI, 1.0).unwrap();
        assert_eq!(g.hx(), 2.0 * PI / 64.0);
        assert_eq!(g.hy(), 1.0 / 32.0);
        assert_eq!(g.nodes(), 64 * 33);
        assert!((g.area() - 2.0 * PI).abs() < 1e-15);
        assert!((g.perimeter() - 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn minimal_and_degenerate() {
        let g = build_grid(4, 4, 1.0, 1.0).unwrap();
        assert_eq!(g.hy(), 1.0 / 3.0);
        assert!(matches!(build_grid(2, 33, 1.0, 1.0), Err(Error::DegenerateGrid { .. })));
        assert!(build_grid(8, 3, 1.0, 1.0).is_err());
        assert!(build_grid(8, 8, 0.0, 1.0).is_err());
        assert!(build_grid(8, 8, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn mass_totals_domain_plus_boundary() {
        let g = build_grid(16, 9, 2.0 * PI, 1.0).unwrap();
        let total: f64 = g.mass().iter().sum();
        assert!((total - 6.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn trace_round_trip() {
        let g = build_grid(5, 4, 1.0, 1.0).unwrap();
        let u: Vec<f64> = (0..g.nodes()).map(|k| k as f64).collect();
        let v = g.trace(&u);
        assert_eq!(v, vec![0.0, 1.0, 2.0, 3.0, 4.0, 15.0, 16.0, 17.0, 18.0, 19.0]);
        let mut w = vec![0.0; g.nodes()];
        g.add_trace(2.0, &v, &mut w);
        assert_eq!(w[16], 32.0);
        assert_eq!(w[7], 0.0);
        assert!((g.trace_inner(&v, &v) - g.boundary_inner(&u, &u)).abs() < 1e-12);
    }
}
