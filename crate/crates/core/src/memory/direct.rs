//! History kept as the cumulative integral `I(t) = int_0^t u`.
//!
//! With `u` constant on each step, `eta^t(s) = I(t) - I(t - s)` is piecewise linear in
//! `s` between records, and for `s > t` it continues as `eta_0(s - t) + I(t)`. All
//! s-integrals against exponentials are therefore evaluated exactly per interval.

use std::collections::VecDeque;
use std::io::{self, Write};

use rayon::prelude::*;

use super::expint::moments;
use super::profile::{PiecewiseLinear, PiecewiseQuadratic};
use super::spec::HistorySpec;
use crate::discretization::{FormParts, Grid, WentzellOperator, WentzellParams};
use crate::error::{Error, Result};
use crate::kernels::MemoryKernel;
use crate::scalar::{lit, Real};

const NODE_CHUNK: usize = 256;

#[derive(Debug, Clone)]
pub struct DirectHistory<T> {
    nodes: usize,
    times: VecDeque<T>,
    cumulative: VecDeque<Vec<T>>,
    initial: HistorySpec<T>,
    s_max: T,
    truncated: bool,
}

impl<T: Real> DirectHistory<T> {
    pub fn new(grid: &Grid<T>, initial: HistorySpec<T>, s_max: T) -> Result<Self> {
        for (_, g) in initial.terms() {
            grid.check(g)?;
        }
        let mut times = VecDeque::new();
        times.push_back(T::zero());
        let mut cumulative = VecDeque::new();
        cumulative.push_back(vec![T::zero(); grid.nodes()]);
        Ok(DirectHistory { nodes: grid.nodes(), times, cumulative, initial, s_max, truncated: false })
    }

    /// Window length so that `mu(s_max) <= tol mu(0)` for both kernels.
    pub fn window_for(kernel_bulk: &MemoryKernel<T>, kernel_boundary: &MemoryKernel<T>, tol: T) -> T {
        kernel_bulk.cutoff(tol).max(kernel_boundary.cutoff(tol))
    }

    pub fn time(&self) -> T {
        *self.times.back().expect("at least one record")
    }

    pub fn records(&self) -> usize {
        self.times.len()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Oldest `s` still covered by the records.
    pub fn covered(&self) -> T {
        self.time() - self.times[0]
    }

    pub fn initial(&self) -> &HistorySpec<T> {
        &self.initial
    }

    /// Appends `I(t + dt) = I(t) + dt u` and evicts records older than the window.
    pub fn step_direct(&mut self, u: &[T], dt: T) -> Result<()> {
        if u.len() != self.nodes {
            return Err(Error::GridMismatch { expected: self.nodes, found: u.len() });
        }
        if !(dt > T::zero()) {
            return Err(Error::InvalidTiming(format!("dt must be positive, got {dt}")));
        }
        let last = self.cumulative.back().expect("at least one record");
        let next: Vec<T> = last.iter().zip(u).map(|(&i, &v)| i + dt * v).collect();
        let t = self.time() + dt;
        self.times.push_back(t);
        self.cumulative.push_back(next);
        while self.times.len() > 2 && t - self.times[1] >= self.s_max {
            self.times.pop_front();
            self.cumulative.pop_front();
            self.truncated = true;
        }
        Ok(())
    }

    fn current(&self) -> &[T] {
        self.cumulative.back().expect("at least one record")
    }

    /// `eta^t(s)` as a field.
    pub fn eta(&self, s: T) -> Result<Vec<T>> {
        if !(s >= T::zero()) {
            return Err(Error::NegativeTime { s: crate::scalar::to_f64(s) });
        }
        let t = self.time();
        let it = self.current();
        if s <= self.covered() {
            let tau = t - s;
            let k = self.times.partition_point(|&x| x <= tau).clamp(1, self.times.len() - 1);
            let (t0, t1) = (self.times[k - 1], self.times[k]);
            let th = (tau - t0) / (t1 - t0);
            let (a, b) = (&self.cumulative[k - 1], &self.cumulative[k]);
            Ok(it.iter().zip(a).zip(b).map(|((&c, &x), &y)| c - (x + th * (y - x))).collect())
        } else if !self.truncated {
            let phi = self.initial.eval(s - t, self.nodes);
            Ok(phi.iter().zip(it).map(|(&p, &c)| p + c).collect())
        } else {
            Ok(it.iter().zip(&self.cumulative[0]).map(|(&c, &x)| c - x).collect())
        }
    }

    /// `int_0^inf mu(s) eta(s) ds` as a field, exact per interval.
    pub fn mu_integral(&self, kernel: &MemoryKernel<T>) -> Vec<T> {
        let n = self.times.len();
        let t = self.time();
        let mut weights = vec![T::zero(); n];
        let mut current_weight = T::zero();
        let mut tail_initial = vec![T::zero(); self.nodes];
        for (&c, &lambda) in kernel.mu_coefficients().iter().zip(kernel.rates()) {
            for m in 0..n - 1 {
                let h = self.times[m + 1] - self.times[m];
                let sa = t - self.times[m + 1];
                let e = moments(lambda * h);
                let scale = c * (-lambda * sa).exp() * h;
                current_weight = current_weight + scale * e[0];
                weights[m + 1] = weights[m + 1] - scale * (e[0] - e[1]);
                weights[m] = weights[m] - scale * e[1];
            }
            let s_last = t - self.times[0];
            let tail = c * (-lambda * s_last).exp() / lambda;
            current_weight = current_weight + tail;
            weights[0] = weights[0] - tail;
            if !self.truncated {
                let mom = self.initial.exp_moment(lambda, self.nodes);
                let f = c * (-lambda * t).exp();
                for (o, &x) in tail_initial.iter_mut().zip(&mom) {
                    *o = *o + f * x;
                }
            }
        }
        let mut out = tail_initial;
        let current = self.current();
        // node chunks are independent; the record order within a chunk is fixed
        out.par_chunks_mut(NODE_CHUNK).enumerate().for_each(|(c, chunk)| {
            let base = c * NODE_CHUNK;
            for (k, o) in chunk.iter_mut().enumerate() {
                *o = *o + current_weight * current[base + k];
            }
            for (w, rec) in weights.iter().zip(&self.cumulative) {
                for (k, o) in chunk.iter_mut().enumerate() {
                    *o = *o + *w * rec[base + k];
                }
            }
        });
        out
    }

    /// Memory load in weak form, from s-integration of the history.
    pub fn load_weak(
        &self,
        op: &WentzellOperator<T>,
        kernel_bulk: &MemoryKernel<T>,
        kernel_boundary: &MemoryKernel<T>,
    ) -> Vec<T> {
        let g = op.grid();
        let mut out = op.bulk_form().apply(g, &self.mu_integral(kernel_bulk));
        let xi = g.trace(&self.mu_integral(kernel_boundary));
        let b = op.boundary_form().apply(g, &xi);
        g.add_trace(op.params().nu, &b, &mut out);
        out
    }

    pub fn convolution_load(
        &self,
        op: &WentzellOperator<T>,
        kernel_bulk: &MemoryKernel<T>,
        kernel_boundary: &MemoryKernel<T>,
    ) -> Vec<T> {
        let mut out = self.load_weak(op, kernel_bulk, kernel_boundary);
        for (o, &m) in out.iter_mut().zip(op.mass()) {
            *o = *o / m;
        }
        out
    }

    /// Scalar s-profiles of every quadratic quantity of the history.
    pub fn profiles(&self, op: &WentzellOperator<T>) -> HistoryProfiles<T> {
        let g = op.grid();
        let p = op.params();
        let mut out = HistoryProfiles::default();
        let t = self.time();
        let it = self.current();
        let n = self.times.len();
        let intervals: Vec<_> = (0..n - 1)
            .into_par_iter()
            .map(|m| {
                let h = self.times[m + 1] - self.times[m];
                let sa = t - self.times[m + 1];
                let (im, im1) = (&self.cumulative[m], &self.cumulative[m + 1]);
                let eta_a: Vec<T> = it.iter().zip(im1).map(|(&c, &x)| c - x).collect();
                let delta: Vec<T> = im1.iter().zip(im).map(|(&x, &y)| x - y).collect();
                let aa = FormParts::evaluate(g, &eta_a, &eta_a);
                let ad = FormParts::evaluate(g, &eta_a, &delta);
                let dd = FormParts::evaluate(g, &delta, &delta);
                (sa, h, aa, ad, dd)
            })
            .collect();
        for (sa, h, aa, ad, dd) in &intervals {
            out.push_interval(&p, *sa, *h, aa, ad, dd);
        }
        let s_last = t - self.times[0];
        if self.truncated {
            let eta: Vec<T> = it.iter().zip(&self.cumulative[0]).map(|(&c, &x)| c - x).collect();
            let parts = FormParts::evaluate(g, &eta, &eta);
            out.push_constant(&p, s_last, &parts);
        } else {
            let mut terms: Vec<(PiecewiseLinear<T>, &[T])> =
                self.initial.terms().iter().map(|(phi, f)| (phi.clone(), &f[..])).collect();
            terms.push((PiecewiseLinear::constant(T::one()), it));
            out.push_initial(&p, t, &terms, g);
        }
        out
    }

    /// Rows `(s, ||eta(s)||_{L2(Omega)}, ||xi(s)||_{L2(Gamma)})` at the record nodes.
    pub fn snapshot(&self, grid: &Grid<T>) -> Vec<[T; 3]> {
        let t = self.time();
        let it = self.current();
        self.times
            .iter()
            .zip(&self.cumulative)
            .rev()
            .map(|(&tm, rec)| {
                let eta: Vec<T> = it.iter().zip(rec).map(|(&c, &x)| c - x).collect();
                [t - tm, grid.bulk_inner(&eta, &eta).sqrt(), grid.boundary_inner(&eta, &eta).sqrt()]
            })
            .collect()
    }

    pub fn write_snapshot_csv<W: Write>(&self, grid: &Grid<T>, mut out: W) -> io::Result<()> {
        writeln!(out, "s,eta_l2_bulk,xi_l2_boundary")?;
        for [s, a, b] in self.snapshot(grid) {
            writeln!(out, "{s},{a},{b}")?;
        }
        Ok(())
    }
}

/// Quadratic quantities of the history as functions of `s`, one per region.
#[derive(Debug, Clone, Default)]
pub struct HistoryProfiles<T> {
    /// `<A_W^{a,0,0,w} eta, eta>`.
    pub bulk_energy: PiecewiseQuadratic<T>,
    pub bulk_l2: PiecewiseQuadratic<T>,
    /// `<B xi, xi>`.
    pub boundary_energy: PiecewiseQuadratic<T>,
    pub boundary_l2: PiecewiseQuadratic<T>,
    /// `b(d_s eta, eta)` for the energy forms.
    pub bulk_pairing: PiecewiseQuadratic<T>,
    pub boundary_pairing: PiecewiseQuadratic<T>,
    /// `b(d_s eta, d_s eta)` for the energy forms.
    pub bulk_slope: PiecewiseQuadratic<T>,
    pub boundary_slope: PiecewiseQuadratic<T>,
}

fn split<T: Real>(p: &WentzellParams<T>, f: &FormParts<T>) -> [T; 4] {
    [
        p.omega * f.grad + p.alpha * p.omega * f.bulk_l2,
        f.bulk_l2,
        f.grad_gamma + p.beta * f.boundary_l2,
        f.boundary_l2,
    ]
}

impl<T: Real> HistoryProfiles<T> {
    fn quadratics(&mut self) -> [&mut PiecewiseQuadratic<T>; 4] {
        [&mut self.bulk_energy, &mut self.bulk_l2, &mut self.boundary_energy, &mut self.boundary_l2]
    }

    fn push_interval(
        &mut self,
        p: &WentzellParams<T>,
        sa: T,
        h: T,
        aa: &FormParts<T>,
        ad: &FormParts<T>,
        dd: &FormParts<T>,
    ) {
        let (aa, ad, dd) = (split(p, aa), split(p, ad), split(p, dd));
        let two: T = lit(2.0);
        let h2 = h * h;
        for (k, q) in self.quadratics().into_iter().enumerate() {
            q.push(sa, sa + h, [aa[k], two * ad[k] / h, dd[k] / h2]);
        }
        self.bulk_pairing.push(sa, sa + h, [ad[0] / h, dd[0] / h2, T::zero()]);
        self.boundary_pairing.push(sa, sa + h, [ad[2] / h, dd[2] / h2, T::zero()]);
        self.bulk_slope.push(sa, sa + h, [dd[0] / h2, T::zero(), T::zero()]);
        self.boundary_slope.push(sa, sa + h, [dd[2] / h2, T::zero(), T::zero()]);
    }

    fn push_constant(&mut self, p: &WentzellParams<T>, from: T, parts: &FormParts<T>) {
        let v = split(p, parts);
        for (k, q) in self.quadratics().into_iter().enumerate() {
            q.push(from, T::infinity(), [v[k], T::zero(), T::zero()]);
        }
    }

    fn push_initial(&mut self, p: &WentzellParams<T>, t: T, terms: &[(PiecewiseLinear<T>, &[T])], g: &Grid<T>) {
        for (phi_i, gi) in terms {
            for (phi_j, gj) in terms {
                let v = split(p, &FormParts::evaluate(g, gi, gj));
                let value = phi_i.product(phi_j).shifted(t);
                for (k, q) in self.quadratics().into_iter().enumerate() {
                    q.add_scaled(v[k], &value);
                }
                let pairing = phi_i.product_with(phi_j, true, false).shifted(t);
                self.bulk_pairing.add_scaled(v[0], &pairing);
                self.boundary_pairing.add_scaled(v[2], &pairing);
                let slope = phi_i.product_with(phi_j, true, true).shifted(t);
                self.bulk_slope.add_scaled(v[0], &slope);
                self.boundary_slope.add_scaled(v[2], &slope);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble_wentzell, build_grid};
    use crate::kernels::Region;

    fn grid() -> Grid<f64> {
        build_grid(6, 5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn constant_input_gives_min_s_t() {
        let g = grid();
        let mut h = DirectHistory::new(&g, HistorySpec::zero(), 100.0).unwrap();
        let one = g.constant(1.0);
        for _ in 0..8 {
            h.step_direct(&one, 0.25).unwrap();
        }
        assert_eq!(h.time(), 2.0);
        assert!(h.eta(1.0).unwrap().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(h.eta(3.0).unwrap().iter().all(|&v| (v - 2.0).abs() < 1e-15));
        assert!(h.eta(0.6).unwrap().iter().all(|&v| (v - 0.6).abs() < 1e-15));
    }

    #[test]
    fn transports_initial_history() {
        let g = grid();
        let spec = HistorySpec::single(PiecewiseLinear::linear(), g.constant(1.0)).unwrap();
        let mut h = DirectHistory::new(&g, spec, 100.0).unwrap();
        for _ in 0..4 {
            h.step_direct(&g.zeros(), 0.5).unwrap();
        }
        assert_eq!(h.eta(1.0).unwrap()[0], 0.0);
        assert!((h.eta(5.0).unwrap()[3] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn window_eviction() {
        let g = grid();
        let mut h = DirectHistory::new(&g, HistorySpec::zero(), 1.0).unwrap();
        for _ in 0..30 {
            h.step_direct(&g.constant(1.0), 0.1).unwrap();
        }
        assert!(h.is_truncated());
        assert!(h.covered() >= 1.0 - 1e-12 && h.covered() < 1.1 + 1e-12);
        assert!(h.records() <= 12);
    }

    #[test]
    fn mu_integral_of_constant_input() {
        // eta = min(s, t), mu = e^{-s}: int_0^t s e^{-s} + t e^{-t}
        let g = grid();
        let k = MemoryKernel::single(Region::Bulk, 1.0, 0.0).unwrap();
        let mut h = DirectHistory::new(&g, HistorySpec::zero(), 50.0).unwrap();
        for _ in 0..20 {
            h.step_direct(&g.constant(1.0), 0.1).unwrap();
        }
        let t = 2.0f64;
        let exact = 1.0 - (-t).exp() * (1.0 + t) + t * (-t).exp();
        let v = h.mu_integral(&k);
        assert!(v.iter().all(|&x| (x - exact).abs() < 1e-14), "{} vs {exact}", v[0]);
    }

    #[test]
    fn snapshot_csv_header() {
        let g = grid();
        let mut h = DirectHistory::new(&g, HistorySpec::zero(), 10.0).unwrap();
        h.step_direct(&g.constant(2.0), 0.5).unwrap();
        let mut buf = Vec::new();
        h.write_snapshot_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("s,eta_l2_bulk,xi_l2_boundary"));
        assert_eq!(lines.next(), Some("0,0,0"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn profiles_match_pointwise_energies() {
        let g = build_grid(8, 6, 2.0, 1.0).unwrap();
        let op = assemble_wentzell(&g, 1.0, 0.5, 0.5, 0.5).unwrap();
        let spec = HistorySpec::single(PiecewiseLinear::saturating(0.3), g.from_fn(|x, y| x * y)).unwrap();
        let mut h = DirectHistory::new(&g, spec, 50.0).unwrap();
        for n in 0..10 {
            let u = g.from_fn(|x, y| (x + n as f64 * 0.3).sin() * (1.0 + y));
            h.step_direct(&u, 0.05).unwrap();
        }
        let prof = h.profiles(&op);
        for &s in &[0.01, 0.26, 0.49, 0.6, 0.75, 2.0] {
            let eta = h.eta(s).unwrap();
            let e = op.bulk_form().energy(&g, &eta);
            let b = op.boundary_form().energy(&g, &g.trace(&eta));
            assert!((prof.bulk_energy.eval(s) - e).abs() < 1e-12 * e.max(1.0), "s={s}");
            assert!((prof.boundary_energy.eval(s) - b).abs() < 1e-12 * b.max(1.0), "s={s}");
            assert!((prof.bulk_l2.eval(s) - g.bulk_inner(&eta, &eta)).abs() < 1e-12);
        }
    }
}
