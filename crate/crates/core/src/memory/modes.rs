//! Exponential-mode reduction of the history.
//!
//! For each kernel term `lambda exp(-lambda s)` the mode
//! `w = int_0^inf lambda exp(-lambda s) eta(s) ds` obeys `w' = -lambda w + u`, and the
//! quadratic accumulator `Q = int_0^inf exp(-lambda s) q(eta(s)) ds` obeys
//! `Q' = -lambda Q + (2 / lambda) b(w, u)`. Both are advanced exactly for `u`
//! constant over a step, so the M-norms come out without any s-quadrature.

use super::expint::moments;
use super::spec::HistorySpec;
use crate::discretization::{FormParts, WentzellOperator};
use crate::error::{Error, Result};
use crate::kernels::{MemoryKernel, Region};
use crate::scalar::{dot, lit, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct RegionModes<T> {
    region: Region,
    rates: Vec<T>,
    mu: Vec<T>,
    load: Vec<T>,
    w: Vec<Vec<T>>,
    /// Accumulators of the energy form (bulk block or `B`).
    q1: Vec<T>,
    /// Accumulators of the L^2 form.
    q0: Vec<T>,
}

impl<T: Real> RegionModes<T> {
    fn new(kernel: &MemoryKernel<T>, len: usize) -> Self {
        let n = kernel.modes();
        RegionModes {
            region: kernel.region(),
            rates: kernel.rates().to_vec(),
            mu: kernel.mu_coefficients(),
            load: kernel.load_coefficients(),
            w: vec![vec![T::zero(); len]; n],
            q1: vec![T::zero(); n],
            q0: vec![T::zero(); n],
        }
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    pub fn modes(&self) -> &[Vec<T>] {
        &self.w
    }

    /// `sum_k (1 - omega) a_k lambda_k w_k = int mu eta ds`.
    pub fn weighted_sum(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.w.first().map_or(0, Vec::len)];
        for (c, w) in self.load.iter().zip(&self.w) {
            for (o, &x) in out.iter_mut().zip(w) {
                *o = *o + *c * x;
            }
        }
        out
    }

    fn weighted(&self, acc: &[T]) -> T {
        self.mu.iter().zip(acc).map(|(&m, &q)| m * q).sum()
    }

    /// `int mu q(eta) ds` for the energy form.
    pub fn energy(&self) -> T {
        self.weighted(&self.q1)
    }

    pub fn l2(&self) -> T {
        self.weighted(&self.q0)
    }

    /// `int mu' q(eta) ds / 2`, which equals `-int mu b(d_s eta, eta) ds`.
    pub fn pairing(&self) -> T {
        let half: T = lit(0.5);
        -half
            * self
                .mu
                .iter()
                .zip(&self.rates)
                .zip(&self.q1)
                .map(|((&m, &l), &q)| m * l * q)
                .sum::<T>()
    }

    /// Advances with the state held at `u` over `dt`. `ku` is the energy-form
    /// matrix applied to `u`; `l2` evaluates the L^2 pairing.
    fn step(&mut self, u: &[T], ku: &[T], dt: T, l2: impl Fn(&[T], &[T]) -> T) {
        let quu = dot(ku, u);
        let luu = l2(u, u);
        let two: T = lit(2.0);
        for k in 0..self.rates.len() {
            let lambda = self.rates[k];
            let x = lambda * dt;
            let e = (-x).exp();
            let m = moments(x);
            let w = &mut self.w[k];
            let bwu = dot(w, ku);
            let lwu = l2(w, u);
            let self_term = dt * x * m[1] / lambda;
            self.q1[k] = e * self.q1[k] + two / lambda * (bwu * dt * e + quu * self_term);
            self.q0[k] = e * self.q0[k] + two / lambda * (lwu * dt * e + luu * self_term);
            let gain = dt * m[0];
            for (wi, &ui) in w.iter_mut().zip(u) {
                *wi = e * *wi + gain * ui;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeHistory<T> {
    bulk: RegionModes<T>,
    boundary: RegionModes<T>,
    nu: T,
}

impl<T: Real> ModeHistory<T> {
    pub fn zero(op: &WentzellOperator<T>, kernel_bulk: &MemoryKernel<T>, kernel_boundary: &MemoryKernel<T>) -> Result<Self> {
        check_regions(kernel_bulk, kernel_boundary)?;
        let g = op.grid();
        Ok(ModeHistory {
            bulk: RegionModes::new(kernel_bulk, g.nodes()),
            boundary: RegionModes::new(kernel_boundary, g.boundary_nodes()),
            nu: op.params().nu,
        })
    }

    /// Projects an initial history onto the modes and accumulators in closed form.
    pub fn init(
        op: &WentzellOperator<T>,
        kernel_bulk: &MemoryKernel<T>,
        kernel_boundary: &MemoryKernel<T>,
        spec: &HistorySpec<T>,
    ) -> Result<Self> {
        let mut h = Self::zero(op, kernel_bulk, kernel_boundary)?;
        let g = op.grid();
        for (_, field) in spec.terms() {
            g.check(field)?;
        }
        let p = op.params();
        for (k, &lambda) in h.bulk.rates.clone().iter().enumerate() {
            h.bulk.w[k] = spec.exp_moment(lambda, g.nodes()).into_iter().map(|x| x * lambda).collect();
        }
        for (k, &lambda) in h.boundary.rates.clone().iter().enumerate() {
            let full: Vec<T> = spec.exp_moment(lambda, g.nodes()).into_iter().map(|x| x * lambda).collect();
            h.boundary.w[k] = g.trace(&full);
        }
        let terms = spec.terms();
        for (i, (phi_i, gi)) in terms.iter().enumerate() {
            for (j, (phi_j, gj)) in terms.iter().enumerate().skip(i) {
                let parts = FormParts::evaluate(g, gi, gj);
                let prod = phi_i.product(phi_j);
                // off-diagonal pairs appear twice in the double sum
                let mult: T = if i == j { T::one() } else { lit(2.0) };
                let bulk_q1 = p.omega * parts.grad + p.alpha * p.omega * parts.bulk_l2;
                let bnd_q1 = parts.grad_gamma + p.beta * parts.boundary_l2;
                for (k, &lambda) in h.bulk.rates.iter().enumerate() {
                    let m = mult * prod.integrate_exp(lambda);
                    h.bulk.q1[k] = h.bulk.q1[k] + m * bulk_q1;
                    h.bulk.q0[k] = h.bulk.q0[k] + m * parts.bulk_l2;
                }
                for (k, &lambda) in h.boundary.rates.iter().enumerate() {
                    let m = mult * prod.integrate_exp(lambda);
                    h.boundary.q1[k] = h.boundary.q1[k] + m * bnd_q1;
                    h.boundary.q0[k] = h.boundary.q0[k] + m * parts.boundary_l2;
                }
            }
        }
        Ok(h)
    }

    pub fn bulk(&self) -> &RegionModes<T> {
        &self.bulk
    }

    pub fn boundary(&self) -> &RegionModes<T> {
        &self.boundary
    }

    /// Exponential-integrator update with `u` held over the step.
    pub fn step_modes(&mut self, op: &WentzellOperator<T>, u: &[T], dt: T) -> Result<()> {
        let g = op.grid();
        g.check(u)?;
        if !(dt > T::zero()) {
            return Err(Error::InvalidTiming(format!("dt must be positive, got {dt}")));
        }
        let ku = op.bulk_form().apply(g, u);
        self.bulk.step(u, &ku, dt, |a, b| g.bulk_inner(a, b));
        let v = g.trace(u);
        let bv = op.boundary_form().apply(g, &v);
        self.boundary.step(&v, &bv, dt, |a, b| g.trace_inner(a, b));
        Ok(())
    }

    /// Memory load in weak form (the stiffness matrices applied to the mode sums).
    pub fn load_weak(&self, op: &WentzellOperator<T>) -> Vec<T> {
        let g = op.grid();
        let mut out = op.bulk_form().apply(g, &self.bulk.weighted_sum());
        let b = op.boundary_form().apply(g, &self.boundary.weighted_sum());
        g.add_trace(self.nu, &b, &mut out);
        out
    }

    /// `int mu_O A_W^{a,0,0,w} eta + nu int mu_G (0; B xi)` as nodal values.
    pub fn convolution_load(&self, op: &WentzellOperator<T>) -> Vec<T> {
        let mut out = self.load_weak(op);
        for (o, &m) in out.iter_mut().zip(op.mass()) {
            *o = *o / m;
        }
        out
    }

    /// `||Phi||^2_{M^1}`.
    pub fn m1_squared(&self) -> T {
        self.bulk.energy() + self.nu * self.boundary.energy()
    }

    /// `||Phi||^2_{M^0}`.
    pub fn m0_squared(&self) -> T {
        self.bulk.l2() + self.boundary.l2()
    }

    /// `<T Phi, Phi>_{M^1}`.
    pub fn pairing(&self) -> T {
        self.bulk.pairing() + self.nu * self.boundary.pairing()
    }

    pub fn is_finite(&self) -> bool {
        let fin = |r: &RegionModes<T>| {
            r.q1.iter().chain(&r.q0).all(|x| x.is_finite()) && r.w.iter().flatten().all(|x| x.is_finite())
        };
        fin(&self.bulk) && fin(&self.boundary)
    }
}

pub(crate) fn check_regions<T: Real>(bulk: &MemoryKernel<T>, boundary: &MemoryKernel<T>) -> Result<()> {
    if bulk.region() != Region::Bulk {
        return Err(Error::RegionMismatch { expected: "bulk", found: bulk.region().name() });
    }
    if boundary.region() != Region::Boundary {
        return Err(Error::RegionMismatch { expected: "boundary", found: boundary.region().name() });
    }
    Ok(())
}
