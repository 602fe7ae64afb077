//! Scalar profiles in the history variable `s`: piecewise linear initial-history
//! shapes and piecewise quadratic integrands, both integrated exactly against
//! exponentials.

use super::expint::exp_poly_integral;
use crate::kernels::MemoryKernel;
use crate::scalar::{lit, Real};

/// Continuous piecewise linear function on `[0, inf)`, extended linearly past the
/// last knot with `tail_slope`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear<T> {
    knots: Vec<T>,
    values: Vec<T>,
    tail_slope: T,
}

impl<T: Real> PiecewiseLinear<T> {
    /// Knots must start at 0 and increase strictly.
    pub fn new(knots: Vec<T>, values: Vec<T>, tail_slope: T) -> Option<Self> {
        let ok = !knots.is_empty()
            && knots.len() == values.len()
            && knots[0] == T::zero()
            && knots.windows(2).all(|w| w[1] > w[0])
            && values.iter().all(|v| v.is_finite())
            && tail_slope.is_finite();
        ok.then_some(PiecewiseLinear { knots, values, tail_slope })
    }

    pub fn zero() -> Self {
        PiecewiseLinear { knots: vec![T::zero()], values: vec![T::zero()], tail_slope: T::zero() }
    }

    pub fn constant(c: T) -> Self {
        PiecewiseLinear { knots: vec![T::zero()], values: vec![c], tail_slope: T::zero() }
    }

    /// `phi(s) = s`.
    pub fn linear() -> Self {
        PiecewiseLinear { knots: vec![T::zero()], values: vec![T::zero()], tail_slope: T::one() }
    }

    /// `phi(s) = min(s, a)`.
    pub fn saturating(a: T) -> Self {
        PiecewiseLinear { knots: vec![T::zero(), a], values: vec![T::zero(), a], tail_slope: T::zero() }
    }

    /// `c phi`.
    pub fn scaled(&self, c: T) -> Self {
        PiecewiseLinear {
            knots: self.knots.clone(),
            values: self.values.iter().map(|&v| c * v).collect(),
            tail_slope: c * self.tail_slope,
        }
    }

    pub fn at_zero(&self) -> T {
        self.values[0]
    }

    pub fn eval(&self, s: T) -> T {
        let n = self.knots.len();
        if s >= self.knots[n - 1] {
            return self.values[n - 1] + self.tail_slope * (s - self.knots[n - 1]);
        }
        let k = self.knots.partition_point(|&x| x <= s).max(1) - 1;
        let (a, b) = (self.knots[k], self.knots[k + 1]);
        let th = (s - a) / (b - a);
        self.values[k] + th * (self.values[k + 1] - self.values[k])
    }

    /// Local linear pieces `(start, end, value at start, slope)`.
    fn pieces(&self) -> Vec<(T, T, T, T)> {
        let n = self.knots.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n - 1 {
            let (a, b) = (self.knots[k], self.knots[k + 1]);
            out.push((a, b, self.values[k], (self.values[k + 1] - self.values[k]) / (b - a)));
        }
        out.push((self.knots[n - 1], T::infinity(), self.values[n - 1], self.tail_slope));
        out
    }

    pub fn to_quadratic(&self) -> PiecewiseQuadratic<T> {
        let mut q = PiecewiseQuadratic::new();
        for (a, b, v, m) in self.pieces() {
            q.push(a, b, [v, m, T::zero()]);
        }
        q
    }

    /// Pointwise product as a piecewise quadratic on the merged knots.
    pub fn product(&self, other: &Self) -> PiecewiseQuadratic<T> {
        self.product_with(other, false, false)
    }

    /// Product of `self` or its derivative with `other` or its derivative.
    pub fn product_with(&self, other: &Self, d_self: bool, d_other: bool) -> PiecewiseQuadratic<T> {
        let mut knots: Vec<T> = self.knots.iter().chain(&other.knots).copied().collect();
        knots.sort_by(|a, b| a.partial_cmp(b).expect("finite knots"));
        knots.dedup();
        let pick = |(v, m): (T, T), d: bool| if d { (m, T::zero()) } else { (v, m) };
        let mut q = PiecewiseQuadratic::new();
        for (k, &a) in knots.iter().enumerate() {
            let b = knots.get(k + 1).copied().unwrap_or(T::infinity());
            let (p0, p1) = pick(self.local(a, b), d_self);
            let (r0, r1) = pick(other.local(a, b), d_other);
            q.push(a, b, [p0 * r0, p0 * r1 + p1 * r0, p1 * r1]);
        }
        q
    }

    /// Value and slope on `[a, b]`, which must lie inside one piece.
    fn local(&self, a: T, b: T) -> (T, T) {
        let v = self.eval(a);
        let slope = if b.is_infinite() {
            let n = self.knots.len();
            if a >= self.knots[n - 1] {
                self.tail_slope
            } else {
                (self.eval(self.knots[n - 1]) - v) / (self.knots[n - 1] - a)
            }
        } else {
            (self.eval(b) - v) / (b - a)
        };
        (v, slope)
    }

    /// `int_0^inf exp(-lambda s) phi(s) ds`.
    pub fn exp_moment(&self, lambda: T) -> T {
        self.to_quadratic().integrate_exp(lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub start: T,
    pub end: T,
    /// `p(s) = c0 + c1 (s - start) + c2 (s - start)^2`.
    pub coeffs: [T; 3],
}

impl<T: Real> Segment<T> {
    fn eval(&self, s: T) -> T {
        let d = s - self.start;
        self.coeffs[0] + d * (self.coeffs[1] + d * self.coeffs[2])
    }

    /// The same polynomial re-expanded about `new_start`.
    fn recentered(&self, new_start: T, new_end: T) -> Self {
        let d = new_start - self.start;
        let two: T = lit(2.0);
        Segment {
            start: new_start,
            end: new_end,
            coeffs: [self.eval(new_start), self.coeffs[1] + two * self.coeffs[2] * d, self.coeffs[2]],
        }
    }
}

/// Sum of quadratic pieces on (possibly unbounded) intervals; zero elsewhere.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PiecewiseQuadratic<T> {
    segments: Vec<Segment<T>>,
}

impl<T: Real> PiecewiseQuadratic<T> {
    pub fn new() -> Self {
        PiecewiseQuadratic { segments: Vec::new() }
    }

    pub fn push(&mut self, start: T, end: T, coeffs: [T; 3]) {
        if end > start {
            self.segments.push(Segment { start, end, coeffs });
        }
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn eval(&self, s: T) -> T {
        self.segments
            .iter()
            .filter(|g| s >= g.start && s < g.end)
            .map(|g| g.eval(s))
            .sum()
    }

    /// Adds `scale * other`.
    pub fn add_scaled(&mut self, scale: T, other: &Self) {
        self.segments.extend(other.segments.iter().map(|g| Segment {
            start: g.start,
            end: g.end,
            coeffs: g.coeffs.map(|c| c * scale),
        }));
    }

    /// `p(s - t)` supported on `[t, inf)`.
    pub fn shifted(&self, t: T) -> Self {
        PiecewiseQuadratic {
            segments: self
                .segments
                .iter()
                .map(|g| Segment { start: g.start + t, end: g.end + t, coeffs: g.coeffs })
                .collect(),
        }
    }

    pub fn integrate_exp(&self, lambda: T) -> T {
        self.integrate_exp_range(lambda, T::zero(), T::infinity())
    }

    /// `int_lo^hi exp(-lambda s) p(s) ds`.
    pub fn integrate_exp_range(&self, lambda: T, lo: T, hi: T) -> T {
        self.segments
            .iter()
            .filter_map(|g| {
                let a = g.start.max(lo);
                let b = g.end.min(hi);
                (b > a).then(|| {
                    let seg = if a > g.start { g.recentered(a, b) } else { *g };
                    exp_poly_integral(lambda, a, b - a, seg.coeffs)
                })
            })
            .sum()
    }

    /// `int_lo^hi mu(s) p(s) ds` for the kernel's memory weight.
    pub fn integrate_mu(&self, kernel: &MemoryKernel<T>, lo: T, hi: T) -> T {
        kernel
            .mu_coefficients()
            .iter()
            .zip(kernel.rates())
            .map(|(&c, &l)| c * self.integrate_exp_range(l, lo, hi))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Region;

    #[test]
    fn eval_shapes() {
        let s = PiecewiseLinear::saturating(1.0);
        assert_eq!(s.eval(0.5), 0.5);
        assert_eq!(s.eval(3.0), 1.0);
        assert_eq!(PiecewiseLinear::linear().eval(4.0), 4.0);
        let p = PiecewiseLinear::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0], -1.0).unwrap();
        assert_eq!(p.eval(2.0), 1.0);
        assert_eq!(p.eval(4.0), -1.0);
        assert!(PiecewiseLinear::new(vec![0.0, 0.0], vec![0.0, 1.0], 0.0).is_none());
        assert!(PiecewiseLinear::new(vec![0.5], vec![0.0], 0.0).is_none());
    }

    #[test]
    fn saturating_moment() {
        // int lambda e^{-lambda s} min(s,1) ds with lambda = 1 is 1 - e^{-1}
        let m = PiecewiseLinear::saturating(1.0).exp_moment(1.0);
        assert!((m - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn product_and_tail_function_example() {
        // int_0^1 e^{-s} s^2 + int_1^inf e^{-s} = 2 - 4/e
        let phi = PiecewiseLinear::saturating(1.0);
        let q = phi.product(&phi);
        let k = MemoryKernel::single(Region::Bulk, 1.0, 0.0).unwrap();
        let whole = q.integrate_mu(&k, 0.0, f64::INFINITY);
        let expected = 2.0 - 4.0 * (-1.0f64).exp();
        assert!((whole - expected).abs() < 1e-15);
        assert!((expected - 0.528482).abs() < 1e-6);
        let split = q.integrate_mu(&k, 0.0, 0.5) + q.integrate_mu(&k, 0.5, f64::INFINITY);
        assert!((split - whole).abs() < 1e-15);
    }

    #[test]
    fn product_matches_pointwise() {
        let a = PiecewiseLinear::new(vec![0.0, 0.7, 2.0], vec![0.0, 1.0, -0.5], 0.3).unwrap();
        let b = PiecewiseLinear::saturating(1.3);
        let q = a.product(&b);
        for i in 0..50 {
            let s = i as f64 * 0.11;
            assert!((q.eval(s) - a.eval(s) * b.eval(s)).abs() < 1e-13, "s = {s}");
        }
    }

    #[test]
    fn derivative_products() {
        let a = PiecewiseLinear::saturating(2.0);
        let b = PiecewiseLinear::linear();
        let q = a.product_with(&b, true, false);
        assert_eq!(q.eval(1.5), 1.5);
        assert_eq!(q.eval(2.5), 0.0);
        let d = a.product_with(&b, true, true);
        assert_eq!(d.eval(0.5), 1.0);
        assert_eq!(d.eval(3.0), 0.0);
    }

    #[test]
    fn shift_moves_support() {
        let q = PiecewiseLinear::linear().to_quadratic().shifted(2.0);
        assert_eq!(q.eval(1.0), 0.0);
        assert_eq!(q.eval(3.5), 1.5);
        // int_2^inf e^{-s} (s - 2) = e^{-2}
        assert!((q.integrate_exp(1.0) - (-2.0f64).exp()).abs() < 1e-15);
    }
}
