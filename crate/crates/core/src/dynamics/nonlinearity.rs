//! Polynomial nonlinearities and the constants certifying their growth conditions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

/// `p(s) = sum_k c_k s^k`, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| *c == T::zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().copied().unwrap_or(T::zero())
    }

    #[inline]
    pub fn eval(&self, s: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> Self {
        Polynomial::new(
            self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * from_usize(k)).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Self, k: usize| p.coeffs.get(k).copied().unwrap_or(T::zero());
        Polynomial::new((0..n).map(|k| get(self, k) + get(other, k)).collect())
    }

    pub fn scale(&self, c: T) -> Self {
        Polynomial::new(self.coeffs.iter().map(|&x| x * c).collect())
    }

    /// `s p(s)`.
    pub fn times_s(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = vec![T::zero()];
        c.extend_from_slice(&self.coeffs);
        Polynomial::new(c)
    }

    /// `int_0^s p`.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = vec![T::zero()];
        c.extend(self.coeffs.iter().enumerate().map(|(k, &x)| x / from_usize(k + 1)));
        Polynomial::new(c)
    }

    /// `c s^k`.
    pub fn monomial(c: T, k: usize) -> Self {
        let mut v = vec![T::zero(); k + 1];
        v[k] = c;
        Polynomial::new(v)
    }

    /// Bounded below on the real line.
    pub fn bounded_below(&self) -> bool {
        match self.degree() {
            None | Some(0) => true,
            Some(d) => d % 2 == 0 && self.leading() > T::zero(),
        }
    }
}

/// Certified constants of the growth and sign conditions. Entries that cannot be
/// certified on the sampling range are infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonlinearConstants<T> {
    pub kappa1: T,
    pub kappa2: T,
    pub kappa3: T,
    pub kappa4: T,
    pub m_f: T,
    pub m_g: T,
    /// Derivative growth: `|f'(s)| <= l1 (1 + s^2)`.
    pub ell1: T,
    /// `|g'(s)| <= l2 (1 + |s|^d)`.
    pub ell2: T,
    pub d: usize,
    /// `C_1 ... C_8` with the odd-indexed ones fixed to 1.
    pub c: [T; 8],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Nonlinearity<T> {
    f: Polynomial<T>,
    g: Polynomial<T>,
    g_tilde: Polynomial<T>,
    r: T,
    constants: NonlinearConstants<T>,
}

const SAMPLE_RANGE: f64 = 50.0;
const SAMPLES: usize = 20_001;

/// Largest value of `p` on `[-50, 50]`, located by sampling and polished by Newton.
fn sup_on_range<T: Real>(p: &impl Fn(T) -> T, dp: &impl Fn(T) -> T, ddp: &impl Fn(T) -> T) -> T {
    let range: T = lit(SAMPLE_RANGE);
    let step = (range + range) / from_usize(SAMPLES - 1);
    let mut best = (-range, p(-range));
    for k in 1..SAMPLES {
        let s = -range + step * from_usize(k);
        let v = p(s);
        if v > best.1 {
            best = (s, v);
        }
    }
    let (mut s, mut v) = best;
    for _ in 0..30 {
        let h = ddp(s);
        if !(h < T::zero()) {
            break;
        }
        let next = s - dp(s) / h;
        if (next - s).abs() > step || !next.is_finite() {
            break;
        }
        s = next;
        v = v.max(p(s));
    }
    v
}

fn sup_poly<T: Real>(p: &Polynomial<T>) -> T {
    let d1 = p.derivative();
    let d2 = d1.derivative();
    sup_on_range(&|s| p.eval(s), &|s| d1.eval(s), &|s| d2.eval(s))
}

/// `(kappa, sup_s (kappa |s|^exp - p(s) s))` for `p(s) s >= kappa |s|^exp - K`.
fn dissipativity<T: Real>(p: &Polynomial<T>, exp: T) -> (T, T) {
    let ps = p.times_s();
    let Some(deg) = ps.degree() else {
        return (T::zero(), T::zero());
    };
    let lead = ps.leading();
    let deg_t: T = from_usize(deg);
    let kappa = if deg_t > exp {
        lead
    } else if deg_t == exp {
        let rest = ps.add(&Polynomial::monomial(-lead, deg));
        if rest.bounded_below() {
            lead
        } else {
            lead * lit(0.5)
        }
    } else {
        T::zero()
    };
    let is_even_int = exp.fract() == T::zero() && (exp * lit(0.5)).fract() == T::zero();
    let bound = if is_even_int {
        let q = Polynomial::monomial(kappa, exp.to_usize().unwrap_or(0)).add(&ps.scale(-T::one()));
        sup_poly(&q)
    } else {
        let f = |s: T| kappa * s.abs().powf(exp) - ps.eval(s);
        let df = |s: T| kappa * exp * s.abs().powf(exp - T::one()) * s.signum() - ps.derivative().eval(s);
        let ddf = |s: T| {
            kappa * exp * (exp - T::one()) * s.abs().powf(exp - lit(2.0)) - ps.derivative().derivative().eval(s)
        };
        sup_on_range(&f, &df, &ddf)
    };
    (kappa, bound.max(T::zero()))
}

/// `sup_s (-s^2 - q(s))`: the additive constant with the quadratic constant fixed to 1.
fn quadratic_floor<T: Real>(q: &Polynomial<T>) -> T {
    let p = Polynomial::monomial(-T::one(), 2).add(&q.scale(-T::one()));
    if !p.scale(-T::one()).bounded_below() {
        return T::infinity();
    }
    sup_poly(&p).max(T::zero())
}

/// `sup_s |p(s)| / (1 + |s|^e)`; infinite when the degree exceeds `e`.
fn growth<T: Real>(p: &Polynomial<T>, e: usize) -> T {
    if p.degree().is_some_and(|d| d > e) {
        return T::infinity();
    }
    let range: T = lit(SAMPLE_RANGE);
    let step = (range + range) / from_usize(SAMPLES - 1);
    // the ratio tends to |leading| at infinity when the degrees match
    let limit = if p.degree() == Some(e) { p.leading().abs() } else { T::zero() };
    (0..SAMPLES)
        .map(|k| {
            let s = -range + step * from_usize(k);
            p.eval(s).abs() / (T::one() + s.abs().powi(e as i32))
        })
        .fold(limit, T::max)
}

/// `max(0, -min p)` for a polynomial bounded below.
fn negative_floor<T: Real>(p: &Polynomial<T>) -> T {
    if !p.bounded_below() {
        return T::infinity();
    }
    sup_poly(&p.scale(-T::one())).max(T::zero())
}

fn check_leading<T: Real>(which: &'static str, p: &Polynomial<T>) -> Result<()> {
    match p.degree() {
        None => Ok(()),
        Some(d) if d % 2 == 1 && p.leading() > T::zero() => Ok(()),
        Some(d) => Err(Error::Nonlinearity {
            which,
            reason: format!("needs odd degree with positive leading coefficient (degree {d}, leading {})", p.leading()),
        }),
    }
}

/// Builds `F = (f, g - omega beta s)` and certifies its constants.
pub fn make_nonlinearity<T: Real>(f: Polynomial<T>, g: Polynomial<T>, omega: T, beta: T, r: T) -> Result<Nonlinearity<T>> {
    check_leading("f", &f)?;
    check_leading("g", &g)?;
    if !(r >= lit(2.0)) {
        return Err(Error::Nonlinearity { which: "g", reason: format!("boundary exponent r = {r} must be >= 2") });
    }
    let g_tilde = g.add(&Polynomial::monomial(-omega * beta, 1));
    check_leading("g_tilde", &g_tilde)?;
    let (kappa1, kappa2) = dissipativity(&f, lit(4.0));
    let (kappa3, kappa4) = dissipativity(&g_tilde, r);
    let df = f.derivative();
    let dg = g.derivative();
    let d = g.degree().map_or(2, |k| k.saturating_sub(1)).max(2);
    let h_f = df.times_s().primitive();
    let h_g = g_tilde.derivative().times_s().primitive();
    let one = T::one();
    let c = [
        one,
        quadratic_floor(&f.times_s()),
        one,
        quadratic_floor(&g.times_s()),
        one,
        quadratic_floor(&h_f),
        one,
        quadratic_floor(&h_g),
    ];
    let constants = NonlinearConstants {
        kappa1,
        kappa2,
        kappa3,
        kappa4,
        m_f: negative_floor(&df),
        m_g: negative_floor(&dg),
        ell1: growth(&df, 2),
        ell2: growth(&dg, d),
        d,
        c,
    };
    Ok(Nonlinearity { f, g, g_tilde, r, constants })
}

impl<T: Real> Nonlinearity<T> {
    /// `f = g = 0` as polynomials of the effective system: `f = 0`, `g = omega beta s`.
    pub fn linear(omega: T, beta: T) -> Result<Self> {
        make_nonlinearity(Polynomial::zero(), Polynomial::monomial(omega * beta, 1), omega, beta, lit(4.0))
    }

    pub fn f(&self) -> &Polynomial<T> {
        &self.f
    }

    pub fn g(&self) -> &Polynomial<T> {
        &self.g
    }

    pub fn g_tilde(&self) -> &Polynomial<T> {
        &self.g_tilde
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn constants(&self) -> &NonlinearConstants<T> {
        &self.constants
    }

    /// `F` vanishes identically.
    pub fn is_linear(&self) -> bool {
        self.f.is_zero() && self.g_tilde.is_zero()
    }

    /// Growth/sign conditions for the weak class hold with finite constants.
    pub fn weak_class(&self) -> bool {
        let k = &self.constants;
        (self.is_linear() || (k.kappa1 > T::zero() && k.kappa3 > T::zero()))
            && k.kappa2.is_finite()
            && k.kappa4.is_finite()
    }

    /// Additional conditions for the quasi-strong class.
    pub fn quasi_strong_class(&self) -> bool {
        let k = &self.constants;
        self.weak_class()
            && k.m_f.is_finite()
            && k.m_g.is_finite()
            && k.ell1.is_finite()
            && k.ell2.is_finite()
            && k.c.iter().all(|c| c.is_finite())
    }

    pub fn h_f(&self, s: T) -> T {
        self.f.derivative().times_s().primitive().eval(s)
    }

    pub fn h_g(&self, s: T) -> T {
        self.g_tilde.derivative().times_s().primitive().eval(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Polynomial<f64> {
        Polynomial::new(c.to_vec())
    }

    #[test]
    fn polynomial_algebra() {
        let q = p(&[-1.0, 0.0, 0.0, 1.0]);
        assert_eq!(q.eval(2.0), 7.0);
        assert_eq!(q.derivative(), p(&[0.0, 0.0, 3.0]));
        assert_eq!(q.times_s(), p(&[0.0, -1.0, 0.0, 0.0, 1.0]));
        assert_eq!(p(&[0.0, 2.0]).primitive(), p(&[0.0, 0.0, 1.0]));
        assert_eq!(p(&[1.0, 0.0, 0.0]).degree(), Some(0));
        assert!(p(&[]).is_zero());
        assert!(p(&[0.0, 1.0, 1.0]).bounded_below());
        assert!(!p(&[0.0, 0.0, -1.0]).bounded_below());
    }

    #[test]
    fn pure_cubic() {
        let n = make_nonlinearity(p(&[0.0, 0.0, 0.0, 1.0]), p(&[0.0, 0.0, 0.0, 1.0]), 0.5, 0.0, 4.0).unwrap();
        let k = n.constants();
        assert_eq!((k.kappa1, k.kappa2), (1.0, 0.0));
        assert_eq!(k.m_f, 0.0);
    }

    #[test]
    fn default_cubic_constants() {
        let n = make_nonlinearity(p(&[0.0, -1.0, 0.0, 1.0]), p(&[0.0, -1.0, 0.0, 1.0]), 0.5, 1.0, 4.0).unwrap();
        let k = n.constants();
        assert!((k.m_f - 1.0).abs() < 1e-12);
        assert!((k.m_g - 1.0).abs() < 1e-12);
        // s^4 - s^2 >= s^4 / 2 - 1/2
        assert_eq!(k.kappa1, 0.5);
        assert!((k.kappa2 - 0.5).abs() < 1e-10);
        // g~ = s^3 - 1.5 s: kappa4 = 1.5^2 / 2
        assert_eq!(k.kappa3, 0.5);
        assert!((k.kappa4 - 1.125).abs() < 1e-10);
        assert!(n.weak_class() && n.quasi_strong_class());
        // |3s^2 - 1| <= 3 (1 + s^2)
        assert!((k.ell1 - 3.0).abs() < 1e-3);
        // h_f(s) = 3 s^4 / 4 - s^2 / 2
        assert!((n.h_f(2.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_wrong_sign_and_parity() {
        assert!(matches!(
            make_nonlinearity(p(&[0.0, 0.0, 0.0, -1.0]), p(&[]), 0.5, 1.0, 4.0),
            Err(Error::Nonlinearity { which: "f", .. })
        ));
        assert!(make_nonlinearity(p(&[0.0, 0.0, 1.0]), p(&[]), 0.5, 1.0, 4.0).is_err());
    }

    #[test]
    fn linear_run_has_vanishing_forcing() {
        let n = Nonlinearity::linear(0.5, 1.0).unwrap();
        assert!(n.is_linear());
        assert_eq!(n.g_tilde().coeffs(), &[] as &[f64]);
        let k = n.constants();
        assert_eq!((k.kappa1, k.kappa2, k.kappa3, k.kappa4), (0.0, 0.0, 0.0, 0.0));
        assert!(n.weak_class());
    }

    #[test]
    fn quintic_growth_not_certified() {
        let n = make_nonlinearity(p(&[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]), p(&[0.0, 0.0, 0.0, 1.0]), 0.5, 1.0, 4.0).unwrap();
        assert!(n.constants().ell1.is_infinite());
        assert!(n.weak_class());
        assert!(!n.quasi_strong_class());
    }
}
