//! Constants, fitted rates and verdicts computed from trajectories.

use num_traits::{Num, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Which of the three candidates attains `c0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum C0Term {
    /// `2 omega`.
    Diffusion,
    /// `beta nu (2 - m_G / 2)`.
    Boundary,
    /// `delta`.
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C0Constant<T> {
    pub value: T,
    pub active: C0Term,
}

/// `c0 = min{2 omega, beta nu (2 - m_G / 2), delta}`; ties resolve to the earlier term.
pub fn c0_constant<T: Real>(omega: T, beta: T, nu: T, delta: T, m_gamma: T) -> Result<C0Constant<T>> {
    let two: T = lit(2.0);
    let candidates = [
        (two * omega, C0Term::Diffusion),
        (beta * nu * (two - m_gamma / two), C0Term::Boundary),
        (delta, C0Term::Kernel),
    ];
    let (value, active) = candidates
        .into_iter()
        .fold(candidates[0], |best, c| if c.0 < best.0 { c } else { best });
    if !(value > T::zero()) {
        return Err(Error::NonPositiveDecayConstant { value: to_f64(value) });
    }
    Ok(C0Constant { value, active })
}

/// How the plateau `P0` is estimated before the log-linear fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlateauMode<T> {
    /// `P0 = 0` (linear runs).
    Zero,
    /// Mean of the final 10% of the series.
    TailMean,
    Fixed(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit<T> {
    pub rate: T,
    pub plateau: T,
    /// RMS residual of the log-linear fit.
    pub residual: T,
    pub rows_used: usize,
    pub c0: Option<T>,
    /// `rate / c0`.
    pub margin: Option<T>,
}

impl<T: Real> DecayFit<T> {
    pub fn is_decaying(&self) -> bool {
        self.rate > T::zero()
    }
}

pub const MIN_FIT_ROWS: usize = 20;

/// Least-squares fit of `log(E - P0)` against `t`. A non-decaying series yields a
/// nonpositive rate rather than an error.
pub fn fit_decay_rate<T: Real>(series: &[(T, T)], plateau: PlateauMode<T>, c0: Option<T>) -> Result<DecayFit<T>> {
    if series.len() < MIN_FIT_ROWS {
        return Err(Error::InsufficientData { needed: MIN_FIT_ROWS, found: series.len() });
    }
    let scale = series.iter().fold(T::zero(), |m, r| m.max(r.1.abs()));
    let (p0, rows, threshold) = match plateau {
        PlateauMode::Zero => (T::zero(), series, T::min_positive_value()),
        PlateauMode::Fixed(p) => (p, series, lit::<T>(1e-12) * scale),
        PlateauMode::TailMean => {
            let tail_len = (series.len() / 10).max(1);
            let cut = series.len() - tail_len;
            let tail = &series[cut..];
            let mean = tail.iter().map(|r| r.1).sum::<T>() / from_usize(tail_len);
            let (lo, hi) = tail.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), r| (lo.min(r.1), hi.max(r.1)));
            // rows within the tail's own spread carry no information on the rate
            (mean, &series[..cut], lit::<T>(10.0) * (hi - lo) + lit::<T>(1e-12) * scale)
        }
    };
    let pts: Vec<(T, T)> = rows
        .iter()
        .filter(|r| r.1 - p0 > threshold)
        .map(|r| (r.0, (r.1 - p0).ln()))
        .collect();
    let margin = |rate: T| c0.map(|c| rate / c);
    if pts.len() < 2 {
        return Ok(DecayFit { rate: T::zero(), plateau: p0, residual: T::nan(), rows_used: pts.len(), c0, margin: margin(T::zero()) });
    }
    let n: T = from_usize(pts.len());
    let mt = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum::<T>();
    let sxy = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum::<T>();
    let slope = sxy / sxx;
    let residual = (pts
        .iter()
        .map(|p| {
            let e = p.1 - (my + slope * (p.0 - mt));
            e * e
        })
        .sum::<T>()
        / n)
        .sqrt();
    let rate = -slope;
    Ok(DecayFit { rate, plateau: p0, residual, rows_used: pts.len(), c0, margin: margin(rate) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// `X^2 x M^1`.
    Strong,
    /// `V^-1 x M^0`.
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzEstimate<T> {
    pub metric: Metric,
    /// `max_t log(|D(t)| / |D(0)|) / t`.
    pub c_hat: T,
    /// Time at which the maximum is attained.
    pub t_max: T,
}

/// Exponent of the smallest `exp(C t)` envelope through the first row.
pub fn lipschitz_estimate<T: Real>(rows: &[(T, T)], metric: Metric) -> Result<LipschitzEstimate<T>> {
    let &(t0, d0) = rows.first().ok_or(Error::InsufficientData { needed: 2, found: 0 })?;
    if rows.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, found: rows.len() });
    }
    if !(d0 > T::zero()) {
        return Err(Error::ZeroInitialDifference);
    }
    let (t_max, c_hat) = rows[1..]
        .iter()
        .filter(|r| r.0 > t0)
        .map(|&(t, d)| (t, (d / d0).ln() / (t - t0)))
        .fold((t0, T::neg_infinity()), |best, c| if c.1 > best.1 { c } else { best });
    Ok(LipschitzEstimate { metric, c_hat, t_max })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contraction<T> {
    pub t_star: T,
    /// `|Lambda(t*)|_dual / |D(0)|_dual`.
    pub kappa: T,
    /// `|Xi(t*)|_strong / |D(0)|_dual`.
    pub lambda_const: T,
    pub pass: bool,
}

/// Verdict from the norms at `t*`; equal data give `kappa = Lambda = 0`.
pub fn contraction_check<T: Real>(initial_dual: T, linear_dual: T, smoothing_strong: T, t_star: T) -> Contraction<T> {
    let half: T = lit(0.5);
    if initial_dual == T::zero() {
        return Contraction { t_star, kappa: T::zero(), lambda_const: T::zero(), pass: true };
    }
    let kappa = linear_dual / initial_dual;
    let lambda_const = smoothing_strong / initial_dual;
    Contraction { t_star, kappa, lambda_const, pass: kappa < half && lambda_const.is_finite() }
}

/// `t* = max{t0, (2 / m0) ln 4}`.
pub fn split_time<T: Real>(m0: T, t0: T) -> Result<T> {
    if !(m0 > T::zero()) {
        return Err(Error::NonPositiveInput { name: "m0", value: to_f64(m0) });
    }
    let four: T = lit(4.0);
    Ok((lit::<T>(2.0) / m0 * four.ln()).max(t0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transitivity<N> {
    /// `C C1 + C2`.
    pub c: N,
    /// `alpha1 alpha2 / (K + alpha1 + alpha2)`.
    pub alpha: N,
}

fn check_input<N: Num + PartialOrd + ToPrimitive>(name: &'static str, v: &N, strict: bool) -> Result<()> {
    let ok = if strict { *v > N::zero() } else { *v >= N::zero() };
    if ok {
        Ok(())
    } else {
        Err(Error::NonPositiveInput { name, value: v.to_f64().unwrap_or(f64::NAN) })
    }
}

/// Constants of the composed exponential attraction. Prefactors may vanish; the
/// rates and `K` must be positive.
pub fn transitivity_rate<N>(c: N, k: N, c1: N, alpha1: N, c2: N, alpha2: N) -> Result<Transitivity<N>>
where
    N: Num + PartialOrd + ToPrimitive + Clone,
{
    check_input("C", &c, false)?;
    check_input("K", &k, true)?;
    check_input("C1", &c1, false)?;
    check_input("alpha1", &alpha1, true)?;
    check_input("C2", &c2, false)?;
    check_input("alpha2", &alpha2, true)?;
    let denom = k + alpha1.clone() + alpha2.clone();
    Ok(Transitivity { c: c * c1 + c2, alpha: alpha1 * alpha2 / denom })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbsorbingEntry<T> {
    /// First time with `E <= radius^2`, interpolated linearly between rows.
    pub t_entry: Option<T>,
    /// Later excursions above `radius^2 (1 + tol)`.
    pub reentry_violations: usize,
}

pub fn absorbing_entry<T: Real>(series: &[(T, T)], radius: T, tol: T) -> Result<AbsorbingEntry<T>> {
    if !(radius > T::zero()) {
        return Err(Error::NonPositiveInput { name: "radius", value: to_f64(radius) });
    }
    let r2 = radius * radius;
    let Some(k) = series.iter().position(|r| r.1 <= r2) else {
        return Ok(AbsorbingEntry { t_entry: None, reentry_violations: 0 });
    };
    let t_entry = if k == 0 {
        series[0].0
    } else {
        let (t0, e0) = series[k - 1];
        let (t1, e1) = series[k];
        t0 + (t1 - t0) * (e0 - r2) / (e0 - e1)
    };
    let limit = r2 * (T::one() + tol);
    let mut violations = 0;
    let mut outside = false;
    for r in &series[k..] {
        let above = r.1 > limit;
        if above && !outside {
            violations += 1;
        }
        outside = above;
    }
    Ok(AbsorbingEntry { t_entry: Some(t_entry), reentry_violations: violations })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryScaling<T> {
    /// `d t_entry / d ln R` between successive radii.
    pub slopes: Vec<T>,
    /// No slope exceeds the first by more than the tolerance.
    pub sub_affine: bool,
}

/// Checks that entry times grow at most affinely in `ln R`.
pub fn entry_time_scaling<T: Real>(radii: &[T], entries: &[T], tol: T) -> Result<EntryScaling<T>> {
    if radii.len() != entries.len() || radii.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, found: radii.len().min(entries.len()) });
    }
    for &r in radii {
        if !(r > T::zero()) {
            return Err(Error::NonPositiveInput { name: "radius", value: to_f64(r) });
        }
    }
    let slopes: Vec<T> = radii
        .windows(2)
        .zip(entries.windows(2))
        .map(|(r, e)| (e[1] - e[0]) / (r[1].ln() - r[0].ln()))
        .collect();
    let first = slopes[0].max(T::zero());
    let sub_affine = slopes.iter().all(|&s| s <= first * (T::one() + tol) + tol);
    Ok(EntryScaling { slopes, sub_affine })
}
