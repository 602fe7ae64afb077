//! Closed-form history for a scalar input series, used as a reference.

use super::profile::PiecewiseLinear;
use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Scalar input `u(tau)` on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSeries<T> {
    /// `u = values[m]` on `[m dt, (m + 1) dt)`.
    Steps { dt: T, values: Vec<T> },
    /// Linear interpolation between `(times[k], values[k])`, starting at 0.
    Nodes { times: Vec<T>, values: Vec<T> },
}

impl<T: Real> InputSeries<T> {
    fn coverage(&self) -> T {
        match self {
            InputSeries::Steps { dt, values } => *dt * from_usize(values.len()),
            InputSeries::Nodes { times, .. } => times.last().copied().unwrap_or(T::zero()),
        }
    }

    /// `int_0^tau u`.
    fn primitive(&self, tau: T) -> T {
        match self {
            InputSeries::Steps { dt, values } => {
                let mut acc = T::zero();
                for (m, &v) in values.iter().enumerate() {
                    let a = *dt * from_usize(m);
                    if a >= tau {
                        break;
                    }
                    let b = (a + *dt).min(tau);
                    acc = acc + (b - a) * v;
                }
                acc
            }
            InputSeries::Nodes { times, values } => {
                let half: T = lit(0.5);
                let mut acc = T::zero();
                for k in 0..times.len().saturating_sub(1) {
                    let (a, b) = (times[k], times[k + 1]);
                    if a >= tau {
                        break;
                    }
                    let e = b.min(tau);
                    let slope = (values[k + 1] - values[k]) / (b - a);
                    let ve = values[k] + slope * (e - a);
                    acc = acc + half * (e - a) * (values[k] + ve);
                }
                acc
            }
        }
    }
}

/// `eta^t(s) = int_0^s u(t - y) dy` for `s <= t`, else `phi0(s - t) + int_0^t u`.
pub fn exact_history_oracle<T: Real>(series: &InputSeries<T>, phi0: &PiecewiseLinear<T>, t: T, s: T) -> Result<T> {
    let covered = series.coverage();
    if t > covered * (T::one() + lit(1e-12)) {
        return Err(Error::InsufficientCoverage { covered: to_f64(covered), requested: to_f64(t) });
    }
    if !(s >= T::zero()) {
        return Err(Error::NegativeTime { s: to_f64(s) });
    }
    let total = series.primitive(t);
    if s <= t {
        Ok(total - series.primitive(t - s))
    } else {
        Ok(phi0.eval(s - t) + total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_input() {
        let u = InputSeries::Steps { dt: 0.5, values: vec![1.0; 4] };
        let z = PiecewiseLinear::zero();
        assert_eq!(exact_history_oracle(&u, &z, 2.0, 1.0).unwrap(), 1.0);
        assert_eq!(exact_history_oracle(&u, &z, 2.0, 3.0).unwrap(), 2.0);
    }

    #[test]
    fn pure_transport() {
        let u = InputSeries::Steps { dt: 1.0, values: vec![0.0; 3] };
        let phi = PiecewiseLinear::linear();
        assert_eq!(exact_history_oracle(&u, &phi, 3.0, 5.0).unwrap(), 2.0);
        assert_eq!(exact_history_oracle(&u, &phi, 3.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn linear_input() {
        let u = InputSeries::Nodes { times: vec![0.0f64, 2.0], values: vec![0.0, 2.0] };
        let v = exact_history_oracle(&u, &PiecewiseLinear::zero(), 2.0, 1.0).unwrap();
        assert!((v - 1.5).abs() < 1e-15);
    }

    #[test]
    fn coverage_error() {
        let u = InputSeries::Steps { dt: 0.1, values: vec![1.0; 5] };
        assert!(matches!(
            exact_history_oracle(&u, &PiecewiseLinear::zero(), 1.0, 0.2),
            Err(Error::InsufficientCoverage { .. })
        ));
    }
}
