use super::profile::PiecewiseLinear;
use crate::discretization::StateField;
use crate::error::{Error, Result};
use crate::scalar::{to_f64, Real};

/// Initial history `eta_0(s) = sum_i phi_i(s) G_i` with scalar profiles `phi_i`
/// vanishing at `s = 0`. The boundary history is the trace of the same fields.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HistorySpec<T> {
    terms: Vec<(PiecewiseLinear<T>, StateField<T>)>,
}

impl<T: Real> HistorySpec<T> {
    pub fn zero() -> Self {
        HistorySpec { terms: Vec::new() }
    }

    pub fn single(profile: PiecewiseLinear<T>, field: StateField<T>) -> Result<Self> {
        let mut spec = Self::zero();
        spec.push(profile, field)?;
        Ok(spec)
    }

    pub fn push(&mut self, profile: PiecewiseLinear<T>, field: StateField<T>) -> Result<()> {
        let v = profile.at_zero();
        if v != T::zero() {
            return Err(Error::NonzeroInitialHistory { value: to_f64(v) });
        }
        self.terms.push((profile, field));
        Ok(())
    }

    pub fn terms(&self) -> &[(PiecewiseLinear<T>, StateField<T>)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `eta_0(s)` as a field.
    pub fn eval(&self, s: T, nodes: usize) -> Vec<T> {
        let mut out = vec![T::zero(); nodes];
        for (phi, g) in &self.terms {
            let c = phi.eval(s);
            for (o, &gi) in out.iter_mut().zip(g.iter()) {
                *o = *o + c * gi;
            }
        }
        out
    }

    /// `int_0^inf exp(-lambda s) eta_0(s) ds` as a field.
    pub fn exp_moment(&self, lambda: T, nodes: usize) -> Vec<T> {
        let mut out = vec![T::zero(); nodes];
        for (phi, g) in &self.terms {
            let c = phi.exp_moment(lambda);
            for (o, &gi) in out.iter_mut().zip(g.iter()) {
                *o = *o + c * gi;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonzero_start() {
        let p = PiecewiseLinear::new(vec![0.0, 1.0], vec![0.1, 1.0], 0.0).unwrap();
        let e = HistorySpec::single(p, StateField(vec![1.0; 4])).unwrap_err();
        assert_eq!(e, Error::NonzeroInitialHistory { value: 0.1 });
    }

    #[test]
    fn evaluates_sum() {
        let mut h = HistorySpec::zero();
        h.push(PiecewiseLinear::linear(), StateField(vec![1.0, 2.0])).unwrap();
        h.push(PiecewiseLinear::saturating(1.0), StateField(vec![1.0, 0.0])).unwrap();
        assert_eq!(h.eval(3.0, 2), vec![4.0, 6.0]);
        // int e^{-s} s = 1, int e^{-s} min(s,1) = 1 - e^{-1}
        let m = h.exp_moment(1.0, 2);
        assert!((m[0] - (2.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((m[1] - 2.0).abs() < 1e-15);
    }
}
