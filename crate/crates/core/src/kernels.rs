//! Memory kernels built from finite nonnegative combinations of exponentials.
//!
//! A kernel is `k(s) = sum_k a_k lambda_k exp(-lambda_k s)` with `sum a_k = 1`, so
//! `int_0^inf k = 1`. The memory weight entering the history formulation is
//! `mu(s) = -(1 - omega) k'(s) = (1 - omega) sum_k a_k lambda_k^2 exp(-lambda_k s)`.
//! Every derived constant is computed from the coefficients in closed form.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Which part of the closed domain a kernel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    Bulk,
    Boundary,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Bulk => "bulk",
            Region::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryKernel<T> {
    region: Region,
    weights: Vec<T>,
    rates: Vec<T>,
    omega: T,
}

/// Point values of `k`, `mu` and `mu'` at one `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample<T> {
    pub k: T,
    pub mu: T,
    pub mu_prime: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport<T> {
    pub delta: T,
    pub mass: T,
    pub k0: T,
    /// `mu` is C^1 and integrable.
    pub mu1: bool,
    /// `mu >= 0`.
    pub mu2: bool,
    /// `mu' <= 0`.
    pub mu3: bool,
    /// `mu' + delta mu <= 0`.
    pub mu4: bool,
}

impl<T> ValidationReport<T> {
    pub fn all_hold(&self) -> bool {
        self.mu1 && self.mu2 && self.mu3 && self.mu4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SmallnessFlags {
    /// `k_G(0) <= 4 / (1 - omega)`.
    pub assk: bool,
    /// `k_G(0) < 2 / (1 - nu)`.
    pub assk2: bool,
}

/// Builds a kernel, checking weights, rates and omega.
///
/// `omega` is accepted on `[0, 1)`: the kernel itself is well defined for the purely
/// hereditary case, while Problem-level validation restricts omega to `(0, 1)`.
pub fn make_exponential_kernel<T: Real>(
    region: Region,
    weights: &[T],
    rates: &[T],
    omega: T,
) -> Result<MemoryKernel<T>> {
    if weights.len() != rates.len() || weights.is_empty() {
        return Err(Error::KernelShape { weights: weights.len(), rates: rates.len() });
    }
    if let Some((index, &w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= T::zero())) {
        return Err(Error::NegativeWeight { index, weight: to_f64(w) });
    }
    let sum: T = weights.iter().copied().sum();
    let tol = lit::<T>(1e-12).max(T::epsilon() * lit(16.0));
    if !((sum - T::one()).abs() <= tol) {
        return Err(Error::WeightsNotNormalized { sum: to_f64(sum) });
    }
    if let Some((index, &rate)) =
        rates.iter().enumerate().find(|(_, r)| !(**r > T::zero() && r.is_finite()))
    {
        return Err(Error::NonPositiveRate { index, rate: to_f64(rate) });
    }
    if !(omega >= T::zero() && omega < T::one()) {
        return Err(Error::OmegaOutOfRange { omega: to_f64(omega), range: "[0, 1)" });
    }
    Ok(MemoryKernel { region, weights: weights.to_vec(), rates: rates.to_vec(), omega })
}

impl<T: Real> MemoryKernel<T> {
    /// `k(s) = lambda exp(-lambda s)`.
    pub fn single(region: Region, rate: T, omega: T) -> Result<Self> {
        make_exponential_kernel(region, &[T::one()], &[rate], omega)
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn modes(&self) -> usize {
        self.rates.len()
    }

    /// Decay constant of `mu' + delta mu <= 0`: the smallest rate.
    pub fn delta(&self) -> T {
        self.rates.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn k0(&self) -> T {
        self.weights.iter().zip(&self.rates).map(|(&a, &l)| a * l).sum()
    }

    /// `int_0^inf mu = (1 - omega) k(0)`.
    pub fn mass(&self) -> T {
        (T::one() - self.omega) * self.k0()
    }

    /// Per-mode coefficient `c_k` in `mu(s) = sum_k c_k exp(-lambda_k s)`.
    pub fn mu_coefficients(&self) -> Vec<T> {
        let scale = T::one() - self.omega;
        self.weights.iter().zip(&self.rates).map(|(&a, &l)| scale * a * l * l).collect()
    }

    /// Per-mode mass `(1 - omega) a_k lambda_k` carried by the normalized density
    /// `lambda_k exp(-lambda_k s)`.
    pub fn load_coefficients(&self) -> Vec<T> {
        let scale = T::one() - self.omega;
        self.weights.iter().zip(&self.rates).map(|(&a, &l)| scale * a * l).collect()
    }

    pub fn eval(&self, s: T) -> Result<KernelSample<T>> {
        if !(s >= T::zero()) {
            return Err(Error::NegativeTime { s: to_f64(s) });
        }
        let scale = T::one() - self.omega;
        let mut out = KernelSample { k: T::zero(), mu: T::zero(), mu_prime: T::zero() };
        for (&a, &l) in self.weights.iter().zip(&self.rates) {
            let e = (-l * s).exp();
            out.k = out.k + a * l * e;
            out.mu = out.mu + scale * a * l * l * e;
            out.mu_prime = out.mu_prime - scale * a * l * l * l * e;
        }
        Ok(out)
    }

    /// `mu(s)` without the sign check; callers guarantee `s >= 0`.
    pub fn mu(&self, s: T) -> T {
        self.mu_coefficients()
            .iter()
            .zip(&self.rates)
            .map(|(&c, &l)| c * (-l * s).exp())
            .sum()
    }

    /// `int_0^upper mu`.
    pub fn mu_integral(&self, upper: T) -> T {
        let scale = T::one() - self.omega;
        self.weights
            .iter()
            .zip(&self.rates)
            .map(|(&a, &l)| scale * a * l * (-(-l * upper).exp_m1()))
            .sum()
    }

    /// Smallest `s` with `mu(s) <= tol * mu(0)`.
    pub fn cutoff(&self, tol: T) -> T {
        // every mode decays at least as fast as exp(-delta s)
        -(tol.ln()) / self.delta()
    }
}

pub fn validate_kernel<T: Real>(kernel: &MemoryKernel<T>) -> ValidationReport<T> {
    let delta = kernel.delta();
    let coeffs = kernel.mu_coefficients();
    let finite = kernel.rates.iter().chain(&kernel.weights).all(|x| x.is_finite());
    let mu1 = finite && kernel.rates.iter().all(|&l| l > T::zero());
    let mu2 = coeffs.iter().all(|&c| c >= T::zero());
    // mu' = -sum c_k lambda_k e^{-lambda_k s}: termwise nonpositive
    let mu3 = coeffs.iter().zip(&kernel.rates).all(|(&c, &l)| c * l >= T::zero());
    // mu' + delta mu = sum c_k (delta - lambda_k) e^{-lambda_k s}
    let mu4 = coeffs.iter().zip(&kernel.rates).all(|(&c, &l)| c * (delta - l) <= T::zero());
    ValidationReport { delta, mass: kernel.mass(), k0: kernel.k0(), mu1, mu2, mu3, mu4 }
}

/// The two smallness conditions on the boundary kernel.
pub fn check_smallness<T: Real>(
    kernel_gamma: &MemoryKernel<T>,
    omega: T,
    nu: T,
) -> Result<SmallnessFlags> {
    if kernel_gamma.region != Region::Boundary {
        return Err(Error::RegionMismatch {
            expected: Region::Boundary.name(),
            found: kernel_gamma.region.name(),
        });
    }
    let k0 = kernel_gamma.k0();
    let four: T = lit(4.0);
    let two: T = lit(2.0);
    Ok(SmallnessFlags {
        assk: k0 <= four / (T::one() - omega),
        assk2: k0 < two / (T::one() - nu),
    })
}

pub fn eval_kernel<T: Real>(kernel: &MemoryKernel<T>, s: T) -> Result<KernelSample<T>> {
    kernel.eval(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_exponential_constants() {
        let k = make_exponential_kernel(Region::Bulk, &[1.0], &[1.0], 0.5).unwrap();
        assert_eq!(k.k0(), 1.0);
        assert_eq!(k.delta(), 1.0);
        assert_eq!(k.mass(), 0.5);
    }

    #[test]
    fn two_mode_constants() {
        let k = make_exponential_kernel(Region::Boundary, &[0.5, 0.5], &[1.0, 4.0], 0.5).unwrap();
        assert_eq!(k.k0(), 2.5);
        assert_eq!(k.delta(), 1.0);
        assert_eq!(k.mass(), 1.25);
        let report = validate_kernel(&k);
        assert_eq!(report.delta, 1.0);
        assert!(report.all_hold());
    }

    #[test]
    fn construction_errors_are_distinct() {
        let e = make_exponential_kernel(Region::Bulk, &[0.7, 0.4], &[1.0, 1.0], 0.5).unwrap_err();
        assert!(matches!(e, Error::WeightsNotNormalized { .. }));
        let e = make_exponential_kernel(Region::Bulk, &[1.0], &[0.0], 0.5).unwrap_err();
        assert!(matches!(e, Error::NonPositiveRate { index: 0, .. }));
        let e = make_exponential_kernel(Region::Bulk, &[1.0], &[1.0], 1.0).unwrap_err();
        assert!(matches!(e, Error::OmegaOutOfRange { .. }));
        let e = make_exponential_kernel(Region::Bulk, &[1.5, -0.5], &[1.0, 1.0], 0.5).unwrap_err();
        assert!(matches!(e, Error::NegativeWeight { index: 1, .. }));
    }

    #[test]
    fn validate_with_zero_omega() {
        let k = MemoryKernel::single(Region::Bulk, 2.0, 0.0).unwrap();
        let r = validate_kernel(&k);
        assert_eq!((r.delta, r.k0, r.mass), (2.0, 2.0, 2.0));
        assert!(r.all_hold());
    }

    #[test]
    fn smallness_flags() {
        let k = MemoryKernel::single(Region::Boundary, 2.0, 0.5).unwrap();
        let f = check_smallness(&k, 0.5, 0.5).unwrap();
        assert!(f.assk && f.assk2);
        let big = MemoryKernel::single(Region::Boundary, 10.0, 0.5).unwrap();
        assert!(!check_smallness(&big, 0.5, 0.5).unwrap().assk);
        let bulk = MemoryKernel::single(Region::Bulk, 1.0, 0.5).unwrap();
        assert!(matches!(check_smallness(&bulk, 0.5, 0.5), Err(Error::RegionMismatch { .. })));
    }

    #[test]
    fn eval_examples() {
        let k = MemoryKernel::single(Region::Bulk, 1.0, 0.0).unwrap();
        let v = k.eval(0.0).unwrap();
        assert_eq!((v.k, v.mu), (1.0, 1.0));
        let k = MemoryKernel::single(Region::Bulk, 1.0, 0.5).unwrap();
        let v = k.eval(2f64.ln()).unwrap();
        assert!((v.mu - 0.25).abs() < 1e-15);
        let far = k.eval(1e3).unwrap();
        assert_eq!((far.k, far.mu, far.mu_prime), (0.0, 0.0, 0.0));
        assert!(matches!(k.eval(-1.0), Err(Error::NegativeTime { .. })));
    }

    #[test]
    fn mu_is_minus_scaled_k_prime() {
        let k = make_exponential_kernel(Region::Bulk, &[0.3f64, 0.7], &[0.5, 3.0], 0.4).unwrap();
        for &s in &[0.0, 0.1, 1.0, 7.0] {
            let h = 1e-6;
            let kp = (k.eval(s + 2.0 * h).unwrap().k - k.eval(s).unwrap().k) / (2.0 * h);
            let mu = k.eval(s + h).unwrap().mu;
            assert!((mu + 0.6 * kp).abs() < 1e-5 * (1.0 + mu.abs()), "s = {s}");
        }
    }

    #[test]
    fn f32_kernel_constants() {
        let k = make_exponential_kernel(Region::Boundary, &[0.5f32, 0.5], &[1.0, 4.0], 0.5).unwrap();
        assert_eq!(k.mass(), 1.25f32);
    }
}
