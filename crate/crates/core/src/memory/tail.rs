use serde::Serialize;

use super::direct::{DirectHistory, HistoryProfiles};
use crate::discretization::WentzellOperator;
use crate::error::Result;
use crate::kernels::MemoryKernel;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport<T> {
    pub taus: Vec<T>,
    /// `tau * TT(tau; Phi)` per sample.
    pub scaled_tail: Vec<T>,
    pub sup: T,
    pub tau_star: T,
    pub m0_squared: T,
    pub m1_squared: T,
    /// `||d_s Phi||^2_{M^1}`.
    pub slope_m1_squared: T,
    /// `<T Phi, Phi>_{M^1}`.
    pub pairing: T,
}

impl<T: Real> TailReport<T> {
    /// Squared norm in the compactness space: `M^1 + slope + sup tau TT`.
    pub fn k1_squared(&self) -> T {
        self.m1_squared + self.slope_m1_squared + self.sup
    }
}

struct Weighted<'a, T: Real> {
    prof: &'a HistoryProfiles<T>,
    bulk: &'a MemoryKernel<T>,
    boundary: &'a MemoryKernel<T>,
    nu: T,
}

impl<T: Real> Weighted<'_, T> {
    fn m1(&self, lo: T, hi: T) -> T {
        self.prof.bulk_energy.integrate_mu(self.bulk, lo, hi)
            + self.nu * self.prof.boundary_energy.integrate_mu(self.boundary, lo, hi)
    }

    fn m0(&self, lo: T, hi: T) -> T {
        self.prof.bulk_l2.integrate_mu(self.bulk, lo, hi) + self.prof.boundary_l2.integrate_mu(self.boundary, lo, hi)
    }

    fn pairing(&self) -> T {
        let inf = T::infinity();
        -(self.prof.bulk_pairing.integrate_mu(self.bulk, T::zero(), inf)
            + self.nu * self.prof.boundary_pairing.integrate_mu(self.boundary, T::zero(), inf))
    }

    fn slope(&self) -> T {
        let inf = T::infinity();
        self.prof.bulk_slope.integrate_mu(self.bulk, T::zero(), inf)
            + self.nu * self.prof.boundary_slope.integrate_mu(self.boundary, T::zero(), inf)
    }
}

/// Tail function samples and history norms; `taus` are expected to be `>= 1`.
pub fn tail_and_norms<T: Real>(
    history: &DirectHistory<T>,
    op: &WentzellOperator<T>,
    kernel_bulk: &MemoryKernel<T>,
    kernel_boundary: &MemoryKernel<T>,
    taus: &[T],
) -> Result<TailReport<T>> {
    let prof = history.profiles(op);
    let w = Weighted { prof: &prof, bulk: kernel_bulk, boundary: kernel_boundary, nu: op.params().nu };
    let inf = T::infinity();
    let scaled_tail: Vec<T> = taus
        .iter()
        .map(|&tau| {
            let near = tau.recip().min(tau);
            tau * (w.m0(T::zero(), near) + w.m0(tau.max(near), inf))
        })
        .collect();
    let (tau_star, sup) = taus
        .iter()
        .zip(&scaled_tail)
        .fold((T::zero(), T::zero()), |best, (&t, &v)| if v > best.1 { (t, v) } else { best });
    Ok(TailReport {
        taus: taus.to_vec(),
        scaled_tail,
        sup,
        tau_star,
        m0_squared: w.m0(T::zero(), inf),
        m1_squared: w.m1(T::zero(), inf),
        slope_m1_squared: w.slope(),
        pairing: w.pairing(),
    })
}

/// `<-d_s Phi, Phi>_{M^1}` by exact s-integration of the history.
pub fn tr_pairing<T: Real>(
    history: &DirectHistory<T>,
    op: &WentzellOperator<T>,
    kernel_bulk: &MemoryKernel<T>,
    kernel_boundary: &MemoryKernel<T>,
) -> T {
    let prof = history.profiles(op);
    Weighted { prof: &prof, bulk: kernel_bulk, boundary: kernel_boundary, nu: op.params().nu }.pairing()
}

/// Log-spaced tau samples on `[1, tau_max]`.
pub fn default_taus<T: Real>(tau_max: T, count: usize) -> Vec<T> {
    let n = count.max(2);
    let step = tau_max.ln() / crate::scalar::from_usize(n - 1);
    (0..n).map(|k| (step * crate::scalar::from_usize(k)).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble_wentzell, build_grid};
    use crate::kernels::Region;
    use crate::memory::profile::PiecewiseLinear;
    use crate::memory::spec::HistorySpec;
    use crate::memory::modes::ModeHistory;

    fn op() -> WentzellOperator<f64> {
        let g = build_grid(8, 5, 1.0, 1.0).unwrap();
        assemble_wentzell(&g, 1.0, 1.0, 0.5, 0.5).unwrap()
    }

    #[test]
    fn zero_history_is_zero() {
        let op = op();
        let k = MemoryKernel::single(Region::Bulk, 1.0, 0.0).unwrap();
        let kg = MemoryKernel::single(Region::Boundary, 1.0, 0.0).unwrap();
        let h = DirectHistory::new(op.grid(), HistorySpec::zero(), 40.0).unwrap();
        let r = tail_and_norms(&h, &op, &k, &kg, &[1.0, 2.0]).unwrap();
        assert_eq!((r.sup, r.m0_squared, r.m1_squared, r.pairing), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn tail_function_example() {
        // uniform eta = min(s, 1) on a region of total measure 1, mu = e^{-s}
        let g = build_grid(8, 5, 1.0, 1.0).unwrap();
        let op = assemble_wentzell(&g, 1.0, 1.0, 0.5, 0.5).unwrap();
        let k = MemoryKernel::single(Region::Bulk, 1.0, 0.0).unwrap();
        let kg = MemoryKernel::single(Region::Boundary, 1.0, 0.0).unwrap();
        let spec = HistorySpec::single(PiecewiseLinear::saturating(1.0), g.constant(1.0)).unwrap();
        let h = DirectHistory::new(&g, spec, 40.0).unwrap();
        let r = tail_and_norms(&h, &op, &k, &kg, &[1.0]).unwrap();
        // bulk measure 1 plus boundary measure 2
        let expected = 3.0 * (2.0 - 4.0 * (-1.0f64).exp());
        assert!((r.scaled_tail[0] - expected).abs() < 1e-13);
    }

    #[test]
    fn pairing_agrees_with_modes_and_dissipates() {
        let g = build_grid(8, 5, 2.0f64, 1.0).unwrap();
        let op = assemble_wentzell(&g, 1.0, 1.0, 0.5, 0.5).unwrap();
        let kb = MemoryKernel::single(Region::Bulk, 1.0, 0.5).unwrap();
        let kg = MemoryKernel::single(Region::Boundary, 2.0, 0.5).unwrap();
        let mut h = DirectHistory::new(&g, HistorySpec::zero(), 40.0).unwrap();
        let mut m = ModeHistory::zero(&op, &kb, &kg).unwrap();
        let u = g.from_fn(|x, y| 1.0 + x.cos() * y);
        for _ in 0..50 {
            h.step_direct(&u, 0.1).unwrap();
            m.step_modes(&op, &u, 0.1).unwrap();
        }
        let r = tail_and_norms(&h, &op, &kb, &kg, &default_taus(10.0, 5)).unwrap();
        assert!((r.pairing - m.pairing()).abs() < 1e-12 * r.pairing.abs());
        assert!((r.m1_squared - m.m1_squared()).abs() < 1e-12 * r.m1_squared);
        assert!((r.m0_squared - m.m0_squared()).abs() < 1e-12 * r.m0_squared);
        assert!(r.pairing <= -0.5 * r.m1_squared);
        let scaled = tr_pairing(&h, &op, &kb, &kg);
        assert!((scaled - r.pairing).abs() < 1e-14 * r.pairing.abs());
    }

    #[test]
    fn pairing_is_quadratic() {
        let g = build_grid(8, 5, 2.0f64, 1.0).unwrap();
        let op = assemble_wentzell(&g, 1.0, 1.0, 0.5, 0.5).unwrap();
        let kb = MemoryKernel::single(Region::Bulk, 1.0, 0.5).unwrap();
        let kg = MemoryKernel::single(Region::Boundary, 1.0, 0.5).unwrap();
        let run = |c: f64| {
            let mut h = DirectHistory::new(&g, HistorySpec::zero(), 40.0).unwrap();
            for n in 0..10 {
                let u = g.from_fn(|x, _| c * (x + n as f64).sin());
                h.step_direct(&u, 0.1).unwrap();
            }
            tr_pairing(&h, &op, &kb, &kg)
        };
        let (a, b) = (run(1.0), run(3.0));
        assert!((b - 9.0 * a).abs() < 1e-12 * b.abs());
    }

    #[test]
    fn taus_are_log_spaced() {
        let t: Vec<f64> = default_taus(100.0, 3);
        assert!((t[0] - 1.0).abs() < 1e-15 && (t[1] - 10.0).abs() < 1e-12 && (t[2] - 100.0).abs() < 1e-12);
    }
}
