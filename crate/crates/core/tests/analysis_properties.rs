//! Property checks of the fitting and constant routines against direct formulas.

use cgmem::analysis::{absorbing_entry, c0_constant, fit_decay_rate, split_time, C0Term, PlateauMode};
use cgmem::kernels::{make_exponential_kernel, validate_kernel, Region};
use proptest::prelude::*;

proptest! {
    #[test]
    fn c0_is_the_smallest_term(
        omega in 0.01f64..0.99,
        beta in 0.1f64..5.0,
        nu in 0.01f64..0.99,
        delta in 0.1f64..5.0,
        m in 0.0f64..3.9,
    ) {
        let terms = [2.0 * omega, beta * nu * (2.0 - m / 2.0), delta];
        let min = terms.iter().copied().fold(f64::INFINITY, f64::min);
        let c = c0_constant(omega, beta, nu, delta, m).unwrap();
        prop_assert_eq!(c.value, min);
        let index = match c.active {
            C0Term::Diffusion => 0,
            C0Term::Boundary => 1,
            C0Term::Kernel => 2,
        };
        prop_assert_eq!(terms[index], min);
    }

    #[test]
    fn kernel_mass_matches_weights(
        omega in 0.01f64..0.99,
        a in 0.05f64..0.95,
        l1 in 0.1f64..10.0,
        l2 in 0.1f64..10.0,
    ) {
        let k = make_exponential_kernel(Region::Bulk, &[a, 1.0 - a], &[l1, l2], omega).unwrap();
        let r = validate_kernel(&k);
        let k0 = a * l1 + (1.0 - a) * l2;
        prop_assert!((r.k0 - k0).abs() <= 4.0 * f64::EPSILON * k0);
        prop_assert!((r.mass - (1.0 - omega) * k0).abs() <= 4.0 * f64::EPSILON * k0);
        prop_assert_eq!(r.delta, l1.min(l2));
        prop_assert!(r.all_hold());
    }

    #[test]
    fn pure_exponential_rate_is_recovered(rate in 0.05f64..5.0, e0 in 0.1f64..100.0) {
        let rows: Vec<(f64, f64)> = (0..200).map(|k| {
            let t = 0.01 * k as f64;
            (t, e0 * (-rate * t).exp())
        }).collect();
        let fit = fit_decay_rate(&rows, PlateauMode::Zero, None).unwrap();
        prop_assert!((fit.rate - rate).abs() <= 1e-9 * rate, "{} vs {}", fit.rate, rate);
    }

    #[test]
    fn plateau_is_removed_before_fitting(rate in 0.5f64..3.0, p in 0.5f64..20.0) {
        let rows: Vec<(f64, f64)> = (0..2000).map(|k| {
            let t = 0.01 * k as f64;
            (t, p + 5.0 * (-rate * t).exp())
        }).collect();
        let fit = fit_decay_rate(&rows, PlateauMode::Fixed(p), None).unwrap();
        prop_assert!((fit.rate - rate).abs() <= 1e-6 * rate);
    }
}

#[test]
fn entry_time_is_interpolated() {
    // E(t) = 10 exp(-t) crosses 4 at t = ln(2.5)
    let rows: Vec<(f64, f64)> = (0..=400).map(|k| (0.01 * k as f64, 10.0 * (-0.01 * k as f64).exp())).collect();
    let e = absorbing_entry(&rows, 2.0, 0.0).unwrap();
    let exact = 2.5f64.ln();
    assert!((e.t_entry.unwrap() - exact).abs() < 1e-4);
    assert_eq!(e.reentry_violations, 0);
}

#[test]
fn split_time_quarters_the_squared_norm_twice() {
    let m0: f64 = 0.37;
    let t = split_time(m0, 0.0).unwrap();
    assert!(((-m0 * t).exp() - 1.0 / 16.0).abs() < 1e-15);
    assert_eq!(split_time(m0, 100.0).unwrap(), 100.0);
    assert!(split_time(0.0, 1.0).is_err());
}
