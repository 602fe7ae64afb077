//! Moments `E_k(x) = int_0^1 exp(-x theta) theta^k dtheta` for `k = 0, 1, 2`.

use crate::scalar::{from_usize, lit, Real};

/// Returns `[E_0(x), E_1(x), E_2(x)]` for `x >= 0`.
pub fn moments<T: Real>(x: T) -> [T; 3] {
    if x <= lit(2.0) {
        // E_k(x) = sum_n (-x)^n / (n! (n + k + 1))
        let mut out = [T::zero(); 3];
        let mut term = T::one();
        for n in 0..60usize {
            for (k, o) in out.iter_mut().enumerate() {
                *o = *o + term / from_usize::<T>(n + k + 1);
            }
            term = term * (-x) / from_usize::<T>(n + 1);
            if term.abs() < T::epsilon() * lit(1e-3) {
                break;
            }
        }
        out
    } else {
        let e = (-x).exp();
        let e0 = -(-x).exp_m1() / x;
        let e1 = (e0 - e) / x;
        let e2 = (lit::<T>(2.0) * e1 - e) / x;
        [e0, e1, e2]
    }
}

/// `(1 - exp(-lambda dt)) / lambda`, accurate for small `lambda dt`.
pub fn relaxation_gain<T: Real>(lambda: T, dt: T) -> T {
    dt * moments(lambda * dt)[0]
}

/// `int_a^{a+h} exp(-lambda s) (c0 + c1 (s - a) + c2 (s - a)^2) ds`; `h` may be infinite.
pub fn exp_poly_integral<T: Real>(lambda: T, a: T, h: T, c: [T; 3]) -> T {
    let ea = (-lambda * a).exp();
    if h.is_infinite() {
        let two: T = lit(2.0);
        return ea * (c[0] / lambda + c[1] / (lambda * lambda) + two * c[2] / (lambda * lambda * lambda));
    }
    let m = moments(lambda * h);
    ea * h * (c[0] * m[0] + c[1] * h * m[1] + c[2] * h * h * m[2])
}
