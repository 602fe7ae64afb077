//! Seeded initial data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Generator, HistoryProfileKind, InitialConfig};
use crate::discretization::{Grid, StateField};
use crate::error::Result;
use crate::memory::{HistorySpec, PiecewiseLinear};
use crate::scalar::{from_usize, lit, Real};

/// Highest x-wavenumber of the band-limited generator.
pub const MAX_WAVENUMBER: usize = 4;
/// Highest polynomial degree in y.
pub const MAX_Y_DEGREE: usize = 2;

/// Random field with Fourier modes `k <= 4` in x (amplitude `1 / (1 + k^2)`) times
/// Legendre polynomials of degree `<= 2` in y, scaled to X^2 norm `amplitude`.
pub fn band_limited<T: Real>(grid: &Grid<T>, seed: u64, amplitude: T) -> StateField<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = Vec::with_capacity((MAX_WAVENUMBER + 1) * (MAX_Y_DEGREE + 1));
    for k in 0..=MAX_WAVENUMBER {
        for _ in 0..=MAX_Y_DEGREE {
            let c: f64 = rng.gen_range(-1.0..1.0);
            let s: f64 = rng.gen_range(-1.0..1.0);
            let decay = 1.0 / (1.0 + (k * k) as f64);
            coeffs.push((lit::<T>(c * decay), lit::<T>(if k == 0 { 0.0 } else { s * decay })));
        }
    }
    let two: T = lit(2.0);
    let wave = two * T::PI() / grid.lx();
    let field = grid.from_fn(|x, y| {
        let z = two * y / grid.ly() - T::one();
        let legendre = [T::one(), z, (lit::<T>(3.0) * z * z - T::one()) * lit(0.5)];
        let mut v = T::zero();
        for k in 0..=MAX_WAVENUMBER {
            let (sin, cos) = (wave * from_usize(k) * x).sin_cos();
            for (p, l) in legendre.iter().enumerate() {
                let (a, b) = coeffs[k * (MAX_Y_DEGREE + 1) + p];
                v = v + (a * cos + b * sin) * *l;
            }
        }
        v
    });
    normalized(grid, field, amplitude)
}

fn normalized<T: Real>(grid: &Grid<T>, mut field: StateField<T>, amplitude: T) -> StateField<T> {
    let norm = field.iter().zip(&grid.mass()).map(|(&u, &m)| u * u * m).sum::<T>().sqrt();
    if norm > T::zero() {
        let scale = amplitude / norm;
        field.iter_mut().for_each(|u| *u = *u * scale);
    }
    field
}

/// `u_0` per the generator tag.
pub fn initial_field<T: Real>(grid: &Grid<T>, init: &InitialConfig<T>) -> StateField<T> {
    match init.generator {
        Generator::Zero => grid.zeros(),
        Generator::Constant => grid.constant(init.amplitude),
        Generator::BandLimited => band_limited(grid, init.seed, init.amplitude),
    }
}

/// `eta_0(s) = phi(s) u_0`.
pub fn initial_history<T: Real>(kind: HistoryProfileKind<T>, u0: &StateField<T>) -> Result<HistorySpec<T>> {
    let profile = match kind {
        HistoryProfileKind::Zero => return Ok(HistorySpec::zero()),
        HistoryProfileKind::Linear => PiecewiseLinear::linear(),
        HistoryProfileKind::Saturating(a) => PiecewiseLinear::saturating(a),
    };
    HistorySpec::single(profile, u0.clone())
}
