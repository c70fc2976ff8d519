//! Deterministic perturbations with a certified envelope.
//!
//! The value at `x` is a pure function of `(seed, x)`: coordinates are snapped
//! to multiples of 2^-40, hashed with the seed, and each output coordinate is
//! drawn as a dyadic rational `k / 2^20` in `[-1, 1]`. The vector is projected
//! into the unit ball of the active norm and scaled by `ε‖x‖^p`. Every step is
//! rational, so the same perturbation is available in exact mode.

use super::point::{NormKind, Point};
use crate::scalar::Scalar;

const QUANT_SCALE: f64 = (1u64 << 40) as f64;
const DRAW_BITS: u32 = 20;
/// Relative slack that keeps the f64 power `‖x‖^p` under its true value.
const POW_SHRINK: f64 = 1.0 - 1e-12;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn quantize(v: f64) -> i128 {
    // `as` saturates, NaN maps to 0
    (v * QUANT_SCALE).round() as i128
}

fn hash_point<S: Scalar>(seed: u64, x: &Point<S>) -> u64 {
    let mut h = splitmix64(seed ^ 0x6A09_E667_F3BC_C909);
    for c in x.coords() {
        let q = quantize(c.approx()) as u128;
        h = splitmix64(h ^ (q as u64));
        h = splitmix64(h ^ ((q >> 64) as u64));
    }
    h
}

/// Unit-box draw for one output coordinate, as an integer in `[-2^20, 2^20]`.
fn draw(h: u64, k: usize) -> i64 {
    let bits = splitmix64(h.wrapping_add((k as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03)));
    let span = (1u64 << (DRAW_BITS + 1)) + 1;
    (bits % span) as i64 - (1i64 << DRAW_BITS)
}

/// Divisor that maps `[-1, 1]^m` into the unit ball of `norm`.
fn projection_divisor(norm: NormKind, m: usize) -> i64 {
    match norm {
        NormKind::Max => 1,
        NormKind::Euclidean => (m as f64).sqrt().ceil() as i64,
    }
}

/// Evaluates the seeded perturbation at `x` into an `m`-dimensional value.
///
/// `‖output‖ ≤ ε‖x‖^p`; `p = 0` is the bounded case. The output is zero at
/// the origin for every `p`.
pub fn noise_eval<S: Scalar>(seed: u64, x: &Point<S>, epsilon: &S, exponent: f64, m: usize) -> Point<S> {
    let norm = x.norm_kind();
    if x.is_zero() || epsilon.is_zero() {
        return Point::zeros(m, norm);
    }
    let magnitude = if exponent == 0.0 {
        S::one()
    } else {
        let pow = x.norm().approx().powf(exponent) * POW_SHRINK;
        S::from_f64(pow).unwrap_or_else(S::zero)
    };
    let h = hash_point(seed, x);
    let denom = S::from_int((1i64 << DRAW_BITS) * projection_divisor(norm, m));
    let scale = epsilon.clone() * magnitude / denom;
    let coords = (0..m).map(|k| S::from_int(draw(h, k)) * scale.clone()).collect();
    Point::new(coords, norm).expect("m >= 1")
}
