//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the library's residual, iteration or series code: model
//! atoms are evaluated by plain loops, the difference operator and both
//! characterisations are spelled out term by term, and the stability
//! constants are written as closed-form geometric sums.
#![allow(dead_code)]

use acstab::models::Atom;
use acstab::Rational;
use num_bigint::BigInt;
use num_traits::{One, Zero};

pub type Q = Rational;
pub type V = Vec<Q>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    q(n, 1)
}

pub fn add(a: &[Q], b: &[Q]) -> V {
    a.iter().zip(b).map(|(u, v)| u + v).collect()
}

pub fn scale(c: i64, a: &[Q]) -> V {
    a.iter().map(|u| u * qi(c)).collect()
}

/// `a·x + b·y`
pub fn lin(a: i64, x: &[Q], b: i64, y: &[Q]) -> V {
    add(&scale(a, x), &scale(b, y))
}

/// `Σ c_k v_k`
pub fn sum(parts: &[(i64, V)]) -> V {
    let m = parts[0].1.len();
    let mut out = vec![Q::zero(); m];
    for (c, v) in parts {
        out = add(&out, &scale(*c, v));
    }
    out
}

pub fn is_zero(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Plain-loop evaluation of the noise-free atoms.
pub fn naive_eval(atoms: &[Atom<Q>], x: &[Q], m: usize) -> V {
    let d = x.len();
    let mut out = vec![Q::zero(); m];
    for atom in atoms {
        match atom {
            Atom::Linear { matrix } => {
                for k in 0..m {
                    for i in 0..d {
                        out[k] += &matrix[k][i] * &x[i];
                    }
                }
            }
            Atom::CubicHomogeneous { tensors } => {
                for k in 0..m {
                    for i in 0..d {
                        for j in 0..d {
                            for l in 0..d {
                                out[k] += &tensors[k][i * d * d + j * d + l] * &x[i] * &x[j] * &x[l];
                            }
                        }
                    }
                }
            }
            Atom::Even { forms } => {
                for k in 0..m {
                    for i in 0..d {
                        for j in 0..d {
                            out[k] += &forms[k][i][j] * &x[i] * &x[j];
                        }
                    }
                }
            }
            _ => panic!("oracle evaluates noise-free atoms only"),
        }
    }
    out
}

/// 3f(x+3y) − f(3x+y) − 12[f(x+y) + f(x−y)] + 16[f(x) + f(y)] − 12f(2y) + 4f(2x)
pub fn oracle_d(f: &dyn Fn(&[Q]) -> V, x: &[Q], y: &[Q]) -> V {
    sum(&[
        (3, f(&lin(1, x, 3, y))),
        (-1, f(&lin(3, x, 1, y))),
        (-12, f(&lin(1, x, 1, y))),
        (-12, f(&lin(1, x, -1, y))),
        (16, f(x)),
        (16, f(y)),
        (-12, f(&lin(0, x, 2, y))),
        (4, f(&lin(2, x, 0, y))),
    ])
}

/// Additive characterisation: the D terms with `16f(x) + 16f(y) − 12f(2y) + 4f(2x)`
/// collapsed to `24f(x) − 8f(y)`.
pub fn oracle_additive(f: &dyn Fn(&[Q]) -> V, x: &[Q], y: &[Q]) -> V {
    sum(&[
        (3, f(&lin(1, x, 3, y))),
        (-1, f(&lin(3, x, 1, y))),
        (-12, f(&lin(1, x, 1, y))),
        (-12, f(&lin(1, x, -1, y))),
        (24, f(x)),
        (-8, f(y)),
    ])
}

/// Cubic characterisation: the same with `48f(x) − 80f(y)`.
pub fn oracle_cubic(f: &dyn Fn(&[Q]) -> V, x: &[Q], y: &[Q]) -> V {
    sum(&[
        (3, f(&lin(1, x, 3, y))),
        (-1, f(&lin(3, x, 1, y))),
        (-12, f(&lin(1, x, 1, y))),
        (-12, f(&lin(1, x, -1, y))),
        (48, f(x)),
        (-80, f(y)),
    ])
}

/// `Σ_{i ≥ 0} a·r^i`
pub fn geometric(a: f64, r: f64) -> f64 {
    assert!(r.abs() < 1.0);
    a / (1.0 - r)
}

/// Closed form of the sum-of-powers stability constant at `‖x‖ = 1`, as the
/// two geometric sums written out separately.
pub fn oracle_sum_constant(theta: f64, p: f64) -> f64 {
    // additive part: θ / |2^p − 2|, cubic part: θ / |2^p − 8|
    let two_p = 2f64.powf(p);
    (theta / (two_p - 2.0).abs() + theta / (two_p - 8.0).abs()) / 6.0
}

pub fn oracle_product_constant(theta: f64, r: f64, s: f64) -> f64 {
    oracle_sum_constant(theta, r + s) / 2.0
}

/// Exact rational `x³`.
pub fn cube(x: &Q) -> Q {
    x * x * x
}

pub fn one() -> Q {
    Q::one()
}

/// `|a − b|` as f64.
pub fn dist(a: &Q, b: &Q) -> f64 {
    use num_traits::{Signed, ToPrimitive};
    (a - b).abs().to_f64().unwrap()
}
