//! Scalar abstraction shared by every evaluation path.
//!
//! Two modes exist: exact rationals (`BigRational`) for identity replay and
//! binary floating point (`f64`, and `f32` for completeness) for fast
//! iteration. Code is written once against [`Scalar`] and monomorphised per
//! mode, so a single evaluation context can never mix modes.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arithmetic mode of a scalar type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    Exact,
    Float,
}

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Send + Sync + 'static + Num + Signed + FromPrimitive + ToPrimitive
{
    const MODE: ScalarMode;

    fn from_rational(q: &BigRational) -> Self;

    /// Square root. Exact for floats up to rounding; for rationals exact on
    /// perfect squares and otherwise the nearest double.
    fn sqrt(&self) -> Self;

    /// Text form accepted back by [`parse_literal`].
    fn to_literal(&self) -> String;

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("i64 is representable in every scalar mode")
    }

    /// Lossy view used for reporting and for the noise hash.
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn is_exact() -> bool {
        Self::MODE == ScalarMode::Exact
    }

    /// Homogeneous form `Σ_k c_k x_{k_1}···x_{k_degree}`, where `k` runs over
    /// `0..d^degree` and its base-`d` digits pick the coordinates.
    fn form<'a>(degree: u32, xs: &[Self], coeff: &dyn Fn(usize) -> &'a Self) -> Self {
        let d = xs.len();
        let mut acc = Self::zero();
        for k in 0..d.pow(degree) {
            let c = coeff(k);
            if c.is_zero() {
                continue;
            }
            let mut term = c.clone();
            let mut r = k;
            for _ in 0..degree {
                term = term * xs[r % d].clone();
                r /= d;
            }
            acc = acc + term;
        }
        acc
    }
}

impl Scalar for f64 {
    const MODE: ScalarMode = ScalarMode::Float;

    fn from_rational(q: &BigRational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn to_literal(&self) -> String {
        format_f64(*self)
    }
}

impl Scalar for f32 {
    const MODE: ScalarMode = ScalarMode::Float;

    fn from_rational(q: &BigRational) -> Self {
        q.to_f32().unwrap_or(f32::NAN)
    }

    fn sqrt(&self) -> Self {
        f32::sqrt(*self)
    }

    fn to_literal(&self) -> String {
        format!("{self:e}")
    }
}

impl Scalar for BigRational {
    const MODE: ScalarMode = ScalarMode::Exact;

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn sqrt(&self) -> Self {
        if self.is_negative() {
            panic!("square root of a negative rational");
        }
        if let (Some(n), Some(d)) = (exact_isqrt(self.numer()), exact_isqrt(self.denom())) {
            return BigRational::new(n, d);
        }
        let approx = self.approx().sqrt();
        BigRational::from_f64(approx).expect("finite square root")
    }

    fn to_literal(&self) -> String {
        self.to_string()
    }

    // Clears denominators once and sums in integers; reducing every partial
    // product by gcd dominates exact evaluation otherwise.
    fn form<'a>(degree: u32, xs: &[Self], coeff: &dyn Fn(usize) -> &'a Self) -> Self {
        let d = xs.len();
        let n = d.pow(degree);
        let x_den = xs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let x_int: Vec<BigInt> = xs.iter().map(|x| x.numer() * (&x_den / x.denom())).collect();
        let c_den = (0..n).map(coeff).filter(|c| !c.is_zero()).fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let c_int: Vec<Option<BigInt>> =
            (0..n).map(coeff).map(|c| (!c.is_zero()).then(|| c.numer() * (&c_den / c.denom()))).collect();
        // Horner over the leading digit: Σ_i x_i Σ_j x_j Σ_l c_ijl x_l
        fn nested(prefix: usize, depth: u32, c: &[Option<BigInt>], x: &[BigInt]) -> Option<BigInt> {
            if depth == 0 {
                return c[prefix].clone();
            }
            let mut acc: Option<BigInt> = None;
            for (t, xt) in x.iter().enumerate() {
                if let Some(inner) = nested(prefix * x.len() + t, depth - 1, c, x) {
                    let term = inner * xt;
                    acc = Some(match acc {
                        Some(a) => a + term,
                        None => term,
                    });
                }
            }
            acc
        }
        let total = nested(0, degree, &c_int, &x_int).unwrap_or_default();
        BigRational::new(total, c_den * num_traits::pow(x_den, degree as usize))
    }
}

fn exact_isqrt(v: &BigInt) -> Option<BigInt> {
    let r = v.sqrt();
    (&r * &r == *v).then_some(r)
}

/// Shortest round-trip text for a double, switching to exponent form outside
/// a readable range.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 || (1e-5..1e16).contains(&v.abs()) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Parses `"a/b"`, integers, decimals and scientific notation into an exact
/// rational. `"0.001"` is exactly 1/1000.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::InvalidLiteral(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits.parse().map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Parses a literal into any scalar mode via the exact rational value.
pub fn parse_literal<S: Scalar>(text: &str) -> Result<S> {
    parse_rational(text).map(|q| S::from_rational(&q))
}

/// `2^k` built by repeated doubling, exact in every mode while representable.
pub fn pow2<S: Scalar>(k: i32) -> S {
    let two = S::one() + S::one();
    let mut base = if k >= 0 { two } else { S::one() / two };
    let mut e = k.unsigned_abs();
    let mut acc = S::one();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base.clone();
        }
        base = base.clone() * base;
        e >>= 1;
    }
    acc
}

/// Rational `n/d` with machine-integer parts.
pub fn ratio<S: Scalar>(n: i64, d: i64) -> S {
    S::from_rational(&BigRational::new(BigInt::from(n), BigInt::from(d)))
}

pub(crate) fn one_half<S: Scalar>() -> S {
    S::one() / (S::one() + S::one())
}
