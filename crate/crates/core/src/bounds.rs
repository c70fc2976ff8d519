//! Stability bound series with certified truncation, closed-form constants for
//! the power-type control functions, and the envelope certificate for noisy
//! models.
//!
//! The additive and cubic bounds are
//!
//! ```text
//! ½ Σ_{i ≥ i0} w^{il} φ(x / 2^{l(i+l)}, x / 2^{l(i+l)}),   w ∈ {2, 8},  i0 = |l − 1| / 2
//! ```
//!
//! and the combined bound is a sixth of their sum. All three control-function
//! families are homogeneous on the diagonal, so consecutive terms have the
//! exact ratio `ρ = 2^{l(log2 w − deg φ)}` and the tail after any prefix is a
//! geometric series known in closed form.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyers::{Component, Direction};
use crate::models::{Atom, ControlFunction, FuncModel};
use crate::operator::D_TERMS;
use crate::scalar::Scalar;

/// Hard cap on summed terms before giving up with `Inconclusive`.
pub const MAX_TERMS: usize = 512;
/// A term ratio at or above `1 − DIVERGENCE_GAP` counts toward divergence.
pub const DIVERGENCE_GAP: f64 = 1e-12;
/// Consecutive non-contracting ratios that declare divergence.
pub const DIVERGENCE_STREAK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Additive,
    Cubic,
    Combined,
}

impl From<Component> for SeriesKind {
    fn from(c: Component) -> Self {
        match c {
            Component::Additive => SeriesKind::Additive,
            Component::Cubic => SeriesKind::Cubic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesStatus {
    Converged,
    Inconclusive,
    Diverged,
}

/// Truncated series value with a certified enclosure.
///
/// When `status` is `Converged` or `Inconclusive` the true sum lies in
/// `[partial_sum, partial_sum + tail_bound]`; `Diverged` carries an infinite
/// tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult<F> {
    pub partial_sum: F,
    pub tail_bound: F,
    pub terms_used: usize,
    pub status: SeriesStatus,
}

impl<F: Float> SeriesResult<F> {
    /// Upper end of the enclosure.
    pub fn upper(&self) -> F {
        self.partial_sum + self.tail_bound
    }

    pub fn is_diverged(&self) -> bool {
        self.status == SeriesStatus::Diverged
    }

    fn scaled(self, factor: F) -> Self {
        Self { partial_sum: self.partial_sum * factor, tail_bound: self.tail_bound * factor, ..self }
    }

    fn merged(self, other: Self, factor: F) -> Self {
        Self {
            partial_sum: (self.partial_sum + other.partial_sum) * factor,
            tail_bound: (self.tail_bound + other.tail_bound) * factor,
            terms_used: self.terms_used + other.terms_used,
            status: self.status.max(other.status),
        }
    }
}

fn lit<F: Float>(v: f64) -> F {
    F::from(v).expect("constant representable in the float type")
}

/// log2 φ(z, z) for log2 ‖z‖ = `log2_norm`, without forming ‖z‖ itself.
fn log2_diagonal<F: Float>(phi: &ControlFunction<F>, log2_norm: F) -> F {
    let two = lit::<F>(2.0);
    match *phi {
        ControlFunction::Constant { c } => c.log2(),
        ControlFunction::SumOfPowers { theta, p } => {
            let scaled = if p.is_zero() { F::zero() } else { p * log2_norm };
            (two * theta).log2() + scaled
        }
        ControlFunction::ProductOfPowers { theta, r, s } => {
            let deg = r + s;
            let scaled = if deg.is_zero() { F::zero() } else { deg * log2_norm };
            theta.log2() + scaled
        }
    }
}

/// `Σ_{i ≥ start} w^{il} φ(z_i, z_i)` with `‖z_i‖ = ‖x‖·2^{-l(i+l)}` and `w = 2^weight_log2`.
fn weighted_series<F: Float>(
    weight_log2: i32,
    phi: &ControlFunction<F>,
    norm_x: F,
    l: Direction,
    start: i64,
    tol: F,
) -> SeriesResult<F> {
    let scale = match *phi {
        ControlFunction::Constant { c } => c,
        ControlFunction::SumOfPowers { theta, .. } | ControlFunction::ProductOfPowers { theta, .. } => theta,
    };
    // every term vanishes, whatever the growth rate
    if scale.is_zero() {
        return SeriesResult {
            partial_sum: F::zero(),
            tail_bound: F::zero(),
            terms_used: 0,
            status: SeriesStatus::Converged,
        };
    }
    let sign = F::from(l.sign()).unwrap();
    let w = F::from(weight_log2).unwrap();
    let log2_norm_x = norm_x.log2();
    let log2_term = |i: i64| {
        let i = F::from(i).unwrap();
        let shift = sign * (i + sign);
        sign * i * w + log2_diagonal(phi, log2_norm_x - shift)
    };
    let log2_ratio = sign * (w - phi.degree());
    let ratio = log2_ratio.exp2();
    let contracting = ratio < F::one() - lit(DIVERGENCE_GAP);
    let rounding = F::epsilon();

    let mut partial = F::zero();
    let mut log_slack = F::zero();
    let mut streak = 0usize;
    for k in 0..MAX_TERMS {
        let log2_t = log2_term(start + k as i64);
        let term = log2_t.exp2();
        if !term.is_finite() {
            return SeriesResult {
                partial_sum: partial,
                tail_bound: F::infinity(),
                terms_used: k,
                status: SeriesStatus::Diverged,
            };
        }
        partial = partial + term;
        // an absolute error of a few ulps of |log2 t| becomes a relative error of exp2
        if term > F::zero() {
            log_slack = log_slack + term * (log2_t.abs() * lit(4.0) + lit(8.0)) * rounding;
        }
        let used = k + 1;
        if !contracting {
            streak += 1;
            if streak >= DIVERGENCE_STREAK {
                return SeriesResult {
                    partial_sum: partial,
                    tail_bound: F::infinity(),
                    terms_used: used,
                    status: SeriesStatus::Diverged,
                };
            }
            continue;
        }
        // exact geometric remainder, widened to cover term and summation rounding
        let tail = term * ratio / (F::one() - ratio);
        let tail_bound = tail * (F::one() + lit(1e-9)) + log_slack + F::from(used + 1).unwrap() * rounding * partial;
        // relative, so tiny uniqueness tails are resolved as well as O(1) sums
        if tail <= tol * partial {
            return SeriesResult {
                partial_sum: partial,
                tail_bound,
                terms_used: used,
                status: SeriesStatus::Converged,
            };
        }
        if used == MAX_TERMS {
            return SeriesResult {
                partial_sum: partial,
                tail_bound,
                terms_used: used,
                status: SeriesStatus::Inconclusive,
            };
        }
    }
    unreachable!("loop returns by MAX_TERMS")
}

fn first_index(l: Direction) -> i64 {
    match l {
        Direction::Contract => 0,
        Direction::Expand => 1,
    }
}

fn component_series<F: Float>(
    component: Component,
    phi: &ControlFunction<F>,
    norm_x: F,
    l: Direction,
    tol: F,
) -> SeriesResult<F> {
    weighted_series(component.weight_log2(), phi, norm_x, l, first_index(l), tol).scaled(lit(0.5))
}

/// The additive, cubic or combined stability bound at a point of norm `norm_x`.
/// `Combined` uses the same direction for both parts.
pub fn series_bound<F: Float>(
    kind: SeriesKind,
    phi: &ControlFunction<F>,
    norm_x: F,
    l: Direction,
    tol: F,
) -> SeriesResult<F> {
    match kind {
        SeriesKind::Additive => component_series(Component::Additive, phi, norm_x, l, tol),
        SeriesKind::Cubic => component_series(Component::Cubic, phi, norm_x, l, tol),
        SeriesKind::Combined => combined_bound(phi, norm_x, l, l, tol),
    }
}

/// Combined bound with a separate direction per component:
/// `(additive series at l_a + cubic series at l_c) / 6`.
pub fn combined_bound<F: Float>(
    phi: &ControlFunction<F>,
    norm_x: F,
    l_additive: Direction,
    l_cubic: Direction,
    tol: F,
) -> SeriesResult<F> {
    let a = component_series(Component::Additive, phi, norm_x, l_additive, tol);
    let c = component_series(Component::Cubic, phi, norm_x, l_cubic, tol);
    a.merged(c, F::one() / lit(6.0))
}

/// Uniqueness tail `Σ_{i ≥ n + |l−1|/2} w^{il} φ(·)`, which bounds the distance
/// between the `n`-th iterate and any later one.
pub fn uniqueness_tail<F: Float>(
    component: Component,
    phi: &ControlFunction<F>,
    norm_x: F,
    l: Direction,
    n: usize,
    tol: F,
) -> SeriesResult<F> {
    weighted_series(component.weight_log2(), phi, norm_x, l, n as i64 + first_index(l), tol)
}

fn check_exponent<F: Float>(theta: F, p: F) -> Result<()> {
    if !(theta >= F::zero() && theta.is_finite()) {
        return Err(Error::InvalidParameter("theta must be finite and >= 0".into()));
    }
    if !(p >= F::zero() && p.is_finite()) {
        return Err(Error::InvalidParameter("exponent must be finite and >= 0".into()));
    }
    if p == F::one() || p == lit(3.0) {
        return Err(Error::ExcludedExponent { exponent: p.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(())
}

fn corollary_factor<F: Float>(p: F) -> F {
    let two_p = lit::<F>(2.0).powf(p);
    F::one() / (two_p - lit(2.0)).abs() + F::one() / (two_p - lit(8.0)).abs()
}

/// `θ/6 · [1/|2^p − 2| + 1/|2^p − 8|] · ‖x‖^p` for φ = θ(‖x‖^p + ‖y‖^p).
pub fn corollary_sum_bound<F: Float>(theta: F, p: F, norm_x: F) -> Result<F> {
    check_exponent(theta, p)?;
    Ok(theta / lit(6.0) * corollary_factor(p) * norm_x.powf(p))
}

/// `θ/12 · [1/|2^p − 2| + 1/|2^p − 8|] · ‖x‖^p`, `p = r + s`, for φ = θ‖x‖^r‖y‖^s.
pub fn corollary_product_bound<F: Float>(theta: F, r: F, s: F, norm_x: F) -> Result<F> {
    if !(r >= F::zero() && s >= F::zero()) {
        return Err(Error::InvalidParameter("r and s must be >= 0".into()));
    }
    let p = r + s;
    check_exponent(theta, p)?;
    Ok(theta / lit(12.0) * corollary_factor(p) * norm_x.powf(p))
}

/// Sum of the absolute coefficients of D_f (= 76).
pub fn d_coefficient_sum() -> i64 {
    D_TERMS.iter().map(|t| t.num.abs()).sum()
}

/// Largest `|a| + |b|` over the arguments `ax + by` of D_f (= 4).
pub fn d_argument_spread() -> i64 {
    D_TERMS.iter().map(|t| t.a.abs() + t.b.abs()).max().unwrap_or(0)
}

/// Control function certified to dominate ‖D_f‖ for `f` = exact solution + noise.
///
/// D is linear in f and vanishes on the solution part, so only noise atoms
/// contribute: bounded noise of size ε gives `Constant(76ε)`, power noise
/// `ε‖x‖^p` gives `SumOfPowers(76·4^p·ε, p)` via `‖ax + by‖^p ≤ 4^p(‖x‖^p + ‖y‖^p)`.
pub fn certify_phi<S: Scalar, F: Float>(f: &FuncModel<S>) -> Result<ControlFunction<F>> {
    let coef = lit::<F>(d_coefficient_sum() as f64);
    let spread = lit::<F>(d_argument_spread() as f64);
    let round_up = F::one() + lit::<F>(4.0) * F::epsilon();
    let mut bounded = F::zero();
    let mut power: Option<(F, F)> = None;
    for atom in f.atoms() {
        match atom {
            Atom::Linear { .. } | Atom::CubicHomogeneous { .. } => {}
            Atom::Even { .. } => {
                return Err(Error::Uncertifiable("even atoms are not solutions and have no envelope".into()))
            }
            Atom::BoundedNoise { amplitude, .. } => bounded = bounded + lit(amplitude.approx()),
            Atom::PowerNoise { amplitude, exponent, .. } => {
                let eps = lit::<F>(amplitude.approx());
                let p = lit::<F>(*exponent);
                if eps.is_zero() {
                    continue;
                }
                power = match power {
                    None => Some((eps, p)),
                    Some((acc, q)) if q == p => Some((acc + eps, p)),
                    Some(_) => return Err(Error::Uncertifiable("power noise atoms with different exponents".into())),
                };
            }
        }
    }
    match power {
        None => Ok(ControlFunction::Constant { c: coef * bounded * round_up }),
        Some((eps, p)) if bounded.is_zero() || p.is_zero() => {
            let theta = (coef * spread.powf(p) * eps + coef * bounded) * round_up;
            Ok(ControlFunction::SumOfPowers { theta, p })
        }
        Some(_) => Err(Error::Uncertifiable("bounded and power noise mixed in one model".into())),
    }
}

/// Closed form versus truncated series, for one corollary family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub closed_form: f64,
    pub series: SeriesResult<f64>,
    pub additive_direction: Direction,
    pub cubic_direction: Direction,
    pub difference: f64,
    pub passed: bool,
}

fn consistency(phi: ControlFunction<f64>, closed_form: f64, norm_x: f64, tol: f64) -> ConsistencyReport {
    let (la, lc) = Direction::auto_pair(&phi);
    let series = combined_bound(&phi, norm_x, la, lc, tol.min(1e-12));
    let difference = (series.partial_sum - closed_form).abs();
    ConsistencyReport {
        closed_form,
        series,
        additive_direction: la,
        cubic_direction: lc,
        difference,
        passed: series.status == SeriesStatus::Converged && difference <= tol,
    }
}

/// Compares the sum-of-powers closed form with the per-component series.
pub fn consistency_check(theta: f64, p: f64, norm_x: f64, tol: f64) -> Result<ConsistencyReport> {
    let closed = corollary_sum_bound(theta, p, norm_x)?;
    Ok(consistency(ControlFunction::SumOfPowers { theta, p }, closed, norm_x, tol))
}

/// Compares the product-of-powers closed form with the per-component series.
pub fn consistency_check_product(theta: f64, r: f64, s: f64, norm_x: f64, tol: f64) -> Result<ConsistencyReport> {
    let closed = corollary_product_bound(theta, r, s, norm_x)?;
    Ok(consistency(ControlFunction::ProductOfPowers { theta, r, s }, closed, norm_x, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use crate::Rational;

    const TOL: f64 = 1e-13;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn constant_phi_geometric_sums() {
        let c = 0.3;
        let phi = ControlFunction::Constant { c };
        let add = series_bound(SeriesKind::Additive, &phi, 1.7, Direction::Expand, TOL);
        assert_eq!(add.status, SeriesStatus::Converged);
        assert!(close(add.partial_sum, c / 2.0, 1e-12));
        let cub = series_bound(SeriesKind::Cubic, &phi, 1.7, Direction::Expand, TOL);
        assert!(close(cub.partial_sum, c / 14.0, 1e-12));
        let both = series_bound(SeriesKind::Combined, &phi, 1.7, Direction::Expand, TOL);
        assert!(close(both.partial_sum, 2.0 * c / 21.0, 1e-12));
    }

    #[test]
    fn combined_sum_of_powers_p2() {
        let phi = ControlFunction::SumOfPowers { theta: 1.0, p: 2.0 };
        let add = series_bound(SeriesKind::Additive, &phi, 1.0, Direction::Contract, TOL);
        let cub = series_bound(SeriesKind::Cubic, &phi, 1.0, Direction::Expand, TOL);
        assert!(close(add.partial_sum, 0.5, 1e-12));
        assert!(close(cub.partial_sum, 0.25, 1e-12));
        let both = combined_bound(&phi, 1.0, Direction::Contract, Direction::Expand, TOL);
        assert!(close(both.partial_sum, 0.125, 1e-12));
    }

    #[test]
    fn p1_diverges_additive_either_direction() {
        let phi = ControlFunction::SumOfPowers { theta: 1.0, p: 1.0 };
        for l in [Direction::Contract, Direction::Expand] {
            let r = series_bound(SeriesKind::Additive, &phi, 1.0, l, TOL);
            assert_eq!(r.status, SeriesStatus::Diverged);
            assert!(r.tail_bound.is_infinite());
        }
    }

    #[test]
    fn corollary_examples() {
        let th = 2.5;
        assert!(close(corollary_sum_bound(th, 0.0, 13.0).unwrap(), 4.0 * th / 21.0, 1e-15));
        assert!(close(corollary_sum_bound(th, 2.0, 1.0).unwrap(), th / 8.0, 1e-15));
        assert!(close(corollary_sum_bound(th, 4.0, 1.0).unwrap(), 11.0 * th / 336.0, 1e-15));
        assert!(close(corollary_product_bound(th, 1.0, 1.0, 1.0).unwrap(), th / 16.0, 1e-15));
        assert!(close(corollary_product_bound(th, 0.0, 0.0, 5.0).unwrap(), 2.0 * th / 21.0, 1e-15));
        assert_eq!(corollary_product_bound(0.0, 2.0, 0.5, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn excluded_exponents_rejected() {
        for p in [1.0, 3.0] {
            assert!(matches!(corollary_sum_bound(1.0, p, 1.0), Err(Error::ExcludedExponent { .. })));
        }
        assert!(matches!(corollary_product_bound(1.0, 2.0, 1.0, 1.0), Err(Error::ExcludedExponent { .. })));
        assert!(corollary_sum_bound(1.0, 1.0 + 1e-6, 1.0).is_ok());
    }

    #[test]
    fn certify_examples() {
        let exact = FuncModel::additive_cubic_1d(2.0f64, 1.0);
        assert_eq!(certify_phi::<f64, f64>(&exact).unwrap(), ControlFunction::Constant { c: 0.0 });
        let noisy = exact.clone().with(Atom::BoundedNoise { seed: 1, amplitude: 1e-3 }).unwrap();
        match certify_phi::<f64, f64>(&noisy).unwrap() {
            ControlFunction::Constant { c } => assert!(close(c, 0.076, 1e-14)),
            other => panic!("unexpected {other:?}"),
        }
        let power = exact.clone().with(Atom::PowerNoise { seed: 1, amplitude: 1e-3, exponent: 2.0 }).unwrap();
        match certify_phi::<f64, f64>(&power).unwrap() {
            ControlFunction::SumOfPowers { theta, p } => {
                assert_eq!(p, 2.0);
                assert!(close(theta, 76.0 * 16.0 * 1e-3, 1e-14));
            }
            other => panic!("unexpected {other:?}"),
        }
        let even = FuncModel::even_1d(ratio::<Rational>(1, 1));
        assert!(matches!(certify_phi::<Rational, f64>(&even), Err(Error::Uncertifiable(_))));
    }

    #[test]
    fn coefficient_constants() {
        assert_eq!(d_coefficient_sum(), 76);
        assert_eq!(d_argument_spread(), 4);
    }

    #[test]
    fn zero_theta_is_zero_sum() {
        let phi = ControlFunction::SumOfPowers { theta: 0.0, p: 2.0 };
        let r = combined_bound(&phi, 1.0, Direction::Contract, Direction::Expand, TOL);
        assert_eq!(r.status, SeriesStatus::Converged);
        assert_eq!(r.partial_sum, 0.0);
    }

    #[test]
    fn zero_phi_converges_in_either_direction() {
        let phi = ControlFunction::Constant { c: 0.0 };
        for l in [Direction::Contract, Direction::Expand] {
            let r = combined_bound(&phi, 3.0, l, l, TOL);
            assert_eq!((r.status, r.partial_sum, r.tail_bound), (SeriesStatus::Converged, 0.0, 0.0));
        }
    }

    #[test]
    fn zero_norm_point() {
        let phi = ControlFunction::SumOfPowers { theta: 1.0, p: 2.0 };
        let r = combined_bound(&phi, 0.0, Direction::Contract, Direction::Expand, TOL);
        assert_eq!(r.partial_sum, 0.0);
        let phi = ControlFunction::Constant { c: 1.0 };
        let r = combined_bound(&phi, 0.0, Direction::Expand, Direction::Expand, TOL);
        assert!(close(r.partial_sum, 2.0 / 21.0, 1e-12));
    }

    #[test]
    fn f32_series_works() {
        let phi = ControlFunction::Constant { c: 1.0f32 };
        let r = series_bound(SeriesKind::Additive, &phi, 1.0, Direction::Expand, 1e-6);
        assert!((r.partial_sum - 0.5).abs() < 1e-5);
    }
}
