//! Direct-method recovery of the additive and cubic parts.
//!
//! With `H(x) = f(2x) − 8f(x)` and `G(x) = f(2x) − 2f(x)` the iterates
//!
//! ```text
//! A_n(x) = 2^{ln} H(x / 2^{ln}),    C_n(x) = 8^{ln} G(x / 2^{ln})
//! ```
//!
//! converge to an additive `A_0` and a cubic `C_0`. Because `G − H = 6f`, the
//! odd part of `f` is approximated by `A + C` with `A = −A_0/6`, `C = C_0/6`.

use std::convert::TryFrom;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{combined_bound, series_bound, uniqueness_tail, SeriesKind, SeriesResult, SeriesStatus};
use crate::error::{Error, Result};
use crate::models::{odd_part, ControlFunction, Evaluable, Point};
use crate::scalar::{ratio, Scalar};

/// Iteration direction `l`: `Contract` is `l = +1` (arguments `x/2^n`),
/// `Expand` is `l = −1` (arguments `2^n x`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Direction {
    Contract,
    Expand,
}

impl Direction {
    pub fn sign(self) -> i32 {
        match self {
            Direction::Contract => 1,
            Direction::Expand => -1,
        }
    }

    pub fn from_sign(l: i64) -> Result<Self> {
        match l {
            1 => Ok(Direction::Contract),
            -1 => Ok(Direction::Expand),
            other => Err(Error::InvalidParameter(format!("direction must be +1 or -1, got {other}"))),
        }
    }

    /// Direction for which the component series converges: contract when φ
    /// grows faster on the diagonal than the component's weight, else expand.
    pub fn auto(phi: &ControlFunction<f64>, component: Component) -> Self {
        if phi.degree() > f64::from(component.weight_log2()) {
            Direction::Contract
        } else {
            Direction::Expand
        }
    }

    /// `(additive, cubic)` automatic directions.
    pub fn auto_pair(phi: &ControlFunction<f64>) -> (Self, Self) {
        (Self::auto(phi, Component::Additive), Self::auto(phi, Component::Cubic))
    }
}

impl TryFrom<i8> for Direction {
    type Error = Error;

    fn try_from(l: i8) -> Result<Self> {
        Self::from_sign(l.into())
    }
}

impl From<Direction> for i8 {
    fn from(d: Direction) -> i8 {
        d.sign() as i8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Additive,
    Cubic,
}

impl Component {
    /// log2 of the iteration weight (`2` or `8`).
    pub fn weight_log2(self) -> i32 {
        match self {
            Component::Additive => 1,
            Component::Cubic => 3,
        }
    }

    /// `k` in the transform `f(2x) − k f(x)`.
    pub fn transform_k(self) -> i64 {
        match self {
            Component::Additive => 8,
            Component::Cubic => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Component::Additive => "additive",
            Component::Cubic => "cubic",
        }
    }
}

/// Stopping rule for the iterates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IterationConfig {
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// Largest iterate index `N`; the trace holds at most `N + 1` values.
    pub max_iter: usize,
    /// Consecutive small gaps required to declare convergence.
    pub confirm: usize,
    /// Stop as soon as convergence is confirmed instead of running to `max_iter`.
    pub stop_on_convergence: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self { tol_abs: 1e-12, tol_rel: 1e-10, max_iter: 48, confirm: 3, stop_on_convergence: true }
    }
}

impl IterationConfig {
    /// Same tolerances, runs exactly `n` steps.
    pub fn fixed(n: usize) -> Self {
        Self { max_iter: n, stop_on_convergence: false, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("iteration count must be >= 1".into()));
        }
        if !(self.tol_abs >= 0.0 && self.tol_rel >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be >= 0".into()));
        }
        Ok(())
    }
}

/// Evaluation norms above this abort the iteration.
pub const OVERFLOW_LIMIT: f64 = 3.273_390_607_896_142e150; // 2^500

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace<S> {
    pub values: Vec<Point<S>>,
    /// `‖values[n+1] − values[n]‖`, one shorter than `values`.
    pub cauchy_gaps: Vec<f64>,
    pub converged: bool,
    pub final_value: Point<S>,
}

impl<S: Scalar> IterationTrace<S> {
    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            iterations: self.values.len() - 1,
            converged: self.converged,
            last_gap: self.cauchy_gaps.last().copied().unwrap_or(0.0),
        }
    }
}

/// Compact per-trace diagnostics kept in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub iterations: usize,
    pub converged: bool,
    pub last_gap: f64,
}

/// `x ↦ f(2x) − k f(x)`.
#[derive(Debug, Clone)]
pub struct Transform<F> {
    f: F,
    k: i64,
}

impl<S: Scalar, F: Evaluable<S>> Evaluable<S> for Transform<F> {
    fn domain_dim(&self) -> usize {
        self.f.domain_dim()
    }

    fn codomain_dim(&self) -> usize {
        self.f.codomain_dim()
    }

    fn eval(&self, x: &Point<S>) -> Result<Point<S>> {
        let doubled = self.f.eval(&x.scale(&S::from_int(2)))?;
        doubled.combine(1, &self.f.eval(x)?, -self.k)
    }
}

/// `H(x) = f(2x) − 8f(x)`.
pub fn h_transform<F>(f: F) -> Transform<F> {
    Transform { f, k: 8 }
}

/// `G(x) = f(2x) − 2f(x)`.
pub fn g_transform<F>(f: F) -> Transform<F> {
    Transform { f, k: 2 }
}

fn guarded<S: Scalar, F: Evaluable<S> + ?Sized>(f: &F, x: &Point<S>, index: usize) -> Result<Point<S>> {
    let v = f.eval(x)?;
    let magnitude = v.norm_approx();
    if !magnitude.is_finite() || magnitude > OVERFLOW_LIMIT {
        return Err(Error::Overflow { index, magnitude });
    }
    Ok(v)
}

/// `values[n] = w^{ln} [f(2 z_n) − k f(z_n)]` with `z_n = x · 2^{−ln}`.
pub fn iterate<S, F>(
    f: &F,
    x: &Point<S>,
    l: Direction,
    component: Component,
    cfg: &IterationConfig,
) -> Result<IterationTrace<S>>
where
    S: Scalar,
    F: Evaluable<S> + ?Sized,
{
    cfg.validate()?;
    crate::models::check_dim(f.domain_dim(), x.dim())?;
    let w = component.weight_log2();
    let (arg_step, weight_step) = match l {
        Direction::Contract => (ratio::<S>(1, 2), S::from_int(1 << w)),
        Direction::Expand => (S::from_int(2), ratio::<S>(1, 1 << w)),
    };
    let k = component.transform_k();

    // f(z_n) and f(2 z_n); consecutive iterates share one of the two
    let mut z = x.clone();
    let mut f_z = guarded(f, &z, 0)?;
    let mut f_2z = guarded(f, &z.scale(&S::from_int(2)), 0)?;
    let mut weight = S::one();
    let mut values: Vec<Point<S>> = Vec::with_capacity(cfg.max_iter + 1);
    let mut gaps = Vec::with_capacity(cfg.max_iter);
    let mut streak = 0usize;
    for n in 0..=cfg.max_iter {
        let value = f_2z.combine(1, &f_z, -k)?.scale(&weight);
        if let Some(prev) = values.last() {
            let gap = value.sub(prev)?.norm_approx();
            let threshold = cfg.tol_abs.max(cfg.tol_rel * value.norm_approx());
            streak = if gap <= threshold { streak + 1 } else { 0 };
            gaps.push(gap);
        }
        values.push(value);
        if n == cfg.max_iter || (cfg.stop_on_convergence && streak >= cfg.confirm) {
            break;
        }
        z = z.scale(&arg_step);
        match l {
            Direction::Contract => {
                f_2z = std::mem::replace(&mut f_z, guarded(f, &z, n + 1)?);
            }
            Direction::Expand => {
                f_z = std::mem::replace(&mut f_2z, guarded(f, &z.scale(&S::from_int(2)), n + 1)?);
            }
        }
        weight = weight * weight_step.clone();
    }
    let final_value = values.last().cloned().expect("at least one iterate");
    Ok(IterationTrace { values, cauchy_gaps: gaps, converged: streak >= cfg.confirm, final_value })
}

pub fn additive_iterate<S, F>(f: &F, x: &Point<S>, l: Direction, cfg: &IterationConfig) -> Result<IterationTrace<S>>
where
    S: Scalar,
    F: Evaluable<S> + ?Sized,
{
    iterate(f, x, l, Component::Additive, cfg)
}

pub fn cubic_iterate<S, F>(f: &F, x: &Point<S>, l: Direction, cfg: &IterationConfig) -> Result<IterationTrace<S>>
where
    S: Scalar,
    F: Evaluable<S> + ?Sized,
{
    iterate(f, x, l, Component::Cubic, cfg)
}

/// How recovery picks the iteration directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionChoice {
    #[default]
    Auto,
    Fixed {
        additive: Direction,
        cubic: Direction,
    },
}

impl DirectionChoice {
    pub fn resolve(self, phi: &ControlFunction<f64>) -> (Direction, Direction) {
        match self {
            DirectionChoice::Auto => Direction::auto_pair(phi),
            DirectionChoice::Fixed { additive, cubic } => (additive, cubic),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryConfig {
    pub directions: DirectionChoice,
    pub iteration: IterationConfig,
    /// Relative truncation tolerance for the bound series.
    pub series_tol: f64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self { directions: DirectionChoice::Auto, iteration: IterationConfig::default(), series_tol: 1e-12 }
    }
}

/// Recovery at one point. Errors and bounds are reported as `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRecovery<S> {
    pub x: Point<S>,
    pub additive: Point<S>,
    pub cubic: Point<S>,
    /// `‖f_odd(x) − A(x) − C(x)‖`
    pub odd_error: f64,
    /// `‖f(x) − A(x) − C(x)‖`
    pub raw_error: f64,
    /// Upper end of the certified combined bound at `x`.
    pub bound: f64,
    /// `‖H(x) − A_0(x)‖` and its bound.
    pub additive_limit_error: f64,
    pub additive_limit_bound: f64,
    /// `‖G(x) − C_0(x)‖` and its bound.
    pub cubic_limit_error: f64,
    pub cubic_limit_bound: f64,
    pub additive_trace: TraceSummary,
    pub cubic_trace: TraceSummary,
}

impl<S> PointRecovery<S> {
    pub fn within_bound(&self) -> bool {
        self.odd_error <= self.bound
            && self.additive_limit_error <= self.additive_limit_bound
            && self.cubic_limit_error <= self.cubic_limit_bound
    }

    pub fn converged(&self) -> bool {
        self.additive_trace.converged && self.cubic_trace.converged
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport<S> {
    pub phi: ControlFunction<f64>,
    pub direction_additive: Direction,
    pub direction_cubic: Direction,
    /// In input order.
    pub points: Vec<PointRecovery<S>>,
}

impl<S> RecoveryReport<S> {
    pub fn all_within_bound(&self) -> bool {
        self.points.iter().all(PointRecovery::within_bound)
    }

    pub fn max_odd_error(&self) -> f64 {
        self.points.iter().map(|p| p.odd_error).fold(0.0, f64::max)
    }
}

/// Fails with `Divergent` unless both component series converge for φ at the
/// chosen directions. φ is homogeneous, so the status at `‖x‖ = 1` decides.
pub fn check_admissible(phi: &ControlFunction<f64>, l_additive: Direction, l_cubic: Direction, tol: f64) -> Result<()> {
    phi.validate()?;
    for (component, l) in [(Component::Additive, l_additive), (Component::Cubic, l_cubic)] {
        let s = series_bound(SeriesKind::from(component), phi, 1.0, l, tol);
        if s.status == SeriesStatus::Diverged {
            return Err(Error::Divergent { component: component.name().into() });
        }
    }
    Ok(())
}

fn recover_point<S, F>(
    f: &F,
    x: &Point<S>,
    phi: &ControlFunction<f64>,
    (la, lc): (Direction, Direction),
    cfg: &RecoveryConfig,
) -> Result<PointRecovery<S>>
where
    S: Scalar,
    F: Evaluable<S> + ?Sized,
{
    let fo = odd_part(f);
    let ta = additive_iterate(&fo, x, la, &cfg.iteration)?;
    let tc = cubic_iterate(&fo, x, lc, &cfg.iteration)?;
    let a = ta.final_value.scale(&ratio(-1, 6));
    let c = tc.final_value.scale(&ratio(1, 6));
    let fit = a.add(&c)?;
    let odd_error = fo.eval(x)?.sub(&fit)?.norm_approx();
    let raw_error = f.eval(x)?.sub(&fit)?.norm_approx();
    // values[0] is H(x) (resp. G(x)) in both directions
    let additive_limit_error = ta.values[0].sub(&ta.final_value)?.norm_approx();
    let cubic_limit_error = tc.values[0].sub(&tc.final_value)?.norm_approx();
    let norm_x = x.norm_approx();
    let sa = series_bound(SeriesKind::Additive, phi, norm_x, la, cfg.series_tol);
    let sc = series_bound(SeriesKind::Cubic, phi, norm_x, lc, cfg.series_tol);
    let combined = combined_bound(phi, norm_x, la, lc, cfg.series_tol);
    Ok(PointRecovery {
        x: x.clone(),
        additive: a,
        cubic: c,
        odd_error,
        raw_error,
        bound: combined.upper(),
        additive_limit_error,
        additive_limit_bound: sa.upper(),
        cubic_limit_error,
        cubic_limit_bound: sc.upper(),
        additive_trace: ta.summary(),
        cubic_trace: tc.summary(),
    })
}

/// Recovers `A` and `C` from the odd part of `f` at every point and compares
/// the residual with the combined stability bound for φ.
pub fn recover<S, F>(
    f: &F,
    points: &[Point<S>],
    phi: &ControlFunction<f64>,
    cfg: &RecoveryConfig,
) -> Result<RecoveryReport<S>>
where
    S: Scalar,
    F: Evaluable<S> + ?Sized,
{
    let (la, lc) = cfg.directions.resolve(phi);
    check_admissible(phi, la, lc, cfg.series_tol)?;
    let points = points.par_iter().map(|x| recover_point(f, x, phi, (la, lc), cfg)).collect::<Result<Vec<_>>>()?;
    Ok(RecoveryReport { phi: *phi, direction_additive: la, direction_cubic: lc, points })
}

/// One recovered component as a function: `x ↦ −A_0(x)/6` or `x ↦ C_0(x)/6`
/// computed from the odd part of `f`.
pub struct Recovered<F> {
    f: F,
    l: Direction,
    component: Component,
    cfg: IterationConfig,
}

pub fn recovered_additive<F>(f: F, l: Direction, cfg: IterationConfig) -> Recovered<F> {
    Recovered { f, l, component: Component::Additive, cfg }
}

pub fn recovered_cubic<F>(f: F, l: Direction, cfg: IterationConfig) -> Recovered<F> {
    Recovered { f, l, component: Component::Cubic, cfg }
}

impl<S: Scalar, F: Evaluable<S>> Evaluable<S> for Recovered<F> {
    fn domain_dim(&self) -> usize {
        self.f.domain_dim()
    }

    fn codomain_dim(&self) -> usize {
        self.f.codomain_dim()
    }

    fn eval(&self, x: &Point<S>) -> Result<Point<S>> {
        let trace = iterate(&odd_part(&self.f), x, self.l, self.component, &self.cfg)?;
        let factor = match self.component {
            Component::Additive => ratio(-1, 6),
            Component::Cubic => ratio(1, 6),
        };
        Ok(trace.final_value.scale(&factor))
    }
}

/// Distance between the iterates at `n1` and `n2` and the uniqueness tail that
/// must dominate it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniquenessProbe {
    pub gap: f64,
    pub tail: SeriesResult<f64>,
}

impl UniquenessProbe {
    pub fn holds(&self) -> bool {
        self.gap <= self.tail.upper()
    }
}

/// Runs one forced trace to `max(n1, n2)` on the odd part of `f` and compares
/// `values[n1]` with `values[n2]`.
pub fn uniqueness_probe<S, F>(
    f: &F,
    x: &Point<S>,
    phi: &ControlFunction<f64>,
    l: Direction,
    component: Component,
    n1: usize,
    n2: usize,
) -> Result<UniquenessProbe>
where
    S: Scalar,
    F: Evaluable<S> + ?Sized,
{
    if n1 == n2 {
        return Err(Error::InvalidParameter("uniqueness probe needs two distinct iterate counts".into()));
    }
    let cfg = IterationConfig::fixed(n1.max(n2));
    let trace = iterate(&odd_part(f), x, l, component, &cfg)?;
    let gap = trace.values[n1].sub(&trace.values[n2])?.norm_approx();
    let tail = uniqueness_tail(component, phi, x.norm_approx(), l, n1.min(n2), 1e-12);
    Ok(UniquenessProbe { gap, tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Atom, FuncModel, NormKind};
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        ratio(n, d)
    }

    fn solution() -> FuncModel<Rational> {
        FuncModel::additive_cubic_1d(q(2, 1), q(1, 1))
    }

    #[test]
    fn transforms_of_the_model_solution() {
        let f = solution();
        for k in -3..=3 {
            let x = Point::scalar(q(k, 2));
            let xv = q(k, 2);
            assert_eq!(h_transform(&f).eval(&x).unwrap().coords()[0], q(-12, 1) * xv.clone());
            assert_eq!(g_transform(&f).eval(&x).unwrap().coords()[0], q(6, 1) * xv.clone() * xv.clone() * xv);
        }
    }

    #[test]
    fn exact_solution_iterates_are_constant() {
        let f = solution();
        let x = Point::scalar(q(1, 1));
        for l in [Direction::Contract, Direction::Expand] {
            let a = additive_iterate(&f, &x, l, &IterationConfig::default()).unwrap();
            assert!(a.converged);
            assert!(a.values.iter().all(|v| v.coords()[0] == q(-12, 1)));
            let c = cubic_iterate(&f, &x, l, &IterationConfig::default()).unwrap();
            assert!(c.values.iter().all(|v| v.coords()[0] == q(6, 1)));
            assert_eq!(c.values.len(), 4);
        }
    }

    #[test]
    fn fixed_run_has_n_plus_one_values() {
        let f = FuncModel::<f64>::zero(1, 1).unwrap();
        let t = additive_iterate(&f, &Point::scalar(1.0), Direction::Expand, &IterationConfig::fixed(7)).unwrap();
        assert_eq!(t.values.len(), 8);
        assert_eq!(t.cauchy_gaps.len(), 7);
        assert!(t.values.iter().all(Point::is_zero));
    }

    #[test]
    fn zero_iterations_rejected() {
        let f = solution();
        let r = additive_iterate(&f, &Point::scalar(q(1, 1)), Direction::Expand, &IterationConfig::fixed(0));
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn overflow_guard_trips_for_cubic_growth() {
        let f = FuncModel::cubic_1d(1.0f64);
        let cfg = IterationConfig { max_iter: 200, stop_on_convergence: false, ..Default::default() };
        let r = additive_iterate(&f, &Point::scalar(1.0), Direction::Expand, &cfg);
        assert!(matches!(r, Err(Error::Overflow { .. })));
    }

    #[test]
    fn recover_exact_solution() {
        let f = solution();
        let pts: Vec<_> = [1, -1, 3].iter().map(|&k| Point::scalar(q(k, 1))).collect();
        let phi = ControlFunction::Constant { c: 0.0 };
        let rep = recover(&f, &pts, &phi, &RecoveryConfig::default()).unwrap();
        for p in &rep.points {
            let x = p.x.coords()[0].clone();
            assert_eq!(p.additive.coords()[0], q(2, 1) * x.clone());
            assert_eq!(p.cubic.coords()[0], x.clone() * x.clone() * x);
            assert_eq!(p.odd_error, 0.0);
        }
        assert!(rep.all_within_bound());
    }

    #[test]
    fn recover_even_model_is_zero() {
        let f = FuncModel::even_1d(q(1, 1));
        let pts = vec![Point::scalar(q(5, 2))];
        let rep = recover(&f, &pts, &ControlFunction::Constant { c: 0.0 }, &RecoveryConfig::default()).unwrap();
        assert!(rep.points[0].additive.is_zero() && rep.points[0].cubic.is_zero());
        assert_eq!(rep.points[0].odd_error, 0.0);
        assert!(rep.points[0].raw_error > 0.0);
    }

    #[test]
    fn divergent_phi_rejected() {
        let f = solution();
        let phi = ControlFunction::SumOfPowers { theta: 1.0, p: 1.0 };
        let r = recover(&f, &[Point::scalar(q(1, 1))], &phi, &RecoveryConfig::default());
        assert!(matches!(r, Err(Error::Divergent { ref component }) if component == "additive"));
    }

    #[test]
    fn auto_directions_follow_degree() {
        let d = |p: f64| Direction::auto_pair(&ControlFunction::SumOfPowers { theta: 1.0, p });
        assert_eq!(d(0.5), (Direction::Expand, Direction::Expand));
        assert_eq!(d(2.0), (Direction::Contract, Direction::Expand));
        assert_eq!(d(4.0), (Direction::Contract, Direction::Contract));
        assert_eq!(Direction::auto_pair(&ControlFunction::Constant { c: 1.0 }), (Direction::Expand, Direction::Expand));
    }

    #[test]
    fn direction_serde_is_signed_integer() {
        assert_eq!(serde_json::to_string(&Direction::Expand).unwrap(), "-1");
        assert_eq!(serde_json::from_str::<Direction>("1").unwrap(), Direction::Contract);
        assert!(serde_json::from_str::<Direction>("0").is_err());
    }

    #[test]
    fn uniqueness_probe_bounded_noise() {
        let eps = q(1, 1000);
        let f = solution().with(Atom::BoundedNoise { seed: 7, amplitude: eps }).unwrap();
        let phi = ControlFunction::Constant { c: 0.076 };
        let x = Point::new(vec![q(3, 4)], NormKind::Euclidean).unwrap();
        let p = uniqueness_probe(&f, &x, &phi, Direction::Expand, Component::Additive, 6, 12).unwrap();
        assert!(p.holds(), "{p:?}");
        assert!(p.gap > 0.0);
    }
}
