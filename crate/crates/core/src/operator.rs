//! The difference operator of the mixed additive-cubic equation, the residuals
//! of the additive and cubic characterisations, and the replay table for the
//! derivation that turns the additive characterisation back into additivity.
//!
//! Every residual is a finite linear combination `Σ c_k f(a_k x + b_k y)` with
//! rational `c_k` and integer `a_k, b_k`, stored as data in [`Term`] tables and
//! evaluated by one routine. Residuals follow the LHS − RHS convention of the
//! printed equations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{check_dim, Evaluable, Point};
use crate::scalar::{ratio, Scalar};

/// `coef · f(x·a + y·b)` with `coef = num/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub num: i64,
    pub den: i64,
    pub a: i64,
    pub b: i64,
}

const fn t(num: i64, a: i64, b: i64) -> Term {
    Term { num, den: 1, a, b }
}

const fn tq(num: i64, den: i64, a: i64, b: i64) -> Term {
    Term { num, den, a, b }
}

impl Term {
    fn negated(self) -> Term {
        Term { num: -self.num, ..self }
    }

    pub fn coef_literal(&self) -> String {
        if self.den == 1 {
            self.num.to_string()
        } else {
            format!("{}/{}", self.num, self.den)
        }
    }
}

/// 3f(x+3y) − f(3x+y) − 12[f(x+y)+f(x−y)] + 16[f(x)+f(y)] − 12f(2y) + 4f(2x)
pub const D_TERMS: [Term; 8] =
    [t(3, 1, 3), t(-1, 3, 1), t(-12, 1, 1), t(-12, 1, -1), t(16, 1, 0), t(16, 0, 1), t(-12, 0, 2), t(4, 2, 0)];

/// 3f(x+3y) − f(3x+y) − 12[f(x+y)+f(x−y)] + 24f(x) − 8f(y); zero iff f additive.
pub const ADDITIVE_TERMS: [Term; 6] = [t(3, 1, 3), t(-1, 3, 1), t(-12, 1, 1), t(-12, 1, -1), t(24, 1, 0), t(-8, 0, 1)];

/// 3f(x+3y) − f(3x+y) − 12[f(x+y)+f(x−y)] + 48f(x) − 80f(y); zero for cubic f.
pub const CUBIC_TERMS: [Term; 6] = [t(3, 1, 3), t(-1, 3, 1), t(-12, 1, 1), t(-12, 1, -1), t(48, 1, 0), t(-80, 0, 1)];

/// f(4x) − 10f(2x) + 16f(x): the diagonal D_f(x, x) / 2 for f with f(0) = 0.
pub const DOUBLE_ARG_TERMS: [Term; 3] = [t(1, 4, 0), t(-10, 2, 0), t(16, 1, 0)];

/// Residual `Σ c_k f(a_k x + b_k y)` together with its norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualVector<S> {
    pub value: Point<S>,
    pub magnitude: S,
    /// `Σ |c_k| ‖f(a_k x + b_k y)‖` in `f64`, the scale for relative tolerances.
    pub scale: f64,
}

impl<S: Scalar> ResidualVector<S> {
    /// Exact zero test on the coordinates.
    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// `magnitude / max(scale, 1)` as `f64`.
    pub fn relative(&self) -> f64 {
        self.magnitude.approx() / self.scale.max(1.0)
    }
}

/// Evaluates a term table at `(x, y)`.
pub fn eval_terms<S, F>(f: &F, terms: &[Term], x: &Point<S>, y: &Point<S>) -> Result<ResidualVector<S>>
where
    S: Scalar,
    F: Evaluable<S> + ?Sized,
{
    check_dim(f.domain_dim(), x.dim())?;
    check_dim(f.domain_dim(), y.dim())?;
    let mut value = Point::zeros(f.codomain_dim(), x.norm_kind());
    let mut scale = 0.0;
    for term in terms {
        let arg = x.combine(term.a, y, term.b)?;
        let fx = f.eval(&arg)?;
        let coef: S = ratio(term.num, term.den);
        scale += (term.num.abs() as f64 / term.den as f64) * fx.norm_approx();
        value.axpy(&coef, &fx)?;
    }
    let magnitude = value.norm();
    Ok(ResidualVector { value, magnitude, scale })
}

/// D_f(x, y); identically zero exactly on solutions of the mixed equation.
pub fn d_residual<S: Scalar, F: Evaluable<S> + ?Sized>(f: &F, x: &Point<S>, y: &Point<S>) -> Result<ResidualVector<S>> {
    eval_terms(f, &D_TERMS, x, y)
}

pub fn additive_lemma_residual<S: Scalar, F: Evaluable<S> + ?Sized>(
    f: &F,
    x: &Point<S>,
    y: &Point<S>,
) -> Result<ResidualVector<S>> {
    eval_terms(f, &ADDITIVE_TERMS, x, y)
}

pub fn cubic_lemma_residual<S: Scalar, F: Evaluable<S> + ?Sized>(
    f: &F,
    x: &Point<S>,
    y: &Point<S>,
) -> Result<ResidualVector<S>> {
    eval_terms(f, &CUBIC_TERMS, x, y)
}

pub fn double_arg_residual<S: Scalar, F: Evaluable<S> + ?Sized>(f: &F, x: &Point<S>) -> Result<ResidualVector<S>> {
    eval_terms(f, &DOUBLE_ARG_TERMS, x, x)
}

/// One printed step of the derivation, stored as its two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainIdentity {
    pub id: &'static str,
    pub lhs: &'static [Term],
    pub rhs: &'static [Term],
}

impl ChainIdentity {
    /// The identity moved to one side: LHS − RHS.
    pub fn residual_terms(&self) -> Vec<Term> {
        self.lhs.iter().copied().chain(self.rhs.iter().map(|t| t.negated())).collect()
    }
}

macro_rules! identity {
    ($id:literal, [$($l:expr),* $(,)?], [$($r:expr),* $(,)?]) => {
        ChainIdentity { id: $id, lhs: &[$($l),*], rhs: &[$($r),*] }
    };
}

/// The derivation chain, in printed order. Sides are exactly as printed.
pub const CHAIN: [ChainIdentity; 21] = [
    // 24f(x) = 12[f(x+y) + f(x−y)]
    identity!("s05", [t(24, 1, 0)], [t(12, 1, 1), t(12, 1, -1)]),
    // 3f(x+3y) − f(3x+y) = 8f(y)
    identity!("s08", [t(3, 1, 3), t(-1, 3, 1)], [t(8, 0, 1)]),
    // f(3x) = 3f(x)
    identity!("s09", [t(1, 3, 0)], [t(3, 1, 0)]),
    // f(−x) = −f(x)
    identity!("s10", [t(1, -1, 0)], [t(-1, 1, 0)]),
    // f(2x) = 2f(x)
    identity!("s11", [t(1, 2, 0)], [t(2, 1, 0)]),
    // 3f(4x+2y) − f(4x−2y) = 24[f(x) − f(y)] − 24f(x−y) + 8f(x+y)
    identity!("s12", [t(3, 4, 2), t(-1, 4, -2)], [t(24, 1, 0), t(-24, 0, 1), t(-24, 1, -1), t(8, 1, 1)]),
    // f(2x+y) + f(2x−y) = 12f(x) − 4f(x+y) − 4f(x−y)
    identity!("s13", [t(1, 2, 1), t(1, 2, -1)], [t(12, 1, 0), t(-4, 1, 1), t(-4, 1, -1)]),
    // f(x−y) + f(x+y) = 6f(x) − 2f(x−2y) − 2f(x+2y)
    identity!("s14", [t(1, 1, -1), t(1, 1, 1)], [t(6, 1, 0), t(-2, 1, -2), t(-2, 1, 2)]),
    // −f(x−y) + f(x+y) = 6f(y) + 2f(2x−y) − 2f(2x+y)
    identity!("s15", [t(-1, 1, -1), t(1, 1, 1)], [t(6, 0, 1), t(2, 2, -1), t(-2, 2, 1)]),
    // 2f(2x−y) = 2f(2x+y) − 6f(y) − f(x−y) + f(x+y)
    identity!("s16", [t(2, 2, -1)], [t(2, 2, 1), t(-6, 0, 1), t(-1, 1, -1), t(1, 1, 1)]),
    // 4f(2x+y) = −9f(x+y) − 7f(x−y) + 24f(x) + 6f(y)
    identity!("s17", [t(4, 2, 1)], [t(-9, 1, 1), t(-7, 1, -1), t(24, 1, 0), t(6, 0, 1)]),
    // 7f(2x−y) = −4f(x+y) − 6f(x−y) − 9f(y) + 24f(x)
    identity!("s18", [t(7, 2, -1)], [t(-4, 1, 1), t(-6, 1, -1), t(-9, 0, 1), t(24, 1, 0)]),
    // f(2x+y) + f(2x−y) = −79/28 f(x+y) − 73/28 f(x−y) + 6/28 f(y) + 264/28 f(x)
    identity!(
        "s19",
        [t(1, 2, 1), t(1, 2, -1)],
        [tq(-79, 28, 1, 1), tq(-73, 28, 1, -1), tq(6, 28, 0, 1), tq(264, 28, 1, 0)]
    ),
    // −11f(x+y) − 13f(x−y) = 2f(y) − 24f(x)
    identity!("s20", [t(-11, 1, 1), t(-13, 1, -1)], [t(2, 0, 1), t(-24, 1, 0)]),
    // f(4x+y) + f(4x−y) = −24f(x) + 16f(x+y) + 16f(x−y)
    identity!("s21", [t(1, 4, 1), t(1, 4, -1)], [t(-24, 1, 0), t(16, 1, 1), t(16, 1, -1)]),
    // f(4x+y) − f(y) = 12f(x) − 4f(3x+y) + 4f(x+y)
    identity!("s22", [t(1, 4, 1), t(-1, 0, 1)], [t(12, 1, 0), t(-4, 3, 1), t(4, 1, 1)]),
    // f(4x+y) + f(4x−y) = 24f(x) − 4[f(3x+y) + f(3x−y)] + 4[f(x+y) + f(x−y)]
    identity!("s23", [t(1, 4, 1), t(1, 4, -1)], [t(24, 1, 0), t(-4, 3, 1), t(-4, 3, -1), t(4, 1, 1), t(4, 1, -1)]),
    // f(3x+y) + f(x−y) = 12f(x) − 4f(2x+y) + 4f(y)
    identity!("s24", [t(1, 3, 1), t(1, 1, -1)], [t(12, 1, 0), t(-4, 2, 1), t(4, 0, 1)]),
    // f(3x+y) + f(3x−y) = −24f(x) + 15f(x+y) + 15f(x−y)
    identity!("s25", [t(1, 3, 1), t(1, 3, -1)], [t(-24, 1, 0), t(15, 1, 1), t(15, 1, -1)]),
    // f(4x+y) + f(4x−y) = 120f(x) − 56f(x+y) − 56f(x−y)
    identity!("s26", [t(1, 4, 1), t(1, 4, -1)], [t(120, 1, 0), t(-56, 1, 1), t(-56, 1, -1)]),
    // f(x−y) = 2f(x) − f(x+y)
    identity!("s27", [t(1, 1, -1)], [t(2, 1, 0), t(-1, 1, 1)]),
];

pub fn chain_identity(id: &str) -> Option<&'static ChainIdentity> {
    CHAIN.iter().find(|c| c.id == id)
}

/// Exact residual of every catalogued identity at `(x, y)`. Exact mode only.
pub fn chain_replay<S, F>(f: &F, x: &Point<S>, y: &Point<S>) -> Result<BTreeMap<&'static str, ResidualVector<S>>>
where
    S: Scalar,
    F: Evaluable<S> + ?Sized,
{
    if !S::is_exact() {
        return Err(Error::ModeConflict("chain replay needs exact rational mode".into()));
    }
    CHAIN.iter().map(|c| Ok((c.id, eval_terms(f, &c.residual_terms(), x, y)?))).collect()
}

/// `αf + βg` as an evaluable function.
pub struct LinearCombination<'a, S, F: ?Sized, G: ?Sized> {
    pub f: &'a F,
    pub g: &'a G,
    pub alpha: S,
    pub beta: S,
}

impl<S, F, G> Evaluable<S> for LinearCombination<'_, S, F, G>
where
    S: Scalar,
    F: Evaluable<S> + ?Sized,
    G: Evaluable<S> + ?Sized,
{
    fn domain_dim(&self) -> usize {
        self.f.domain_dim()
    }
    fn codomain_dim(&self) -> usize {
        self.f.codomain_dim()
    }
    fn eval(&self, x: &Point<S>) -> Result<Point<S>> {
        let mut out = self.f.eval(x)?.scale(&self.alpha);
        out.axpy(&self.beta, &self.g.eval(x)?)?;
        Ok(out)
    }
}

/// D_{αf+βg}(x, y) − αD_f(x, y) − βD_g(x, y).
pub fn d_linearity_check<S, F, G>(
    f: &F,
    g: &G,
    alpha: &S,
    beta: &S,
    x: &Point<S>,
    y: &Point<S>,
) -> Result<ResidualVector<S>>
where
    S: Scalar,
    F: Evaluable<S> + ?Sized,
    G: Evaluable<S> + ?Sized,
{
    check_dim(f.domain_dim(), g.domain_dim())?;
    check_dim(f.codomain_dim(), g.codomain_dim())?;
    let combo = LinearCombination { f, g, alpha: alpha.clone(), beta: beta.clone() };
    let mut value = d_residual(&combo, x, y)?.value;
    value.axpy(&-alpha.clone(), &d_residual(f, x, y)?.value)?;
    value.axpy(&-beta.clone(), &d_residual(g, x, y)?.value)?;
    let magnitude = value.norm();
    Ok(ResidualVector { value, magnitude, scale: 1.0 })
}

pub const CHAIN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRow {
    pub coef: String,
    pub x: i64,
    pub y: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub id: String,
    pub lhs: Vec<TermRow>,
    pub rhs: Vec<TermRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainCatalogue {
    pub schema_version: u32,
    pub identities: Vec<IdentityRow>,
}

fn rows(terms: &[Term]) -> Vec<TermRow> {
    terms.iter().map(|t| TermRow { coef: t.coef_literal(), x: t.a, y: t.b }).collect()
}

/// The chain table as a versioned, serialisable document.
pub fn chain_catalogue() -> ChainCatalogue {
    ChainCatalogue {
        schema_version: CHAIN_SCHEMA_VERSION,
        identities: CHAIN
            .iter()
            .map(|c| IdentityRow { id: c.id.to_string(), lhs: rows(c.lhs), rhs: rows(c.rhs) })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::FuncModel;
    use crate::Rational;

    fn q(n: i64) -> Point<Rational> {
        Point::scalar(ratio(n, 1))
    }

    fn val(r: &ResidualVector<Rational>) -> Rational {
        r.value.coords()[0].clone()
    }

    #[test]
    fn d_residual_examples() {
        let lin = FuncModel::linear_1d(ratio::<Rational>(1, 1));
        let cube = FuncModel::cubic_1d(ratio::<Rational>(1, 1));
        let sq = FuncModel::even_1d(ratio::<Rational>(1, 1));
        assert!(d_residual(&lin, &q(1), &q(2)).unwrap().is_zero());
        assert!(d_residual(&cube, &q(1), &q(2)).unwrap().is_zero());
        assert_eq!(val(&d_residual(&sq, &q(1), &q(1)).unwrap()), ratio(-16, 1));
    }

    #[test]
    fn lemma_residual_examples() {
        let five_x = FuncModel::linear_1d(ratio::<Rational>(5, 1));
        let x = FuncModel::linear_1d(ratio::<Rational>(1, 1));
        let cube = FuncModel::cubic_1d(ratio::<Rational>(1, 1));
        let two_cube = FuncModel::cubic_1d(ratio::<Rational>(2, 1));
        assert!(additive_lemma_residual(&five_x, &q(1), &q(2)).unwrap().is_zero());
        assert_eq!(val(&additive_lemma_residual(&cube, &q(1), &q(1)).unwrap()), ratio(48, 1));
        assert!(additive_lemma_residual(&x, &q(-3), &q(7)).unwrap().is_zero());

        assert!(cubic_lemma_residual(&cube, &q(1), &q(2)).unwrap().is_zero());
        assert_eq!(val(&cubic_lemma_residual(&x, &q(1), &q(1)).unwrap()), ratio(-48, 1));
        assert!(cubic_lemma_residual(&two_cube, &q(-1), &q(3)).unwrap().is_zero());
    }

    #[test]
    fn double_arg_examples() {
        let one = q(1);
        let x = FuncModel::linear_1d(ratio::<Rational>(1, 1));
        let cube = FuncModel::cubic_1d(ratio::<Rational>(1, 1));
        let sq = FuncModel::even_1d(ratio::<Rational>(1, 1));
        assert!(double_arg_residual(&x, &one).unwrap().is_zero());
        assert!(double_arg_residual(&cube, &one).unwrap().is_zero());
        assert_eq!(val(&double_arg_residual(&sq, &one).unwrap()), ratio(-8, 1));
    }

    #[test]
    fn chain_examples() {
        let cube = FuncModel::cubic_1d(ratio::<Rational>(1, 1));
        let res = chain_replay(&cube, &q(1), &q(1)).unwrap();
        assert_eq!(val(&res["s25"]), ratio(-24, 1));

        let x = FuncModel::linear_1d(ratio::<Rational>(1, 1));
        let res = chain_replay(&x, &q(1), &q(2)).unwrap();
        assert!(res["s19"].is_zero());
        let s19 = chain_identity("s19").unwrap();
        let coefs: Vec<String> = s19.rhs.iter().map(Term::coef_literal).collect();
        assert_eq!(coefs, ["-79/28", "-73/28", "6/28", "264/28"]);
    }

    #[test]
    fn chain_replay_rejects_float_mode() {
        let x = FuncModel::linear_1d(1.0f64);
        let p = Point::scalar(1.0);
        assert!(matches!(chain_replay(&x, &p, &p), Err(Error::ModeConflict(_))));
    }

    #[test]
    fn catalogue_has_unique_ids_and_round_trips() {
        let cat = chain_catalogue();
        assert_eq!(cat.identities.len(), 21);
        let mut ids: Vec<_> = cat.identities.iter().map(|r| r.id.clone()).collect();
        ids.dedup();
        assert_eq!(ids.len(), 21);
        let text = serde_json::to_string(&cat).unwrap();
        let back: ChainCatalogue = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cat);
    }

    #[test]
    fn linearity_examples() {
        let x = FuncModel::linear_1d(ratio::<Rational>(1, 1));
        let cube = FuncModel::cubic_1d(ratio::<Rational>(1, 1));
        let sq = FuncModel::even_1d(ratio::<Rational>(1, 1));
        let zero = ratio::<Rational>(0, 1);
        assert!(d_linearity_check(&sq, &cube, &zero, &zero, &q(3), &q(-2)).unwrap().is_zero());
        assert!(d_linearity_check(&x, &cube, &ratio(2, 1), &ratio(-1, 1), &q(1), &q(2)).unwrap().is_zero());
        let one = ratio::<Rational>(1, 1);
        let combo = LinearCombination { f: &sq, g: &sq, alpha: one.clone(), beta: one.clone() };
        assert_eq!(val(&d_residual(&combo, &q(1), &q(1)).unwrap()), ratio(-32, 1));
        assert!(d_linearity_check(&sq, &sq, &one, &one, &q(1), &q(1)).unwrap().is_zero());
    }

    #[test]
    fn dimension_mismatch() {
        let f = FuncModel::linear_1d(1.0f64);
        let x = Point::new(vec![1.0, 1.0], crate::models::NormKind::Max).unwrap();
        assert!(d_residual(&f, &x, &x).is_err());
    }
}
