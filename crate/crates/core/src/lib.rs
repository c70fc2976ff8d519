//! Verification lab for the mixed additive-cubic functional equation
//!
//! ```text
//! 3f(x+3y) − f(3x+y) = 12[f(x+y) + f(x−y)] − 16[f(x) + f(y)] + 12f(2y) − 4f(2x)
//! ```
//!
//! The crate evaluates the difference operator and the additive/cubic
//! characterisation residuals, replays the derivation chain with exact
//! rationals, recovers the additive and cubic parts of a perturbed function by
//! the direct (Hyers) iteration, and certifies the recovered error against the
//! stability bound series.
//!
//! All core math is generic over [`Scalar`]; [`Rational`] gives exact
//! arithmetic and `f64` the fast path.

pub mod bounds;
pub mod error;
pub mod harness;
pub mod hyers;
pub mod models;
pub mod operator;
pub mod scalar;

pub use bounds::{SeriesKind, SeriesResult, SeriesStatus};
pub use error::{Error, Result};
pub use hyers::{Component, Direction, IterationConfig, IterationTrace, RecoveryReport};
pub use models::{ControlFunction, Evaluable, FuncModel, NormKind, Point};
pub use scalar::{Scalar, ScalarMode};

/// Arbitrary-precision rational scalar.
pub type Rational = num_rational::BigRational;

pub type ExactPoint = Point<Rational>;
pub type FloatPoint = Point<f64>;
pub type ExactModel = FuncModel<Rational>;
pub type FloatModel = FuncModel<f64>;
