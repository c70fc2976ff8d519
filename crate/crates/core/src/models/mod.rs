//! Points, norms, function models and control functions.

pub mod catalogue;
mod control;
mod func;
mod noise;
mod point;

pub use control::ControlFunction;
pub use func::{evaluate, odd_part, symmetrize_cubic, Atom, Evaluable, FnModel, FuncModel, OddPart};
pub use noise::noise_eval;
pub(crate) use point::check_dim;
pub use point::{NormKind, Point};
