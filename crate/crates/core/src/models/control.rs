use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Control function φ(x, y) bounding ‖D_f(x, y)‖, expressed through the norms
/// of its arguments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlFunction<F> {
    Constant {
        c: F,
    },
    /// θ(‖x‖^p + ‖y‖^p)
    SumOfPowers {
        theta: F,
        p: F,
    },
    /// θ‖x‖^r‖y‖^s
    ProductOfPowers {
        theta: F,
        r: F,
        s: F,
    },
}

impl<F: Float> ControlFunction<F> {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: F| v.is_finite() && v >= F::zero();
        let valid = match *self {
            ControlFunction::Constant { c } => ok(c),
            ControlFunction::SumOfPowers { theta, p } => ok(theta) && ok(p),
            ControlFunction::ProductOfPowers { theta, r, s } => ok(theta) && ok(r) && ok(s),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "control function parameters must be finite and >= 0: {:?}",
                self.params()
            )))
        }
    }

    fn params(&self) -> Vec<f64> {
        let v = |x: F| x.to_f64().unwrap_or(f64::NAN);
        match *self {
            ControlFunction::Constant { c } => vec![v(c)],
            ControlFunction::SumOfPowers { theta, p } => vec![v(theta), v(p)],
            ControlFunction::ProductOfPowers { theta, r, s } => vec![v(theta), v(r), v(s)],
        }
    }

    /// φ evaluated from the argument norms.
    pub fn eval(&self, norm_x: F, norm_y: F) -> F {
        match *self {
            ControlFunction::Constant { c } => c,
            ControlFunction::SumOfPowers { theta, p } => theta * (norm_x.powf(p) + norm_y.powf(p)),
            ControlFunction::ProductOfPowers { theta, r, s } => theta * norm_x.powf(r) * norm_y.powf(s),
        }
    }

    /// φ(z, z) for ‖z‖ = `norm`.
    pub fn diagonal(&self, norm: F) -> F {
        self.eval(norm, norm)
    }

    /// Homogeneity degree on the diagonal: φ(tz, tz) = t^degree φ(z, z).
    pub fn degree(&self) -> F {
        match *self {
            ControlFunction::Constant { .. } => F::zero(),
            ControlFunction::SumOfPowers { p, .. } => p,
            ControlFunction::ProductOfPowers { r, s, .. } => r + s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_identities() {
        let sum = ControlFunction::SumOfPowers { theta: 1.5, p: 2.0 };
        assert_eq!(sum.diagonal(3.0), 2.0 * 1.5 * 9.0);
        let prod = ControlFunction::ProductOfPowers { theta: 0.5, r: 1.0, s: 2.0 };
        assert_eq!(prod.diagonal(2.0), 0.5 * 8.0);
        assert_eq!(prod.degree(), 3.0);
        assert_eq!(ControlFunction::Constant { c: 0.25 }.eval(7.0, 9.0), 0.25);
    }

    #[test]
    fn negative_parameters_rejected() {
        assert!(ControlFunction::Constant { c: -1.0 }.validate().is_err());
        assert!(ControlFunction::SumOfPowers { theta: 1.0, p: f64::NAN }.validate().is_err());
        assert!(ControlFunction::ProductOfPowers { theta: 1.0, r: 0.0, s: 0.0 }.validate().is_ok());
    }

    #[test]
    fn json_shape() {
        let phi = ControlFunction::SumOfPowers { theta: 1.0, p: 2.0 };
        let text = serde_json::to_string(&phi).unwrap();
        assert_eq!(text, r#"{"kind":"sum_of_powers","theta":1.0,"p":2.0}"#);
        let back: ControlFunction<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, phi);
    }
}
