use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Norm carried by a point of ℝ^d.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    #[default]
    Euclidean,
    Max,
}

/// Element of ℝ^d with a selected norm. Used both for arguments and values.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<S> {
    coords: Vec<S>,
    norm: NormKind,
}

impl<S: Scalar> Point<S> {
    pub fn new(coords: Vec<S>, norm: NormKind) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("a point needs at least one coordinate".into()));
        }
        Ok(Self { coords, norm })
    }

    /// One-dimensional point with the Euclidean norm.
    pub fn scalar(v: S) -> Self {
        Self { coords: vec![v], norm: NormKind::Euclidean }
    }

    pub fn zeros(dim: usize, norm: NormKind) -> Self {
        Self { coords: vec![S::zero(); dim.max(1)], norm }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm
    }

    pub fn with_norm(mut self, norm: NormKind) -> Self {
        self.norm = norm;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn norm(&self) -> S {
        match self.norm {
            NormKind::Max => self.coords.iter().map(|c| c.abs()).fold(S::zero(), |m, c| if c > m { c } else { m }),
            NormKind::Euclidean if self.coords.len() == 1 => self.coords[0].abs(),
            NormKind::Euclidean => self.coords.iter().fold(S::zero(), |acc, c| acc + c.clone() * c.clone()).sqrt(),
        }
    }

    /// The norm computed on the f64 view of the coordinates.
    pub fn norm_approx(&self) -> f64 {
        let v = self.coords.iter().map(Scalar::approx);
        match self.norm {
            NormKind::Max => v.fold(0.0, |m, c| m.max(c.abs())),
            NormKind::Euclidean => v.map(|c| c * c).sum::<f64>().sqrt(),
        }
    }

    pub fn scale(&self, factor: &S) -> Self {
        Self { coords: self.coords.iter().map(|c| c.clone() * factor.clone()).collect(), norm: self.norm }
    }

    pub fn neg(&self) -> Self {
        Self { coords: self.coords.iter().map(|c| -c.clone()).collect(), norm: self.norm }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// `a·self + b·other` for integer coefficients.
    pub fn combine(&self, a: i64, other: &Self, b: i64) -> Result<Self> {
        let (a, b) = (S::from_int(a), S::from_int(b));
        self.zip(other, |u, v| a.clone() * u + b.clone() * v)
    }

    /// Accumulates `coef·other` into `self`.
    pub fn axpy(&mut self, coef: &S, other: &Self) -> Result<()> {
        check_dim(self.dim(), other.dim())?;
        for (c, o) in self.coords.iter_mut().zip(&other.coords) {
            *c = c.clone() + coef.clone() * o.clone();
        }
        Ok(())
    }

    fn zip(&self, other: &Self, op: impl Fn(S, S) -> S) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| op(a.clone(), b.clone())).collect(),
            norm: self.norm,
        })
    }

    /// Coordinates as `f64`.
    pub fn approx(&self) -> Vec<f64> {
        self.coords.iter().map(Scalar::approx).collect()
    }

    pub fn literals(&self) -> Vec<String> {
        self.coords.iter().map(Scalar::to_literal).collect()
    }
}

impl<S: Scalar> fmt::Display for Point<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.len() == 1 {
            return write!(f, "{}", self.coords[0].to_literal());
        }
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", c.to_literal())?;
        }
        write!(f, ")")
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use crate::Rational;

    #[test]
    fn norms_of_a_simple_vector() {
        let p = Point::new(vec![3.0, -4.0], NormKind::Euclidean).unwrap();
        assert_eq!(p.norm(), 5.0);
        assert_eq!(p.clone().with_norm(NormKind::Max).norm(), 4.0);
    }

    #[test]
    fn exact_euclidean_norm_of_pythagorean_triple() {
        let p: Point<Rational> = Point::new(vec![ratio(3, 7), ratio(4, 7)], NormKind::Euclidean).unwrap();
        assert_eq!(p.norm(), ratio(5, 7));
    }

    #[test]
    fn empty_point_rejected() {
        assert!(Point::<f64>::new(vec![], NormKind::Max).is_err());
    }

    #[test]
    fn mismatched_add_is_an_error() {
        let a = Point::scalar(1.0);
        let b = Point::new(vec![1.0, 2.0], NormKind::Euclidean).unwrap();
        assert!(matches!(a.add(&b), Err(Error::DimensionMismatch { expected: 1, found: 2 })));
    }
}
