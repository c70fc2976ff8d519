//! Seeded generators for the model families used by checks and tests.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use super::func::{symmetrize_cubic, Atom, FuncModel};
use super::point::{NormKind, Point};
use crate::error::Result;
use crate::scalar::Scalar;

/// Rational in `[-range, range]` with denominator in `1..=max_den`.
pub fn random_rational<R: Rng + ?Sized>(rng: &mut R, range: i64, max_den: i64) -> BigRational {
    let den = rng.gen_range(1..=max_den.max(1));
    let num = rng.gen_range(-range * den..=range * den);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn random_point<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    norm: NormKind,
    range: i64,
    max_den: i64,
) -> Point<S> {
    let coords = (0..dim).map(|_| S::from_rational(&random_rational(rng, range, max_den))).collect();
    Point::new(coords, norm).expect("dim >= 1")
}

fn small<S: Scalar, R: Rng + ?Sized>(rng: &mut R) -> S {
    S::from_rational(&random_rational(rng, 4, 8))
}

fn matrix<S: Scalar, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<S>> {
    (0..rows).map(|_| (0..cols).map(|_| small(rng)).collect()).collect()
}

pub fn random_linear<S: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> Result<FuncModel<S>> {
    FuncModel::from_atoms(d, m, vec![Atom::Linear { matrix: matrix(rng, m, d) }])
}

/// Cubic-homogeneous model with symmetric coefficient tensors.
pub fn random_cubic<S: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> Result<FuncModel<S>> {
    let tensors = (0..m)
        .map(|_| {
            let raw: Vec<S> = (0..d * d * d).map(|_| small(rng)).collect();
            symmetrize_cubic(&raw, d)
        })
        .collect();
    FuncModel::from_atoms(d, m, vec![Atom::CubicHomogeneous { tensors }])
}

pub fn random_even<S: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> Result<FuncModel<S>> {
    let forms = (0..m).map(|_| matrix(rng, d, d)).collect();
    FuncModel::from_atoms(d, m, vec![Atom::Even { forms }])
}

/// Linear plus cubic part: an exact solution of the mixed equation.
pub fn random_solution<S: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> Result<FuncModel<S>> {
    let lin = random_linear::<S, _>(rng, d, m)?;
    let cub = random_cubic::<S, _>(rng, d, m)?;
    FuncModel::from_atoms(d, m, lin.atoms().iter().chain(cub.atoms()).cloned().collect())
}
