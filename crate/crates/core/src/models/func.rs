use super::noise::noise_eval;
use super::point::{check_dim, Point};
use crate::error::{Error, Result};
use crate::scalar::{one_half, Scalar};

/// Anything that maps points of ℝ^d to points of ℝ^m.
pub trait Evaluable<S: Scalar>: Sync {
    fn domain_dim(&self) -> usize;
    fn codomain_dim(&self) -> usize;
    fn eval(&self, x: &Point<S>) -> Result<Point<S>>;
}

impl<S: Scalar, T: Evaluable<S> + ?Sized> Evaluable<S> for &T {
    fn domain_dim(&self) -> usize {
        (**self).domain_dim()
    }
    fn codomain_dim(&self) -> usize {
        (**self).codomain_dim()
    }
    fn eval(&self, x: &Point<S>) -> Result<Point<S>> {
        (**self).eval(x)
    }
}

/// One building block of a [`FuncModel`].
#[derive(Debug, Clone, PartialEq)]
pub enum Atom<S> {
    /// `x ↦ Mx`, with `M` stored row-major as `m` rows of length `d`.
    Linear {
        matrix: Vec<Vec<S>>,
    },
    /// `x ↦ (Σ T_k[i][j][l] x_i x_j x_l)_k`; one flattened `d³` tensor per output.
    CubicHomogeneous {
        tensors: Vec<Vec<S>>,
    },
    BoundedNoise {
        seed: u64,
        amplitude: S,
    },
    PowerNoise {
        seed: u64,
        amplitude: S,
        exponent: f64,
    },
    /// `x ↦ (xᵀ Q_k x)_k`. Even, so never a solution unless zero.
    Even {
        forms: Vec<Vec<Vec<S>>>,
    },
}

impl<S: Scalar> Atom<S> {
    pub fn is_noise(&self) -> bool {
        matches!(self, Atom::BoundedNoise { .. } | Atom::PowerNoise { .. })
    }

    fn validate(&self, d: usize, m: usize) -> Result<()> {
        let shape = |what: &str| Error::InvalidParameter(format!("{what} atom has the wrong shape for d={d}, m={m}"));
        match self {
            Atom::Linear { matrix } => {
                if matrix.len() != m || matrix.iter().any(|row| row.len() != d) {
                    return Err(shape("linear"));
                }
            }
            Atom::CubicHomogeneous { tensors } => {
                if tensors.len() != m || tensors.iter().any(|t| t.len() != d * d * d) {
                    return Err(shape("cubic"));
                }
            }
            Atom::Even { forms } => {
                if forms.len() != m || forms.iter().any(|q| q.len() != d || q.iter().any(|r| r.len() != d)) {
                    return Err(shape("even"));
                }
            }
            Atom::BoundedNoise { amplitude, .. } => {
                if amplitude.is_negative() {
                    return Err(Error::InvalidParameter("noise amplitude must be >= 0".into()));
                }
            }
            Atom::PowerNoise { amplitude, exponent, .. } => {
                if amplitude.is_negative() {
                    return Err(Error::InvalidParameter("noise amplitude must be >= 0".into()));
                }
                if !(exponent.is_finite() && *exponent >= 0.0) {
                    return Err(Error::InvalidParameter(format!("noise exponent {exponent} must be finite and >= 0")));
                }
            }
        }
        Ok(())
    }

    fn accumulate(&self, x: &Point<S>, out: &mut [S]) {
        let xs = x.coords();
        match self {
            Atom::Linear { matrix } => {
                for (o, row) in out.iter_mut().zip(matrix) {
                    *o = o.clone() + S::form(1, xs, &|k| &row[k]);
                }
            }
            Atom::CubicHomogeneous { tensors } => {
                for (o, t) in out.iter_mut().zip(tensors) {
                    *o = o.clone() + S::form(3, xs, &|k| &t[k]);
                }
            }
            Atom::Even { forms } => {
                let d = xs.len();
                for (o, q) in out.iter_mut().zip(forms) {
                    *o = o.clone() + S::form(2, xs, &|k| &q[k / d][k % d]);
                }
            }
            Atom::BoundedNoise { seed, amplitude } => {
                let n = noise_eval(*seed, x, amplitude, 0.0, out.len());
                for (o, v) in out.iter_mut().zip(n.coords()) {
                    *o = o.clone() + v.clone();
                }
            }
            Atom::PowerNoise { seed, amplitude, exponent } => {
                let n = noise_eval(*seed, x, amplitude, *exponent, out.len());
                for (o, v) in out.iter_mut().zip(n.coords()) {
                    *o = o.clone() + v.clone();
                }
            }
        }
    }
}

/// Function ℝ^d → ℝ^m given as a sum of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct FuncModel<S> {
    domain_dim: usize,
    codomain_dim: usize,
    atoms: Vec<Atom<S>>,
}

impl<S: Scalar> FuncModel<S> {
    /// The zero function ℝ^d → ℝ^m.
    pub fn zero(domain_dim: usize, codomain_dim: usize) -> Result<Self> {
        if domain_dim == 0 || codomain_dim == 0 {
            return Err(Error::InvalidParameter("dimensions must be >= 1".into()));
        }
        Ok(Self { domain_dim, codomain_dim, atoms: Vec::new() })
    }

    pub fn from_atoms(domain_dim: usize, codomain_dim: usize, atoms: Vec<Atom<S>>) -> Result<Self> {
        let mut model = Self::zero(domain_dim, codomain_dim)?;
        for atom in atoms {
            model.push(atom)?;
        }
        Ok(model)
    }

    pub fn push(&mut self, atom: Atom<S>) -> Result<()> {
        atom.validate(self.domain_dim, self.codomain_dim)?;
        self.atoms.push(atom);
        Ok(())
    }

    pub fn with(mut self, atom: Atom<S>) -> Result<Self> {
        self.push(atom)?;
        Ok(self)
    }

    pub fn atoms(&self) -> &[Atom<S>] {
        &self.atoms
    }

    pub fn has_noise(&self) -> bool {
        self.atoms.iter().any(Atom::is_noise)
    }

    /// Only linear atoms, hence additive.
    pub fn is_additive(&self) -> bool {
        self.atoms.iter().all(|a| matches!(a, Atom::Linear { .. }))
    }

    /// Only cubic-homogeneous atoms.
    pub fn is_cubic(&self) -> bool {
        self.atoms.iter().all(|a| matches!(a, Atom::CubicHomogeneous { .. }))
    }

    /// Copy without the noise atoms: the exact-solution (or even) part.
    pub fn without_noise(&self) -> Self {
        Self { atoms: self.atoms.iter().filter(|a| !a.is_noise()).cloned().collect(), ..self.clone() }
    }

    // 1-D shorthands used throughout the tests and the default configs

    pub fn linear_1d(a: S) -> Self {
        Self { domain_dim: 1, codomain_dim: 1, atoms: vec![Atom::Linear { matrix: vec![vec![a]] }] }
    }

    pub fn cubic_1d(c: S) -> Self {
        Self { domain_dim: 1, codomain_dim: 1, atoms: vec![Atom::CubicHomogeneous { tensors: vec![vec![c]] }] }
    }

    pub fn even_1d(q: S) -> Self {
        Self { domain_dim: 1, codomain_dim: 1, atoms: vec![Atom::Even { forms: vec![vec![vec![q]]] }] }
    }

    /// `a·x + c·x³` on ℝ.
    pub fn additive_cubic_1d(a: S, c: S) -> Self {
        Self {
            domain_dim: 1,
            codomain_dim: 1,
            atoms: vec![Atom::Linear { matrix: vec![vec![a]] }, Atom::CubicHomogeneous { tensors: vec![vec![c]] }],
        }
    }
}

impl<S: Scalar> Evaluable<S> for FuncModel<S> {
    fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    fn eval(&self, x: &Point<S>) -> Result<Point<S>> {
        check_dim(self.domain_dim, x.dim())?;
        let mut out = vec![S::zero(); self.codomain_dim];
        for atom in &self.atoms {
            atom.accumulate(x, &mut out);
        }
        Point::new(out, x.norm_kind())
    }
}

/// Free-standing evaluation entry point.
pub fn evaluate<S: Scalar>(f: &FuncModel<S>, x: &Point<S>) -> Result<Point<S>> {
    f.eval(x)
}

/// `x ↦ (f(x) − f(−x))/2`.
#[derive(Debug, Clone, Copy)]
pub struct OddPart<F>(pub F);

pub fn odd_part<F>(f: F) -> OddPart<F> {
    OddPart(f)
}

impl<S: Scalar, F: Evaluable<S>> Evaluable<S> for OddPart<F> {
    fn domain_dim(&self) -> usize {
        self.0.domain_dim()
    }
    fn codomain_dim(&self) -> usize {
        self.0.codomain_dim()
    }
    fn eval(&self, x: &Point<S>) -> Result<Point<S>> {
        let plus = self.0.eval(x)?;
        let minus = self.0.eval(&x.neg())?;
        Ok(plus.sub(&minus)?.scale(&one_half()))
    }
}

/// Wraps a closure as an [`Evaluable`] with fixed dimensions.
pub struct FnModel<F> {
    pub domain_dim: usize,
    pub codomain_dim: usize,
    pub f: F,
}

impl<S, F> Evaluable<S> for FnModel<F>
where
    S: Scalar,
    F: Fn(&Point<S>) -> Point<S> + Sync,
{
    fn domain_dim(&self) -> usize {
        self.domain_dim
    }
    fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }
    fn eval(&self, x: &Point<S>) -> Result<Point<S>> {
        check_dim(self.domain_dim, x.dim())?;
        Ok((self.f)(x))
    }
}

/// Symmetrises a flattened `d³` tensor over all index permutations.
pub fn symmetrize_cubic<S: Scalar>(tensor: &[S], d: usize) -> Vec<S> {
    let idx = |i: usize, j: usize, l: usize| (i * d + j) * d + l;
    let six = S::from_int(6);
    let mut out = vec![S::zero(); d * d * d];
    for i in 0..d {
        for j in 0..d {
            for l in 0..d {
                let sum = [idx(i, j, l), idx(i, l, j), idx(j, i, l), idx(j, l, i), idx(l, i, j), idx(l, j, i)]
                    .iter()
                    .fold(S::zero(), |acc, &k| acc + tensor[k].clone());
                out[idx(i, j, l)] = sum / six.clone();
            }
        }
    }
    out
}
