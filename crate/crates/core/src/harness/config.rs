//! JSON experiment configuration.
//!
//! Scalars that enter models or sample points are literals: either strings
//! (`"1/3"`, `"0.001"`, `"2e-5"`) or JSON numbers. Both are parsed into an
//! exact rational from their shortest decimal text, so `0.001` is exactly
//! 1/1000 in exact mode.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyers::{Direction, DirectionChoice, IterationConfig};
use crate::models::catalogue::random_point;
use crate::models::{Atom, ControlFunction, FuncModel, NormKind, Point};
use crate::scalar::{format_f64, parse_literal, Scalar, ScalarMode};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// A scalar literal, written as a string or a JSON number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Text(String),
    Number(f64),
}

impl Literal {
    pub fn text(&self) -> String {
        match self {
            Literal::Text(s) => s.clone(),
            Literal::Number(v) => format_f64(*v),
        }
    }

    pub fn parse<S: Scalar>(&self) -> Result<S> {
        parse_literal(&self.text())
    }
}

impl From<&str> for Literal {
    fn from(s: &str) -> Self {
        Literal::Text(s.to_string())
    }
}

fn parse_all<S: Scalar>(lits: &[Literal]) -> Result<Vec<S>> {
    lits.iter().map(Literal::parse).collect()
}

fn parse_rows<S: Scalar>(rows: &[Vec<Literal>]) -> Result<Vec<Vec<S>>> {
    rows.iter().map(|r| parse_all(r)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AtomSpec {
    /// `m` rows of length `d`.
    Linear {
        matrix: Vec<Vec<Literal>>,
    },
    /// One flattened `d³` tensor per output coordinate.
    Cubic {
        tensors: Vec<Vec<Literal>>,
    },
    BoundedNoise {
        seed: u64,
        amplitude: Literal,
    },
    PowerNoise {
        seed: u64,
        amplitude: Literal,
        exponent: f64,
    },
    /// One `d × d` form per output coordinate.
    Even {
        forms: Vec<Vec<Vec<Literal>>>,
    },
}

impl AtomSpec {
    pub fn build<S: Scalar>(&self) -> Result<Atom<S>> {
        Ok(match self {
            AtomSpec::Linear { matrix } => Atom::Linear { matrix: parse_rows(matrix)? },
            AtomSpec::Cubic { tensors } => Atom::CubicHomogeneous { tensors: parse_rows(tensors)? },
            AtomSpec::BoundedNoise { seed, amplitude } => {
                Atom::BoundedNoise { seed: *seed, amplitude: amplitude.parse()? }
            }
            AtomSpec::PowerNoise { seed, amplitude, exponent } => {
                Atom::PowerNoise { seed: *seed, amplitude: amplitude.parse()?, exponent: *exponent }
            }
            AtomSpec::Even { forms } => {
                Atom::Even { forms: forms.iter().map(|q| parse_rows(q)).collect::<Result<_>>()? }
            }
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub atoms: Vec<AtomSpec>,
}

impl ModelSpec {
    pub fn build<S: Scalar>(&self, d: usize, m: usize) -> Result<FuncModel<S>> {
        let atoms = self.atoms.iter().map(AtomSpec::build).collect::<Result<_>>()?;
        FuncModel::from_atoms(d, m, atoms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiKeyword {
    Certify,
}

/// `"certify"` or an explicit control function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiSpec {
    Keyword(PhiKeyword),
    Explicit(ControlFunction<f64>),
}

impl Default for PhiSpec {
    fn default() -> Self {
        PhiSpec::Keyword(PhiKeyword::Certify)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKeyword {
    Auto,
}

/// `"auto"` or `{"additive": ±1, "cubic": ±1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DirectionSpec {
    Keyword(DirectionKeyword),
    Fixed { additive: Direction, cubic: Direction },
}

impl Default for DirectionSpec {
    fn default() -> Self {
        DirectionSpec::Keyword(DirectionKeyword::Auto)
    }
}

impl From<DirectionSpec> for DirectionChoice {
    fn from(d: DirectionSpec) -> Self {
        match d {
            DirectionSpec::Keyword(DirectionKeyword::Auto) => DirectionChoice::Auto,
            DirectionSpec::Fixed { additive, cubic } => DirectionChoice::Fixed { additive, cubic },
        }
    }
}

/// Seeded random sampling with `ChaCha8Rng`. Coordinates are rationals in
/// `[-range, range]` with denominators `1..=max_den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub seed: u64,
    pub count: usize,
    #[serde(default = "default_range")]
    pub range: i64,
    #[serde(default = "default_max_den")]
    pub max_den: i64,
}

fn default_range() -> i64 {
    8
}

fn default_max_den() -> i64 {
    1024
}

impl RandomSpec {
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn validate(&self) -> Result<()> {
        if self.range < 0 || self.max_den < 1 {
            return Err(Error::Config("random samples need range >= 0 and max_den >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSpec {
    pub points: Vec<Vec<Literal>>,
    pub pairs: Vec<[Vec<Literal>; 2]>,
    /// `count` points for recovery, `count` pairs for residual checks.
    pub random: Option<RandomSpec>,
}

fn parse_point<S: Scalar>(coords: &[Literal], d: usize, norm: NormKind) -> Result<Point<S>> {
    let p = Point::new(parse_all(coords)?, norm)?;
    crate::models::check_dim(d, p.dim())?;
    Ok(p)
}

impl SampleSpec {
    /// Explicit points followed by the random ones.
    pub fn points<S: Scalar>(&self, d: usize, norm: NormKind) -> Result<Vec<Point<S>>> {
        let mut out = self.points.iter().map(|c| parse_point(c, d, norm)).collect::<Result<Vec<_>>>()?;
        if let Some(r) = &self.random {
            r.validate()?;
            let mut rng = r.rng();
            out.extend((0..r.count).map(|_| random_point(&mut rng, d, norm, r.range, r.max_den)));
        }
        Ok(out)
    }

    /// Explicit pairs followed by the random ones.
    pub fn pairs<S: Scalar>(&self, d: usize, norm: NormKind) -> Result<Vec<(Point<S>, Point<S>)>> {
        let mut out = self
            .pairs
            .iter()
            .map(|[x, y]| Ok((parse_point(x, d, norm)?, parse_point(y, d, norm)?)))
            .collect::<Result<Vec<_>>>()?;
        if let Some(r) = &self.random {
            r.validate()?;
            let mut rng = r.rng();
            for _ in 0..r.count {
                let x = random_point(&mut rng, d, norm, r.range, r.max_den);
                let y = random_point(&mut rng, d, norm, r.range, r.max_den);
                out.push((x, y));
            }
        }
        Ok(out)
    }
}

/// Seeded model family used by the residual checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Linear,
    Cubic,
    Solution,
    Even,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Linear => "linear",
            Family::Cubic => "cubic",
            Family::Solution => "solution",
            Family::Even => "even",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaSpec {
    pub families: Vec<Family>,
    pub models_per_family: usize,
    pub seed: u64,
}

impl Default for LemmaSpec {
    fn default() -> Self {
        Self { families: vec![Family::Linear, Family::Cubic], models_per_family: 5, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumCase {
    pub theta: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductCase {
    pub theta: f64,
    pub r: f64,
    pub s: f64,
}

/// One raw series evaluation, e.g. to demonstrate divergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesCase {
    pub phi: ControlFunction<f64>,
    pub kind: crate::bounds::SeriesKind,
    pub direction: Direction,
    #[serde(default = "one_f64")]
    pub norm: f64,
}

fn one_f64() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSpec {
    pub sum: Vec<SumCase>,
    pub product: Vec<ProductCase>,
    pub series: Vec<SeriesCase>,
    /// `‖x‖` for the consistency checks.
    pub norm: f64,
    /// Allowed |closed form − series|.
    pub tol: f64,
}

impl Default for BoundsSpec {
    fn default() -> Self {
        Self {
            sum: [0.0, 0.5, 2.0, 2.5, 4.0, 5.0].iter().map(|&p| SumCase { theta: 1.0, p }).collect(),
            product: [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]
                .iter()
                .map(|&(r, s)| ProductCase { theta: 1.0, r, s })
                .collect(),
            series: Vec::new(),
            norm: 1.0,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

fn default_mode() -> ScalarMode {
    ScalarMode::Exact
}

fn default_dim() -> usize {
    1
}

fn default_series_tol() -> f64 {
    1e-12
}

/// One experiment, shared by every subcommand. Each subcommand reads only the
/// sections it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_dim")]
    pub codim: usize,
    #[serde(default)]
    pub norm: NormKind,
    #[serde(default = "default_mode")]
    pub mode: ScalarMode,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub phi: PhiSpec,
    #[serde(default)]
    pub directions: DirectionSpec,
    #[serde(default)]
    pub samples: SampleSpec,
    #[serde(default)]
    pub iteration: IterationConfig,
    #[serde(default = "default_series_tol")]
    pub series_tol: f64,
    #[serde(default)]
    pub lemmas: LemmaSpec,
    #[serde(default)]
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    /// Minimal config: d = m = 1, exact mode, everything else defaulted.
    pub fn new() -> Self {
        serde_json::from_str(r#"{"schema_version": 1}"#).expect("minimal config parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&read_config(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.dim == 0 || self.codim == 0 {
            return Err(Error::Config("dim and codim must be >= 1".into()));
        }
        if self.series_tol.is_nan() || self.series_tol <= 0.0 {
            return Err(Error::Config("series_tol must be > 0".into()));
        }
        if let PhiSpec::Explicit(phi) = &self.phi {
            phi.validate()?;
        }
        Ok(())
    }

    pub fn model<S: Scalar>(&self) -> Result<FuncModel<S>> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::Config("this subcommand needs a `model` section".into()))?
            .build(self.dim, self.codim)
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::new()
    }
}

pub(crate) fn read_config(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepFamily {
    Sum,
    Product,
}

/// Grid over exponents, θ and noise amplitude. Each cell runs a recovery on
/// `template.model` plus `PowerNoise(noise_seed, ε, p)` with φ taken from the
/// family at θ. Cells are enumerated in sorted order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub schema_version: u32,
    pub family: SweepFamily,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default)]
    pub rs: Vec<(f64, f64)>,
    pub theta: Vec<f64>,
    #[serde(default)]
    pub epsilon: Vec<Literal>,
    #[serde(default)]
    pub noise_seed: u64,
    /// Keep cells with p ∈ {1, 3}; they are reported as diverged.
    #[serde(default)]
    pub allow_excluded: bool,
    pub template: ExperimentConfig,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&read_config(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schema_version {}", self.schema_version)));
        }
        self.template.validate()?;
        let exps: Vec<f64> = match self.family {
            SweepFamily::Sum => self.p.clone(),
            SweepFamily::Product => self.rs.iter().map(|(r, s)| r + s).collect(),
        };
        if exps.is_empty() || self.theta.is_empty() {
            return Err(Error::Config("sweep grid needs at least one exponent and one theta".into()));
        }
        if exps.iter().chain(&self.theta).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("sweep exponents and theta must be finite and >= 0".into()));
        }
        if !self.allow_excluded && exps.iter().any(|&p| p == 1.0 || p == 3.0) {
            return Err(Error::Config("exponent 1 or 3 in the grid needs allow_excluded".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn minimal_config_defaults() {
        let cfg = ExperimentConfig::new();
        assert_eq!(cfg.mode, ScalarMode::Exact);
        assert_eq!(cfg.phi, PhiSpec::Keyword(PhiKeyword::Certify));
        assert_eq!(cfg.iteration.max_iter, 48);
        assert_eq!(cfg.bounds.sum.len(), 6);
    }

    #[test]
    fn literals_are_exact() {
        let q: Rational = Literal::Number(0.001).parse().unwrap();
        assert_eq!(q, crate::scalar::ratio(1, 1000));
        let q: Rational = Literal::from("-1/3").parse().unwrap();
        assert_eq!(q, crate::scalar::ratio(-1, 3));
    }

    #[test]
    fn full_config_parses() {
        let text = r#"{
            "schema_version": 1,
            "mode": "float",
            "model": {"atoms": [
                {"kind": "linear", "matrix": [["2"]]},
                {"kind": "cubic", "tensors": [[1]]},
                {"kind": "bounded_noise", "seed": 3, "amplitude": "1e-3"}
            ]},
            "phi": {"kind": "constant", "c": 0.076},
            "directions": {"additive": -1, "cubic": 1},
            "samples": {"points": [["1/2"]], "random": {"seed": 9, "count": 3}}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.directions, DirectionSpec::Fixed { additive: Direction::Expand, cubic: Direction::Contract });
        let f: FuncModel<f64> = cfg.model().unwrap();
        assert_eq!(f.atoms().len(), 3);
        let pts: Vec<Point<f64>> = cfg.samples.points(1, cfg.norm).unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0].coords()[0], 0.5);
        assert!(pts.iter().all(|p| p.coords()[0].abs() <= 8.0));
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        assert!(ExperimentConfig::from_json(r#"{"schema_version": 2}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"schema_version": 1, "bogus": 0}"#).is_err());
        assert!(
            ExperimentConfig::from_json(r#"{"schema_version": 1, "directions": {"additive": 0, "cubic": 1}}"#).is_err()
        );
    }

    #[test]
    fn sweep_rejects_excluded_without_flag() {
        let text =
            r#"{"schema_version": 1, "family": "sum", "p": [3], "theta": [1], "template": {"schema_version": 1}}"#;
        assert!(SweepSpec::from_json(text).is_err());
        let text = text.replace(r#""family""#, r#""allow_excluded": true, "family""#);
        assert!(SweepSpec::from_json(&text).is_ok());
    }
}
