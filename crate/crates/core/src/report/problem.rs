//! Input files. Rationals travel as strings `"p/q"` or `"p"`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algdep::{required_order, GuessBounds};
use crate::series::{ExponentVector, Series};

/// Exact rational with a string JSON encoding.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rat(pub BigRational);

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let bad = || format!("`{s}` is not a rational p/q");
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(format!("`{s}` has a zero denominator"));
        }
        Ok(Rat(BigRational::new(n, d)))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn rat_string(q: &BigRational) -> String {
    Rat(q.clone()).to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermLiteral {
    pub exponent: Vec<u32>,
    pub coeff: Rat,
}

/// Explicit Taylor data. `coefficients` is a dense univariate list
/// (index = degree); `terms` is the sparse form for any number of
/// variables. Both may be given and are added.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesLiteral {
    pub order: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermLiteral>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<Rat>,
}

impl SeriesLiteral {
    pub fn from_series(s: &Series) -> Self {
        Self {
            order: s.order(),
            terms: s
                .terms()
                .map(|(e, c)| TermLiteral {
                    exponent: e.as_slice().to_vec(),
                    coeff: Rat(c.clone()),
                })
                .collect(),
            coefficients: Vec::new(),
        }
    }

    pub fn to_series(&self, var_count: usize) -> Result<Series, String> {
        if !self.coefficients.is_empty() && var_count != 1 {
            return Err(format!(
                "dense coefficient lists are univariate; this input has {var_count} variables"
            ));
        }
        let mut terms: Vec<(ExponentVector, BigRational)> = Vec::new();
        for t in &self.terms {
            if t.exponent.len() != var_count {
                return Err(format!(
                    "exponent {:?} has length {}, expected {var_count}",
                    t.exponent,
                    t.exponent.len()
                ));
            }
            terms.push((ExponentVector::new(t.exponent.clone()), t.coeff.0.clone()));
        }
        for (k, c) in self.coefficients.iter().enumerate() {
            terms.push((ExponentVector::new(vec![k as u32]), c.0.clone()));
        }
        let mut s = Series::zero(var_count, self.order);
        for (e, c) in terms {
            if e.degree() > self.order {
                continue;
            }
            s = &s + &Series::monomial(e, c, self.order);
        }
        Ok(s)
    }
}

/// A defining function: expression text or explicit series data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiEntry {
    Expr(String),
    Series(SeriesLiteral),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Tube,
    RigidPolar,
}

/// Witness as written in files: `ks` are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSpec {
    pub betas: Vec<Vec<u32>>,
    pub ks: Vec<usize>,
}

/// Partial bounds; unset fields fall through to the next source.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_witness_order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate_bump: Option<u32>,
}

impl BoundsOverride {
    /// Fields of `self` win over `fallback`.
    pub fn or(&self, fallback: &BoundsOverride) -> BoundsOverride {
        BoundsOverride {
            degree: self.degree.or(fallback.degree),
            order: self.order.or(fallback.order),
            margin: self.margin.or(fallback.margin),
            max_witness_order: self.max_witness_order.or(fallback.max_witness_order),
            validate_bump: self.validate_bump.or(fallback.validate_bump),
        }
    }
}

pub const DEFAULT_DEGREE: u32 = 6;
pub const DEFAULT_MARGIN: u32 = 8;
pub const DEFAULT_MAX_WITNESS_ORDER: u32 = 6;
pub const DEFAULT_VALIDATE_BUMP: u32 = 10;

/// Fully resolved bounds, echoed in every report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub degree: u32,
    pub order: u32,
    pub margin: u32,
    pub max_witness_order: u32,
    pub validate_bump: u32,
}

impl Bounds {
    /// Defaults with the order derived from degree and margin for `m`
    /// variables.
    pub fn resolve(m: usize, over: &BoundsOverride) -> Bounds {
        let degree = over.degree.unwrap_or(DEFAULT_DEGREE);
        let margin = over.margin.unwrap_or(DEFAULT_MARGIN);
        Bounds {
            degree,
            order: over.order.unwrap_or_else(|| required_order(m, degree, margin)),
            margin,
            max_witness_order: over.max_witness_order.unwrap_or(DEFAULT_MAX_WITNESS_ORDER),
            validate_bump: over.validate_bump.unwrap_or(DEFAULT_VALIDATE_BUMP),
        }
    }

    pub fn guess(&self) -> GuessBounds {
        GuessBounds {
            degree: self.degree,
            order: self.order,
            margin: self.margin,
            validate_bump: self.validate_bump,
        }
    }
}

/// One problem: a tube `v_k = φ_k(y)` or a rigid polar profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    #[serde(default = "one")]
    pub d: usize,
    pub mode: Mode,
    pub phi: Vec<PhiEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsOverride>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub assume_family: bool,
}

fn one() -> usize {
    1
}

impl ProblemFile {
    pub fn tube(name: &str, n: usize, phi: &[&str]) -> Self {
        Self {
            name: Some(name.to_string()),
            n,
            d: phi.len(),
            mode: Mode::Tube,
            phi: phi.iter().map(|p| PhiEntry::Expr(p.to_string())).collect(),
            witness: None,
            bounds: None,
            assume_family: false,
        }
    }

    pub fn polar(name: &str, profile: &str) -> Self {
        Self {
            name: Some(name.to_string()),
            n: 2,
            d: 1,
            mode: Mode::RigidPolar,
            phi: vec![PhiEntry::Expr(profile.to_string())],
            witness: None,
            bounds: None,
            assume_family: false,
        }
    }

    pub fn with_bounds(mut self, b: BoundsOverride) -> Self {
        self.bounds = Some(b);
        self
    }

    /// Number of real base variables: `n - d` for tubes, 1 for profiles.
    pub fn var_count(&self) -> usize {
        match self.mode {
            Mode::Tube => self.n.saturating_sub(self.d),
            Mode::RigidPolar => 1,
        }
    }
}

/// Raw input for the `guess` command.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuessFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "one")]
    pub var_count: usize,
    pub series: PhiEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsOverride>,
}
