//! Problem files, verdict reports and the pipelines that connect them.

mod problem;
mod run;

pub use problem::{
    rat_string, Bounds, BoundsOverride, GuessFile, Mode, PhiEntry, ProblemFile, Rat, SeriesLiteral, TermLiteral,
    WitnessSpec, DEFAULT_DEGREE, DEFAULT_MARGIN, DEFAULT_MAX_WITNESS_ORDER, DEFAULT_VALIDATE_BUMP,
};
pub use run::{corpus, emit_corpus, run, run_guess, run_nondegen, RunOptions};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algdep::RelationResult;
use crate::series::Series;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    PassesNecessaryCondition,
    ObstructedUpToBounds,
    NotFinitelyNondegenerateUpToOrder,
    /// `nondegen` only: a witness exists.
    FinitelyNondegenerate,
    /// Profile with `φ'(0) = 0`: the Levi-nondegeneracy hypothesis fails,
    /// relations are reported but no verdict is drawn.
    UncheckedHypotheses,
    InputError,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::InputError => 1,
            Verdict::NotFinitelyNondegenerateUpToOrder => 2,
            _ => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Minimality {
    /// Levi form nonzero at 0.
    True,
    Unchecked,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assumptions {
    /// The user asserts the automorphism-group hypotheses; the tool does not
    /// check them.
    pub family_membership_asserted: bool,
}

/// Witness with 1-based `ks` and the data derived from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub betas: Vec<Vec<u32>>,
    pub ks: Vec<usize>,
    pub source: WitnessSource,
    /// Rows are the gradients at 0 of the components of `ψ`.
    pub jacobian_at_origin: Vec<Vec<Rat>>,
    /// Values `ψ_l(0)` removed before inversion.
    pub dropped_constants: Vec<Rat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessSource {
    Search,
    User,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RelationReport {
    Found {
        polynomial: String,
        t_degree: u32,
        total_degree: u32,
        validated_order: u32,
        terms: Vec<TermLiteral>,
    },
    NoneUpTo {
        degree: u32,
        order: u32,
    },
}

impl From<&RelationResult> for RelationReport {
    fn from(r: &RelationResult) -> Self {
        match r {
            RelationResult::Found {
                polynomial,
                validated_order,
            } => RelationReport::Found {
                polynomial: polynomial.to_string(),
                t_degree: polynomial.t_degree(),
                total_degree: polynomial.total_degree(),
                validated_order: *validated_order,
                terms: polynomial
                    .terms()
                    .map(|(e, c)| TermLiteral {
                        exponent: e.as_slice().to_vec(),
                        coeff: Rat(num_rational::BigRational::from_integer(c.clone())),
                    })
                    .collect(),
            },
            RelationResult::NoneUpTo { degree, order } => RelationReport::NoneUpTo {
                degree: *degree,
                order: *order,
            },
        }
    }
}

impl RelationReport {
    pub fn is_found(&self) -> bool {
        matches!(self, RelationReport::Found { .. })
    }
}

/// One tested function: its position, a short head of its expansion and
/// the relation search outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryReport {
    pub label: String,
    pub row: usize,
    pub col: usize,
    pub series_head: String,
    pub result: RelationReport,
}

pub(crate) const HEAD_DEGREE: u32 = 6;

impl EntryReport {
    pub(crate) fn new(label: String, row: usize, col: usize, series: &Series, result: &RelationResult) -> Self {
        Self {
            label,
            row,
            col,
            series_head: series.truncate(HEAD_DEGREE).to_string(),
            result: result.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Obstruct,
    Polar,
    Nondegen,
    Guess,
}

/// Machine-readable outcome of one run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub input: Option<ProblemFile>,
    pub bounds: Option<Bounds>,
    pub witness: Option<WitnessReport>,
    pub minimality: Minimality,
    pub assumptions: Assumptions,
    /// Relation results for `∂ψ'_j/∂y'_l` (tubes) or `φ'` (profiles).
    pub entries: Vec<EntryReport>,
    /// Hypersurfaces with nonsingular Hessian: second derivatives of `φ` as
    /// functions of the first derivatives. Informational; the verdict is
    /// drawn from `entries`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub second_derivative_entries: Vec<EntryReport>,
    pub verdict: Verdict,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall-clock milliseconds per stage; only present when requested, so
    /// that reports are byte-for-byte reproducible by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

impl Report {
    pub(crate) fn empty(command: Command, input: Option<ProblemFile>) -> Self {
        let asserted = input.as_ref().is_some_and(|p| p.assume_family);
        Self {
            tool: "tubecheck".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            input,
            bounds: None,
            witness: None,
            minimality: Minimality::Unchecked,
            assumptions: Assumptions {
                family_membership_asserted: asserted,
            },
            entries: Vec::new(),
            second_derivative_entries: Vec::new(),
            verdict: Verdict::InputError,
            message: String::new(),
            error: None,
            timings_ms: None,
        }
    }

    /// Report for input that could not be read or decoded at all.
    pub fn input_error(command: Command, input: Option<ProblemFile>, error: String) -> Self {
        let mut r = Self::empty(command, input);
        r.message = "input error; no analysis was performed".into();
        r.error = Some(error);
        r
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Output of the `guess` command.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuessReport {
    pub tool: String,
    pub version: String,
    pub input: Option<GuessFile>,
    pub bounds: Option<Bounds>,
    pub result: Option<EntryReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl GuessReport {
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
