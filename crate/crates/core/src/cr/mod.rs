//! Rigid tubes `v_k = φ_k(y)`: nondegeneracy witnesses, the derivative map
//! `ψ`, its inverse `ψ'`, and the algebraicity tests built on them.

mod obstruction;
mod polar;

pub use obstruction::{
    derivative_map_test, hypersurface_entries, hypersurface_first_second_test, jacobian_identity_holds,
    obstruction_matrix, psi_pair, ObstructionMatrix, PsiPair,
};
pub use polar::{polar_rigid_test, tube_family, tube_family_expr, PolarProfile};

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::algdep::linalg::{IncrementalRank, RationalMatrix};
use crate::algdep::{enumerate_monomials, AlgdepError};
use crate::expr::{parse, taylor, Expr, ParseError, TaylorError};
use crate::series::{ExponentVector, Series, SeriesError, SeriesMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrError {
    #[error("invalid dimensions: n = {n}, d = {d} (need 1 <= d < n)")]
    Dimensions { n: usize, d: usize },
    #[error("expected {expected} defining function(s), got {got}")]
    DefiningFunctionCount { expected: usize, got: usize },
    #[error("defining function {index} has {got} variable(s), expected {expected}")]
    DefiningFunctionVars { index: usize, expected: usize, got: usize },
    #[error("defining function {index} does not vanish at 0")]
    NonzeroAtOrigin { index: usize },
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("witness map has rank {rank} < {m} at the origin")]
    DegenerateWitness { rank: usize, m: usize },
    #[error("defining functions known to order {available}, need {needed}")]
    InsufficientOrder { needed: u32, available: u32 },
    #[error("the second-derivative test needs a hypersurface (d = 1), got d = {d}")]
    NotHypersurface { d: usize },
    #[error("Hessian at the origin is singular; use the witness-based test")]
    HessianSingular,
    #[error("profile must be a univariate series vanishing at 0")]
    InvalidProfile,
    #[error("family needs n >= 2 and n - 1 functions chi, got n = {n} and {chi} function(s)")]
    FamilyArity { n: usize, chi: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Taylor(#[from] TaylorError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Algdep(#[from] AlgdepError),
}

/// `v_k = φ_k(y)`, `k = 1..d`, in `C^n` with `m = n - d` real variables `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TubeSpec {
    n: usize,
    d: usize,
    phi: Vec<Series>,
}

impl TubeSpec {
    /// All `φ_k` are truncated to their common minimum order.
    pub fn new(n: usize, d: usize, phi: Vec<Series>) -> Result<Self, CrError> {
        if d == 0 || d >= n {
            return Err(CrError::Dimensions { n, d });
        }
        if phi.len() != d {
            return Err(CrError::DefiningFunctionCount {
                expected: d,
                got: phi.len(),
            });
        }
        let m = n - d;
        for (index, p) in phi.iter().enumerate() {
            if p.var_count() != m {
                return Err(CrError::DefiningFunctionVars {
                    index,
                    expected: m,
                    got: p.var_count(),
                });
            }
            if !p.constant_term().is_zero() {
                return Err(CrError::NonzeroAtOrigin { index });
            }
        }
        let order = phi.iter().map(Series::order).min().expect("d >= 1");
        let phi = phi.iter().map(|p| p.truncate(order)).collect();
        Ok(Self { n, d, phi })
    }

    pub fn from_exprs(n: usize, d: usize, exprs: &[Expr], order: u32) -> Result<Self, CrError> {
        let m = n.saturating_sub(d);
        let phi = exprs
            .iter()
            .map(|e| taylor(e, m, order))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(n, d, phi)
    }

    pub fn parse(n: usize, d: usize, texts: &[&str], order: u32) -> Result<Self, CrError> {
        let m = n.saturating_sub(d);
        let exprs = texts.iter().map(|t| parse(t, m)).collect::<Result<Vec<_>, _>>()?;
        Self::from_exprs(n, d, &exprs, order)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.n - self.d
    }

    pub fn order(&self) -> u32 {
        self.phi[0].order()
    }

    pub fn phi(&self) -> &[Series] {
        &self.phi
    }

    /// Same tube with every `φ_k` truncated at `order`.
    pub fn truncate(&self, order: u32) -> TubeSpec {
        TubeSpec {
            n: self.n,
            d: self.d,
            phi: self.phi.iter().map(|p| p.truncate(order)).collect(),
        }
    }

    /// Gradient at 0 of `∂^β φ_k`: entry `j` is `(β + e_j)! [y^{β+e_j}] φ_k`.
    fn gradient_row(&self, beta: &ExponentVector, k: usize) -> Vec<BigRational> {
        let m = self.m();
        (0..m)
            .map(|j| {
                let e = beta.plus(&ExponentVector::unit(m, j));
                let c = self.phi[k].coeff(&e);
                if c.is_zero() {
                    c
                } else {
                    c * BigRational::from_integer(e.factorial())
                }
            })
            .collect()
    }
}

/// Multiindices `β^1..β^m` and defining-function indices `k_1..k_m` whose
/// derivative map has full rank at 0. Indices `k` are 0-based here.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Witness {
    betas: Vec<ExponentVector>,
    ks: Vec<usize>,
}

impl Witness {
    /// Checks shapes, index ranges and the rank condition against `t`.
    pub fn new(t: &TubeSpec, betas: Vec<ExponentVector>, ks: Vec<usize>) -> Result<Self, CrError> {
        let m = t.m();
        if betas.len() != m || ks.len() != m {
            return Err(CrError::InvalidWitness(format!(
                "need {m} multiindices and {m} indices, got {} and {}",
                betas.len(),
                ks.len()
            )));
        }
        for b in &betas {
            if b.var_count() != m {
                return Err(CrError::InvalidWitness(format!(
                    "multiindex of length {} in {m} variable(s)",
                    b.var_count()
                )));
            }
            if b.degree() == 0 {
                return Err(CrError::InvalidWitness("multiindex of length 0".into()));
            }
        }
        if let Some(k) = ks.iter().find(|&&k| k >= t.d()) {
            return Err(CrError::InvalidWitness(format!(
                "index {} exceeds d = {}",
                k + 1,
                t.d()
            )));
        }
        let needed = betas.iter().map(ExponentVector::degree).max().unwrap_or(0) + 1;
        if t.order() < needed {
            return Err(CrError::InsufficientOrder {
                needed,
                available: t.order(),
            });
        }
        let w = Witness { betas, ks };
        let rank = w.jacobian_at_origin(t).rank();
        if rank < m {
            return Err(CrError::DegenerateWitness { rank, m });
        }
        Ok(w)
    }

    pub fn betas(&self) -> &[ExponentVector] {
        &self.betas
    }

    /// 0-based defining-function indices.
    pub fn ks(&self) -> &[usize] {
        &self.ks
    }

    pub fn max_length(&self) -> u32 {
        self.betas.iter().map(ExponentVector::degree).max().unwrap_or(0)
    }

    pub fn jacobian_at_origin(&self, t: &TubeSpec) -> RationalMatrix {
        RationalMatrix::from_rows(
            self.betas
                .iter()
                .zip(&self.ks)
                .map(|(b, &k)| t.gradient_row(b, k))
                .collect(),
        )
        .expect("rows of equal length")
    }
}

/// Greedy search: candidates `(β, k)` run over `1 <= |β| <= max_order` in
/// graded order and, for each `β`, over `k = 1..d`; a candidate is kept when
/// its gradient row at 0 raises the rank.
pub fn search_witness(t: &TubeSpec, max_order: u32) -> Option<Witness> {
    let m = t.m();
    let max_order = max_order.min(t.order().saturating_sub(1));
    let mut rank = IncrementalRank::new();
    let mut betas = Vec::new();
    let mut ks = Vec::new();
    for beta in enumerate_monomials(m, max_order).into_iter().skip(1) {
        for k in 0..t.d() {
            if rank.try_insert(&t.gradient_row(&beta, k)) {
                betas.push(beta.clone());
                ks.push(k);
                if betas.len() == m {
                    return Some(Witness { betas, ks });
                }
            }
        }
    }
    None
}

/// The derivative map before recentering together with the constants that
/// were removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Psi {
    pub map: SeriesMap,
    /// `ψ_l(0)`, subtracted so that the map fixes the origin.
    pub constants: Vec<BigRational>,
}

/// `ψ_l = ∂^{β^l} φ_{k_l} - (∂^{β^l} φ_{k_l})(0)`, known to order
/// `t.order() - max |β|`.
pub fn build_psi(t: &TubeSpec, w: &Witness) -> Result<Psi, CrError> {
    let needed = w.max_length() + 1;
    if t.order() < needed {
        return Err(CrError::InsufficientOrder {
            needed,
            available: t.order(),
        });
    }
    let mut constants = Vec::with_capacity(t.m());
    let comps = w
        .betas
        .iter()
        .zip(&w.ks)
        .map(|(b, &k)| {
            let s = t.phi[k].diff_multi(b)?;
            constants.push(s.constant_term());
            Ok(s.without_constant())
        })
        .collect::<Result<Vec<_>, SeriesError>>()?;
    Ok(Psi {
        map: SeriesMap::new(comps)?,
        constants,
    })
}

/// Sufficient minimality test for a hypersurface: some second derivative of
/// `φ` is nonzero at 0. `false` means inconclusive.
pub fn levi_minimal_sufficient(t: &TubeSpec) -> Result<bool, CrError> {
    if t.d() != 1 {
        return Err(CrError::NotHypersurface { d: t.d() });
    }
    if t.order() < 2 {
        return Err(CrError::InsufficientOrder {
            needed: 2,
            available: t.order(),
        });
    }
    Ok(t.phi[0].terms().any(|(e, _)| e.degree() == 2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(v: &[u32]) -> ExponentVector {
        ExponentVector::new(v.to_vec())
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn tube_validation() {
        let y = Series::variable(1, 5, 0).unwrap();
        assert!(matches!(
            TubeSpec::new(2, 2, vec![y.clone()]),
            Err(CrError::Dimensions { .. })
        ));
        assert!(matches!(
            TubeSpec::new(3, 1, vec![y.clone()]),
            Err(CrError::DefiningFunctionVars { .. })
        ));
        let shifted = &y + &Series::one(1, 5);
        assert_eq!(
            TubeSpec::new(2, 1, vec![shifted]),
            Err(CrError::NonzeroAtOrigin { index: 0 })
        );
        assert!(matches!(
            TubeSpec::parse(2, 1, &["exp(y1)"], 5),
            Err(CrError::NonzeroAtOrigin { index: 0 })
        ));
        assert!(matches!(TubeSpec::parse(2, 1, &["y2"], 5), Err(CrError::Parse(_))));
    }

    #[test]
    fn psi_examples() {
        let t = TubeSpec::parse(2, 1, &["y1^2"], 6).unwrap();
        let w = Witness::new(&t, vec![ev(&[1])], vec![0]).unwrap();
        assert_eq!(
            build_psi(&t, &w).unwrap().map.component(0),
            &Series::variable(1, 5, 0).unwrap().scale(&q(2, 1))
        );

        let t = TubeSpec::parse(3, 1, &["y1^2 + y2^2"], 6).unwrap();
        let w = Witness::new(&t, vec![ev(&[1, 0]), ev(&[0, 1])], vec![0, 0]).unwrap();
        let psi = build_psi(&t, &w).unwrap().map;
        assert_eq!(psi.component(0), &Series::variable(2, 5, 0).unwrap().scale(&q(2, 1)));
        assert_eq!(psi.component(1), &Series::variable(2, 5, 1).unwrap().scale(&q(2, 1)));

        let t = TubeSpec::parse(2, 1, &["sin(y1^2)"], 12).unwrap();
        let w = Witness::new(&t, vec![ev(&[1])], vec![0]).unwrap();
        let psi = build_psi(&t, &w).unwrap().map;
        let expect = Series::from_terms(
            1,
            11,
            vec![(ev(&[1]), q(2, 1)), (ev(&[5]), q(-1, 1)), (ev(&[9]), q(1, 12))],
        )
        .unwrap();
        assert_eq!(psi.component(0), &expect);
    }

    #[test]
    fn recentering_records_constants() {
        let t = TubeSpec::parse(2, 1, &["y1 + y1^2"], 6).unwrap();
        let w = Witness::new(&t, vec![ev(&[1])], vec![0]).unwrap();
        let psi = build_psi(&t, &w).unwrap();
        assert_eq!(psi.constants, vec![q(1, 1)]);
        assert!(psi.map.component(0).constant_term().is_zero());
    }

    #[test]
    fn witness_search_examples() {
        let t = TubeSpec::parse(2, 1, &["y1^3"], 8).unwrap();
        let w = search_witness(&t, 3).unwrap();
        assert_eq!(w.betas(), &[ev(&[2])]);
        assert_eq!(search_witness(&t, 1), None);

        let t = TubeSpec::parse(2, 1, &["y1^2"], 8).unwrap();
        assert_eq!(search_witness(&t, 6).unwrap().betas(), &[ev(&[1])]);

        let t = TubeSpec::parse(3, 1, &["y1*y2"], 8).unwrap();
        let w = search_witness(&t, 1).unwrap();
        assert_eq!(w.betas(), &[ev(&[1, 0]), ev(&[0, 1])]);
        assert_eq!(w.ks(), &[0, 0]);
    }

    #[test]
    fn witness_search_uses_several_functions() {
        // Codimension 2 in C^3: one variable, two defining functions.
        let t = TubeSpec::parse(3, 2, &["y1^4", "y1^2 + y1^5"], 10).unwrap();
        let w = search_witness(&t, 4).unwrap();
        assert_eq!(w.betas(), &[ev(&[1])]);
        assert_eq!(w.ks(), &[1]);
    }

    #[test]
    fn witness_validation() {
        let t = TubeSpec::parse(2, 1, &["y1^3"], 8).unwrap();
        assert_eq!(
            Witness::new(&t, vec![ev(&[1])], vec![0]),
            Err(CrError::DegenerateWitness { rank: 0, m: 1 })
        );
        assert!(matches!(
            Witness::new(&t, vec![ev(&[0])], vec![0]),
            Err(CrError::InvalidWitness(_))
        ));
        assert!(matches!(
            Witness::new(&t, vec![ev(&[2])], vec![1]),
            Err(CrError::InvalidWitness(_))
        ));
        assert!(matches!(
            Witness::new(&t, vec![ev(&[8])], vec![0]),
            Err(CrError::InsufficientOrder { needed: 9, .. })
        ));
    }

    #[test]
    fn levi_examples() {
        let check = |s: &str| levi_minimal_sufficient(&TubeSpec::parse(2, 1, &[s], 6).unwrap()).unwrap();
        assert!(check("y1^2"));
        assert!(!check("y1^3"));
        assert!(check("sin(y1^2)"));
        let t = TubeSpec::parse(3, 2, &["y1^2", "y1^3"], 6).unwrap();
        assert_eq!(levi_minimal_sufficient(&t), Err(CrError::NotHypersurface { d: 2 }));
    }
}
