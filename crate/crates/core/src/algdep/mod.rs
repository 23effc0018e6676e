//! Algebraic-dependence guessing from truncated Taylor data.
//!
//! Given a series `f` in `m` variables, look for a nonzero polynomial
//! `P(y, T)` of total degree `<= D` with `P(y, f(y)) = 0`. The unknown
//! coefficients of `P` form the kernel of a matrix whose columns are the
//! Taylor coefficients of the products `y^a f^b`.

pub mod linalg;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::series::{fmt_terms, ExponentVector, Series};
use linalg::{exact_nullspace, RationalMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgdepError {
    #[error("order {order} leaves the system underdetermined for degree {degree}; need order >= {required}")]
    Underdetermined { degree: u32, order: u32, required: u32 },
    #[error("series is only known to order {available}, {requested} requested")]
    InsufficientOrder { requested: u32, available: u32 },
}

/// All exponent vectors in `k` variables of total degree `<= d`, ascending
/// in graded order. There are `C(d + k, k)` of them.
pub fn enumerate_monomials(k: usize, d: u32) -> Vec<ExponentVector> {
    fn fill(k: usize, rest: u32, prefix: &mut Vec<u32>, out: &mut Vec<ExponentVector>) {
        if prefix.len() + 1 == k {
            prefix.push(rest);
            out.push(ExponentVector::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=rest).rev() {
            prefix.push(e);
            fill(k, rest - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        out.push(ExponentVector::new(Vec::new()));
        return out;
    }
    for total in 0..=d {
        fill(k, total, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of unknowns for degree `d` in `m` base variables: `C(d+m+1, m+1)`.
pub fn unknown_count(m: usize, d: u32) -> u64 {
    binomial(u64::from(d) + m as u64 + 1, m as u64 + 1)
}

/// Smallest truncation order at which the system has at least `margin`
/// more rows than unknowns, also for every series that effectively depends
/// on fewer than `m` variables.
///
/// For a series in `k` effective variables the columns split into blocks
/// indexed by the idle variables; the largest block needs
/// `C(N+k, k) >= C(D+k+1, k+1) + margin + 1`. The one-variable block is the
/// binding one, giving `N = C(D+2, 2) + margin` whatever `m` is.
pub fn required_order(m: usize, degree: u32, margin: u32) -> u32 {
    (1..=m.max(1))
        .map(|k| {
            let need = unknown_count(k, degree) + u64::from(margin) + 1;
            let mut n = 0u32;
            while binomial(u64::from(n) + k as u64, k as u64) < need {
                n += 1;
            }
            n
        })
        .max()
        .expect("k = 1 is always present")
}

/// Integer polynomial in `m` base variables `y1..ym` and one graph variable
/// `T` (stored last in each exponent vector).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    base_vars: usize,
    coeffs: BTreeMap<ExponentVector, BigInt>,
}

impl Polynomial {
    /// Exponent vectors have length `base_vars + 1`; zero coefficients are
    /// dropped. No normalization happens here.
    pub fn from_terms<I>(base_vars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (ExponentVector, BigInt)>,
    {
        let coeffs = terms
            .into_iter()
            .filter(|(e, c)| {
                assert_eq!(e.var_count(), base_vars + 1, "exponent length");
                !c.is_zero()
            })
            .collect();
        Self { base_vars, coeffs }
    }

    pub fn base_vars(&self) -> usize {
        self.base_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &BigInt)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, e: &ExponentVector) -> BigInt {
        self.coeffs.get(e).cloned().unwrap_or_default()
    }

    pub fn t_degree(&self) -> u32 {
        self.coeffs.keys().map(|e| e.get(self.base_vars)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.coeffs.keys().map(ExponentVector::degree).max().unwrap_or(0)
    }

    /// Leading monomial for the guessing order: T-degree, then total degree,
    /// then graded order.
    pub fn leading_monomial(&self) -> Option<&ExponentVector> {
        self.coeffs.keys().max_by(|a, b| column_cmp(a, b, self.base_vars))
    }

    /// `P(y, f(y))` truncated at `min(order, f.order)`.
    pub fn substitute(&self, f: &Series, order: u32) -> Series {
        assert_eq!(f.var_count(), self.base_vars, "series variable count");
        let m = self.base_vars;
        let order = order.min(f.order());
        let f = f.truncate(order);
        let mut powers = vec![Series::one(m, order)];
        let mut acc = Series::zero(m, order);
        for (e, c) in &self.coeffs {
            let b = e.get(m) as usize;
            while powers.len() <= b {
                let next = powers.last().expect("nonempty") * &f;
                powers.push(next);
            }
            let base = ExponentVector::new(e.as_slice()[..m].to_vec());
            let mono = Series::monomial(base, BigRational::from_integer(c.clone()), order);
            acc = &acc + &(&mono * &powers[b]);
        }
        acc
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.base_vars;
        let names = |j: usize| {
            if j == m {
                "T".to_string()
            } else {
                format!("y{}", j + 1)
            }
        };
        let mut coeffs: Vec<(&ExponentVector, BigRational)> = self
            .coeffs
            .iter()
            .map(|(e, c)| (e, BigRational::from_integer(c.clone())))
            .collect();
        coeffs.sort_by(|a, b| column_cmp(b.0, a.0, m));
        let text = fmt_terms(coeffs.iter().map(|(e, c)| (e.as_slice(), c)), &names);
        f.write_str(&text)
    }
}

fn column_cmp(a: &ExponentVector, b: &ExponentVector, m: usize) -> Ordering {
    a.get(m).cmp(&b.get(m)).then(a.degree().cmp(&b.degree())).then(a.cmp(b))
}

/// Outcome of a bounded relation search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationResult {
    /// `P(y, f) = 0` through total degree `validated_order`.
    Found {
        polynomial: Polynomial,
        validated_order: u32,
    },
    /// The constraint system at these bounds has no admissible kernel vector.
    NoneUpTo { degree: u32, order: u32 },
}

impl RelationResult {
    pub fn is_found(&self) -> bool {
        matches!(self, RelationResult::Found { .. })
    }

    pub fn polynomial(&self) -> Option<&Polynomial> {
        match self {
            RelationResult::Found { polynomial, .. } => Some(polynomial),
            RelationResult::NoneUpTo { .. } => None,
        }
    }
}

/// Columns `y^a f^b` with `|a| + b <= degree`, sorted by [`column_cmp`].
fn columns(m: usize, degree: u32) -> Vec<ExponentVector> {
    let mut cols = enumerate_monomials(m + 1, degree);
    cols.sort_by(|a, b| column_cmp(a, b, m));
    cols
}

fn constraint_matrix(f: &Series, cols: &[ExponentVector], degree: u32, order: u32) -> RationalMatrix {
    let m = f.var_count();
    let f = f.truncate(order);
    let mut powers = vec![Series::one(m, order)];
    for _ in 0..degree {
        let next = powers.last().expect("nonempty") * &f;
        powers.push(next);
    }
    let rows = enumerate_monomials(m, order);
    let index: BTreeMap<&ExponentVector, usize> = rows.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut mat = RationalMatrix::zeros(rows.len(), cols.len());
    for (j, col) in cols.iter().enumerate() {
        let a = ExponentVector::new(col.as_slice()[..m].to_vec());
        let b = col.get(m) as usize;
        for (e, c) in powers[b].terms() {
            let shifted = e.plus(&a);
            if shifted.degree() <= order {
                mat.set(index[&shifted], j, c.clone());
            }
        }
    }
    mat
}

/// Lowest admissible relation visible in the rows of degree `<= order`.
fn lowest_relation(f: &Series, degree: u32, order: u32) -> Option<Polynomial> {
    let m = f.var_count();
    let cols = columns(m, degree);
    let mat = constraint_matrix(f, &cols, degree, order);
    // Kernel vectors come one per free column, ascending, each ending at its
    // free column. The first one ending at a column with T-degree > 0 has
    // the smallest possible leading monomial.
    let v = exact_nullspace(&mat).into_iter().find(|v| {
        let last = v.iter().rposition(|x| !x.is_zero()).expect("nonzero kernel vector");
        cols[last].get(m) > 0
    })?;
    let last = v.iter().rposition(|x| !x.is_zero()).expect("nonzero");
    let flip = v[last].is_negative();
    let terms = cols.iter().zip(&v).map(|(e, x)| {
        let c = x.to_integer();
        (e.clone(), if flip { -c } else { c })
    });
    Some(Polynomial::from_terms(m, terms))
}

/// Search for `P` with `P(y, f) = 0`, total degree `<= degree`, using the
/// Taylor coefficients of `f` through total degree `order`.
///
/// A candidate is then checked against every coefficient `f` carries. If
/// that check fails the kernel is recomputed from all available rows, so a
/// `NoneUpTo` result always means an admissible-free kernel at the reported
/// order.
///
/// Normalization: integer coefficients with gcd 1, positive coefficient on
/// the leading monomial (highest T-degree, then total degree, then graded
/// order).
pub fn guess_relation(f: &Series, degree: u32, order: u32, margin: u32) -> Result<RelationResult, AlgdepError> {
    let required = required_order(f.var_count(), degree, margin);
    if order < required {
        return Err(AlgdepError::Underdetermined {
            degree,
            order,
            required,
        });
    }
    if f.order() < order {
        return Err(AlgdepError::InsufficientOrder {
            requested: order,
            available: f.order(),
        });
    }
    let full = f.order();
    let Some(p) = lowest_relation(f, degree, order) else {
        return Ok(RelationResult::NoneUpTo { degree, order });
    };
    if validate_relation(&p, f, full) {
        return Ok(RelationResult::Found {
            polynomial: p,
            validated_order: full,
        });
    }
    Ok(match lowest_relation(f, degree, full) {
        Some(polynomial) => RelationResult::Found {
            polynomial,
            validated_order: full,
        },
        None => RelationResult::NoneUpTo { degree, order: full },
    })
}

/// Degree and order bounds for one relation search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GuessBounds {
    pub degree: u32,
    pub order: u32,
    pub margin: u32,
    /// Extra orders of `f` used only to validate a candidate.
    pub validate_bump: u32,
}

impl GuessBounds {
    /// Order the tested series must be known to.
    pub fn series_order(&self) -> u32 {
        self.order + self.validate_bump
    }

    pub fn guess(&self, f: &Series) -> Result<RelationResult, AlgdepError> {
        guess_relation(&f.truncate(self.series_order()), self.degree, self.order, self.margin)
    }
}

/// True iff `P(y, f)` vanishes through total degree `order` (capped at the
/// order `f` is known to).
pub fn validate_relation(p: &Polynomial, f: &Series, order: u32) -> bool {
    p.substitute(f, order).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, taylor};

    fn series(text: &str, order: u32) -> Series {
        taylor(&parse(text, 1).unwrap(), 1, order).unwrap()
    }

    fn found(r: &RelationResult) -> &Polynomial {
        r.polynomial().expect("relation found")
    }

    #[test]
    fn monomial_enumeration() {
        let ev = |v: &[u32]| ExponentVector::new(v.to_vec());
        assert_eq!(enumerate_monomials(1, 2), vec![ev(&[0]), ev(&[1]), ev(&[2])]);
        assert_eq!(enumerate_monomials(2, 1), vec![ev(&[0, 0]), ev(&[1, 0]), ev(&[0, 1])]);
        assert_eq!(enumerate_monomials(2, 3).len(), 10);
        let m = enumerate_monomials(3, 4);
        assert_eq!(m.len() as u64, binomial(7, 3));
        assert!(m.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn order_requirement() {
        assert_eq!(required_order(1, 6, 8), 36);
        assert_eq!(required_order(1, 4, 8), 23);
        assert_eq!(required_order(2, 6, 8), 36);
        assert_eq!(required_order(3, 2, 0), 6);
        assert_eq!(unknown_count(2, 6), 84);
    }

    #[test]
    fn square_root() {
        let f = series("exp(1/2*log1p(y1))", 30);
        let r = guess_relation(&f, 2, 20, 8).unwrap();
        assert_eq!(found(&r).to_string(), "T^2 - y1 - 1");
        assert!(validate_relation(found(&r), &f, 30));
    }

    #[test]
    fn exponential_has_no_relation() {
        let f = series("exp(y1)", 50);
        assert_eq!(
            guess_relation(&f, 4, 40, 8).unwrap(),
            RelationResult::NoneUpTo { degree: 4, order: 40 }
        );
    }

    #[test]
    fn constant_graph() {
        let f = Series::constant(1, 10, BigRational::from_integer(2.into()));
        let r = guess_relation(&f, 1, 10, 7).unwrap();
        assert_eq!(found(&r).to_string(), "T - 2");
        assert!(matches!(
            guess_relation(&f, 1, 10, 8),
            Err(AlgdepError::Underdetermined { required: 11, .. })
        ));
    }

    #[test]
    fn validation_examples() {
        let p = |text: &str| -> Polynomial {
            // parse "c*y^a*T^b" style input through the series of P itself
            let s = taylor(&parse(text, 2).unwrap(), 2, 10).unwrap();
            Polynomial::from_terms(1, s.terms().map(|(e, c)| (e.clone(), c.to_integer())))
        };
        let sqrt = series("exp(1/2*log1p(y1))", 30);
        assert!(validate_relation(&p("y2^2 - y1 - 1"), &sqrt, 30));
        assert!(!validate_relation(&p("y2 - 1"), &series("exp(y1)", 10), 10));
        assert!(validate_relation(&p("y2"), &Series::zero(1, 7), 7));
    }

    #[test]
    fn cube_root_and_geometric() {
        let f = series("exp(1/3*log1p(y1))", 40);
        let r = guess_relation(&f, 3, 30, 8).unwrap();
        assert_eq!(found(&r).t_degree(), 3);
        assert_eq!(found(&r).to_string(), "T^3 - y1 - 1");

        let g = Series::from_univariate(&vec![BigRational::from_integer(1.into()); 31], 30);
        let r = guess_relation(&g, 2, 20, 8).unwrap();
        assert_eq!(found(&r).to_string(), "y1*T - T + 1");
    }

    #[test]
    fn retry_uses_every_available_row() {
        // f agrees with 1 + y through degree 12 and then departs.
        let mut terms = vec![(0, 1), (1, 1)];
        terms.push((13, 1));
        let coeffs: Vec<BigRational> = (0..=20)
            .map(|k| {
                BigRational::from_integer(if terms.iter().any(|t| t.0 == k) {
                    1.into()
                } else {
                    0.into()
                })
            })
            .collect();
        let f = Series::from_univariate(&coeffs, 20);
        let r = guess_relation(&f, 1, 11, 8).unwrap();
        assert_eq!(r, RelationResult::NoneUpTo { degree: 1, order: 20 });
    }

    #[test]
    fn bivariate_relation() {
        let y = |j| Series::variable(2, 14, j).unwrap();
        let f = &(&y(0) + &y(1)) + &(&y(0) * &y(1));
        let r = guess_relation(&f, 2, required_order(2, 2, 8), 8).unwrap();
        assert_eq!(found(&r).to_string(), "T - y1*y2 - y2 - y1");
    }
}
