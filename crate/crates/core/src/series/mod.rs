//! Exact truncated multivariate power series over the rationals.
//!
//! A [`Series`] in `m` variables carries a truncation order `N`: every
//! coefficient of total degree `<= N` is known exactly, everything above is
//! unknown. Coefficients live in a sparse map keyed by [`ExponentVector`];
//! absent keys are zero and zero coefficients are never stored.
//!
//! Binary operations on series of different orders truncate to the smaller
//! order.

mod compose;
mod revert;

pub use revert::{invert_map, lagrange_revert, SeriesMap};

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("variable count mismatch: {left} vs {right}")]
    VarCountMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range for {var_count} variable(s)")]
    VariableOutOfRange { index: usize, var_count: usize },
    #[error("cannot differentiate a series truncated at order 0")]
    OrderZero,
    #[error("composition argument {index} has a nonzero constant term")]
    NonzeroConstantTerm { index: usize },
    #[error("composition expects {expected} argument(s), got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("map is not square: {components} component(s) in {var_count} variable(s)")]
    NotSquare { components: usize, var_count: usize },
    #[error("linear part of the map is singular at the origin")]
    SingularJacobian,
    #[error("expected a univariate series, got {var_count} variables")]
    NotUnivariate { var_count: usize },
    #[error("linear coefficient vanishes; series is not locally invertible")]
    ZeroLinearTerm,
    #[error("series with zero constant term has no reciprocal")]
    NotInvertible,
}

/// Monomial exponent `y^β` for a fixed number of variables.
///
/// Ordering is graded: total degree first, then lexicographically with larger
/// leading exponents first, so `(0,0) < (1,0) < (0,1) < (2,0) < ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zero(var_count: usize) -> Self {
        Self(vec![0; var_count])
    }

    /// The exponent of the `j`-th variable alone (0-based).
    pub fn unit(var_count: usize, j: usize) -> Self {
        let mut e = vec![0; var_count];
        e[j] = 1;
        Self(e)
    }

    pub fn var_count(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, j: usize) -> u32 {
        self.0[j]
    }

    pub fn plus(&self, other: &Self) -> Self {
        debug_assert_eq!(self.0.len(), other.0.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_minus(&self, other: &Self) -> Option<Self> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }

    /// The exponent vector with one extra trailing slot.
    pub fn extended(&self, last: u32) -> ExponentVector {
        let mut v = self.0.clone();
        v.push(last);
        ExponentVector(v)
    }

    /// `β! = β_1! ⋯ β_m!`
    pub fn factorial(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |acc, &e| {
            acc * (1..=e).fold(BigInt::one(), |f, k| f * BigInt::from(k))
        })
    }
}

impl Ord for ExponentVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for ExponentVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<u32>> for ExponentVector {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

/// Truncated power series `Σ c_β y^β + O(|y|^{N+1})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    var_count: usize,
    order: u32,
    coeffs: BTreeMap<ExponentVector, BigRational>,
}

impl Series {
    pub fn zero(var_count: usize, order: u32) -> Self {
        Self {
            var_count,
            order,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(var_count: usize, order: u32) -> Self {
        Self::constant(var_count, order, BigRational::one())
    }

    pub fn constant(var_count: usize, order: u32, c: BigRational) -> Self {
        Self::monomial(ExponentVector::zero(var_count), c, order)
    }

    /// The coordinate function `y_j` (0-based).
    pub fn variable(var_count: usize, order: u32, j: usize) -> Result<Self, SeriesError> {
        if j >= var_count {
            return Err(SeriesError::VariableOutOfRange { index: j, var_count });
        }
        Ok(Self::monomial(
            ExponentVector::unit(var_count, j),
            BigRational::one(),
            order,
        ))
    }

    pub fn monomial(exponent: ExponentVector, c: BigRational, order: u32) -> Self {
        let mut s = Self::zero(exponent.var_count(), order);
        if !c.is_zero() && exponent.degree() <= order {
            s.coeffs.insert(exponent, c);
        }
        s
    }

    /// Build from arbitrary terms; zero coefficients and terms above `order`
    /// are dropped, repeated exponents are summed.
    pub fn from_terms<I>(var_count: usize, order: u32, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (ExponentVector, BigRational)>,
    {
        let mut s = Self::zero(var_count, order);
        for (e, c) in terms {
            if e.var_count() != var_count {
                return Err(SeriesError::VarCountMismatch {
                    left: var_count,
                    right: e.var_count(),
                });
            }
            if e.degree() > order {
                continue;
            }
            s.add_term(e, c);
        }
        Ok(s)
    }

    /// Univariate series from a dense coefficient list `c_0, c_1, ...`.
    pub fn from_univariate(coeffs: &[BigRational], order: u32) -> Self {
        let mut s = Self::zero(1, order);
        for (k, c) in coeffs.iter().enumerate().take(order as usize + 1) {
            s.add_term(ExponentVector(vec![k as u32]), c.clone());
        }
        s
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeff(&self, e: &ExponentVector) -> BigRational {
        self.coeffs.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Nonzero terms in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &BigRational)> {
        self.coeffs.iter()
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn constant_term(&self) -> BigRational {
        self.coeff(&ExponentVector::zero(self.var_count))
    }

    /// Coefficient of `y_j` (0-based).
    pub fn linear_coeff(&self, j: usize) -> BigRational {
        self.coeff(&ExponentVector::unit(self.var_count, j))
    }

    /// Lowest total degree carrying a nonzero coefficient.
    pub fn valuation(&self) -> Option<u32> {
        self.coeffs.keys().next().map(ExponentVector::degree)
    }

    /// Drop everything above `order`. Never raises the order.
    pub fn truncate(&self, order: u32) -> Self {
        let order = order.min(self.order);
        Self {
            var_count: self.var_count,
            order,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(e, _)| e.degree() <= order)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Re-declare the truncation order. Only sound when the caller knows the
    /// coefficients up to `order` are exact.
    pub(crate) fn with_order(mut self, order: u32) -> Self {
        if order < self.order {
            return self.truncate(order);
        }
        self.order = order;
        self
    }

    /// The same series with its constant term removed.
    pub fn without_constant(&self) -> Self {
        let mut s = self.clone();
        s.coeffs.remove(&ExponentVector::zero(self.var_count));
        s
    }

    fn add_term(&mut self, e: ExponentVector, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(&e) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.coeffs.remove(&e);
                }
            }
            None => {
                self.coeffs.insert(e, c);
            }
        }
    }

    fn check_vars(&self, other: &Series) -> Result<(), SeriesError> {
        if self.var_count != other.var_count {
            return Err(SeriesError::VarCountMismatch {
                left: self.var_count,
                right: other.var_count,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Series) -> Result<Series, SeriesError> {
        self.check_vars(other)?;
        let order = self.order.min(other.order);
        let mut out = self.truncate(order);
        for (e, c) in other.coeffs.iter() {
            if e.degree() <= order {
                out.add_term(e.clone(), c.clone());
            }
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Series) -> Result<Series, SeriesError> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Series) -> Result<Series, SeriesError> {
        self.check_vars(other)?;
        Ok(self.mul_to(other, self.order.min(other.order)))
    }

    pub fn scale(&self, c: &BigRational) -> Series {
        if c.is_zero() {
            return Series::zero(self.var_count, self.order);
        }
        Series {
            var_count: self.var_count,
            order: self.order,
            coeffs: self.coeffs.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Partial derivative with respect to `y_j` (0-based). The result is
    /// known to order `N - 1`.
    pub fn diff(&self, j: usize) -> Result<Series, SeriesError> {
        if j >= self.var_count {
            return Err(SeriesError::VariableOutOfRange {
                index: j,
                var_count: self.var_count,
            });
        }
        if self.order == 0 {
            return Err(SeriesError::OrderZero);
        }
        let mut out = Series::zero(self.var_count, self.order - 1);
        for (e, c) in &self.coeffs {
            let k = e.0[j];
            if k == 0 {
                continue;
            }
            let mut ne = e.0.clone();
            ne[j] -= 1;
            out.coeffs
                .insert(ExponentVector(ne), c * BigRational::from_integer(k.into()));
        }
        Ok(out)
    }

    /// Iterated partial derivative `∂^{|β|} / ∂y^β`.
    pub fn diff_multi(&self, beta: &ExponentVector) -> Result<Series, SeriesError> {
        if beta.var_count() != self.var_count {
            return Err(SeriesError::VarCountMismatch {
                left: self.var_count,
                right: beta.var_count(),
            });
        }
        let mut s = self.clone();
        for (j, &k) in beta.as_slice().iter().enumerate() {
            for _ in 0..k {
                s = s.diff(j)?;
            }
        }
        Ok(s)
    }

    pub fn pow(&self, k: u32) -> Series {
        let mut result = Series::one(self.var_count, self.order);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul_to(&base, self.order);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_to(&base, self.order);
            }
        }
        result
    }

    /// Multiplicative inverse of a series with nonzero constant term.
    pub fn reciprocal(&self) -> Result<Series, SeriesError> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        let two = Series::constant(self.var_count, self.order, BigRational::from_integer(2.into()));
        let mut r = Series::constant(self.var_count, 0, c0.recip());
        let mut prec = 0;
        while prec < self.order {
            prec = (2 * prec + 1).min(self.order);
            // r <- r (2 - s r)
            let sr = self.mul_to(&r, prec);
            let corr = two.truncate(prec).checked_sub(&sr).expect("same vars");
            r = r.with_order(prec).mul_to(&corr, prec);
        }
        Ok(r.with_order(self.order))
    }

    /// Product computed up to total degree `limit` regardless of the declared
    /// orders of the operands. The result is declared at order `limit`.
    pub(crate) fn mul_to(&self, other: &Series, limit: u32) -> Series {
        debug_assert_eq!(self.var_count, other.var_count);
        let m = self.var_count;
        let (den_a, ta) = integer_terms(self, limit);
        let (den_b, tb) = integer_terms(other, limit);
        let mut out = Series::zero(m, limit);
        if ta.is_empty() || tb.is_empty() {
            return out;
        }
        let den = den_a * den_b;
        match Packer::new(m, limit) {
            Some(p) => {
                let pa: Vec<_> = ta.iter().map(|(e, d, c)| (p.pack(e), *d, c)).collect();
                let pb: Vec<_> = tb.iter().map(|(e, d, c)| (p.pack(e), *d, c)).collect();
                let mut acc: HashMap<u128, BigInt> = HashMap::new();
                for (ka, da, ca) in &pa {
                    let room = limit - da;
                    for (kb, db, cb) in &pb {
                        if *db > room {
                            break;
                        }
                        *acc.entry(ka + kb).or_insert_with(BigInt::zero) += *ca * *cb;
                    }
                }
                for (k, c) in acc {
                    if !c.is_zero() {
                        out.coeffs
                            .insert(ExponentVector(p.unpack(k)), BigRational::new(c, den.clone()));
                    }
                }
            }
            None => {
                let mut acc: HashMap<ExponentVector, BigInt> = HashMap::new();
                for (ea, da, ca) in &ta {
                    let room = limit - da;
                    for (eb, db, cb) in &tb {
                        if *db > room {
                            break;
                        }
                        *acc.entry(ea.plus(eb)).or_insert_with(BigInt::zero) += ca * cb;
                    }
                }
                for (e, c) in acc {
                    if !c.is_zero() {
                        out.coeffs.insert(e, BigRational::new(c, den.clone()));
                    }
                }
            }
        }
        out
    }
}

/// Terms of degree `<= limit` scaled to integers by the lcm of their
/// denominators, in graded (hence degree-sorted) order.
fn integer_terms(s: &Series, limit: u32) -> (BigInt, Vec<(&ExponentVector, u32, BigInt)>) {
    let mut lcm = BigInt::one();
    for (e, c) in &s.coeffs {
        if e.degree() > limit {
            break;
        }
        lcm = lcm.lcm(c.denom());
    }
    let terms = s
        .coeffs
        .iter()
        .take_while(|(e, _)| e.degree() <= limit)
        .map(|(e, c)| (e, e.degree(), c.numer() * (&lcm / c.denom())))
        .collect();
    (lcm, terms)
}

/// Packs exponent vectors into a `u128` so that monomial multiplication is
/// integer addition. Valid while every exponent stays below `2^bits`.
struct Packer {
    bits: u32,
    m: usize,
}

impl Packer {
    fn new(m: usize, limit: u32) -> Option<Self> {
        if m == 0 {
            return Some(Self { bits: 0, m });
        }
        let bits = (128 / m as u32).min(32);
        if bits == 0 || (bits < 32 && u64::from(limit) >= (1u64 << bits)) {
            return None;
        }
        Some(Self { bits, m })
    }

    fn pack(&self, e: &ExponentVector) -> u128 {
        e.0.iter().fold(0u128, |acc, &x| (acc << self.bits) | u128::from(x))
    }

    fn unpack(&self, mut k: u128) -> Vec<u32> {
        let mut out = vec![0u32; self.m];
        if self.bits == 0 {
            return out;
        }
        let mask = (1u128 << self.bits) - 1;
        for slot in out.iter_mut().rev() {
            *slot = (k & mask) as u32;
            k >>= self.bits;
        }
        out
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series {
            var_count: self.var_count,
            order: self.order,
            coeffs: self.coeffs.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        -&self
    }
}

// Operator forms panic on mismatched variable counts; use the `checked_*`
// methods for untrusted inputs.
impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        self.checked_add(rhs).expect("series variable counts differ")
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        self.checked_sub(rhs).expect("series variable counts differ")
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        self.checked_mul(rhs).expect("series variable counts differ")
    }
}

pub(crate) fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn fmt_monomial(e: &[u32], names: &dyn Fn(usize) -> String) -> String {
    e.iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(j, &k)| {
            if k == 1 {
                names(j)
            } else {
                format!("{}^{}", names(j), k)
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// Writes `Σ c·mono` with signs folded into the separators.
pub(crate) fn fmt_terms<'a, I>(terms: I, names: &dyn Fn(usize) -> String) -> String
where
    I: Iterator<Item = (&'a [u32], &'a BigRational)>,
{
    let mut out = String::new();
    for (e, c) in terms {
        let mono = fmt_monomial(e, names);
        let neg = c.is_negative();
        let abs = c.abs();
        let body = if mono.is_empty() {
            fmt_rational(&abs)
        } else if abs.is_one() {
            mono
        } else {
            format!("{}*{}", fmt_rational(&abs), mono)
        };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |j: usize| format!("y{}", j + 1);
        let body = fmt_terms(self.coeffs.iter().map(|(e, c)| (e.as_slice(), c)), &names);
        write!(f, "{} + O({})", body, self.order + 1)
    }
}
