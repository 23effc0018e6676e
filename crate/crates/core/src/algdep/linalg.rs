//! Dense exact matrices over Q and fraction-free elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    /// Returns `None` for ragged input.
    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Option<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        Some(Self {
            rows: rows.len(),
            cols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_integer_rows(rows: &[Vec<i64>]) -> Option<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = RationalMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = BigRational::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        fraction_free_echelon(self).pivots.len()
    }

    /// Gauss–Jordan inverse; `None` when singular or not square.
    pub fn inverse(&self) -> Option<RationalMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RationalMatrix::identity(n);
        for c in 0..n {
            let p = (c..n).find(|&r| !a.get(r, c).is_zero())?;
            a.swap_rows(p, c);
            inv.swap_rows(p, c);
            let piv = a.get(c, c).clone();
            for j in 0..n {
                let v = a.get(c, j) / &piv;
                a.set(c, j, v);
                let w = inv.get(c, j) / &piv;
                inv.set(c, j, w);
            }
            for r in 0..n {
                if r == c || a.get(r, c).is_zero() {
                    continue;
                }
                let f = a.get(r, c).clone();
                for j in 0..n {
                    let v = a.get(r, j) - &f * a.get(c, j);
                    a.set(r, j, v);
                    let w = inv.get(r, j) - &f * inv.get(c, j);
                    inv.set(r, j, w);
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

struct Echelon {
    /// Integer rows of the fraction-free echelon form (only the pivot rows).
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

/// Bareiss elimination after clearing denominators row by row. Every
/// intermediate entry is a minor of the integer matrix, so the divisions by
/// the previous pivot are exact.
fn fraction_free_echelon(a: &RationalMatrix) -> Echelon {
    let mut m: Vec<Vec<BigInt>> = (0..a.rows)
        .map(|i| {
            let row = a.row(i);
            let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(p) = (r..a.rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let (top, rest) = m.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let piv = &pivot_row[c];
        for row in rest.iter_mut() {
            let lead = std::mem::take(&mut row[c]);
            for j in c + 1..a.cols {
                let v = piv * &row[j] - &lead * &pivot_row[j];
                row[j] = if prev.is_one() { v } else { v / &prev };
            }
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    Echelon { rows: m, pivots }
}

/// Basis of the right kernel `{v : A v = 0}`.
///
/// One vector per free column, in increasing column order: the vector for
/// free column `f` has a 1-equivalent entry at `f`, zeros at the other free
/// columns, and nonzero entries only at pivot columns left of `f`. Hence its
/// last nonzero position is `f`. Vectors are scaled to primitive integer
/// vectors whose first nonzero entry is positive. Empty iff `A` has full
/// column rank.
pub fn exact_nullspace(a: &RationalMatrix) -> Vec<Vec<BigRational>> {
    let ech = fraction_free_echelon(a);
    let n = a.cols;
    let mut is_pivot = vec![false; n];
    for &p in &ech.pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for f in (0..n).filter(|&c| !is_pivot[c]) {
        let mut x = vec![BigRational::zero(); n];
        x[f] = BigRational::one();
        for (k, &p) in ech.pivots.iter().enumerate().rev() {
            if p > f {
                continue;
            }
            let row = &ech.rows[k];
            let mut s = BigRational::zero();
            for j in p + 1..=f {
                if !row[j].is_zero() && !x[j].is_zero() {
                    s += BigRational::from_integer(row[j].clone()) * &x[j];
                }
            }
            x[p] = -s / BigRational::from_integer(row[p].clone());
        }
        basis.push(primitive(x));
    }
    basis
}

/// Scale to coprime integers with the first nonzero entry positive.
pub(crate) fn primitive(v: Vec<BigRational>) -> Vec<BigRational> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v;
    }
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter()
        .map(|x| BigRational::from_integer(x / &g * &sign))
        .collect()
}

/// Row space under construction, kept in echelon form over Q. Used for
/// greedy rank extension.
#[derive(Clone, Debug, Default)]
pub struct IncrementalRank {
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl IncrementalRank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `row` if it is independent of the rows already present. Returns
    /// whether the rank increased.
    pub fn try_insert(&mut self, row: &[BigRational]) -> bool {
        let mut r = row.to_vec();
        for (p, basis) in &self.rows {
            if r[*p].is_zero() {
                continue;
            }
            let f = &r[*p] / &basis[*p];
            for (x, b) in r.iter_mut().zip(basis) {
                if !b.is_zero() {
                    *x -= &f * b;
                }
            }
        }
        match r.iter().position(|x| !x.is_zero()) {
            Some(p) => {
                self.rows.push((p, r));
                true
            }
            None => false,
        }
    }
}
