//! Square map germs and their compositional inverses.

use num_rational::BigRational;
use num_traits::Zero;

use super::{ExponentVector, Series, SeriesError};
use crate::algdep::linalg::RationalMatrix;

/// A map germ `(Q^m, 0) -> Q^m` given by `m` series in `m` variables with a
/// common truncation order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesMap {
    components: Vec<Series>,
}

impl SeriesMap {
    /// Components are truncated to their common minimum order.
    pub fn new(components: Vec<Series>) -> Result<Self, SeriesError> {
        let m = components.len();
        for c in &components {
            if c.var_count() != m {
                return Err(SeriesError::NotSquare {
                    components: m,
                    var_count: c.var_count(),
                });
            }
        }
        if m == 0 {
            return Err(SeriesError::NotSquare {
                components: 0,
                var_count: 0,
            });
        }
        let order = components.iter().map(Series::order).min().unwrap_or(0);
        Ok(Self {
            components: components.iter().map(|c| c.truncate(order)).collect(),
        })
    }

    pub fn identity(m: usize, order: u32) -> Self {
        Self {
            components: (0..m)
                .map(|j| Series::variable(m, order, j).expect("in range"))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn order(&self) -> u32 {
        self.components[0].order()
    }

    pub fn components(&self) -> &[Series] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Series {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<Series> {
        self.components
    }

    /// Jacobian at the origin.
    pub fn linear_part(&self) -> RationalMatrix {
        let m = self.dim();
        RationalMatrix::from_rows(
            self.components
                .iter()
                .map(|c| (0..m).map(|j| c.linear_coeff(j)).collect())
                .collect(),
        )
        .expect("square")
    }

    /// `J[i][j] = ∂ self_i / ∂ y_j`, known to order `N - 1`.
    pub fn jacobian(&self) -> Result<Vec<Vec<Series>>, SeriesError> {
        let m = self.dim();
        self.components
            .iter()
            .map(|c| (0..m).map(|j| c.diff(j)).collect())
            .collect()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SeriesMap) -> Result<SeriesMap, SeriesError> {
        let comps = self
            .components
            .iter()
            .map(|c| c.compose(&inner.components))
            .collect::<Result<Vec<_>, _>>()?;
        SeriesMap::new(comps)
    }

    pub fn invert(&self) -> Result<SeriesMap, SeriesError> {
        invert_map(self)
    }
}

type SeriesMatrix = Vec<Vec<Series>>;

fn constant_matrix(a: &RationalMatrix, m: usize, order: u32) -> SeriesMatrix {
    (0..a.rows())
        .map(|i| {
            (0..a.cols())
                .map(|j| Series::constant(m, order, a.get(i, j).clone()))
                .collect()
        })
        .collect()
}

fn mat_mul_to(a: &SeriesMatrix, b: &SeriesMatrix, m: usize, limit: u32) -> SeriesMatrix {
    let n = a.len();
    let p = b[0].len();
    (0..n)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let mut acc = Series::zero(m, limit);
                    for (k, bk) in b.iter().enumerate() {
                        acc = &acc + &a[i][k].mul_to(&bk[j], limit);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Inverse of a series matrix whose constant part has inverse `c0_inv`,
/// by the Newton iteration `X <- X + X (I - M X)`.
fn mat_inverse_to(mat: &SeriesMatrix, c0_inv: &RationalMatrix, m: usize, limit: u32) -> SeriesMatrix {
    let n = mat.len();
    let mut x = constant_matrix(c0_inv, m, 0);
    let mut prec = 0;
    while prec < limit {
        prec = (2 * prec + 1).min(limit);
        let mx = mat_mul_to(mat, &x, m, prec);
        let resid: SeriesMatrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let id = if i == j {
                            Series::one(m, prec)
                        } else {
                            Series::zero(m, prec)
                        };
                        &id - &mx[i][j]
                    })
                    .collect()
            })
            .collect();
        let corr = mat_mul_to(&x, &resid, m, prec);
        x = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| &x[i][j].clone().with_order(prec) + &corr[i][j])
                    .collect()
            })
            .collect();
    }
    x.into_iter()
        .map(|row| row.into_iter().map(|s| s.with_order(limit)).collect())
        .collect()
}

/// Compositional inverse `H` of a map germ `G` with invertible linear part:
/// `G ∘ H = id` up to the order of `G`.
///
/// Starts from the exact inverse of the linear part and applies Newton steps
/// `H <- H - (JG ∘ H)^{-1} (G ∘ H - id)`, which take a solution correct to
/// degree `k` to one correct to degree `2k + 1`.
pub fn invert_map(g: &SeriesMap) -> Result<SeriesMap, SeriesError> {
    let m = g.dim();
    let n = g.order();
    for (i, c) in g.components.iter().enumerate() {
        if !c.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstantTerm { index: i });
        }
    }
    let lin_inv = g.linear_part().inverse().ok_or(SeriesError::SingularJacobian)?;
    let ids: Vec<Series> = (0..m).map(|j| Series::variable(m, n, j).expect("in range")).collect();

    let mut h: Vec<Series> = (0..m)
        .map(|i| {
            let terms = (0..m).map(|j| (ExponentVector::unit(m, j), lin_inv.get(i, j).clone()));
            Series::from_terms(m, n, terms).expect("matching vars")
        })
        .collect();
    if n <= 1 {
        return Ok(SeriesMap { components: h });
    }
    let jac = g.jacobian()?;

    let mut prec = 1;
    while prec < n {
        let next = (2 * prec + 1).min(n);
        let ht: Vec<Series> = h.iter().map(|s| s.truncate(next).with_order(next)).collect();
        // Residual G(H) - y vanishes through degree `prec`.
        let resid: Vec<Series> = g
            .components
            .iter()
            .zip(&ids)
            .map(|(gi, yi)| &gi.compose_to(&ht, next) - &yi.truncate(next))
            .collect();
        let need = next - prec - 1;
        let jh: SeriesMatrix = jac
            .iter()
            .map(|row| row.iter().map(|e| e.compose_to(&ht, need)).collect())
            .collect();
        let x = mat_inverse_to(&jh, &lin_inv, m, need);
        h = (0..m)
            .map(|i| {
                let mut corr = Series::zero(m, next);
                for (xij, rj) in x[i].iter().zip(&resid) {
                    corr = &corr + &xij.mul_to(rj, next);
                }
                &ht[i] - &corr
            })
            .collect();
        prec = next;
    }
    Ok(SeriesMap {
        components: h.into_iter().map(|s| s.with_order(n)).collect(),
    })
}

/// Univariate reversion by Lagrange inversion:
/// `[y^k] g^{-1} = (1/k) [y^{k-1}] (y / g(y))^k`.
///
/// Independent of [`invert_map`]; kept as a cross-check. The result order is
/// `min(order, g.order)`.
pub fn lagrange_revert(g: &Series, order: u32) -> Result<Series, SeriesError> {
    if g.var_count() != 1 {
        return Err(SeriesError::NotUnivariate {
            var_count: g.var_count(),
        });
    }
    if !g.constant_term().is_zero() {
        return Err(SeriesError::NonzeroConstantTerm { index: 0 });
    }
    if g.linear_coeff(0).is_zero() {
        return Err(SeriesError::ZeroLinearTerm);
    }
    let n = order.min(g.order());
    if n == 0 {
        return Ok(Series::zero(1, 0));
    }
    // g(y) / y
    let quotient = Series::from_terms(
        1,
        g.order() - 1,
        g.terms()
            .map(|(e, c)| (ExponentVector::new(vec![e.get(0) - 1]), c.clone())),
    )?;
    let phi = quotient.reciprocal()?.truncate(n - 1);
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(BigRational::zero());
    let mut power = phi.clone();
    for k in 1..=n {
        let c = power.coeff(&ExponentVector::new(vec![k - 1]));
        out.push(c / BigRational::from_integer(k.into()));
        if k < n {
            power = power.mul_to(&phi, n - 1);
        }
    }
    Ok(Series::from_univariate(&out, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn uni(coeffs: &[(u32, i64, i64)], order: u32) -> Series {
        Series::from_terms(
            1,
            order,
            coeffs
                .iter()
                .map(|(k, n, d)| (ExponentVector::new(vec![*k]), q(*n, *d))),
        )
        .unwrap()
    }

    #[test]
    fn linear_map_inverse() {
        let g = SeriesMap::new(vec![uni(&[(1, 2, 1)], 6)]).unwrap();
        let h = invert_map(&g).unwrap();
        assert_eq!(h.component(0), &uni(&[(1, 1, 2)], 6));
    }

    #[test]
    fn identity_inverse() {
        let id = SeriesMap::identity(3, 5);
        assert_eq!(invert_map(&id).unwrap(), id);
    }

    #[test]
    fn quadratic_inverse_matches_hand_expansion() {
        // 2y + y^2 -> y/2 - y^2/8 + y^3/16 - 5y^4/128
        let g = SeriesMap::new(vec![uni(&[(1, 2, 1), (2, 1, 1)], 4)]).unwrap();
        let h = invert_map(&g).unwrap();
        let expect = uni(&[(1, 1, 2), (2, -1, 8), (3, 1, 16), (4, -5, 128)], 4);
        assert_eq!(h.component(0), &expect);
        assert_eq!(lagrange_revert(g.component(0), 4).unwrap(), expect);
    }

    #[test]
    fn catalan_reversion() {
        let g = uni(&[(1, 1, 1), (2, -1, 1)], 8);
        let h = lagrange_revert(&g, 8).unwrap();
        let catalan = [1, 1, 2, 5, 14, 42, 132, 429];
        for (k, c) in catalan.iter().enumerate() {
            assert_eq!(h.coeff(&ExponentVector::new(vec![k as u32 + 1])), q(*c, 1));
        }
        let hm = invert_map(&SeriesMap::new(vec![g]).unwrap()).unwrap();
        assert_eq!(hm.component(0), &h);
    }

    #[test]
    fn lagrange_identity_and_errors() {
        let y = uni(&[(1, 1, 1)], 5);
        assert_eq!(lagrange_revert(&y, 5).unwrap(), y);
        assert_eq!(
            lagrange_revert(&uni(&[(2, 1, 1)], 5), 5),
            Err(SeriesError::ZeroLinearTerm)
        );
    }

    #[test]
    fn singular_jacobian_rejected() {
        let g = SeriesMap::new(vec![uni(&[(2, 1, 1)], 5)]).unwrap();
        assert_eq!(invert_map(&g), Err(SeriesError::SingularJacobian));
    }

    #[test]
    fn bivariate_roundtrip() {
        let m = 2;
        let n = 7;
        let y1 = Series::variable(m, n, 0).unwrap();
        let y2 = Series::variable(m, n, 1).unwrap();
        let g1 = &(&y1 + &y2) + &(&y1 * &y2);
        let g2 = &(&y2.scale(&q(3, 1)) - &y1.pow(2)) + &y2.pow(3).scale(&q(1, 5));
        let g = SeriesMap::new(vec![g1, g2]).unwrap();
        let h = invert_map(&g).unwrap();
        assert_eq!(g.compose(&h).unwrap(), SeriesMap::identity(m, n));
    }

    #[test]
    fn not_square_rejected() {
        assert!(matches!(
            SeriesMap::new(vec![Series::zero(2, 3)]),
            Err(SeriesError::NotSquare { .. })
        ));
    }
}
