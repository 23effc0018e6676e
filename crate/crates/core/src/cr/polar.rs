use num_traits::Zero;

use super::{CrError, TubeSpec};
use crate::algdep::{GuessBounds, RelationResult};
use crate::expr::{parse, Expr};
use crate::series::Series;

/// Profile `φ` of the rigid hypersurface `v = φ(z z̄)`, as a series in
/// `x = z z̄`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarProfile {
    phi: Series,
}

impl PolarProfile {
    pub fn new(phi: Series) -> Result<Self, CrError> {
        if phi.var_count() != 1 || !phi.constant_term().is_zero() || phi.order() == 0 {
            return Err(CrError::InvalidProfile);
        }
        Ok(Self { phi })
    }

    pub fn phi(&self) -> &Series {
        &self.phi
    }

    /// `φ'(0) != 0`, the Levi-nondegenerate case.
    pub fn levi_nondegenerate(&self) -> bool {
        !self.phi.linear_coeff(0).is_zero()
    }
}

/// Relation search on `φ'`, expanded to `bounds.series_order()`.
pub fn polar_rigid_test(p: &PolarProfile, bounds: &GuessBounds) -> Result<RelationResult, CrError> {
    let needed = bounds.series_order() + 1;
    if p.phi.order() < needed {
        return Err(CrError::InsufficientOrder {
            needed,
            available: p.phi.order(),
        });
    }
    let dphi = p.phi.truncate(needed).diff(0)?;
    Ok(bounds.guess(&dphi)?)
}

/// `Σ_{k=1}^{n-1} [y_k^2 + y_k^6 + y_k^9 y_1⋯y_{k-1} + y_k^{n+8} χ_k]`, with
/// the `χ_k` term omitted when `χ_k = 0`.
pub fn tube_family_expr(n: usize, chi: &[Expr]) -> Result<Expr, CrError> {
    if n < 2 || chi.len() != n - 1 {
        return Err(CrError::FamilyArity { n, chi: chi.len() });
    }
    let y = Expr::var;
    let mut terms = Vec::new();
    for (k, chi_k) in chi.iter().enumerate() {
        terms.push(Expr::pow(y(k), 2));
        terms.push(Expr::pow(y(k), 6));
        let mut mixed = vec![Expr::pow(y(k), 9)];
        mixed.extend((0..k).map(y));
        terms.push(if mixed.len() == 1 {
            mixed.pop().expect("one factor")
        } else {
            Expr::Product(mixed)
        });
        if !chi_k.is_zero_const() {
            let exponent = u32::try_from(n + 8).expect("small n");
            terms.push(Expr::Product(vec![Expr::pow(y(k), exponent), chi_k.clone()]));
        }
    }
    Ok(Expr::Sum(terms))
}

/// The family hypersurface in `C^n` with `χ_k` given as text over
/// `y1..y{n-1}`, expanded to `order`.
pub fn tube_family(n: usize, chi: &[&str], order: u32) -> Result<TubeSpec, CrError> {
    let m = n.saturating_sub(1);
    let chi = chi.iter().map(|c| parse(c, m)).collect::<Result<Vec<_>, _>>()?;
    let e = tube_family_expr(n, &chi)?;
    TubeSpec::from_exprs(n, 1, &[e], order)
}
