use rayon::prelude::*;

use super::{build_psi, CrError, TubeSpec, Witness};
use crate::algdep::{GuessBounds, RelationResult};
use crate::series::{invert_map, Series, SeriesMap};

/// `ψ` (recentered) and its compositional inverse `ψ'`, both known to
/// `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiPair {
    pub psi: SeriesMap,
    pub psi_inv: SeriesMap,
}

impl PsiPair {
    pub fn order(&self) -> u32 {
        self.psi.order()
    }
}

pub fn psi_pair(t: &TubeSpec, w: &Witness, order: u32) -> Result<PsiPair, CrError> {
    let needed = order + w.max_length();
    if t.order() < needed {
        return Err(CrError::InsufficientOrder {
            needed,
            available: t.order(),
        });
    }
    let psi = build_psi(&t.truncate(needed), w)?.map;
    let psi_inv = invert_map(&psi)?;
    Ok(PsiPair { psi, psi_inv })
}

/// `E[j][l] = ∂ψ'_j/∂y'_l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionMatrix {
    entries: Vec<Vec<Series>>,
}

impl ObstructionMatrix {
    pub fn from_pair(pair: &PsiPair) -> Result<Self, CrError> {
        Ok(Self {
            entries: pair.psi_inv.jacobian()?,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, j: usize, l: usize) -> &Series {
        &self.entries[j][l]
    }

    pub fn entries(&self) -> &[Vec<Series>] {
        &self.entries
    }

    /// `∂E[j][l]/∂y'_p = ∂E[j][p]/∂y'_l` for all `j, l, p`.
    pub fn mixed_partials_symmetric(&self) -> bool {
        let m = self.dim();
        (0..m).all(|j| {
            (0..m).all(|l| {
                (l + 1..m).all(|p| {
                    let a = self.entries[j][l].diff(p);
                    let b = self.entries[j][p].diff(l);
                    matches!((a, b), (Ok(a), Ok(b)) if a == b)
                })
            })
        })
    }
}

/// Entries `∂ψ'_j/∂y'_l` known to `order`.
pub fn obstruction_matrix(t: &TubeSpec, w: &Witness, order: u32) -> Result<ObstructionMatrix, CrError> {
    ObstructionMatrix::from_pair(&psi_pair(t, w, order + 1)?)
}

/// `Jψ'(y') · (Jψ ∘ ψ')(y') = I` through order `pair.order() - 1`.
pub fn jacobian_identity_holds(pair: &PsiPair) -> Result<bool, CrError> {
    let m = pair.psi.dim();
    let a = pair.psi_inv.jacobian()?;
    let b = pair
        .psi
        .jacobian()?
        .into_iter()
        .map(|row| {
            row.iter()
                .map(|e| e.compose(pair.psi_inv.components()))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let k = pair.order().saturating_sub(1);
    for (i, a_row) in a.iter().enumerate() {
        for j in 0..m {
            let mut acc = Series::zero(m, k);
            for (a_ip, b_row) in a_row.iter().zip(&b) {
                acc = &acc + &(a_ip * &b_row[j]);
            }
            let expect = if i == j { Series::one(m, k) } else { Series::zero(m, k) };
            if acc.truncate(k) != expect {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn guess_grid(entries: &[Vec<Series>], bounds: &GuessBounds) -> Result<Vec<Vec<RelationResult>>, CrError> {
    let m = entries.len();
    let flat: Vec<(usize, usize)> = (0..m).flat_map(|j| (0..m).map(move |l| (j, l))).collect();
    let results = flat
        .par_iter()
        .map(|&(j, l)| bounds.guess(&entries[j][l]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(results.chunks(m).map(<[_]>::to_vec).collect())
}

/// Relation search on every `∂ψ'_j/∂y'_l`. The entries are expanded to
/// `bounds.series_order()` so that candidates can be validated.
pub fn derivative_map_test(
    t: &TubeSpec,
    w: &Witness,
    bounds: &GuessBounds,
) -> Result<Vec<Vec<RelationResult>>, CrError> {
    let mat = obstruction_matrix(t, w, bounds.series_order())?;
    guess_grid(mat.entries(), bounds)
}

/// `(∂²φ/∂y_j∂y_l) ∘ (∇φ - ∇φ(0))^{-1}` for a hypersurface, known to
/// `order`.
pub fn hypersurface_entries(t: &TubeSpec, order: u32) -> Result<Vec<Vec<Series>>, CrError> {
    if t.d() != 1 {
        return Err(CrError::NotHypersurface { d: t.d() });
    }
    let needed = order + 2;
    if t.order() < needed {
        return Err(CrError::InsufficientOrder {
            needed,
            available: t.order(),
        });
    }
    let m = t.m();
    let phi = t.phi()[0].truncate(needed);
    let grad = (0..m).map(|j| phi.diff(j)).collect::<Result<Vec<_>, _>>()?;
    let g = SeriesMap::new(grad.iter().map(Series::without_constant).collect())?;
    if g.linear_part().rank() < m {
        return Err(CrError::HessianSingular);
    }
    let h = invert_map(&g)?;
    grad.iter()
        .map(|gj| {
            (0..m)
                .map(|l| Ok(gj.diff(l)?.compose(h.components())?))
                .collect::<Result<Vec<_>, CrError>>()
        })
        .collect()
}

/// Relation search on the second derivatives of `φ` written as functions of
/// the first derivatives.
pub fn hypersurface_first_second_test(t: &TubeSpec, bounds: &GuessBounds) -> Result<Vec<Vec<RelationResult>>, CrError> {
    let entries = hypersurface_entries(t, bounds.series_order())?;
    guess_grid(&entries, bounds)
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;

    use super::*;
    use crate::cr::search_witness;
    use crate::series::ExponentVector;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn tube(text: &str, order: u32) -> TubeSpec {
        TubeSpec::parse(2, 1, &[text], order).unwrap()
    }

    #[test]
    fn constant_entries() {
        let t = tube("y1^2", 10);
        let w = search_witness(&t, 6).unwrap();
        let e = obstruction_matrix(&t, &w, 8).unwrap();
        assert_eq!(e.entry(0, 0), &Series::constant(1, 8, q(1, 2)));

        let t = tube("y1^3", 10);
        let w = search_witness(&t, 6).unwrap();
        let e = obstruction_matrix(&t, &w, 6).unwrap();
        assert_eq!(e.entry(0, 0), &Series::constant(1, 6, q(1, 6)));
    }

    #[test]
    fn sine_square_entry() {
        let t = tube("sin(y1^2)", 12);
        let w = search_witness(&t, 6).unwrap();
        let e = obstruction_matrix(&t, &w, 8).unwrap();
        let ev = |k| ExponentVector::new(vec![k]);
        assert_eq!(e.entry(0, 0).coeff(&ev(0)), q(1, 2));
        assert_eq!(e.entry(0, 0).coeff(&ev(4)), q(5, 64));
        assert_eq!(e.entry(0, 0).coeff(&ev(2)), q(0, 1));
    }

    #[test]
    fn jacobian_identity_and_symmetry() {
        let t = TubeSpec::parse(3, 1, &["y1^2 + y1*y2 + 2*y2^2 + y1^3 - y2^4"], 10).unwrap();
        let w = search_witness(&t, 3).unwrap();
        let pair = psi_pair(&t, &w, 7).unwrap();
        assert!(jacobian_identity_holds(&pair).unwrap());
        assert!(ObstructionMatrix::from_pair(&pair).unwrap().mixed_partials_symmetric());
    }

    #[test]
    fn hypersurface_requires_nonsingular_hessian() {
        let b = GuessBounds {
            degree: 1,
            order: 11,
            margin: 8,
            validate_bump: 2,
        };
        assert!(matches!(
            hypersurface_first_second_test(&tube("y1^3", 20), &b),
            Err(CrError::HessianSingular)
        ));
        let r = hypersurface_first_second_test(&tube("y1^2", 20), &b).unwrap();
        assert_eq!(r[0][0].polynomial().unwrap().to_string(), "T - 2");
        let t = TubeSpec::parse(3, 2, &["y1^2", "y1^3"], 20).unwrap();
        assert!(matches!(
            hypersurface_first_second_test(&t, &b),
            Err(CrError::NotHypersurface { d: 2 })
        ));
    }

    #[test]
    fn order_shortfall_is_reported() {
        let t = tube("y1^2", 5);
        let w = search_witness(&t, 2).unwrap();
        assert!(matches!(
            obstruction_matrix(&t, &w, 8),
            Err(CrError::InsufficientOrder {
                needed: 10,
                available: 5
            })
        ));
    }
}
