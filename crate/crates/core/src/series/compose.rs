use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use super::{Series, SeriesError};

impl Series {
    /// Substitute `args[i]` for the `i`-th variable: `f(g_1, …, g_k)`.
    ///
    /// Every argument must vanish at the origin. The result is known to
    /// `min(f.order, g_i.order)`.
    pub fn compose(&self, args: &[Series]) -> Result<Series, SeriesError> {
        if args.len() != self.var_count || args.is_empty() {
            return Err(SeriesError::ArityMismatch {
                expected: self.var_count,
                got: args.len(),
            });
        }
        let target_vars = args[0].var_count;
        for (i, g) in args.iter().enumerate() {
            if g.var_count != target_vars {
                return Err(SeriesError::VarCountMismatch {
                    left: target_vars,
                    right: g.var_count,
                });
            }
            if !g.constant_term().is_zero() {
                return Err(SeriesError::NonzeroConstantTerm { index: i });
            }
        }
        let limit = args.iter().map(Series::order).fold(self.order, u32::min);
        Ok(self.compose_to(args, limit))
    }

    /// Composition computed up to degree `limit`, trusting the caller on
    /// arity and zero constant terms.
    pub(crate) fn compose_to(&self, args: &[Series], limit: u32) -> Series {
        let target_vars = args[0].var_count;
        let terms: Vec<(&[u32], &BigRational)> = self
            .coeffs
            .iter()
            .take_while(|(e, _)| e.degree() <= limit)
            .map(|(e, c)| (e.as_slice(), c))
            .collect();
        if terms.is_empty() {
            return Series::zero(target_vars, limit);
        }
        let mut powers = PowerCache::new(args, limit);
        horner(&terms, self.var_count, &mut powers, limit)
    }
}

/// Lazily extended tables `g_v^0, g_v^1, …` at the full working limit.
struct PowerCache<'a> {
    args: &'a [Series],
    limit: u32,
    tables: Vec<Vec<Series>>,
}

impl<'a> PowerCache<'a> {
    fn new(args: &'a [Series], limit: u32) -> Self {
        let tables = args
            .iter()
            .map(|g| vec![Series::one(g.var_count, limit), g.truncate(limit).with_order(limit)])
            .collect();
        Self { args, limit, tables }
    }

    fn get(&mut self, v: usize, k: u32) -> &Series {
        let k = k as usize;
        while self.tables[v].len() <= k {
            let last = self.tables[v].last().expect("nonempty");
            let next = last.mul_to(&self.args[v], self.limit);
            self.tables[v].push(next);
        }
        &self.tables[v][k]
    }
}

/// Multivariate Horner scheme: group by the exponent of the last active
/// variable, recurse on the prefix, and fold with powers of that argument.
/// Each partial sum is only computed to the degree that can still survive
/// the remaining multiplications.
fn horner(terms: &[(&[u32], &BigRational)], level: usize, powers: &mut PowerCache, limit: u32) -> Series {
    let target_vars = powers.args[0].var_count;
    if level == 0 {
        let c = terms.iter().fold(BigRational::zero(), |acc, (_, c)| acc + *c);
        return Series::constant(target_vars, limit, c);
    }
    let v = level - 1;
    let mut groups: BTreeMap<u32, Vec<(&[u32], &BigRational)>> = BTreeMap::new();
    for (e, c) in terms {
        if e[v] <= limit {
            groups.entry(e[v]).or_default().push((&e[..v], *c));
        }
    }
    let mut acc: Option<Series> = None;
    let mut prev = 0;
    for (&k, group) in groups.iter().rev() {
        let budget = limit - k;
        let inner = horner(group, v, powers, budget);
        acc = Some(match acc {
            None => inner,
            Some(a) => {
                let shifted = a.mul_to(&powers.get(v, prev - k).truncate(budget), budget);
                shifted.checked_add(&inner).expect("same vars")
            }
        });
        prev = k;
    }
    let acc = acc.unwrap_or_else(|| Series::zero(target_vars, limit));
    if prev == 0 {
        acc.with_order(limit)
    } else {
        acc.mul_to(powers.get(v, prev), limit)
    }
}
