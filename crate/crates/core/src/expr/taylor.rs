use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{Elementary, Expr};
use crate::series::{Series, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaylorError {
    #[error("argument of {function} has constant term {constant}; only arguments vanishing at 0 are supported")]
    NonzeroConstantArgument {
        function: Elementary,
        constant: BigRational,
    },
    #[error("variable y{index} exceeds the declared {var_count} variable(s)")]
    VariableOutOfRange { index: usize, var_count: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

impl Elementary {
    /// Taylor coefficients at 0 for degrees `0..=order`.
    pub fn coefficients(self, order: u32) -> Vec<BigRational> {
        let n = order as usize;
        let mut inv_fact = Vec::with_capacity(n + 1);
        let mut fact = BigInt::one();
        for k in 0..=n {
            if k > 0 {
                fact *= k;
            }
            inv_fact.push(BigRational::new(BigInt::one(), fact.clone()));
        }
        let sign = |k: usize| {
            if k % 4 < 2 {
                BigRational::one()
            } else {
                -BigRational::one()
            }
        };
        let zero = BigRational::zero;
        match self {
            Elementary::Exp => inv_fact,
            Elementary::Sin => (0..=n)
                .map(|k| if k % 2 == 1 { sign(k - 1) * &inv_fact[k] } else { zero() })
                .collect(),
            Elementary::Cos => (0..=n)
                .map(|k| if k % 2 == 0 { sign(k) * &inv_fact[k] } else { zero() })
                .collect(),
            Elementary::Sinh => (0..=n)
                .map(|k| if k % 2 == 1 { inv_fact[k].clone() } else { zero() })
                .collect(),
            Elementary::Cosh => (0..=n)
                .map(|k| if k % 2 == 0 { inv_fact[k].clone() } else { zero() })
                .collect(),
            Elementary::Atan => (0..=n)
                .map(|k| {
                    if k % 2 == 1 {
                        sign(k - 1) / BigRational::from_integer(k.into())
                    } else {
                        zero()
                    }
                })
                .collect(),
            Elementary::Log1p => (0..=n)
                .map(|k| match k {
                    0 => zero(),
                    k if k % 2 == 1 => BigRational::new(BigInt::one(), k.into()),
                    k => BigRational::new(-BigInt::one(), k.into()),
                })
                .collect(),
            Elementary::Tan => {
                // tan' = 1 + tan^2
                let mut t = vec![zero(); n + 1];
                for k in 0..n {
                    let mut s: BigRational = if k == 0 { BigRational::one() } else { zero() };
                    for i in 1..k {
                        if !t[i].is_zero() && !t[k - i].is_zero() {
                            s += &t[i] * &t[k - i];
                        }
                    }
                    t[k + 1] = s / BigRational::from_integer((k + 1).into());
                }
                t
            }
        }
    }
}

/// Exact Taylor expansion of `e` at the origin in `m` variables, truncated at
/// total degree `order`.
pub fn taylor(e: &Expr, m: usize, order: u32) -> Result<Series, TaylorError> {
    Ok(match e {
        Expr::Const(c) => Series::constant(m, order, c.clone()),
        Expr::Var(j) => {
            if *j >= m {
                return Err(TaylorError::VariableOutOfRange {
                    index: j + 1,
                    var_count: m,
                });
            }
            Series::variable(m, order, *j)?
        }
        Expr::Neg(a) => -taylor(a, m, order)?,
        Expr::Sum(terms) => {
            let mut acc = Series::zero(m, order);
            for t in terms {
                acc = &acc + &taylor(t, m, order)?;
            }
            acc
        }
        Expr::Product(factors) => {
            let mut acc = Series::one(m, order);
            for f in factors {
                let s = taylor(f, m, order)?;
                if s.is_zero() {
                    return Ok(Series::zero(m, order));
                }
                acc = &acc * &s;
            }
            acc
        }
        Expr::Pow(base, k) => taylor(base, m, order)?.pow(*k),
        Expr::Call(f, arg) => {
            let inner = taylor(arg, m, order)?;
            let c = inner.constant_term();
            if !c.is_zero() {
                return Err(TaylorError::NonzeroConstantArgument {
                    function: *f,
                    constant: c,
                });
            }
            let outer = Series::from_univariate(&f.coefficients(order), order);
            outer.compose(&[inner])?
        }
    })
}

fn sum(terms: Vec<Expr>) -> Expr {
    let mut terms: Vec<Expr> = terms.into_iter().filter(|t| !t.is_zero_const()).collect();
    match terms.len() {
        0 => Expr::int(0),
        1 => terms.pop().expect("one"),
        _ => Expr::Sum(terms),
    }
}

fn product(factors: Vec<Expr>) -> Expr {
    if factors.iter().any(Expr::is_zero_const) {
        return Expr::int(0);
    }
    let mut factors: Vec<Expr> = factors
        .into_iter()
        .filter(|f| !matches!(f, Expr::Const(c) if c.is_one()))
        .collect();
    match factors.len() {
        0 => Expr::int(1),
        1 => factors.pop().expect("one"),
        _ => Expr::Product(factors),
    }
}

/// `∂e/∂y_{j+1}` by the usual rewrite rules. Results stay inside the input
/// grammar: `atan' u = exp(-log1p(u^2))` and `log1p' u = exp(-log1p(u))`.
pub fn symbolic_partial(e: &Expr, j: usize) -> Expr {
    match e {
        Expr::Const(_) => Expr::int(0),
        Expr::Var(i) => Expr::int(if *i == j { 1 } else { 0 }),
        Expr::Neg(a) => match symbolic_partial(a, j) {
            d if d.is_zero_const() => d,
            d => Expr::neg(d),
        },
        Expr::Sum(terms) => sum(terms.iter().map(|t| symbolic_partial(t, j)).collect()),
        Expr::Product(factors) => sum((0..factors.len())
            .map(|i| {
                let mut fs = factors.clone();
                fs[i] = symbolic_partial(&factors[i], j);
                product(fs)
            })
            .collect()),
        Expr::Pow(base, k) => match k {
            0 => Expr::int(0),
            1 => symbolic_partial(base, j),
            k => product(vec![
                Expr::int(i64::from(*k)),
                Expr::pow(base.as_ref().clone(), k - 1),
                symbolic_partial(base, j),
            ]),
        },
        Expr::Call(f, arg) => {
            let du = symbolic_partial(arg, j);
            if du.is_zero_const() {
                return du;
            }
            let u = arg.as_ref().clone();
            let outer = match f {
                Elementary::Sin => Expr::call(Elementary::Cos, u),
                Elementary::Cos => Expr::neg(Expr::call(Elementary::Sin, u)),
                Elementary::Sinh => Expr::call(Elementary::Cosh, u),
                Elementary::Cosh => Expr::call(Elementary::Sinh, u),
                Elementary::Exp => Expr::call(Elementary::Exp, u),
                Elementary::Tan => Expr::Sum(vec![Expr::int(1), Expr::pow(Expr::call(Elementary::Tan, u), 2)]),
                Elementary::Atan => Expr::call(
                    Elementary::Exp,
                    Expr::neg(Expr::call(Elementary::Log1p, Expr::pow(u, 2))),
                ),
                Elementary::Log1p => Expr::call(Elementary::Exp, Expr::neg(Expr::call(Elementary::Log1p, u))),
            };
            product(vec![outer, du])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::series::ExponentVector;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn uni(terms: &[(u32, i64, i64)], order: u32) -> Series {
        Series::from_terms(
            1,
            order,
            terms.iter().map(|(k, n, d)| (ExponentVector::new(vec![*k]), q(*n, *d))),
        )
        .unwrap()
    }

    fn t(text: &str, m: usize, order: u32) -> Series {
        taylor(&parse(text, m).unwrap(), m, order).unwrap()
    }

    #[test]
    fn sine_of_square() {
        assert_eq!(t("sin(y1^2)", 1, 10), uni(&[(2, 1, 1), (6, -1, 6), (10, 1, 120)], 10));
    }

    #[test]
    fn bell_numbers_low_order() {
        assert_eq!(
            t("exp(exp(y1)-1)-1", 1, 4),
            uni(&[(1, 1, 1), (2, 1, 1), (3, 5, 6), (4, 5, 8)], 4)
        );
    }

    #[test]
    fn zero_expression() {
        assert_eq!(t("0", 1, 5), Series::zero(1, 5));
    }

    #[test]
    fn classical_tables() {
        let c = |f: Elementary| f.coefficients(7);
        assert_eq!(
            c(Elementary::Tan)[..8],
            [
                q(0, 1),
                q(1, 1),
                q(0, 1),
                q(1, 3),
                q(0, 1),
                q(2, 15),
                q(0, 1),
                q(17, 315)
            ]
        );
        assert_eq!(c(Elementary::Cos)[4], q(1, 24));
        assert_eq!(c(Elementary::Sin)[7], q(-1, 5040));
        assert_eq!(c(Elementary::Atan)[5], q(1, 5));
        assert_eq!(c(Elementary::Log1p)[4], q(-1, 4));
        assert_eq!(c(Elementary::Cosh)[2], q(1, 2));
    }

    #[test]
    fn identities_between_functions() {
        // sin^2 + cos(y)^2 - 1 = 0 with a zero-constant argument.
        let s = t("sin(y1+y2)^2 + cos(y1+y2)^2", 2, 9);
        assert_eq!(s, Series::one(2, 9));
        // exp(log1p(u)) = 1 + u
        assert_eq!(t("exp(log1p(y1*y2 - y1))", 2, 9), t("1 + y1*y2 - y1", 2, 9));
        // tan = sin / cos, checked as tan*cos = sin
        assert_eq!(t("tan(y1)*cos(y1)", 1, 12), t("sin(y1)", 1, 12));
        // atan(tan(u)) = u
        assert_eq!(t("atan(tan(y1))", 1, 11), t("y1", 1, 11));
    }

    #[test]
    fn nonzero_constant_argument_rejected() {
        let e = parse("exp(y1 + 1)", 1).unwrap();
        assert_eq!(
            taylor(&e, 1, 4),
            Err(TaylorError::NonzeroConstantArgument {
                function: Elementary::Exp,
                constant: q(1, 1)
            })
        );
        let e = parse("y2", 2).unwrap();
        assert!(matches!(
            taylor(&e, 1, 3),
            Err(TaylorError::VariableOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn partials_of_every_function() {
        for f in Elementary::ALL {
            let e = parse(&format!("{f}(y1^2 - 3*y1*y2)"), 2).unwrap();
            for j in 0..2 {
                let lhs = taylor(&e, 2, 8).unwrap().diff(j).unwrap();
                let rhs = taylor(&symbolic_partial(&e, j), 2, 7).unwrap();
                assert_eq!(lhs, rhs, "{f} d/dy{}", j + 1);
            }
        }
    }
}
