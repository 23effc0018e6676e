//! Expression front end for defining functions.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary ('*' unary)*
//! unary := '-' unary | power
//! power := atom ('^' integer)?
//! atom  := integer ('/' integer)? | y1..y9 | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! `name` is one of `sin cos sinh cosh exp tan atan log1p`. The only
//! division allowed is inside a rational literal. A minus sign directly in
//! front of an unsigned literal (and not followed by `^`) is folded into the
//! literal, so `-2*y1` is the product of `-2` and `y1`.

mod parse;
mod taylor;

pub use parse::{parse, ParseError};
pub use taylor::{symbolic_partial, taylor, TaylorError};

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elementary {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Tan,
    Atan,
    Log1p,
}

impl Elementary {
    pub const ALL: [Elementary; 8] = [
        Elementary::Sin,
        Elementary::Cos,
        Elementary::Sinh,
        Elementary::Cosh,
        Elementary::Exp,
        Elementary::Tan,
        Elementary::Atan,
        Elementary::Log1p,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Sinh => "sinh",
            Elementary::Cosh => "cosh",
            Elementary::Exp => "exp",
            Elementary::Tan => "tan",
            Elementary::Atan => "atan",
            Elementary::Log1p => "log1p",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for Elementary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Expression tree. Variables are stored 0-based (`Var(0)` prints as `y1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(BigRational),
    Var(usize),
    Neg(Box<Expr>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, u32),
    Call(Elementary, Box<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Self {
        Expr::Const(BigRational::from_integer(n.into()))
    }

    pub fn var(j: usize) -> Self {
        Expr::Var(j)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Self {
        Expr::Neg(Box::new(e))
    }

    pub fn pow(base: Expr, k: u32) -> Self {
        Expr::Pow(Box::new(base), k)
    }

    pub fn call(f: Elementary, arg: Expr) -> Self {
        Expr::Call(f, Box::new(arg))
    }

    /// Largest 0-based variable index, if any variable occurs.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(j) => Some(*j),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.max_var(),
            Expr::Sum(v) | Expr::Product(v) => v.iter().filter_map(Expr::max_var).max(),
        }
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    /// Binding strength used by the printer: 1 sum, 2 product, 3 unary,
    /// 4 power or fraction, 5 atom.
    fn level(&self) -> u8 {
        match self {
            Expr::Sum(v) if v.len() > 1 => 1,
            Expr::Product(v) if v.len() > 1 => 2,
            Expr::Sum(_) | Expr::Product(_) => 5,
            Expr::Neg(_) => 3,
            Expr::Const(c) if c.is_negative() => 3,
            Expr::Const(c) if !c.denom().is_one() => 4,
            Expr::Pow(..) => 4,
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        if self.level() < min_level {
            write!(f, "(")?;
            self.write_bare(f)?;
            write!(f, ")")
        } else {
            self.write_bare(f)
        }
    }

    fn write_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_rational(f, c),
            Expr::Var(j) => write!(f, "y{}", j + 1),
            Expr::Neg(a) => match a.as_ref() {
                // `-2` would be read back as a literal.
                Expr::Const(c) if !c.is_negative() => {
                    write!(f, "-(")?;
                    write_rational(f, c)?;
                    write!(f, ")")
                }
                a => {
                    write!(f, "-")?;
                    a.write_at(f, 3)
                }
            },
            Expr::Sum(terms) => {
                let Some((first, rest)) = terms.split_first() else {
                    return write!(f, "0");
                };
                first.write_at(f, 2)?;
                for t in rest {
                    match t {
                        Expr::Neg(a) if matches!(a.as_ref(), Expr::Const(c) if !c.is_negative()) => {
                            write!(f, " - ")?;
                            a.write_at(f, 6)?;
                        }
                        Expr::Neg(a) => {
                            write!(f, " - ")?;
                            a.write_at(f, 2)?;
                        }
                        Expr::Const(c) if c.is_negative() => {
                            write!(f, " - ")?;
                            write_rational(f, &-c)?;
                        }
                        t => {
                            write!(f, " + ")?;
                            t.write_at(f, 2)?;
                        }
                    }
                }
                Ok(())
            }
            Expr::Product(factors) => {
                let Some((first, rest)) = factors.split_first() else {
                    return write!(f, "1");
                };
                first.write_at(f, 3)?;
                for x in rest {
                    write!(f, "*")?;
                    x.write_at(f, 3)?;
                }
                Ok(())
            }
            Expr::Pow(base, k) => {
                base.write_at(f, 5)?;
                write!(f, "^{k}")
            }
            Expr::Call(func, arg) => write!(f, "{func}({arg})"),
        }
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &BigRational) -> fmt::Result {
    if c.denom().is_one() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

/// Prints in the input grammar; [`parse`] reads the output back to the same
/// tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_bare(f)
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::Const(BigRational::zero())
    }
}
