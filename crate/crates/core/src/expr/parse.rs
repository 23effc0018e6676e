use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use super::{Elementary, Expr};

/// Parse failure. Positions are 0-based byte offsets into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown function `{name}` at position {pos}")]
    UnknownFunction { name: String, pos: usize },
    #[error("variable y{index} at position {pos} exceeds the declared {var_count} variable(s)")]
    VariableOutOfRange { index: usize, var_count: usize, pos: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownFunction { pos, .. }
            | ParseError::VariableOutOfRange { pos, .. } => *pos,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number {n}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Caret => "`^`".into(),
        Tok::Slash => "`/`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'/' => Tok::Slash,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = text[start..i].parse::<BigInt>().expect("digits");
                out.push((start, Tok::Num(n)));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    pos: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

/// Parse `text` as an expression in the variables `y1..y{var_count}`.
pub fn parse(text: &str, var_count: usize) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, var_count };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(p.error(format!("unexpected {}", describe(t)))),
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    var_count: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, message: String) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", describe(&want), describe(self.peek()))))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?.0];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?.0);
                }
                Tok::Minus => {
                    self.bump();
                    let (t, bare) = self.term()?;
                    terms.push(match t {
                        Expr::Const(c) if bare => Expr::Const(-c),
                        t => Expr::neg(t),
                    });
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            Expr::Sum(terms)
        })
    }

    /// The flag reports whether the term was a single unsigned literal.
    fn term(&mut self) -> Result<(Expr, bool), ParseError> {
        let (first, bare) = self.unary()?;
        let mut factors = vec![first];
        while *self.peek() == Tok::Star {
            self.bump();
            factors.push(self.unary()?.0);
        }
        Ok(if factors.len() == 1 {
            (factors.pop().expect("one factor"), bare)
        } else {
            (Expr::Product(factors), false)
        })
    }

    fn literal_ahead(&self) -> bool {
        if !matches!(self.peek_at(1), Tok::Num(_)) {
            return false;
        }
        let after = if *self.peek_at(2) == Tok::Slash { 4 } else { 2 };
        *self.peek_at(after) != Tok::Caret
    }

    fn unary(&mut self) -> Result<(Expr, bool), ParseError> {
        if *self.peek() == Tok::Minus {
            let fold = self.literal_ahead();
            self.bump();
            if fold {
                let c = self.literal()?;
                return Ok((Expr::Const(-c), false));
            }
            let (inner, _) = self.unary()?;
            return Ok((Expr::neg(inner), false));
        }
        self.power()
    }

    fn power(&mut self) -> Result<(Expr, bool), ParseError> {
        let (base, bare) = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok((base, bare));
        }
        self.bump();
        let pos = self.pos();
        let k = match self.bump() {
            Tok::Num(n) => u32::try_from(n).map_err(|_| ParseError::Syntax {
                pos,
                message: "exponent too large".into(),
            })?,
            t => {
                return Err(ParseError::Syntax {
                    pos,
                    message: format!("exponent must be a nonnegative integer, found {}", describe(&t)),
                })
            }
        };
        if *self.peek() == Tok::Caret {
            return Err(self.error("chained `^` is ambiguous; add parentheses".into()));
        }
        Ok((Expr::pow(base, k), false))
    }

    fn literal(&mut self) -> Result<BigRational, ParseError> {
        let Tok::Num(n) = self.bump() else {
            unreachable!("caller checked for a number");
        };
        if *self.peek() != Tok::Slash {
            return Ok(BigRational::from_integer(n));
        }
        self.bump();
        let pos = self.pos();
        match self.bump() {
            Tok::Num(d) if d.is_zero() => Err(ParseError::Syntax {
                pos,
                message: "zero denominator".into(),
            }),
            Tok::Num(d) => Ok(BigRational::new(n, d)),
            _ => Err(ParseError::Syntax {
                pos,
                message: "division is only allowed in rational literals p/q".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<(Expr, bool), ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(_) => {
                let c = self.literal()?;
                Ok((Expr::Const(c), true))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok((e, false))
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(index) = variable_index(&name) {
                    if index > self.var_count {
                        return Err(ParseError::VariableOutOfRange {
                            index,
                            var_count: self.var_count,
                            pos,
                        });
                    }
                    return Ok((Expr::Var(index - 1), false));
                }
                let Some(f) = Elementary::from_name(&name) else {
                    return Err(ParseError::UnknownFunction { name, pos });
                };
                self.expect(Tok::LParen)?;
                let arg = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok((Expr::call(f, arg), false))
            }
            Tok::Slash => Err(self.error("division is only allowed in rational literals p/q".into())),
            t => Err(self.error(format!("expected an operand, found {}", describe(&t)))),
        }
    }
}

/// `y1`..`y9` to 1..9.
fn variable_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('y')?;
    match rest.as_bytes() {
        [d @ b'1'..=b'9'] => Some((d - b'0') as usize),
        _ => None,
    }
}
