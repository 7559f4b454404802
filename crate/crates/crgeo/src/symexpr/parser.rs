//! Pratt parser for the ASCII expression grammar.
//!
//! Identifiers: `z[k]`, `zb[k]`, `w[k]`, `wb[k]`, `p[i,mu]`, `pb[i,mu]`,
//! `P[k]`, `Pb[k]`, `c`, and the imaginary unit `i`. Operators `+ - * / ^`,
//! unary minus, parentheses, `conj(...)`. Whitespace is insignificant,
//! indices are 1-based, and division is restricted to nonzero constants.

use super::expr::ScalarExpr;
use super::symbol::{Index, SymbolId};
use crate::rational::GaussRat;
use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("index out of range at byte {pos}: {msg}")]
    IndexRange { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdent { pos: usize, name: String },
    #[error("division by a non-constant or zero divisor at byte {pos}")]
    BadDivision { pos: usize },
}

/// Declared index ranges for a parse: greek indices in `1..=n`, roman in `1..=d`.
#[derive(Clone, Copy, Debug)]
pub struct ParseContext {
    pub n: u32,
    pub d: u32,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'[' => {
                self.pos += 1;
                Tok::LBracket
            }
            b']' => {
                self.pos += 1;
                Tok::RBracket
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'0'..=b'9' => {
                let mut end = self.pos;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
                let s = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                self.pos = end;
                Tok::Int(s.parse().unwrap())
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let s = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                self.pos = end;
                Tok::Ident(s.to_string())
            }
            other => {
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok(Some((start, tok)))
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    cursor: usize,
    end: usize,
    ctx: ParseContext,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.cursor)
    }

    fn advance(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.cursor).cloned();
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<usize, ParseError> {
        match self.advance() {
            Some((pos, tok)) if tok == want => Ok(pos),
            Some((pos, tok)) => Err(ParseError::Syntax {
                pos,
                msg: format!("expected {what}, found {tok:?}"),
            }),
            None => Err(ParseError::Syntax {
                pos: self.end,
                msg: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn parse_indices(&mut self, count: usize) -> Result<(usize, Vec<u32>), ParseError> {
        let open = self.expect(Tok::LBracket, "`[`")?;
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            if k > 0 {
                self.expect(Tok::Comma, "`,`")?;
            }
            match self.advance() {
                Some((pos, Tok::Int(v))) => {
                    let v: u32 = v.try_into().map_err(|_| ParseError::IndexRange {
                        pos,
                        msg: "index does not fit in u32".into(),
                    })?;
                    if v == 0 {
                        return Err(ParseError::IndexRange {
                            pos,
                            msg: "indices are 1-based".into(),
                        });
                    }
                    out.push(v);
                }
                Some((pos, tok)) => {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: format!("expected index, found {tok:?}"),
                    })
                }
                None => {
                    return Err(ParseError::Syntax {
                        pos: self.end,
                        msg: "expected index, found end of input".into(),
                    })
                }
            }
        }
        self.expect(Tok::RBracket, "`]`")?;
        Ok((open, out))
    }

    fn check_range(&self, pos: usize, v: u32, max: u32, what: &str) -> Result<(), ParseError> {
        if v > max {
            Err(ParseError::IndexRange {
                pos,
                msg: format!("{what} index {v} exceeds declared range 1..={max}"),
            })
        } else {
            Ok(())
        }
    }

    fn atom_for_ident(&mut self, pos: usize, name: &str) -> Result<ScalarExpr, ParseError> {
        let (greek_bar, roman_bar, base): (bool, bool, &str) = match name {
            "z" => (false, false, "z"),
            "zb" => (true, false, "z"),
            "w" => (false, false, "w"),
            "wb" => (false, true, "w"),
            "p" => (false, false, "p"),
            "pb" => (true, true, "p"),
            "P" => (false, false, "P"),
            "Pb" => (true, false, "P"),
            "c" => {
                return Ok(ScalarExpr::symbol(SymbolId::parameter("c", vec![])));
            }
            "i" => {
                return Ok(ScalarExpr::constant(GaussRat::i()));
            }
            _ => {
                return Err(ParseError::UnknownIdent {
                    pos,
                    name: name.to_string(),
                })
            }
        };
        match base {
            "z" | "P" => {
                let (ipos, idx) = self.parse_indices(1)?;
                self.check_range(ipos, idx[0], self.ctx.n, "greek")?;
                let mut ix = Index::greek(idx[0]);
                if greek_bar {
                    ix = ix.bar();
                }
                let sym = if base == "z" {
                    SymbolId::coordinate("z", vec![ix])
                } else {
                    SymbolId::parameter("P", vec![ix])
                };
                Ok(ScalarExpr::symbol(sym))
            }
            "w" => {
                let (ipos, idx) = self.parse_indices(1)?;
                self.check_range(ipos, idx[0], self.ctx.d, "roman")?;
                let mut ix = Index::roman(idx[0]);
                if roman_bar {
                    ix = ix.bar();
                }
                Ok(ScalarExpr::symbol(SymbolId::coordinate("w", vec![ix])))
            }
            "p" => {
                let (ipos, idx) = self.parse_indices(2)?;
                self.check_range(ipos, idx[0], self.ctx.d, "roman")?;
                self.check_range(ipos, idx[1], self.ctx.n, "greek")?;
                let mut ri = Index::roman(idx[0]);
                let mut gi = Index::greek(idx[1]);
                if roman_bar {
                    ri = ri.bar();
                }
                if greek_bar {
                    gi = gi.bar();
                }
                Ok(ScalarExpr::symbol(SymbolId::coordinate(
                    "p",
                    vec![ri, gi],
                )))
            }
            _ => unreachable!(),
        }
    }

    fn parse_prefix(&mut self) -> Result<ScalarExpr, ParseError> {
        match self.advance() {
            Some((_, Tok::Int(v))) => Ok(ScalarExpr::constant(GaussRat::new(
                BigRational::from_integer(v),
                BigRational::from_integer(BigInt::from(0)),
            ))),
            Some((pos, Tok::Ident(name))) => {
                if name == "conj" {
                    self.expect(Tok::LParen, "`(` after conj")?;
                    let inner = self.parse_bp(0)?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(inner.conjugate())
                } else {
                    self.atom_for_ident(pos, &name)
                }
            }
            Some((_, Tok::LParen)) => {
                let inner = self.parse_bp(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some((_, Tok::Minus)) => {
                // binds tighter than * but looser than ^
                let inner = self.parse_bp(50)?;
                Ok(inner.neg())
            }
            Some((pos, tok)) => Err(ParseError::Syntax {
                pos,
                msg: format!("expected expression, found {tok:?}"),
            }),
            None => Err(ParseError::Syntax {
                pos: self.end,
                msg: "expected expression, found end of input".into(),
            }),
        }
    }

    fn parse_bp(&mut self, min_bp: u8) -> Result<ScalarExpr, ParseError> {
        let mut lhs = self.parse_prefix()?;
        loop {
            let (pos, op) = match self.peek() {
                Some((pos, tok)) => (*pos, tok.clone()),
                None => break,
            };
            let (lbp, rbp) = match op {
                Tok::Plus | Tok::Minus => (10, 11),
                Tok::Star | Tok::Slash => (20, 21),
                Tok::Caret => (60, 61),
                _ => break,
            };
            if lbp < min_bp {
                break;
            }
            self.advance();
            match op {
                Tok::Caret => {
                    let (epos, etok) = self.advance().ok_or(ParseError::Syntax {
                        pos: self.end,
                        msg: "expected exponent".into(),
                    })?;
                    let k: u32 = match etok {
                        Tok::Int(v) => v.try_into().map_err(|_| ParseError::Syntax {
                            pos: epos,
                            msg: "exponent too large".into(),
                        })?,
                        other => {
                            return Err(ParseError::Syntax {
                                pos: epos,
                                msg: format!("expected integer exponent, found {other:?}"),
                            })
                        }
                    };
                    lhs = lhs.pow(k);
                }
                Tok::Slash => {
                    let rhs = self.parse_bp(rbp)?;
                    let c = rhs
                        .as_constant()
                        .filter(|c| !c.is_zero())
                        .ok_or(ParseError::BadDivision { pos })?;
                    lhs = lhs.scale(&c.inv());
                }
                Tok::Star => {
                    let rhs = self.parse_bp(rbp)?;
                    lhs = lhs.mul(&rhs);
                }
                Tok::Plus => {
                    let rhs = self.parse_bp(rbp)?;
                    lhs = lhs.add(&rhs);
                }
                Tok::Minus => {
                    let rhs = self.parse_bp(rbp)?;
                    lhs = lhs.sub(&rhs);
                }
                _ => unreachable!(),
            }
        }
        Ok(lhs)
    }
}

/// Parses `text` into canonical form under the declared `(n, d)` ranges.
pub fn parse_expr(text: &str, ctx: ParseContext) -> Result<ScalarExpr, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    let end = text.len();
    let mut p = Parser {
        toks,
        cursor: 0,
        end,
        ctx,
    };
    let e = p.parse_bp(0)?;
    if let Some((pos, tok)) = p.peek() {
        return Err(ParseError::Syntax {
            pos: *pos,
            msg: format!("trailing input {tok:?}"),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> ParseContext {
        ParseContext { n: 2, d: 1 }
    }

    #[test]
    fn monomial_example() {
        // p[1,1]*zb[2] is a single monomial with coefficient 1
        let e = parse_expr("p[1,1]*zb[2]", ctx()).unwrap();
        assert_eq!(e.num_terms(), 1);
        assert_eq!(e.to_string(), "p[1,1]*zb[2]");
    }

    #[test]
    fn conjugation_example() {
        let e = parse_expr("(1/2)*i*w[1] + conj((1/2)*i*w[1])", ctx()).unwrap();
        let direct = parse_expr("(1/2)*i*w[1] - (1/2)*i*wb[1]", ctx()).unwrap();
        assert_eq!(e, direct);
    }

    #[test]
    fn ring_axioms_cancel() {
        let e = parse_expr("z[1]^2 - z[1]*z[1]", ctx()).unwrap();
        assert!(e.is_zero());
    }

    #[test]
    fn index_out_of_range() {
        assert!(matches!(
            parse_expr("z[3]", ctx()),
            Err(ParseError::IndexRange { .. })
        ));
        assert!(matches!(
            parse_expr("w[2]", ctx()),
            Err(ParseError::IndexRange { .. })
        ));
    }

    #[test]
    fn unknown_identifier() {
        assert!(matches!(
            parse_expr("q[1]", ctx()),
            Err(ParseError::UnknownIdent { .. })
        ));
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_expr("z[1] + ", ctx()) {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 7),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn print_parse_fixed_point() {
        let e = parse_expr("3*z[1]^2*pb[1,2] - (1/3)*i*wb[1] + 7", ctx()).unwrap();
        let printed = e.to_string();
        let e2 = parse_expr(&printed, ctx()).unwrap();
        assert_eq!(e, e2);
    }
}
