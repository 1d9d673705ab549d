//! Lexer and Pratt parser for the expression language.

use super::{BinOp, Func, ScalarExpr, Var};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok<'a> {
    Num(f64),
    Ident(&'a str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone, Copy)]
struct Spanned<'a> {
    tok: Tok<'a>,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned<'_>>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let offset = i;
        let tok = match c {
            b'+' => {
                i += 1;
                Tok::Plus
            }
            b'-' => {
                i += 1;
                Tok::Minus
            }
            b'*' => {
                i += 1;
                Tok::Star
            }
            b'/' => {
                i += 1;
                Tok::Slash
            }
            b'^' => {
                i += 1;
                Tok::Caret
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value = text.parse::<f64>().map_err(|_| Error::Parse {
                    offset: start,
                    message: format!("invalid number literal `{text}`"),
                })?;
                Tok::Num(value)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                Tok::Ident(&src[start..i])
            }
            _ => {
                return Err(Error::Parse {
                    offset,
                    message: format!("unexpected character `{}`", &src[i..].chars().next().unwrap()),
                })
            }
        };
        out.push(Spanned { tok, offset });
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned<'a>>,
    pos: usize,
    eof: usize,
    /// Identifiers accepted as coordinates, in index order.
    vars: [&'a str; 2],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<Tok<'a>> {
        self.toks.get(self.pos).map(|s| s.tok)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.eof, |s| s.offset)
    }

    fn bump(&mut self) -> Option<Spanned<'a>> {
        let t = self.toks.get(self.pos).copied();
        self.pos += 1;
        t
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::Parse {
                offset: self.offset(),
                message: "expected `)`".into(),
            }),
        }
    }

    fn parse_prefix(&mut self) -> Result<ScalarExpr> {
        let offset = self.offset();
        let Some(sp) = self.bump() else {
            return Err(Error::Parse {
                offset,
                message: "expected expression".into(),
            });
        };
        match sp.tok {
            Tok::Num(v) => Ok(ScalarExpr::Const(v)),
            Tok::Minus => {
                // Unary minus binds tighter than `*` and `/`, looser than `^`.
                let operand = self.parse_bp(5)?;
                Ok(ScalarExpr::Neg(Box::new(operand)))
            }
            Tok::LParen => {
                let inner = self.parse_bp(0)?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if name == self.vars[0] {
                    return Ok(ScalarExpr::Var(Var::X1));
                }
                if name == self.vars[1] {
                    return Ok(ScalarExpr::Var(Var::X2));
                }
                match name {
                    "pi" => return Ok(ScalarExpr::Const(std::f64::consts::PI)),
                    "e" => return Ok(ScalarExpr::Const(std::f64::consts::E)),
                    _ => {}
                }
                if let Some(func) = Func::from_name(name) {
                    match self.peek() {
                        Some(Tok::LParen) => {
                            self.pos += 1;
                            let arg = self.parse_bp(0)?;
                            self.expect_rparen()?;
                            Ok(ScalarExpr::Call(func, Box::new(arg)))
                        }
                        _ => Err(Error::Parse {
                            offset: self.offset(),
                            message: format!("expected `(` after function `{name}`"),
                        }),
                    }
                } else {
                    Err(Error::UnknownIdentifier {
                        name: name.to_string(),
                        offset: sp.offset,
                    })
                }
            }
            _ => Err(Error::Parse {
                offset: sp.offset,
                message: "expected expression".into(),
            }),
        }
    }

    fn parse_bp(&mut self, min_bp: u8) -> Result<ScalarExpr> {
        let mut lhs = self.parse_prefix()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                Some(Tok::Caret) => BinOp::Pow,
                _ => break,
            };
            let (lbp, rbp) = match op {
                BinOp::Add | BinOp::Sub => (1, 2),
                BinOp::Mul | BinOp::Div => (3, 4),
                BinOp::Pow => (8, 7),
            };
            if lbp < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.parse_bp(rbp)?;
            lhs = ScalarExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }
}

fn parse_with(src: &str, vars: [&str; 2]) -> Result<ScalarExpr> {
    let toks = lex(src)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        eof: src.len(),
        vars,
    };
    let expr = parser.parse_bp(0)?;
    if parser.pos < parser.toks.len() {
        return Err(Error::Parse {
            offset: parser.offset(),
            message: "unexpected trailing input".into(),
        });
    }
    Ok(expr)
}

/// Parse an expression in the coordinates `x1`, `x2`.
pub fn parse(src: &str) -> Result<ScalarExpr> {
    parse_with(src, ["x1", "x2"])
}

/// Parse a one-variable expression (curve components use the parameter
/// `s`). The named variable maps to the first coordinate slot, so the
/// result is evaluated at `[s, 0]`.
pub fn parse_in_var(src: &str, var: &str) -> Result<ScalarExpr> {
    parse_with(src, [var, "\u{0}unused"])
}
