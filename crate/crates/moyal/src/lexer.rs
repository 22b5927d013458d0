//! Tokenizer shared by the scalar/element expression parser and the script
//! language.
//!
//! Numeric literals: `12`, `3/4` (tight, no spaces), and imaginary forms
//! `2i`, `3/4i` read as `(3/4)*i`. The names `i`, `h`, `e` are reserved for
//! the imaginary unit, the deformation parameter, and its square root.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Int(BigInt),
    Rat(Rational),
    /// `2i` or `3/4i`: a purely imaginary literal.
    Imag(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semicolon,
    Colon,
    Equals,
    Arrow,
    DotDot,
}

/// Token plus its 1-based column, for error reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub tok: Tok,
    pub col: usize,
}

pub const RESERVED: [&str; 3] = ["i", "h", "e"];

pub fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name)
}

pub fn tokenize(line: &str, line_no: usize) -> Result<Vec<Spanned>> {
    let bytes = line.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0usize;
    while pos < bytes.len() {
        let col = pos + 1;
        let c = bytes[pos] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                pos += 1;
            }
            '#' => break,
            '+' => {
                out.push(Spanned { tok: Tok::Plus, col });
                pos += 1;
            }
            '-' => {
                if bytes.get(pos + 1) == Some(&b'>') {
                    out.push(Spanned {
                        tok: Tok::Arrow,
                        col,
                    });
                    pos += 2;
                } else {
                    out.push(Spanned {
                        tok: Tok::Minus,
                        col,
                    });
                    pos += 1;
                }
            }
            '*' => {
                out.push(Spanned { tok: Tok::Star, col });
                pos += 1;
            }
            '^' => {
                out.push(Spanned {
                    tok: Tok::Caret,
                    col,
                });
                pos += 1;
            }
            '(' => {
                out.push(Spanned {
                    tok: Tok::LParen,
                    col,
                });
                pos += 1;
            }
            ')' => {
                out.push(Spanned {
                    tok: Tok::RParen,
                    col,
                });
                pos += 1;
            }
            '[' => {
                out.push(Spanned {
                    tok: Tok::LBracket,
                    col,
                });
                pos += 1;
            }
            ']' => {
                out.push(Spanned {
                    tok: Tok::RBracket,
                    col,
                });
                pos += 1;
            }
            ',' => {
                out.push(Spanned {
                    tok: Tok::Comma,
                    col,
                });
                pos += 1;
            }
            ';' => {
                out.push(Spanned {
                    tok: Tok::Semicolon,
                    col,
                });
                pos += 1;
            }
            ':' => {
                out.push(Spanned {
                    tok: Tok::Colon,
                    col,
                });
                pos += 1;
            }
            '=' => {
                out.push(Spanned {
                    tok: Tok::Equals,
                    col,
                });
                pos += 1;
            }
            '.' => {
                if bytes.get(pos + 1) == Some(&b'.') {
                    out.push(Spanned {
                        tok: Tok::DotDot,
                        col,
                    });
                    pos += 2;
                } else {
                    return Err(Error::parse(line_no, col, "unexpected `.`"));
                }
            }
            '0'..='9' => {
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                let numer: BigInt = line[start..pos].parse().expect("digits");
                let mut denom = BigInt::from(1);
                // A tight `p/q` literal; `q` must be digits immediately after.
                if bytes.get(pos) == Some(&b'/')
                    && bytes.get(pos + 1).map(u8::is_ascii_digit).unwrap_or(false)
                {
                    pos += 1;
                    let dstart = pos;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    denom = line[dstart..pos].parse().expect("digits");
                    if denom.is_zero() {
                        return Err(Error::parse(line_no, col, "zero denominator"));
                    }
                }
                let value = Rational::new(numer, denom);
                // Imaginary literal when `i` follows tightly and is not the
                // start of a longer identifier.
                let imag = bytes.get(pos) == Some(&b'i')
                    && !bytes
                        .get(pos + 1)
                        .map(|b| b.is_ascii_alphanumeric() || *b == b'_')
                        .unwrap_or(false);
                if imag {
                    pos += 1;
                    out.push(Spanned {
                        tok: Tok::Imag(value),
                        col,
                    });
                } else if value.denom().is_zero() {
                    unreachable!()
                } else if value.is_integer() {
                    out.push(Spanned {
                        tok: Tok::Int(value.to_integer()),
                        col,
                    });
                } else {
                    out.push(Spanned {
                        tok: Tok::Rat(value),
                        col,
                    });
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = pos;
                while pos < bytes.len()
                    && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_')
                {
                    pos += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(line[start..pos].to_string()),
                    col,
                });
            }
            other => {
                return Err(Error::parse(
                    line_no,
                    col,
                    format!("unexpected character `{}`", other),
                ));
            }
        }
    }
    Ok(out)
}

/// Integer value of an `Int` token when it fits in an `i64`.
pub fn tok_int(tok: &Tok) -> Option<i64> {
    use num_traits::ToPrimitive;
    match tok {
        Tok::Int(n) => n.to_i64(),
        _ => None,
    }
}
