//! Expression parser for scalars and elements.
//!
//! Grammar (`^` binds tighter than `*`, which binds tighter than `+`/`-`;
//! unary minus is allowed at the start of a (sub)expression):
//!
//! ```text
//! expr   := ['-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ['^' uint]
//! atom   := INT | RAT | IMAG | 'i' | 'h' | 'e' | IDENT | '(' expr ')'
//! ```
//!
//! Scalars parse as elements of the empty context; the canonical printers
//! in [`crate::scalar`] and [`crate::graded`] emit exactly this grammar, so
//! parse-print round-trips on canonical forms.

use std::str::FromStr;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::graded::{Context, Element};
use crate::lexer::{tokenize, Spanned, Tok};
use crate::scalar::{GaussianRational, Rational, Scalar};

/// Unevaluated expression tree. Kept public so the script layer can
/// re-evaluate the same tree under different product interpretations.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(GaussianRational),
    /// One of `i`, `h`, `e`.
    Reserved(char),
    Name(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

pub struct ExprParser<'t> {
    toks: &'t [Spanned],
    pos: usize,
    line: usize,
}

impl<'t> ExprParser<'t> {
    pub fn new(toks: &'t [Spanned], line: usize) -> Self {
        ExprParser { toks, pos: 0, line }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|s| s.col)
            .unwrap_or_else(|| self.toks.last().map(|s| s.col + 1).unwrap_or(1))
    }

    fn bump(&mut self) -> Option<&Spanned> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::parse(self.line, self.col(), message)
    }

    /// Parse a full expression; stops at the first token that cannot extend
    /// it (the caller decides whether trailing tokens are an error).
    pub fn expr(&mut self) -> Result<Expr> {
        let mut node = if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            Expr::Neg(Box::new(self.term()?))
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    node = Expr::Add(Box::new(node), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    node = Expr::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut node = self.factor()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.bump();
            node = Expr::Mul(Box::new(node), Box::new(self.factor()?));
        }
        Ok(node)
    }

    /// A single multiplicand (atom with optional exponent); used by the
    /// script layer for whitespace-separated operands.
    pub fn factor_operand(&mut self) -> Result<Expr> {
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            match self.peek().cloned() {
                Some(Tok::Int(n)) => {
                    self.bump();
                    let exp = n
                        .to_u32()
                        .ok_or_else(|| self.err("exponent out of range"))?;
                    Ok(Expr::Pow(Box::new(base), exp))
                }
                _ => Err(self.err("expected a non-negative integer exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.bump();
                Ok(Expr::Num(GaussianRational::new(
                    Rational::from_integer(n),
                    Rational::from_integer(0.into()),
                )))
            }
            Some(Tok::Rat(r)) => {
                self.bump();
                Ok(Expr::Num(GaussianRational::new(
                    r,
                    Rational::from_integer(0.into()),
                )))
            }
            Some(Tok::Imag(r)) => {
                self.bump();
                Ok(Expr::Num(GaussianRational::new(
                    Rational::from_integer(0.into()),
                    r,
                )))
            }
            Some(Tok::Ident(name)) => {
                self.bump();
                match name.as_str() {
                    "i" => Ok(Expr::Reserved('i')),
                    "h" => Ok(Expr::Reserved('h')),
                    "e" => Ok(Expr::Reserved('e')),
                    _ => Ok(Expr::Name(name)),
                }
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.bump();
                        Ok(inner)
                    }
                    _ => Err(self.err("expected `)`")),
                }
            }
            _ => Err(self.err("expected a number, name, or `(`")),
        }
    }
}

/// Evaluate an expression tree to an element of `ctx`. Names resolve first
/// through the context's generators, then through `resolve` (for script
/// bindings).
pub fn eval_element(
    expr: &Expr,
    ctx: &Context,
    resolve: &dyn Fn(&str) -> Option<Element>,
) -> Result<Element> {
    Ok(match expr {
        Expr::Num(g) => Element::from_scalar(ctx, Scalar::from_gaussian(g.clone())),
        Expr::Reserved('i') => Element::from_scalar(ctx, Scalar::i()),
        Expr::Reserved('h') => Element::from_scalar(ctx, Scalar::hbar()),
        Expr::Reserved('e') => Element::from_scalar(ctx, Scalar::epsilon()),
        Expr::Reserved(_) => unreachable!(),
        Expr::Name(name) => {
            if ctx.index_of(name).is_some() {
                Element::generator(ctx, name)?
            } else if let Some(found) = resolve(name) {
                if found.context() != ctx {
                    return Err(Error::ContextMismatch);
                }
                found
            } else {
                return Err(Error::UnknownGenerator(name.clone()));
            }
        }
        Expr::Neg(inner) => eval_element(inner, ctx, resolve)?.neg(),
        Expr::Add(a, b) => {
            eval_element(a, ctx, resolve)?.add(&eval_element(b, ctx, resolve)?)?
        }
        Expr::Sub(a, b) => {
            eval_element(a, ctx, resolve)?.sub(&eval_element(b, ctx, resolve)?)?
        }
        Expr::Mul(a, b) => {
            eval_element(a, ctx, resolve)?.mul(&eval_element(b, ctx, resolve)?)?
        }
        Expr::Pow(a, n) => eval_element(a, ctx, resolve)?.pow(*n),
    })
}

/// Parse a complete line as an element of `ctx`.
pub fn parse_element(text: &str, ctx: &Context) -> Result<Element> {
    let toks = tokenize(text, 1)?;
    let mut p = ExprParser::new(&toks, 1);
    let expr = p.expr()?;
    if !p.at_end() {
        return Err(Error::parse(1, p.col(), "unexpected trailing input"));
    }
    eval_element(&expr, ctx, &|_| None)
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scalar> {
        let ctx = Context::empty();
        let elem = parse_element(s, &ctx)?;
        let mut out = Scalar::zero();
        for (_, coeff) in elem.terms() {
            out = out.add_ref(coeff);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::de_rham;
    use crate::scalar::gauss_int;

    #[test]
    fn scalar_expressions() {
        let s: Scalar = "(2+i)*h".parse().unwrap();
        assert_eq!(
            s,
            Scalar::from_gaussian(gauss_int(2, 1)) * Scalar::hbar()
        );
        let t: Scalar = "1/2 - 3i*h^2 + e".parse().unwrap();
        assert_eq!(
            t,
            Scalar::from_rational(crate::scalar::rat(1, 2))
                + Scalar::from_gaussian(gauss_int(0, -3)) * Scalar::hbar_pow(2)
                + Scalar::epsilon()
        );
    }

    #[test]
    fn element_expressions() {
        let (ctx, _) = de_rham(2).unwrap();
        let a = parse_element("t1*dt2 + (2+i)*h*t2", &ctx).unwrap();
        assert_eq!(format!("{}", a), "(2+i)*h*t2 + t1*dt2");
        let b = parse_element(&format!("{}", a), &ctx).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn power_and_unary_minus() {
        let (ctx, _) = de_rham(1).unwrap();
        let a = parse_element("-t^2*dt + 3", &ctx).unwrap();
        let b = parse_element("3 - t*t*dt", &ctx).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors_carry_position() {
        let (ctx, _) = de_rham(1).unwrap();
        match parse_element("t + * dt", &ctx) {
            Err(Error::Parse { line: 1, col, .. }) => assert_eq!(col, 5),
            other => panic!("expected parse error, got {:?}", other),
        }
        assert!(matches!(
            parse_element("t + unknown", &ctx),
            Err(Error::UnknownGenerator(name)) if name == "unknown"
        ));
    }

    #[test]
    fn odd_square_collapses_in_parser_too() {
        let (ctx, _) = de_rham(1).unwrap();
        let z = parse_element("dt*dt", &ctx).unwrap();
        assert!(z.is_zero());
    }
}
