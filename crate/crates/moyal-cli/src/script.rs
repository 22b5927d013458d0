//! Statement grammar of the script language.
//!
//! One statement per line, `#` comments. Expressions reuse the engine's
//! grammar; matrices are bracketed row-major text with `;` between rows and
//! `,` between entries.

use moyal::error::{Error, Result};
use moyal::expr::{Expr, ExprParser};
use moyal::lexer::{tokenize, Spanned, Tok};
use moyal::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Context { name: String },
    Generator { name: String, degree: i64 },
    Diff {
        name: String,
        degree: Option<i64>,
        clauses: Vec<(String, Expr)>,
    },
    Morphism {
        name: String,
        src: String,
        tgt: String,
        clauses: Vec<(String, Expr)>,
    },
    Let { name: String, expr: Expr },
    Show { expr: Expr, deformed: bool },
    ShowStar { a: Expr, b: Expr },
    ShowMap { name: String },
    ShowCoproduct {
        coalg: String,
        expr: Expr,
        deformed: bool,
    },
    ShowLelem { name: String },
    ConfigLambda { positive: bool },
    ConfigTruncate { order: Option<u32> },
    ConfigDiff { name: String },
    CheckDifferential { name: String },
    CheckAssoc { a: Expr, b: Expr, c: Expr },
    CheckUnit { a: Expr },
    CheckLeibniz { a: Expr, b: Expr },
    CheckExactness { a: Expr, b: Expr },
    CheckPauli { a: Expr, b: Expr },
    CheckSequiv { a: Expr, b: Expr },
    CheckParity { a: Expr, b: Expr },
    CheckFunctorial { morphism: String, a: Expr, b: Expr },
    CheckStarAssoc { a: Expr, b: Expr, c: Expr },
    CheckStarBracket { a: Expr, b: Expr },
    CheckDuality {
        ctx: String,
        diff: String,
        nilpotency: Option<u32>,
    },
    CheckDcomposeAssoc { f: String, g: String, h: String },
    CheckDcomposeUnit { f: String },
    CheckAbsorption { f: String },
    CheckJacobi {
        dgla: String,
        deformed: bool,
        a: Expr,
        b: Expr,
        c: Expr,
    },
    CheckDglaExact { dgla: String, a: Expr, b: Expr, c: Expr },
    CheckCoassoc { coalg: String, expr: Expr },
    CheckCofunctorial { morphism: String, expr: Expr },
    InstanceDerham { n: i64, ctx: String, diff: String },
    InstanceWeyl { ctx: String },
    InstanceTruncatedDga {
        ctx: String,
        diff: String,
        wide: bool,
    },
    ComplexDecl {
        name: String,
        lo: i64,
        hi: i64,
        dims: Vec<usize>,
    },
    Boundary {
        name: String,
        degree: i64,
        matrix: Vec<Vec<Scalar>>,
    },
    MapDecl {
        name: String,
        src: String,
        tgt: String,
        degree: i64,
    },
    Block {
        name: String,
        degree: i64,
        matrix: Vec<Vec<Scalar>>,
    },
    DglaFromEnd { name: String, complex: String },
    DglaDecl { name: String, degrees: Vec<i64> },
    BracketConst {
        name: String,
        i: usize,
        j: usize,
        k: usize,
        value: Expr,
    },
    DglaDiff { name: String, matrix: Vec<Vec<Scalar>> },
    ValidateDgla { name: String },
    Lelem {
        name: String,
        dgla: String,
        expr: Expr,
    },
    CoalgebraDecl { name: String, degrees: Vec<i64> },
    CoalgebraFromDual {
        name: String,
        ctx: String,
        diff: String,
        nilpotency: Option<u32>,
    },
    DeltaConst {
        name: String,
        i: usize,
        j: usize,
        k: usize,
        value: Expr,
    },
    Codiff { name: String, matrix: Vec<Vec<Scalar>> },
    ValidateCoalgebra { name: String },
    Celem {
        name: String,
        coalg: String,
        expr: Expr,
    },
    Comorphism {
        name: String,
        src: String,
        tgt: String,
        matrix: Vec<Vec<Scalar>>,
    },
    Suite {
        name: String,
        params: Vec<(String, String)>,
    },
}

pub struct LineParser<'t> {
    toks: &'t [Spanned],
    pos: usize,
    line: usize,
}

impl<'t> LineParser<'t> {
    fn new(toks: &'t [Spanned], line: usize) -> Self {
        LineParser { toks, pos: 0, line }
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|s| s.col)
            .unwrap_or_else(|| self.toks.last().map(|s| s.col + 1).unwrap_or(1))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::parse(self.line, self.col(), message)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn bump(&mut self) {
        self.pos += 1;
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.bump();
                Ok(name)
            }
            _ => Err(self.err(format!("expected {}", what))),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Ident(name)) if name == word => {
                self.bump();
                Ok(())
            }
            _ => Err(self.err(format!("expected `{}`", word))),
        }
    }

    fn eat_keyword(&mut self, word: &str) -> bool {
        match self.peek() {
            Some(Tok::Ident(name)) if name == word => {
                self.bump();
                true
            }
            _ => false,
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {}", what)))
        }
    }

    fn int(&mut self) -> Result<i64> {
        let negative = if self.peek() == Some(&Tok::Minus) {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().and_then(moyal::lexer::tok_int) {
            Some(v) => {
                self.bump();
                Ok(if negative { -v } else { v })
            }
            None => Err(self.err("expected an integer")),
        }
    }

    fn uint(&mut self) -> Result<usize> {
        let v = self.int()?;
        if v < 0 {
            Err(self.err("expected a non-negative integer"))
        } else {
            Ok(v as usize)
        }
    }

    /// One expression operand: a power of an identifier, literal, or
    /// parenthesized expression.
    fn operand(&mut self) -> Result<Expr> {
        let rest = &self.toks[self.pos..];
        let mut parser = ExprParser::new(rest, self.line);
        let expr = parser.factor_operand()?;
        self.pos += parser.position();
        Ok(expr)
    }

    fn full_expr(&mut self) -> Result<Expr> {
        let rest = &self.toks[self.pos..];
        let mut parser = ExprParser::new(rest, self.line);
        let expr = parser.expr()?;
        self.pos += parser.position();
        Ok(expr)
    }

    /// Bracketed matrix of scalar expressions.
    fn matrix(&mut self) -> Result<Vec<Vec<Scalar>>> {
        self.expect(Tok::LBracket, "`[`")?;
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        if self.peek() == Some(&Tok::RBracket) {
            self.bump();
            return Ok(rows);
        }
        loop {
            let mut row: Vec<Scalar> = Vec::new();
            loop {
                let expr = self.full_expr()?;
                let value = eval_scalar(&expr, self.line, self.col())?;
                row.push(value);
                match self.peek() {
                    Some(Tok::Comma) => {
                        self.bump();
                    }
                    Some(Tok::Semicolon) | Some(Tok::RBracket) => break,
                    _ => return Err(self.err("expected `,`, `;`, or `]`")),
                }
            }
            rows.push(row);
            match self.peek() {
                Some(Tok::Semicolon) => {
                    self.bump();
                }
                Some(Tok::RBracket) => {
                    self.bump();
                    return Ok(rows);
                }
                _ => return Err(self.err("expected `;` or `]`")),
            }
        }
    }

    fn arrow_clauses(&mut self) -> Result<Vec<(String, Expr)>> {
        let mut clauses = Vec::new();
        if self.at_end() {
            return Ok(clauses);
        }
        loop {
            let gen = self.ident("a generator name")?;
            self.expect(Tok::Arrow, "`->`")?;
            let expr = self.full_expr()?;
            clauses.push((gen, expr));
            if self.peek() == Some(&Tok::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        Ok(clauses)
    }
}

/// Evaluate an expression in the empty context and return the scalar value.
fn eval_scalar(expr: &Expr, line: usize, col: usize) -> Result<Scalar> {
    let ctx = moyal::graded::Context::empty();
    let element = moyal::expr::eval_element(expr, &ctx, &|_| None).map_err(|e| match e {
        Error::UnknownGenerator(name) => Error::parse(
            line,
            col,
            format!("`{}` is not allowed in a scalar position", name),
        ),
        other => other,
    })?;
    let mut out = Scalar::zero();
    for (_, coeff) in element.terms() {
        out = out.add_ref(coeff);
    }
    Ok(out)
}

/// Parse one line into at most one statement.
pub fn parse_line(line: &str, line_no: usize) -> Result<Option<Statement>> {
    let toks = tokenize(line, line_no)?;
    if toks.is_empty() {
        return Ok(None);
    }
    let mut p = LineParser::new(&toks, line_no);
    let head = p.ident("a statement keyword")?;
    let stmt = match head.as_str() {
        "context" => {
            let name = p.ident("a context name")?;
            Statement::Context { name }
        }
        "generator" => {
            let name = p.ident("a generator name")?;
            p.keyword("deg")?;
            let degree = p.int()?;
            Statement::Generator { name, degree }
        }
        "diff" => {
            let name = p.ident("a derivation name")?;
            let degree = if p.eat_keyword("deg") {
                Some(p.int()?)
            } else {
                None
            };
            p.expect(Tok::Colon, "`:`")?;
            let clauses = p.arrow_clauses()?;
            Statement::Diff {
                name,
                degree,
                clauses,
            }
        }
        "morphism" => {
            let name = p.ident("a morphism name")?;
            p.expect(Tok::Colon, "`:`")?;
            let src = p.ident("a source context")?;
            p.expect(Tok::Arrow, "`->`")?;
            let tgt = p.ident("a target context")?;
            let clauses = if p.peek() == Some(&Tok::Comma) {
                p.bump();
                p.arrow_clauses()?
            } else {
                Vec::new()
            };
            Statement::Morphism {
                name,
                src,
                tgt,
                clauses,
            }
        }
        "let" => {
            let name = p.ident("a binding name")?;
            p.expect(Tok::Equals, "`=`")?;
            let expr = p.full_expr()?;
            Statement::Let { name, expr }
        }
        "show" => match p.peek() {
            Some(Tok::Ident(word)) if word == "star" => {
                p.bump();
                let a = p.operand()?;
                let b = p.operand()?;
                Statement::ShowStar { a, b }
            }
            Some(Tok::Ident(word)) if word == "map" => {
                p.bump();
                let name = p.ident("a map name")?;
                Statement::ShowMap { name }
            }
            Some(Tok::Ident(word)) if word == "coproduct" => {
                p.bump();
                let coalg = p.ident("a coalgebra name")?;
                let expr = p.operand()?;
                let deformed = p.eat_keyword("deformed");
                Statement::ShowCoproduct {
                    coalg,
                    expr,
                    deformed,
                }
            }
            Some(Tok::Ident(word)) if word == "lelem" => {
                p.bump();
                let name = p.ident("a Lie element name")?;
                Statement::ShowLelem { name }
            }
            _ => {
                let expr = p.full_expr()?;
                let deformed = p.eat_keyword("deformed");
                Statement::Show { expr, deformed }
            }
        },
        "config" => {
            let what = p.ident("`lambda`, `truncate`, or `diff`")?;
            match what.as_str() {
                "lambda" => {
                    let positive = match p.peek() {
                        Some(Tok::Plus) => {
                            p.bump();
                            true
                        }
                        Some(Tok::Minus) => {
                            p.bump();
                            false
                        }
                        _ => return Err(p.err("expected `+ih` or `-ih`")),
                    };
                    p.keyword("ih")?;
                    Statement::ConfigLambda { positive }
                }
                "truncate" => {
                    if p.eat_keyword("off") {
                        Statement::ConfigTruncate { order: None }
                    } else {
                        let order = p.uint()? as u32;
                        Statement::ConfigTruncate { order: Some(order) }
                    }
                }
                "diff" => {
                    let name = p.ident("a derivation name")?;
                    Statement::ConfigDiff { name }
                }
                other => {
                    return Err(p.err(format!("unknown config key `{}`", other)));
                }
            }
        }
        "check" => {
            let what = p.ident("a check kind")?;
            match what.as_str() {
                "differential" => Statement::CheckDifferential {
                    name: p.ident("a derivation name")?,
                },
                "assoc" => Statement::CheckAssoc {
                    a: p.operand()?,
                    b: p.operand()?,
                    c: p.operand()?,
                },
                "unit" => Statement::CheckUnit { a: p.operand()? },
                "leibniz" => Statement::CheckLeibniz {
                    a: p.operand()?,
                    b: p.operand()?,
                },
                "exactness" => Statement::CheckExactness {
                    a: p.operand()?,
                    b: p.operand()?,
                },
                "pauli" => Statement::CheckPauli {
                    a: p.operand()?,
                    b: p.operand()?,
                },
                "sequiv" => Statement::CheckSequiv {
                    a: p.operand()?,
                    b: p.operand()?,
                },
                "parity" => Statement::CheckParity {
                    a: p.operand()?,
                    b: p.operand()?,
                },
                "functorial" => Statement::CheckFunctorial {
                    morphism: p.ident("a morphism name")?,
                    a: p.operand()?,
                    b: p.operand()?,
                },
                "star" => {
                    let sub = p.ident("`assoc` or `bracket`")?;
                    match sub.as_str() {
                        "assoc" => Statement::CheckStarAssoc {
                            a: p.operand()?,
                            b: p.operand()?,
                            c: p.operand()?,
                        },
                        "bracket" => Statement::CheckStarBracket {
                            a: p.operand()?,
                            b: p.operand()?,
                        },
                        other => {
                            return Err(p.err(format!("unknown star check `{}`", other)))
                        }
                    }
                }
                "duality" => {
                    let ctx = p.ident("a context name")?;
                    let diff = p.ident("a derivation name")?;
                    let nilpotency = if p.eat_keyword("nilpotency") {
                        Some(p.uint()? as u32)
                    } else {
                        None
                    };
                    Statement::CheckDuality {
                        ctx,
                        diff,
                        nilpotency,
                    }
                }
                "dcompose" => {
                    let sub = p.ident("`assoc` or `unit`")?;
                    match sub.as_str() {
                        "assoc" => Statement::CheckDcomposeAssoc {
                            f: p.ident("a map name")?,
                            g: p.ident("a map name")?,
                            h: p.ident("a map name")?,
                        },
                        "unit" => Statement::CheckDcomposeUnit {
                            f: p.ident("a map name")?,
                        },
                        other => {
                            return Err(p.err(format!("unknown dcompose check `{}`", other)))
                        }
                    }
                }
                "absorption" => Statement::CheckAbsorption {
                    f: p.ident("a map name")?,
                },
                "jacobi" => {
                    let dgla = p.ident("a dgla name")?;
                    let deformed = p.eat_keyword("deformed");
                    Statement::CheckJacobi {
                        dgla,
                        deformed,
                        a: p.operand()?,
                        b: p.operand()?,
                        c: p.operand()?,
                    }
                }
                "dgla" => {
                    p.keyword("exact")?;
                    Statement::CheckDglaExact {
                        dgla: p.ident("a dgla name")?,
                        a: p.operand()?,
                        b: p.operand()?,
                        c: p.operand()?,
                    }
                }
                "coassoc" => Statement::CheckCoassoc {
                    coalg: p.ident("a coalgebra name")?,
                    expr: p.operand()?,
                },
                "cofunctorial" => Statement::CheckCofunctorial {
                    morphism: p.ident("a comorphism name")?,
                    expr: p.operand()?,
                },
                other => return Err(p.err(format!("unknown check `{}`", other))),
            }
        }
        "instance" => {
            let kind = p.ident("an instance name")?;
            match kind.as_str() {
                "derham" => {
                    let n = p.int()?;
                    p.keyword("as")?;
                    let ctx = p.ident("a context name")?;
                    p.keyword("diff")?;
                    let diff = p.ident("a derivation name")?;
                    Statement::InstanceDerham { n, ctx, diff }
                }
                "weyl_pair" => {
                    p.keyword("as")?;
                    let ctx = p.ident("a context name")?;
                    Statement::InstanceWeyl { ctx }
                }
                "truncated_dga" => {
                    p.keyword("as")?;
                    let ctx = p.ident("a context name")?;
                    p.keyword("diff")?;
                    let diff = p.ident("a derivation name")?;
                    Statement::InstanceTruncatedDga {
                        ctx,
                        diff,
                        wide: false,
                    }
                }
                "truncated_dga16" => {
                    p.keyword("as")?;
                    let ctx = p.ident("a context name")?;
                    p.keyword("diff")?;
                    let diff = p.ident("a derivation name")?;
                    Statement::InstanceTruncatedDga {
                        ctx,
                        diff,
                        wide: true,
                    }
                }
                other => return Err(p.err(format!("unknown instance `{}`", other))),
            }
        }
        "complex" => {
            let name = p.ident("a complex name")?;
            p.keyword("degrees")?;
            let lo = p.int()?;
            p.expect(Tok::DotDot, "`..`")?;
            let hi = p.int()?;
            p.keyword("dims")?;
            let mut dims = Vec::new();
            while !p.at_end() {
                dims.push(p.uint()?);
            }
            Statement::ComplexDecl { name, lo, hi, dims }
        }
        "boundary" => {
            let name = p.ident("a complex name")?;
            let degree = p.int()?;
            p.expect(Tok::Equals, "`=`")?;
            let matrix = p.matrix()?;
            Statement::Boundary {
                name,
                degree,
                matrix,
            }
        }
        "map" => {
            let name = p.ident("a map name")?;
            p.expect(Tok::Colon, "`:`")?;
            let src = p.ident("a complex name")?;
            p.expect(Tok::Arrow, "`->`")?;
            let tgt = p.ident("a complex name")?;
            p.keyword("deg")?;
            let degree = p.int()?;
            Statement::MapDecl {
                name,
                src,
                tgt,
                degree,
            }
        }
        "block" => {
            let name = p.ident("a map name")?;
            let degree = p.int()?;
            p.expect(Tok::Equals, "`=`")?;
            let matrix = p.matrix()?;
            Statement::Block {
                name,
                degree,
                matrix,
            }
        }
        "dgla" => {
            let name = p.ident("a dgla name")?;
            match p.peek() {
                Some(Tok::Ident(word)) if word == "from" => {
                    p.bump();
                    p.keyword("end")?;
                    let complex = p.ident("a complex name")?;
                    Statement::DglaFromEnd { name, complex }
                }
                Some(Tok::Ident(word)) if word == "degrees" => {
                    p.bump();
                    let mut degrees = Vec::new();
                    while !p.at_end() {
                        degrees.push(p.int()?);
                    }
                    Statement::DglaDecl { name, degrees }
                }
                _ => return Err(p.err("expected `from end` or `degrees`")),
            }
        }
        "bracket" => {
            let name = p.ident("a dgla name")?;
            let i = p.uint()?;
            let j = p.uint()?;
            let k = p.uint()?;
            p.expect(Tok::Equals, "`=`")?;
            let value = p.full_expr()?;
            Statement::BracketConst {
                name,
                i,
                j,
                k,
                value,
            }
        }
        "dgladiff" => {
            let name = p.ident("a dgla name")?;
            p.expect(Tok::Equals, "`=`")?;
            let matrix = p.matrix()?;
            Statement::DglaDiff { name, matrix }
        }
        "validate" => {
            let what = p.ident("`dgla` or `coalgebra`")?;
            match what.as_str() {
                "dgla" => Statement::ValidateDgla {
                    name: p.ident("a dgla name")?,
                },
                "coalgebra" => Statement::ValidateCoalgebra {
                    name: p.ident("a coalgebra name")?,
                },
                other => return Err(p.err(format!("cannot validate `{}`", other))),
            }
        }
        "lelem" => {
            let name = p.ident("an element name")?;
            p.keyword("in")?;
            let dgla = p.ident("a dgla name")?;
            p.expect(Tok::Equals, "`=`")?;
            let expr = p.full_expr()?;
            Statement::Lelem { name, dgla, expr }
        }
        "coalgebra" => {
            let name = p.ident("a coalgebra name")?;
            match p.peek() {
                Some(Tok::Ident(word)) if word == "degrees" => {
                    p.bump();
                    let mut degrees = Vec::new();
                    while !p.at_end() {
                        degrees.push(p.int()?);
                    }
                    Statement::CoalgebraDecl { name, degrees }
                }
                Some(Tok::Ident(word)) if word == "from" => {
                    p.bump();
                    p.keyword("dual")?;
                    let ctx = p.ident("a context name")?;
                    let diff = p.ident("a derivation name")?;
                    let nilpotency = if p.eat_keyword("nilpotency") {
                        Some(p.uint()? as u32)
                    } else {
                        None
                    };
                    Statement::CoalgebraFromDual {
                        name,
                        ctx,
                        diff,
                        nilpotency,
                    }
                }
                _ => return Err(p.err("expected `degrees` or `from dual`")),
            }
        }
        "delta" => {
            let name = p.ident("a coalgebra name")?;
            let i = p.uint()?;
            let j = p.uint()?;
            let k = p.uint()?;
            p.expect(Tok::Equals, "`=`")?;
            let value = p.full_expr()?;
            Statement::DeltaConst {
                name,
                i,
                j,
                k,
                value,
            }
        }
        "codiff" => {
            let name = p.ident("a coalgebra name")?;
            p.expect(Tok::Equals, "`=`")?;
            let matrix = p.matrix()?;
            Statement::Codiff { name, matrix }
        }
        "celem" => {
            let name = p.ident("an element name")?;
            p.keyword("in")?;
            let coalg = p.ident("a coalgebra name")?;
            p.expect(Tok::Equals, "`=`")?;
            let expr = p.full_expr()?;
            Statement::Celem { name, coalg, expr }
        }
        "comorphism" => {
            let name = p.ident("a comorphism name")?;
            p.expect(Tok::Colon, "`:`")?;
            let src = p.ident("a coalgebra name")?;
            p.expect(Tok::Arrow, "`->`")?;
            let tgt = p.ident("a coalgebra name")?;
            p.expect(Tok::Equals, "`=`")?;
            let matrix = p.matrix()?;
            Statement::Comorphism {
                name,
                src,
                tgt,
                matrix,
            }
        }
        "suite" => {
            let name = p.ident("a suite name")?;
            let mut params = Vec::new();
            while !p.at_end() {
                let key = p.ident("a parameter name")?;
                p.expect(Tok::Equals, "`=`")?;
                // Values are either numbers or short words like `+ih`.
                let value = match p.peek() {
                    Some(Tok::Int(n)) => {
                        let v = n.to_string();
                        p.bump();
                        v
                    }
                    Some(Tok::Minus) => {
                        p.bump();
                        match p.peek() {
                            Some(Tok::Int(n)) => {
                                let v = format!("-{}", n);
                                p.bump();
                                v
                            }
                            Some(Tok::Ident(w)) if w == "ih" => {
                                p.bump();
                                "-ih".to_string()
                            }
                            _ => return Err(p.err("expected a value")),
                        }
                    }
                    Some(Tok::Plus) => {
                        p.bump();
                        p.keyword("ih")?;
                        "+ih".to_string()
                    }
                    Some(Tok::Ident(w)) => {
                        let v = w.clone();
                        p.bump();
                        v
                    }
                    _ => return Err(p.err("expected a value")),
                };
                params.push((key, value));
            }
            Statement::Suite { name, params }
        }
        other => {
            return Err(Error::parse(
                line_no,
                1,
                format!("unknown statement `{}`", other),
            ))
        }
    };
    p.expect_end()?;
    Ok(Some(stmt))
}

/// Parse a whole script; statements keep their 1-based line numbers.
pub fn parse_script(text: &str) -> Result<Vec<(usize, Statement)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if let Some(stmt) = parse_line(line, idx + 1)? {
            out.push((idx + 1, stmt));
        }
    }
    Ok(out)
}
