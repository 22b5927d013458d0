//! Free graded-commutative algebras on integer-graded generators.
//!
//! Monomials are exponent vectors in a fixed generator order. Products of
//! generator words normalize to a signed stored monomial: moving two odd
//! generators past each other contributes `-1`, odd generators square to
//! zero, and even generators commute freely. This makes equality of elements
//! a map comparison and keeps every Koszul sign in one place
//! ([`GradedContext::mul_monomials`]).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lexer::is_reserved;
use crate::scalar::{join_terms, render_term, Scalar};

/// A named generator with an integer degree. Parity (`degree mod 2`)
/// determines commutation behavior; all generators are real.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub degree: i64,
}

/// Shared, immutable list of generators fixing the monomial order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextData {
    generators: Vec<Generator>,
}

/// Cheaply cloneable handle to a generator context. Two contexts are equal
/// when their generator lists are equal.
#[derive(Debug, Clone)]
pub struct Context(Arc<ContextData>);

impl PartialEq for Context {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}
impl Eq for Context {}

fn valid_ident(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Context {
    pub fn new(generators: Vec<(impl Into<String>, i64)>) -> Result<Context> {
        let gens: Vec<Generator> = generators
            .into_iter()
            .map(|(name, degree)| Generator {
                name: name.into(),
                degree,
            })
            .collect();
        for (idx, g) in gens.iter().enumerate() {
            if !valid_ident(&g.name) || is_reserved(&g.name) {
                return Err(Error::BadGeneratorName(g.name.clone()));
            }
            if gens[..idx].iter().any(|other| other.name == g.name) {
                return Err(Error::BadGeneratorName(g.name.clone()));
            }
        }
        Ok(Context(Arc::new(ContextData { generators: gens })))
    }

    /// The empty context; its elements are exactly the scalars.
    pub fn empty() -> Context {
        Context(Arc::new(ContextData { generators: vec![] }))
    }

    pub fn generators(&self) -> &[Generator] {
        &self.0.generators
    }

    pub fn len(&self) -> usize {
        self.0.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.generators.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.generators.iter().position(|g| g.name == name)
    }

    pub fn degree_of(&self, idx: usize) -> i64 {
        self.0.generators[idx].degree
    }

    fn odd(&self, idx: usize) -> bool {
        self.degree_of(idx).rem_euclid(2) == 1
    }

    pub fn monomial_degree(&self, m: &Monomial) -> i64 {
        m.exps
            .iter()
            .enumerate()
            .map(|(i, e)| self.degree_of(i) * i64::from(*e))
            .sum()
    }

    /// Normalized product of two stored monomials: `None` when an odd
    /// generator squares to zero, otherwise the Koszul sign and the merged
    /// exponent vector. The sign counts, for every odd generator of `b`,
    /// the odd generators of `a` it must move past (those strictly later in
    /// the context order).
    pub fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(i8, Monomial)> {
        debug_assert_eq!(a.exps.len(), self.len());
        debug_assert_eq!(b.exps.len(), self.len());
        // Suffix counts of odd exponents in `a`: each odd generator of `b`
        // moves left past every strictly later odd generator of `a`.
        let mut suffix = vec![0u64; self.len() + 1];
        for i in (0..self.len()).rev() {
            suffix[i] = suffix[i + 1]
                + if self.odd(i) {
                    u64::from(a.exps[i])
                } else {
                    0
                };
        }
        let mut swaps: u64 = 0;
        let mut exps = vec![0u32; self.len()];
        for i in 0..self.len() {
            let (ea, eb) = (a.exps[i], b.exps[i]);
            if self.odd(i) {
                if ea + eb > 1 {
                    return None;
                }
                if eb == 1 {
                    swaps += suffix[i + 1];
                }
            }
            exps[i] = ea + eb;
        }
        let sign = if swaps % 2 == 0 { 1 } else { -1 };
        Some((sign, Monomial { exps }))
    }
}

/// Exponent vector in the context's generator order. Odd generators carry
/// exponent at most one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn unit(ctx: &Context) -> Monomial {
        Monomial {
            exps: vec![0; ctx.len()],
        }
    }

    pub fn generator(ctx: &Context, idx: usize) -> Monomial {
        let mut exps = vec![0; ctx.len()];
        exps[idx] = 1;
        Monomial { exps }
    }

    pub fn from_exps(exps: Vec<u32>) -> Monomial {
        Monomial { exps }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn is_unit(&self) -> bool {
        self.exps.iter().all(|e| *e == 0)
    }

    fn factors(&self, ctx: &Context) -> Vec<String> {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, e)| **e > 0)
            .map(|(i, e)| {
                let name = &ctx.generators()[i].name;
                if *e == 1 {
                    name.clone()
                } else {
                    format!("{}^{}", name, e)
                }
            })
            .collect()
    }
}

/// Finite linear combination of monomials over [`Scalar`]. May be
/// non-homogeneous; operations that need parity decompose it first.
#[derive(Clone, PartialEq, Eq)]
pub struct Element {
    ctx: Context,
    terms: BTreeMap<Monomial, Scalar>,
}

impl Element {
    pub fn zero(ctx: &Context) -> Element {
        Element {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: &Context) -> Element {
        Element::from_scalar(ctx, Scalar::one())
    }

    pub fn from_scalar(ctx: &Context, s: Scalar) -> Element {
        let mut e = Element::zero(ctx);
        e.accumulate(Monomial::unit(ctx), s);
        e
    }

    pub fn generator(ctx: &Context, name: &str) -> Result<Element> {
        let idx = ctx
            .index_of(name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
        let mut e = Element::zero(ctx);
        e.accumulate(Monomial::generator(ctx, idx), Scalar::one());
        Ok(e)
    }

    pub fn from_terms(ctx: &Context, terms: Vec<(Monomial, Scalar)>) -> Element {
        let mut e = Element::zero(ctx);
        for (m, s) in terms {
            e.accumulate(m, s);
        }
        e
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn accumulate(&mut self, m: Monomial, s: Scalar) {
        if s.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(s);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add_ref(&s);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_ctx(&self, other: &Element) -> Result<()> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.check_ctx(other)?;
        let mut out = self.clone();
        for (m, s) in &other.terms {
            out.accumulate(m.clone(), s.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Element {
        Element {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, s)| (m.clone(), s.neg_ref()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> Element {
        let mut out = Element::zero(&self.ctx);
        for (m, c) in &self.terms {
            out.accumulate(m.clone(), c.mul_ref(s));
        }
        out
    }

    /// The graded-commutative product: bilinear extension of the signed
    /// monomial product.
    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.check_ctx(other)?;
        let mut out = Element::zero(&self.ctx);
        for (m1, s1) in &self.terms {
            for (m2, s2) in &other.terms {
                if let Some((sign, m)) = self.ctx.mul_monomials(m1, m2) {
                    let mut c = s1.mul_ref(s2);
                    if sign < 0 {
                        c = c.neg_ref();
                    }
                    out.accumulate(m, c);
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Element {
        let mut acc = Element::one(&self.ctx);
        for _ in 0..n {
            acc = acc.mul(self).expect("same context");
        }
        acc
    }

    /// Coefficient-wise conjugation; generators are real. Fails on
    /// coefficients outside the `h`-subring.
    pub fn conj(&self) -> Result<Element> {
        let mut out = Element::zero(&self.ctx);
        for (m, s) in &self.terms {
            out.accumulate(m.clone(), s.conj()?);
        }
        Ok(out)
    }

    /// Truncate every coefficient at the given `h`-order.
    pub fn truncate(&self, order: u32) -> Element {
        let mut out = Element::zero(&self.ctx);
        for (m, s) in &self.terms {
            out.accumulate(m.clone(), s.truncate(order));
        }
        out
    }

    /// Split into monomial-degree homogeneous components, ascending.
    pub fn components(&self) -> Vec<(i64, Element)> {
        let mut by_degree: BTreeMap<i64, Element> = BTreeMap::new();
        for (m, s) in &self.terms {
            let d = self.ctx.monomial_degree(m);
            by_degree
                .entry(d)
                .or_insert_with(|| Element::zero(&self.ctx))
                .accumulate(m.clone(), s.clone());
        }
        by_degree.into_iter().collect()
    }

    /// Monomial degree when all terms agree; `None` for zero or mixed.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut degs = self
            .terms
            .keys()
            .map(|m| self.ctx.monomial_degree(m));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// Monomial degrees occurring in this element.
    pub fn monomial_degrees(&self) -> Vec<i64> {
        let mut degs: Vec<i64> = self
            .terms
            .keys()
            .map(|m| self.ctx.monomial_degree(m))
            .collect();
        degs.sort_unstable();
        degs.dedup();
        degs
    }

    /// Degrees with `h` counted as degree `-2` (so `e` counts as `-1`),
    /// one entry per printed term.
    pub fn weighted_degrees(&self) -> Vec<i64> {
        let mut out: Vec<i64> = Vec::new();
        for (m, s) in &self.terms {
            let base = self.ctx.monomial_degree(m);
            for (exp, _) in s.terms() {
                out.push(base - i64::from(exp));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Terms sorted by (total monomial degree, exponent vector), then by
        // e-exponent within a monomial. This ordering is part of the text
        // format contract.
        let mut keyed: Vec<(&Monomial, &Scalar)> = self.terms.iter().collect();
        keyed.sort_by_key(|(m, _)| (self.ctx.monomial_degree(m), (*m).clone()));
        let mut rendered = Vec::new();
        for (m, s) in keyed {
            let factors = m.factors(&self.ctx);
            for (exp, g) in s.terms() {
                rendered.push(render_term(exp, g, &factors));
            }
        }
        write!(f, "{}", join_terms(&rendered))
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Degree-homogeneous map given on generators and extended by the graded
/// Leibniz rule `D(ab) = Da*b + (-1)^{|D||a|} a*Db`.
#[derive(Clone, PartialEq, Eq)]
pub struct Derivation {
    ctx: Context,
    degree: i64,
    images: Vec<Element>,
}

impl Derivation {
    /// Build from generator images; generators missing from `images` map to
    /// zero. Nonzero images must be homogeneous of degree
    /// `|generator| + degree`.
    pub fn new(ctx: &Context, degree: i64, images: &[(&str, Element)]) -> Result<Derivation> {
        let mut by_index: Vec<Element> = (0..ctx.len()).map(|_| Element::zero(ctx)).collect();
        for (name, img) in images {
            let idx = ctx
                .index_of(name)
                .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
            if img.context() != ctx {
                return Err(Error::ContextMismatch);
            }
            if !img.is_zero() {
                let expected = ctx.degree_of(idx) + degree;
                match img.homogeneous_degree() {
                    Some(d) if d == expected => {}
                    _ => {
                        return Err(Error::ImageDegree {
                            generator: name.to_string(),
                            expected,
                            found: format!("{}", img),
                        })
                    }
                }
            }
            by_index[idx] = img.clone();
        }
        Ok(Derivation {
            ctx: ctx.clone(),
            degree,
            images: by_index,
        })
    }

    pub fn zero(ctx: &Context, degree: i64) -> Derivation {
        Derivation {
            ctx: ctx.clone(),
            degree,
            images: (0..ctx.len()).map(|_| Element::zero(ctx)).collect(),
        }
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn image(&self, idx: usize) -> &Element {
        &self.images[idx]
    }

    /// Leibniz extension to arbitrary elements.
    pub fn apply(&self, a: &Element) -> Result<Element> {
        if a.context() != &self.ctx {
            return Err(Error::ContextMismatch);
        }
        let odd_derivation = self.degree.rem_euclid(2) == 1;
        let mut out = Element::zero(&self.ctx);
        for (m, coeff) in a.terms() {
            // Walk the factors of the monomial left to right; the factor hit
            // by D picks up (-1)^{|D| * |prefix|}.
            let mut prefix_degree: i64 = 0;
            for (j, e) in m.exps().iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                let img = &self.images[j];
                if !img.is_zero() {
                    let mut left = m.exps().to_vec();
                    left[j] -= 1;
                    for slot in left.iter_mut().skip(j + 1) {
                        *slot = 0;
                    }
                    let mut right = vec![0u32; m.exps().len()];
                    right[(j + 1)..].copy_from_slice(&m.exps()[(j + 1)..]);
                    let left = Element::from_terms(
                        &self.ctx,
                        vec![(Monomial::from_exps(left), Scalar::one())],
                    );
                    let right = Element::from_terms(
                        &self.ctx,
                        vec![(Monomial::from_exps(right), Scalar::one())],
                    );
                    let mut piece = left.mul(img)?.mul(&right)?;
                    // Multiplicity of the even-generator power rule
                    // D(g^e) = e * g^{e-1} * Dg.
                    piece = piece.scale(&Scalar::from_int(i64::from(*e)));
                    let sign_exp = if odd_derivation {
                        prefix_degree.rem_euclid(2)
                    } else {
                        0
                    };
                    if sign_exp == 1 {
                        piece = piece.neg();
                    }
                    let piece = piece.scale(coeff);
                    out = out.add(&piece)?;
                }
                prefix_degree += self.ctx.degree_of(j) * i64::from(*e);
            }
        }
        Ok(out)
    }

    /// Check `D(D(g)) = 0` on every generator. Since `D^2 = [D,D]/2` is
    /// itself a derivation, vanishing on generators already forces `D^2 = 0`
    /// on the whole algebra; the returned report records that.
    pub fn validate_differential(&self) -> Result<DifferentialReport> {
        if self.degree.rem_euclid(2) == 0 {
            return Err(Error::EvenDegree(self.degree));
        }
        for (idx, g) in self.ctx.generators().iter().enumerate() {
            let square = self.apply(&self.images[idx])?;
            if !square.is_zero() {
                return Err(Error::NotSquareZero {
                    generator: g.name.clone(),
                    witness: format!("{}", square),
                });
            }
        }
        Ok(DifferentialReport {
            generators_checked: self.ctx.len(),
        })
    }

    /// Graded commutator `[self, other] = D D' - (-1)^{|D||D'|} D' D` applied
    /// to an element.
    pub fn commutator_on(&self, other: &Derivation, a: &Element) -> Result<Element> {
        let first = self.apply(&other.apply(a)?)?;
        let second = other.apply(&self.apply(a)?)?;
        let sign = (self.degree * other.degree).rem_euclid(2);
        if sign == 0 {
            first.sub(&second)
        } else {
            first.add(&second)
        }
    }
}

/// Outcome of [`Derivation::validate_differential`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentialReport {
    pub generators_checked: usize,
}

impl fmt::Display for DifferentialReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "d^2 = 0 on all {} generators; d^2 = [d,d]/2 is a derivation, so d^2 = 0 everywhere",
            self.generators_checked
        )
    }
}

/// Degree-preserving multiplicative map fixed by its generator images.
#[derive(Clone, PartialEq, Eq)]
pub struct AlgebraMorphism {
    source: Context,
    target: Context,
    images: Vec<Element>,
}

impl AlgebraMorphism {
    pub fn new(
        source: &Context,
        target: &Context,
        images: &[(&str, Element)],
    ) -> Result<AlgebraMorphism> {
        let mut by_index: Vec<Element> = (0..source.len())
            .map(|_| Element::zero(target))
            .collect();
        for (name, img) in images {
            let idx = source
                .index_of(name)
                .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
            if img.context() != target {
                return Err(Error::ContextMismatch);
            }
            if !img.is_zero() {
                let expected = source.degree_of(idx);
                match img.homogeneous_degree() {
                    Some(d) if d == expected => {}
                    _ => {
                        return Err(Error::ImageDegree {
                            generator: name.to_string(),
                            expected,
                            found: format!("{}", img),
                        })
                    }
                }
            }
            by_index[idx] = img.clone();
        }
        Ok(AlgebraMorphism {
            source: source.clone(),
            target: target.clone(),
            images: by_index,
        })
    }

    pub fn identity(ctx: &Context) -> AlgebraMorphism {
        let images: Vec<Element> = (0..ctx.len())
            .map(|i| {
                Element::from_terms(ctx, vec![(Monomial::generator(ctx, i), Scalar::one())])
            })
            .collect();
        AlgebraMorphism {
            source: ctx.clone(),
            target: ctx.clone(),
            images,
        }
    }

    pub fn source(&self) -> &Context {
        &self.source
    }

    pub fn target(&self) -> &Context {
        &self.target
    }

    /// Multiplicative-linear extension of the generator images.
    pub fn apply(&self, a: &Element) -> Result<Element> {
        if a.context() != &self.source {
            return Err(Error::ContextMismatch);
        }
        let mut out = Element::zero(&self.target);
        for (m, s) in a.terms() {
            let mut factor = Element::one(&self.target);
            for (idx, e) in m.exps().iter().enumerate() {
                for _ in 0..*e {
                    factor = factor.mul(&self.images[idx])?;
                }
            }
            out = out.add(&factor.scale(s))?;
        }
        Ok(out)
    }

    /// Verify `phi . d_src = d_tgt . phi` on every generator.
    pub fn check_chain_map(&self, d_src: &Derivation, d_tgt: &Derivation) -> Result<()> {
        for (idx, g) in self.source.generators().iter().enumerate() {
            let gen = Element::from_terms(
                &self.source,
                vec![(Monomial::generator(&self.source, idx), Scalar::one())],
            );
            let lhs = self.apply(&d_src.apply(&gen)?)?;
            let rhs = d_tgt.apply(&self.images[idx])?;
            let defect = lhs.sub(&rhs)?;
            if !defect.is_zero() {
                return Err(Error::NotChainMap {
                    generator: g.name.clone(),
                    witness: format!("{}", defect),
                });
            }
        }
        Ok(())
    }
}

/// Polynomial de Rham context: `t1..tn` in degree 0, `dt1..dtn` in degree 1,
/// with `d(ti) = dti` and `d(dti) = 0`. For `n = 1` the generators are named
/// `t` and `dt`.
pub fn de_rham(n: usize) -> Result<(Context, Derivation)> {
    if n == 0 {
        return Err(Error::ParamOutOfRange("de Rham rank must be >= 1".into()));
    }
    let mut gens: Vec<(String, i64)> = Vec::new();
    let name = |prefix: &str, k: usize| {
        if n == 1 {
            prefix.to_string()
        } else {
            format!("{}{}", prefix, k + 1)
        }
    };
    for k in 0..n {
        gens.push((name("t", k), 0));
    }
    for k in 0..n {
        gens.push((name("dt", k), 1));
    }
    let ctx = Context::new(gens)?;
    let mut images = Vec::new();
    let mut owned: Vec<(String, Element)> = Vec::new();
    for k in 0..n {
        owned.push((name("t", k), Element::generator(&ctx, &name("dt", k))?));
    }
    for (name, img) in &owned {
        images.push((name.as_str(), img.clone()));
    }
    let d = Derivation::new(&ctx, 1, &images)?;
    d.validate_differential()?;
    Ok((ctx, d))
}
