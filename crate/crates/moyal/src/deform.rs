//! The first-order deformed product on graded algebras and the truncated
//! exponential Moyal-Weyl product.
//!
//! For an odd square-zero derivation `d` the deformed product is
//!
//! ```text
//! a *_d b = a*b + L * (-1)^{|a|} * da * db
//! ```
//!
//! computed per monomial-degree-homogeneous component of `a`. The
//! coefficient `L` is configurable: `+i*h` (the commutator-free convention)
//! and `-i*h` (the convention of `mu . exp(-i*h d (x) d)`) are both
//! associative, and the two differ exactly by `L -> -L`.
//!
//! The operations returning a "defect" compute the two sides of an identity
//! and return their difference, so a zero result is an exact mechanical
//! verification and a nonzero result is a counterexample witness.

use crate::error::{Error, Result};
use crate::graded::{AlgebraMorphism, Context, Derivation, Element, Monomial};
use crate::scalar::{rat, Scalar};
use std::collections::BTreeMap;
use std::fmt;

/// Coefficient and truncation settings for the deformed products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeformationConfig {
    lambda: Scalar,
    truncation_order: Option<u32>,
    /// Word length up to which derivation pairs are checked to commute
    /// (1 = generators, 2 = generators and quadratic monomials).
    commute_check_depth: u32,
}

impl DeformationConfig {
    /// The `L = +i*h` convention.
    pub fn standard() -> Self {
        DeformationConfig {
            lambda: Scalar::i() * Scalar::hbar(),
            truncation_order: None,
            commute_check_depth: 2,
        }
    }

    /// The `L = -i*h` convention used by the exponential product.
    pub fn negative() -> Self {
        DeformationConfig::standard().negated()
    }

    pub fn with_lambda(lambda: Scalar) -> Result<Self> {
        if lambda.is_zero() {
            return Err(Error::ZeroLambda);
        }
        Ok(DeformationConfig {
            lambda,
            ..DeformationConfig::standard()
        })
    }

    pub fn negated(&self) -> Self {
        DeformationConfig {
            lambda: self.lambda.neg_ref(),
            ..self.clone()
        }
    }

    pub fn truncated(mut self, order: u32) -> Self {
        self.truncation_order = Some(order);
        self
    }

    pub fn untruncated(mut self) -> Self {
        self.truncation_order = None;
        self
    }

    pub fn lambda(&self) -> &Scalar {
        &self.lambda
    }

    pub fn truncation_order(&self) -> Option<u32> {
        self.truncation_order
    }
}

impl Default for DeformationConfig {
    fn default() -> Self {
        DeformationConfig::standard()
    }
}

fn require_odd(d: &Derivation) -> Result<()> {
    if d.degree().rem_euclid(2) == 0 {
        Err(Error::EvenDegree(d.degree()))
    } else {
        Ok(())
    }
}

fn parity_sign(degree: i64) -> bool {
    degree.rem_euclid(2) == 1
}

/// `a *_d b`. Requires `d` odd; associativity additionally needs `d^2 = 0`,
/// which is deliberately not enforced here so that broken derivations can be
/// run as negative controls.
pub fn deformed_mul(
    a: &Element,
    b: &Element,
    d: &Derivation,
    cfg: &DeformationConfig,
) -> Result<Element> {
    require_odd(d)?;
    if a.context() != d.context() || b.context() != d.context() {
        return Err(Error::ContextMismatch);
    }
    let db = d.apply(b)?;
    let mut out = a.mul(b)?;
    for (degree, component) in a.components() {
        let da = d.apply(&component)?;
        let mut corr = da.mul(&db)?.scale(&cfg.lambda);
        if parity_sign(degree) {
            corr = corr.neg();
        }
        out = out.add(&corr)?;
    }
    Ok(out)
}

/// Associativity defect `a *_d (b *_d c) - (a *_d b) *_d c`; zero exactly
/// when `d` is a square-zero odd derivation.
pub fn associativity_defect(
    a: &Element,
    b: &Element,
    c: &Element,
    d: &Derivation,
    cfg: &DeformationConfig,
) -> Result<Element> {
    let left = deformed_mul(a, &deformed_mul(b, c, d, cfg)?, d, cfg)?;
    let right = deformed_mul(&deformed_mul(a, b, d, cfg)?, c, d, cfg)?;
    left.sub(&right)
}

/// The two exact rewritings of the correction term:
/// `w1 = L*(-1)^{|a|} d(a * db)` and
/// `w2 = (L/2) d(-da * b + (-1)^{|a|} a * db)`,
/// each evaluated per homogeneous component of `a`. For a square-zero `d`
/// both equal `a *_d b - a * b`.
pub fn exactness_witnesses(
    a: &Element,
    b: &Element,
    d: &Derivation,
    cfg: &DeformationConfig,
) -> Result<(Element, Element)> {
    require_odd(d)?;
    if a.context() != d.context() || b.context() != d.context() {
        return Err(Error::ContextMismatch);
    }
    let db = d.apply(b)?;
    let half = cfg.lambda.scale_rational(&rat(1, 2));
    let mut w1 = Element::zero(a.context());
    let mut w2 = Element::zero(a.context());
    for (degree, component) in a.components() {
        let odd = parity_sign(degree);
        let a_db = component.mul(&db)?;
        let mut first = d.apply(&a_db)?.scale(&cfg.lambda);
        if odd {
            first = first.neg();
        }
        w1 = w1.add(&first)?;

        let da_b = d.apply(&component)?.mul(b)?;
        let signed_a_db = if odd { a_db.neg() } else { a_db };
        let inner = signed_a_db.sub(&da_b)?;
        w2 = w2.add(&d.apply(&inner)?.scale(&half))?;
    }
    Ok((w1, w2))
}

/// Defect of `conj(a *_d b) = (-1)^{|a||b|} conj(b) *_d conj(a)`.
///
/// The identity holds exactly when `conj(L) = -L` (true for `L = +-i*h`),
/// `d` has real generator images, and the inputs are homogeneous with
/// coefficients in the `h`-subring.
pub fn weak_pauli_defect(
    a: &Element,
    b: &Element,
    d: &Derivation,
    cfg: &DeformationConfig,
) -> Result<Element> {
    let pa = a
        .homogeneous_degree()
        .ok_or(Error::NonHomogeneous)?;
    let pb = b
        .homogeneous_degree()
        .ok_or(Error::NonHomogeneous)?;
    let lhs = deformed_mul(a, b, d, cfg)?.conj()?;
    let mut rhs = deformed_mul(&b.conj()?, &a.conj()?, d, cfg)?;
    if parity_sign(pa) && parity_sign(pb) {
        rhs = rhs.neg();
    }
    lhs.sub(&rhs)
}

/// Defect of the transform equivalence `Sinv(Sa * Sb) = a *_d b` on inputs
/// whose components all have even degree.
///
/// `S = id + c*e*d` with `(c*e)^2 = L`: for `L = -i*h` the multiplier is
/// `c = 1` (since `e^2 = h/i = -i*h`), and for `L = +i*h` it is `c = i`.
/// Other coefficients have no square root of the form `c*e` in `Q(i)[e]`
/// and are rejected.
pub fn s_equivalence_defect(
    a: &Element,
    b: &Element,
    d: &Derivation,
    cfg: &DeformationConfig,
) -> Result<Element> {
    require_odd(d)?;
    for x in [a, b] {
        if x.monomial_degrees().iter().any(|p| parity_sign(*p)) {
            return Err(Error::OddComponentPresent);
        }
    }
    let ih = Scalar::i() * Scalar::hbar();
    let multiplier = if cfg.lambda == ih {
        Scalar::i() * Scalar::epsilon()
    } else if cfg.lambda == ih.neg_ref() {
        Scalar::epsilon()
    } else {
        return Err(Error::UnsupportedLambda(format!("{}", cfg.lambda)));
    };
    let s = |x: &Element| -> Result<Element> {
        x.add(&d.apply(x)?.scale(&multiplier))
    };
    let s_inv = |x: &Element| -> Result<Element> {
        x.sub(&d.apply(x)?.scale(&multiplier))
    };
    let via_s = s_inv(&s(a)?.mul(&s(b)?)?)?;
    via_s.sub(&deformed_mul(a, b, d, cfg)?)
}

/// Parity bookkeeping of a deformed product of pure-parity inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityReport {
    pub left_parity: bool,
    pub right_parity: bool,
    /// Expected output parity (sum of input parities mod 2).
    pub expected_parity: bool,
    /// Parities actually occurring in the product, with `h` counted as even.
    pub product_parities: Vec<bool>,
}

impl ParityReport {
    pub fn holds(&self) -> bool {
        self.product_parities
            .iter()
            .all(|p| *p == self.expected_parity)
    }
}

impl fmt::Display for ParityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = |p: bool| if p { "odd" } else { "even" };
        write!(
            f,
            "{} x {} -> {} ({})",
            word(self.left_parity),
            word(self.right_parity),
            word(self.expected_parity),
            if self.holds() { "closed" } else { "violated" }
        )
    }
}

fn pure_parity(x: &Element) -> Result<bool> {
    let mut parities = x.monomial_degrees().into_iter().map(parity_sign);
    let first = parities.next().ok_or(Error::MixedParityInput)?;
    if parities.all(|p| p == first) {
        Ok(first)
    } else {
        Err(Error::MixedParityInput)
    }
}

/// Verify that the deformed product of two pure-parity elements is a sum of
/// terms of the expected parity (`h` carries even parity, so the correction
/// term does not disturb it).
pub fn parity_closure_check(
    a: &Element,
    b: &Element,
    d: &Derivation,
    cfg: &DeformationConfig,
) -> Result<ParityReport> {
    let left = pure_parity(a)?;
    let right = pure_parity(b)?;
    let product = deformed_mul(a, b, d, cfg)?;
    let product_parities = product
        .monomial_degrees()
        .into_iter()
        .map(parity_sign)
        .collect();
    Ok(ParityReport {
        left_parity: left,
        right_parity: right,
        expected_parity: left != right,
        product_parities,
    })
}

/// Defect of `phi(a *_d b) = phi(a) *_d phi(b)` for a morphism that
/// intertwines the differentials (checked on generators first).
pub fn morphism_functoriality_defect(
    phi: &AlgebraMorphism,
    a: &Element,
    b: &Element,
    d_src: &Derivation,
    d_tgt: &Derivation,
    cfg: &DeformationConfig,
) -> Result<Element> {
    phi.check_chain_map(d_src, d_tgt)?;
    let lhs = phi.apply(&deformed_mul(a, b, d_src, cfg)?)?;
    let rhs = deformed_mul(&phi.apply(a)?, &phi.apply(b)?, d_tgt, cfg)?;
    lhs.sub(&rhs)
}

/// Element of the tensor square, used only to expand the exponential
/// product. Keys are monomial pairs; operator application inserts the
/// Koszul sign `(f (x) g)(v (x) w) = (-1)^{|g||v|} f(v) (x) g(w)`.
struct Tensor2 {
    ctx: Context,
    terms: BTreeMap<(Monomial, Monomial), Scalar>,
}

impl Tensor2 {
    fn from_pair(a: &Element, b: &Element) -> Tensor2 {
        let ctx = a.context().clone();
        let mut terms = BTreeMap::new();
        for (m1, s1) in a.terms() {
            for (m2, s2) in b.terms() {
                let c = s1.mul_ref(s2);
                if !c.is_zero() {
                    terms.insert((m1.clone(), m2.clone()), c);
                }
            }
        }
        Tensor2 { ctx, terms }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn accumulate(&mut self, key: (Monomial, Monomial), s: Scalar) {
        if s.is_zero() {
            return;
        }
        match self.terms.entry(key) {
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

    /// Apply `sum_i upper_i (x) lower_i` once.
    fn apply_pairs(&self, pairs: &[(Derivation, Derivation)]) -> Result<Tensor2> {
        let mut out = Tensor2 {
            ctx: self.ctx.clone(),
            terms: BTreeMap::new(),
        };
        for ((m1, m2), coeff) in &self.terms {
            let left = Element::from_terms(&self.ctx, vec![(m1.clone(), Scalar::one())]);
            let right = Element::from_terms(&self.ctx, vec![(m2.clone(), Scalar::one())]);
            let left_degree = self.ctx.monomial_degree(m1);
            for (upper, lower) in pairs {
                let sign = (lower.degree() * left_degree).rem_euclid(2) == 1;
                let du = upper.apply(&left)?;
                let dl = lower.apply(&right)?;
                for (mu, su) in du.terms() {
                    for (ml, sl) in dl.terms() {
                        let mut c = coeff.mul_ref(&su.mul_ref(sl));
                        if sign {
                            c = c.neg_ref();
                        }
                        out.accumulate((mu.clone(), ml.clone()), c);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Multiply the two tensor slots back into the algebra.
    fn contract(&self) -> Result<Element> {
        let mut out = Element::zero(&self.ctx);
        for ((m1, m2), coeff) in &self.terms {
            let left = Element::from_terms(&self.ctx, vec![(m1.clone(), Scalar::one())]);
            let right = Element::from_terms(&self.ctx, vec![(m2.clone(), Scalar::one())]);
            out = out.add(&left.mul(&right)?.scale(coeff))?;
        }
        Ok(out)
    }
}

/// Check that all listed derivations pairwise graded-commute, on generators
/// and (for depth 2) on quadratic monomials.
fn check_commuting(pairs: &[(Derivation, Derivation)], depth: u32) -> Result<()> {
    let mut flat: Vec<&Derivation> = Vec::new();
    for (u, l) in pairs {
        flat.push(u);
        flat.push(l);
    }
    let ctx = match flat.first() {
        Some(d) => d.context().clone(),
        None => return Ok(()),
    };
    let mut words: Vec<Element> = Vec::new();
    for idx in 0..ctx.len() {
        let g = Element::from_terms(
            &ctx,
            vec![(Monomial::generator(&ctx, idx), Scalar::one())],
        );
        words.push(g);
    }
    if depth >= 2 {
        let singles = words.clone();
        for (i, a) in singles.iter().enumerate() {
            for b in &singles[i..] {
                let prod = a.mul(b)?;
                if !prod.is_zero() {
                    words.push(prod);
                }
            }
        }
    }
    for i in 0..flat.len() {
        for j in (i + 1)..flat.len() {
            for w in &words {
                let defect = flat[i].commutator_on(flat[j], w)?;
                if !defect.is_zero() {
                    return Err(Error::NonCommutingDerivations {
                        i,
                        j,
                        witness: format!("{}", defect),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Truncated exponential product
/// `mu . exp(-L sum_i D^i (x) D_i)` applied to `a (x) b`, expanded through
/// `h`-order `N = cfg.truncation_order`:
///
/// ```text
/// a ? b = sum_{k=0}^{N} (-L)^k / k! * mu . (sum_i D^i (x) D_i)^k (a (x) b)
/// ```
///
/// Every coefficient is truncated at order `N`; exact rationals make the
/// `1/k!` factors safe. The listed derivations must pairwise commute.
pub fn moyal_weyl_mul(
    a: &Element,
    b: &Element,
    pairs: &[(Derivation, Derivation)],
    cfg: &DeformationConfig,
) -> Result<Element> {
    let order = cfg.truncation_order.ok_or(Error::MissingTruncationOrder)?;
    for (u, l) in pairs {
        if u.context() != a.context() || l.context() != a.context() {
            return Err(Error::ContextMismatch);
        }
    }
    if b.context() != a.context() {
        return Err(Error::ContextMismatch);
    }
    check_commuting(pairs, cfg.commute_check_depth)?;

    let minus_lambda = cfg.lambda.neg_ref();
    let mut acc = a.mul(b)?.truncate(order);
    let mut tensor = Tensor2::from_pair(a, b);
    let mut factor = Scalar::one();
    let mut factorial = rat(1, 1);
    for k in 1..=order {
        tensor = tensor.apply_pairs(pairs)?;
        if tensor.is_zero() {
            break;
        }
        factor = factor.mul_ref(&minus_lambda);
        factorial *= rat(i64::from(k), 1);
        let coeff = factor.scale_rational(&factorial.recip());
        let term = tensor.contract()?.scale(&coeff).truncate(order);
        acc = acc.add(&term)?;
    }
    Ok(acc.truncate(order))
}

/// Associativity defect of the exponential product, truncated at the
/// configured order.
pub fn moyal_associativity_defect(
    a: &Element,
    b: &Element,
    c: &Element,
    pairs: &[(Derivation, Derivation)],
    cfg: &DeformationConfig,
) -> Result<Element> {
    let order = cfg.truncation_order.ok_or(Error::MissingTruncationOrder)?;
    let left = moyal_weyl_mul(a, &moyal_weyl_mul(b, c, pairs, cfg)?, pairs, cfg)?;
    let right = moyal_weyl_mul(&moyal_weyl_mul(a, b, pairs, cfg)?, c, pairs, cfg)?;
    Ok(left.sub(&right)?.truncate(order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::de_rham;
    use crate::scalar::gauss_int;

    fn ih() -> Scalar {
        Scalar::i() * Scalar::hbar()
    }

    /// Context with one odd generator x and dx = y.
    fn odd_pair() -> (Context, Derivation) {
        let ctx = Context::new(vec![("x", 1), ("y", 2)]).unwrap();
        let d = Derivation::new(&ctx, 1, &[("x", Element::generator(&ctx, "y").unwrap())])
            .unwrap();
        d.validate_differential().unwrap();
        (ctx, d)
    }

    #[test]
    fn unit_absorbs() {
        let (ctx, d) = de_rham(2).unwrap();
        let cfg = DeformationConfig::standard();
        let a = crate::expr::parse_element("t1*dt2 + 2*t2", &ctx).unwrap();
        let one = Element::one(&ctx);
        assert_eq!(deformed_mul(&one, &a, &d, &cfg).unwrap(), a);
        assert_eq!(deformed_mul(&a, &one, &d, &cfg).unwrap(), a);
    }

    #[test]
    fn fermion_square_is_exact_boson() {
        // x *_d x = -i*h*y^2 for odd x with dx = y, and the same value comes
        // out of both exactness witnesses.
        let (ctx, d) = odd_pair();
        let cfg = DeformationConfig::standard();
        let x = Element::generator(&ctx, "x").unwrap();
        let y = Element::generator(&ctx, "y").unwrap();
        let prod = deformed_mul(&x, &x, &d, &cfg).unwrap();
        let expected = y.pow(2).scale(&ih().neg_ref());
        assert_eq!(prod, expected);

        let (w1, w2) = exactness_witnesses(&x, &x, &d, &cfg).unwrap();
        assert_eq!(w1, expected);
        assert_eq!(w2, expected);
    }

    #[test]
    fn even_pair_correction() {
        let (ctx, d) = de_rham(2).unwrap();
        let cfg = DeformationConfig::standard();
        let t1 = Element::generator(&ctx, "t1").unwrap();
        let t2 = Element::generator(&ctx, "t2").unwrap();
        let expected = crate::expr::parse_element("t1*t2 + i*h*dt1*dt2", &ctx).unwrap();
        assert_eq!(deformed_mul(&t1, &t2, &d, &cfg).unwrap(), expected);
    }

    #[test]
    fn associativity_holds_and_broken_d_fails() {
        let (ctx, d) = de_rham(3).unwrap();
        let cfg = DeformationConfig::standard();
        let a = crate::expr::parse_element("t1 + t2*dt3", &ctx).unwrap();
        let b = crate::expr::parse_element("dt1*dt2 - 3*t3", &ctx).unwrap();
        let c = crate::expr::parse_element("t1*t2*t3 + dt2", &ctx).unwrap();
        assert!(associativity_defect(&a, &b, &c, &d, &cfg)
            .unwrap()
            .is_zero());
        let one = Element::one(&ctx);
        assert!(associativity_defect(&one, &b, &c, &d, &cfg)
            .unwrap()
            .is_zero());

        // Non-square-zero control: x -> y -> z gives defect 4*L^2*y^2*z on
        // the triple (x, x, x).
        let ctx = Context::new(vec![("x", 1), ("y", 2), ("z", 3)]).unwrap();
        let broken = Derivation::new(
            &ctx,
            1,
            &[
                ("x", Element::generator(&ctx, "y").unwrap()),
                ("y", Element::generator(&ctx, "z").unwrap()),
            ],
        )
        .unwrap();
        let x = Element::generator(&ctx, "x").unwrap();
        let defect = associativity_defect(&x, &x, &x, &broken, &cfg).unwrap();
        let y = Element::generator(&ctx, "y").unwrap();
        let z = Element::generator(&ctx, "z").unwrap();
        let expected = y
            .pow(2)
            .mul(&z)
            .unwrap()
            .scale(&ih().pow(2).scale_rational(&rat(4, 1)));
        assert_eq!(defect, expected);
        assert!(!defect.is_zero());
    }

    #[test]
    fn closed_arguments_have_zero_witnesses() {
        let (ctx, d) = de_rham(2).unwrap();
        let cfg = DeformationConfig::standard();
        let closed_a = crate::expr::parse_element("dt1*dt2 + 4", &ctx).unwrap();
        let closed_b = crate::expr::parse_element("dt1 - dt2", &ctx).unwrap();
        let (w1, w2) = exactness_witnesses(&closed_a, &closed_b, &d, &cfg).unwrap();
        assert!(w1.is_zero());
        assert!(w2.is_zero());
    }

    #[test]
    fn witnesses_equal_correction_term() {
        let (ctx, d) = de_rham(2).unwrap();
        let cfg = DeformationConfig::standard();
        let a = crate::expr::parse_element("t1*t2 + dt1", &ctx).unwrap();
        let b = crate::expr::parse_element("t2*dt2 - i*t1", &ctx).unwrap();
        let correction = deformed_mul(&a, &b, &d, &cfg)
            .unwrap()
            .sub(&a.mul(&b).unwrap())
            .unwrap();
        let (w1, w2) = exactness_witnesses(&a, &b, &d, &cfg).unwrap();
        assert_eq!(w1, correction);
        assert_eq!(w2, correction);
    }

    #[test]
    fn weak_pauli_even_and_odd() {
        let (ctx, d) = de_rham(2).unwrap();
        for cfg in [DeformationConfig::standard(), DeformationConfig::negative()] {
            // bosons
            let b1 = crate::expr::parse_element("t1*t2 + (2+i)*h", &ctx).unwrap();
            let b2 = crate::expr::parse_element("3*t2 - i*t1*t1", &ctx).unwrap();
            assert!(weak_pauli_defect(&b1, &b2, &d, &cfg).unwrap().is_zero());
            // fermions
            let f1 = crate::expr::parse_element("t1*dt1 + 2i*dt2", &ctx).unwrap();
            let f2 = crate::expr::parse_element("dt1 - h*t2*dt2", &ctx).unwrap();
            assert!(weak_pauli_defect(&f1, &f2, &d, &cfg).unwrap().is_zero());
        }

        // h-free inputs with d = 0 reduce to graded commutativity.
        let zero_d = Derivation::zero(&ctx, 1);
        let cfg = DeformationConfig::standard();
        let f1 = crate::expr::parse_element("2*dt1", &ctx).unwrap();
        let f2 = crate::expr::parse_element("dt2 - 3*dt1", &ctx).unwrap();
        assert!(weak_pauli_defect(&f1, &f2, &zero_d, &cfg).unwrap().is_zero());

        let mixed = crate::expr::parse_element("t1 + dt1", &ctx).unwrap();
        assert_eq!(
            weak_pauli_defect(&mixed, &f2, &d, &cfg),
            Err(Error::NonHomogeneous)
        );
    }

    #[test]
    fn s_equivalence_both_conventions() {
        let (ctx, d) = de_rham(2).unwrap();
        let a = crate::expr::parse_element("t1*t2 + dt1*dt2", &ctx).unwrap();
        let b = crate::expr::parse_element("t2*t2 - 2*dt1*dt2 + 1/2", &ctx).unwrap();
        for cfg in [DeformationConfig::standard(), DeformationConfig::negative()] {
            let defect = s_equivalence_defect(&a, &b, &d, &cfg).unwrap();
            assert!(defect.is_zero(), "defect {} for L={}", defect, cfg.lambda());
        }
        let one = Element::one(&ctx);
        let cfg = DeformationConfig::standard();
        assert!(s_equivalence_defect(&one, &one, &d, &cfg).unwrap().is_zero());

        let odd = crate::expr::parse_element("dt1", &ctx).unwrap();
        assert_eq!(
            s_equivalence_defect(&odd, &b, &d, &cfg),
            Err(Error::OddComponentPresent)
        );

        let bad = DeformationConfig::with_lambda(Scalar::hbar()).unwrap();
        assert!(matches!(
            s_equivalence_defect(&a, &b, &d, &bad),
            Err(Error::UnsupportedLambda(_))
        ));
    }

    #[test]
    fn s_transform_matches_negative_convention_with_plain_epsilon() {
        // With S = id + e*d (multiplier 1), the transform reproduces the
        // L = e^2 = -i*h convention; this pins the sign relation down.
        let (ctx, d) = de_rham(2).unwrap();
        let t1 = Element::generator(&ctx, "t1").unwrap();
        let t2 = Element::generator(&ctx, "t2").unwrap();
        let eps = Scalar::epsilon();
        let s = |x: &Element| x.add(&d.apply(x).unwrap().scale(&eps)).unwrap();
        let s_inv = |x: &Element| x.sub(&d.apply(x).unwrap().scale(&eps)).unwrap();
        let via_s = s_inv(&s(&t1).mul(&s(&t2)).unwrap());
        let neg = deformed_mul(&t1, &t2, &d, &DeformationConfig::negative()).unwrap();
        let pos = deformed_mul(&t1, &t2, &d, &DeformationConfig::standard()).unwrap();
        assert_eq!(via_s, neg);
        assert_ne!(via_s, pos);
    }

    #[test]
    fn parity_closure() {
        let (ctx, d) = de_rham(2).unwrap();
        let cfg = DeformationConfig::standard();
        let odd1 = crate::expr::parse_element("dt1 + t1*dt2", &ctx).unwrap();
        let odd2 = crate::expr::parse_element("dt2", &ctx).unwrap();
        let even = crate::expr::parse_element("t1 + dt1*dt2", &ctx).unwrap();

        let r = parity_closure_check(&odd1, &odd2, &d, &cfg).unwrap();
        assert!(r.holds());
        assert!(!r.expected_parity);

        let r = parity_closure_check(&even, &odd2, &d, &cfg).unwrap();
        assert!(r.holds());
        assert!(r.expected_parity);

        let one = Element::one(&ctx);
        let r = parity_closure_check(&one, &odd2, &d, &cfg).unwrap();
        assert!(r.holds());
        assert!(r.expected_parity);

        let mixed = crate::expr::parse_element("t1 + dt1", &ctx).unwrap();
        assert_eq!(
            parity_closure_check(&mixed, &odd2, &d, &cfg),
            Err(Error::MixedParityInput)
        );
    }

    #[test]
    fn functoriality_through_inclusion() {
        let (src, d_src) = de_rham(1).unwrap();
        let (tgt, d_tgt) = de_rham(2).unwrap();
        let cfg = DeformationConfig::standard();
        let incl = AlgebraMorphism::new(
            &src,
            &tgt,
            &[
                ("t", Element::generator(&tgt, "t1").unwrap()),
                ("dt", Element::generator(&tgt, "dt1").unwrap()),
            ],
        )
        .unwrap();
        let a = crate::expr::parse_element("t^2 + dt", &src).unwrap();
        let b = crate::expr::parse_element("t*dt - 2i", &src).unwrap();
        let defect =
            morphism_functoriality_defect(&incl, &a, &b, &d_src, &d_tgt, &cfg).unwrap();
        assert!(defect.is_zero());

        let id = AlgebraMorphism::identity(&src);
        assert!(
            morphism_functoriality_defect(&id, &a, &b, &d_src, &d_src, &cfg)
                .unwrap()
                .is_zero()
        );

        // t -> t1 but dt -> dt2 does not intertwine the differentials.
        let bad = AlgebraMorphism::new(
            &src,
            &tgt,
            &[
                ("t", Element::generator(&tgt, "t1").unwrap()),
                ("dt", Element::generator(&tgt, "dt2").unwrap()),
            ],
        )
        .unwrap();
        assert!(matches!(
            morphism_functoriality_defect(&bad, &a, &b, &d_src, &d_tgt, &cfg),
            Err(Error::NotChainMap { .. })
        ));
    }

    fn weyl() -> (Context, Vec<(Derivation, Derivation)>) {
        let ctx = Context::new(vec![("q", 0), ("p", 0)]).unwrap();
        let ddp = Derivation::new(&ctx, 0, &[("p", Element::one(&ctx))]).unwrap();
        let ddq = Derivation::new(&ctx, 0, &[("q", Element::one(&ctx))]).unwrap();
        (ctx, vec![(ddp, ddq)])
    }

    #[test]
    fn weyl_pair_canonical_bracket() {
        let (ctx, pairs) = weyl();
        let cfg = DeformationConfig::standard().truncated(1);
        let q = Element::generator(&ctx, "q").unwrap();
        let p = Element::generator(&ctx, "p").unwrap();
        let qp = moyal_weyl_mul(&q, &p, &pairs, &cfg).unwrap();
        let pq = moyal_weyl_mul(&p, &q, &pairs, &cfg).unwrap();
        let bracket = qp.sub(&pq).unwrap();
        assert_eq!(bracket, Element::from_scalar(&ctx, ih()));
    }

    #[test]
    fn order_zero_is_plain_product() {
        let (ctx, pairs) = weyl();
        let cfg = DeformationConfig::standard().truncated(0);
        let a = crate::expr::parse_element("q^2*p + 3*q", &ctx).unwrap();
        let b = crate::expr::parse_element("p^2 - q", &ctx).unwrap();
        assert_eq!(
            moyal_weyl_mul(&a, &b, &pairs, &cfg).unwrap(),
            a.mul(&b).unwrap()
        );
    }

    #[test]
    fn missing_truncation_is_an_error() {
        let (ctx, pairs) = weyl();
        let q = Element::generator(&ctx, "q").unwrap();
        let cfg = DeformationConfig::standard();
        assert_eq!(
            moyal_weyl_mul(&q, &q, &pairs, &cfg),
            Err(Error::MissingTruncationOrder)
        );
    }

    #[test]
    fn single_square_zero_pair_terminates_and_matches_sign_convention() {
        // One pair (d, d) with d^2 = 0: the series stops at k = 1 and equals
        // the first-order product in the opposite-sign convention.
        let (ctx, d) = de_rham(2).unwrap();
        let pairs = vec![(d.clone(), d.clone())];
        let cfg = DeformationConfig::standard().truncated(4);
        let a = crate::expr::parse_element("t1*t2 + dt1", &ctx).unwrap();
        let b = crate::expr::parse_element("t2 + t1*dt2", &ctx).unwrap();
        let exponential = moyal_weyl_mul(&a, &b, &pairs, &cfg).unwrap();
        let first_order = deformed_mul(&a, &b, &d, &DeformationConfig::negative()).unwrap();
        assert_eq!(exponential, first_order);
    }

    #[test]
    fn two_pair_exponential_product() {
        // Two commuting pairs on a four-dimensional phase space. By hand:
        // p1*p2 ? q1*q2 expands through order two as
        //   p1*p2*q1*q2 - i*h*(p1*q1 + p2*q2) + (-i*h)^2/2 * 2
        // where the order-two factor counts the two cross terms of
        // (sum_i D^i (x) D_i)^2.
        let ctx = Context::new(vec![("q1", 0), ("q2", 0), ("p1", 0), ("p2", 0)]).unwrap();
        let gen = |n: &str| Element::generator(&ctx, n).unwrap();
        let dd = |n: &str| Derivation::new(&ctx, 0, &[(n, Element::one(&ctx))]).unwrap();
        let pairs = vec![(dd("p1"), dd("q1")), (dd("p2"), dd("q2"))];
        let cfg = DeformationConfig::standard().truncated(3);

        let f = gen("p1").mul(&gen("p2")).unwrap();
        let g = gen("q1").mul(&gen("q2")).unwrap();
        let product = moyal_weyl_mul(&f, &g, &pairs, &cfg).unwrap();

        let minus_ih = ih().neg_ref();
        let expected = f
            .mul(&g)
            .unwrap()
            .add(
                &gen("p1")
                    .mul(&gen("q1"))
                    .unwrap()
                    .add(&gen("p2").mul(&gen("q2")).unwrap())
                    .unwrap()
                    .scale(&minus_ih),
            )
            .unwrap()
            .add(&Element::from_scalar(&ctx, minus_ih.pow(2)))
            .unwrap();
        assert_eq!(product, expected);

        // Each pair contributes its own canonical bracket and the cross
        // brackets vanish.
        let bracket = |a: &Element, b: &Element| {
            moyal_weyl_mul(a, b, &pairs, &cfg)
                .unwrap()
                .sub(&moyal_weyl_mul(b, a, &pairs, &cfg).unwrap())
                .unwrap()
        };
        let ih_elem = Element::from_scalar(&ctx, ih());
        assert_eq!(bracket(&gen("q1"), &gen("p1")), ih_elem);
        assert_eq!(bracket(&gen("q2"), &gen("p2")), ih_elem);
        assert!(bracket(&gen("q1"), &gen("p2")).is_zero());
        assert!(bracket(&gen("q1"), &gen("q2")).is_zero());

        // Associativity through the truncation order on a mixed triple.
        let a = crate::expr::parse_element("q1*p2 + 2*q2", &ctx).unwrap();
        let b = crate::expr::parse_element("p1^2 - q2*p2", &ctx).unwrap();
        let c = crate::expr::parse_element("q1 + q2*p1", &ctx).unwrap();
        let defect = moyal_associativity_defect(&a, &b, &c, &pairs, &cfg).unwrap();
        assert!(defect.is_zero(), "defect {}", defect);
    }

    #[test]
    fn odd_pair_requires_square_zero_for_commutation() {
        // For an odd derivation the graded self-commutator is 2d^2, so the
        // pairwise-commutation gate of the exponential product rejects a
        // non-square-zero odd derivation.
        let ctx = Context::new(vec![("x", 1), ("y", 2), ("z", 3)]).unwrap();
        let broken = Derivation::new(
            &ctx,
            1,
            &[
                ("x", Element::generator(&ctx, "y").unwrap()),
                ("y", Element::generator(&ctx, "z").unwrap()),
            ],
        )
        .unwrap();
        let cfg = DeformationConfig::standard().truncated(2);
        let x = Element::generator(&ctx, "x").unwrap();
        assert!(matches!(
            moyal_weyl_mul(&x, &x, &[(broken.clone(), broken)], &cfg),
            Err(Error::NonCommutingDerivations { .. })
        ));
    }

    #[test]
    fn noncommuting_pairs_rejected() {
        let ctx = Context::new(vec![("q", 0), ("p", 0)]).unwrap();
        let q = Element::generator(&ctx, "q").unwrap();
        // u = d/dq and v = q*d/dq do not commute.
        let u = Derivation::new(&ctx, 0, &[("q", Element::one(&ctx))]).unwrap();
        let v = Derivation::new(&ctx, 0, &[("q", q.clone())]).unwrap();
        let cfg = DeformationConfig::standard().truncated(1);
        assert!(matches!(
            moyal_weyl_mul(&q, &q, &[(u, v)], &cfg),
            Err(Error::NonCommutingDerivations { .. })
        ));
    }

    #[test]
    fn hbar_grading_preserved() {
        let (ctx, d) = de_rham(2).unwrap();
        let cfg = DeformationConfig::standard();
        let a = crate::expr::parse_element("t1*dt1", &ctx).unwrap();
        let b = crate::expr::parse_element("dt2", &ctx).unwrap();
        let prod = deformed_mul(&a, &b, &d, &cfg).unwrap();
        assert_eq!(prod.weighted_degrees(), vec![2]);

        let scaled = a.scale(&Scalar::hbar());
        assert_eq!(scaled.weighted_degrees(), vec![-1]);
    }

    #[test]
    fn correction_ignores_closed_shifts() {
        let (ctx, d) = de_rham(2).unwrap();
        let cfg = DeformationConfig::standard();
        let a = crate::expr::parse_element("t1*dt2", &ctx).unwrap();
        let b = crate::expr::parse_element("t2*dt1 + t1", &ctx).unwrap();
        // A closed shift of the same degree: z = d(t1*t2) is exact, hence closed.
        let z = d
            .apply(&crate::expr::parse_element("t1*t2", &ctx).unwrap())
            .unwrap()
            .scale(&Scalar::from_gaussian(gauss_int(3, -2)));
        let shifted = a.add(&z).unwrap();
        let corr = |x: &Element| {
            deformed_mul(x, &b, &d, &cfg)
                .unwrap()
                .sub(&x.mul(&b).unwrap())
                .unwrap()
        };
        assert_eq!(corr(&a), corr(&shifted));
    }

    #[test]
    fn d_is_derivation_of_deformed_product() {
        let (ctx, d) = de_rham(2).unwrap();
        for cfg in [DeformationConfig::standard(), DeformationConfig::negative()] {
            let a = crate::expr::parse_element("t1*t2*dt1", &ctx).unwrap();
            let b = crate::expr::parse_element("t2 + dt2*dt1", &ctx).unwrap();
            let lhs = d.apply(&deformed_mul(&a, &b, &d, &cfg).unwrap()).unwrap();
            let mut rhs = deformed_mul(&d.apply(&a).unwrap(), &b, &d, &cfg).unwrap();
            for (degree, comp) in a.components() {
                let mut piece =
                    deformed_mul(&comp, &d.apply(&b).unwrap(), &d, &cfg).unwrap();
                if degree.rem_euclid(2) == 1 {
                    piece = piece.neg();
                }
                rhs = rhs.add(&piece).unwrap();
            }
            assert_eq!(lhs, rhs);
        }
    }
}
