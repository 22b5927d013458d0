//! The exact coefficient ring `Q(i)[e]` with `h = i*e^2`.
//!
//! A [`Scalar`] is a polynomial in the formal symbol `e` (the adjoined square
//! root of `h/i`) with Gaussian-rational coefficients. The deformation
//! parameter `h` is the derived quantity `i*e^2`, so both `h` and the
//! transform coefficient `e` live in a single ring and no extension is ever
//! needed at use-site. Even powers of `e` are displayed as powers of `h`
//! (`h^k = i^k * e^{2k}`), which keeps the printed form in the familiar
//! `... + (1-2i)*h^2` shape.
//!
//! All arithmetic is exact: coefficients are `num_rational` big rationals
//! and no operation ever rounds.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number with arbitrary-precision integers.
pub type Rational = num_rational::BigRational;

/// Element of `Q(i)`: `re + im*i` with exact rational parts.
pub type GaussianRational = num_complex::Complex<Rational>;

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational `n/d`. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Gaussian rational `re + im*i` from integers.
pub fn gauss_int(re: i64, im: i64) -> GaussianRational {
    GaussianRational::new(rat_int(re), rat_int(im))
}

/// `(-i)^k`, reduced through the period-four cycle.
fn neg_i_pow(k: u32) -> GaussianRational {
    match k % 4 {
        0 => gauss_int(1, 0),
        1 => gauss_int(0, -1),
        2 => gauss_int(-1, 0),
        _ => gauss_int(0, 1),
    }
}

/// `i^k`.
fn i_pow(k: u32) -> GaussianRational {
    match k % 4 {
        0 => gauss_int(1, 0),
        1 => gauss_int(0, 1),
        2 => gauss_int(-1, 0),
        _ => gauss_int(0, -1),
    }
}

/// Polynomial in `e` over `Q(i)`, the coefficient ring of every module.
///
/// Invariant: no explicitly stored zero coefficients, so equality of maps is
/// equality of ring elements and `a - a` normalizes to the empty map.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Scalar {
    coeffs: BTreeMap<u32, GaussianRational>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_gaussian(gauss_int(1, 0))
    }

    pub fn i() -> Self {
        Scalar::from_gaussian(gauss_int(0, 1))
    }

    /// The adjoined square root of `h/i`.
    pub fn epsilon() -> Self {
        Scalar::term(1, gauss_int(1, 0))
    }

    /// The deformation parameter `h = i*e^2`.
    pub fn hbar() -> Self {
        Scalar::term(2, gauss_int(0, 1))
    }

    /// `h^k`, stored as `i^k * e^{2k}`.
    pub fn hbar_pow(k: u32) -> Self {
        Scalar::term(2 * k, i_pow(k))
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_gaussian(gauss_int(n, 0))
    }

    pub fn from_rational(r: Rational) -> Self {
        Scalar::from_gaussian(GaussianRational::new(r, Rational::zero()))
    }

    pub fn from_gaussian(g: GaussianRational) -> Self {
        Scalar::term(0, g)
    }

    /// Single term `g * e^exp`.
    pub fn term(exp: u32, g: GaussianRational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !g.is_zero() {
            coeffs.insert(exp, g);
        }
        Scalar { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1
            && self
                .coeffs
                .get(&0)
                .map(|g| g == &gauss_int(1, 0))
                .unwrap_or(false)
    }

    /// Terms as `(e-exponent, coefficient)` pairs in increasing exponent.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &GaussianRational)> {
        self.coeffs.iter().map(|(k, g)| (*k, g))
    }

    /// Coefficient of `e^exp` (zero if absent).
    pub fn coeff(&self, exp: u32) -> GaussianRational {
        self.coeffs
            .get(&exp)
            .cloned()
            .unwrap_or_else(GaussianRational::zero)
    }

    /// The `e^0` part.
    pub fn constant_part(&self) -> GaussianRational {
        self.coeff(0)
    }

    /// True when only even powers of `e` occur, i.e. the value lies in the
    /// subring `Q(i)[h]`.
    pub fn in_hbar_subring(&self) -> bool {
        self.coeffs.keys().all(|k| k % 2 == 0)
    }

    fn insert_add(coeffs: &mut BTreeMap<u32, GaussianRational>, exp: u32, g: GaussianRational) {
        if g.is_zero() {
            return;
        }
        match coeffs.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(g);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + g;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_ref(&self, other: &Scalar) -> Scalar {
        let mut coeffs = self.coeffs.clone();
        for (k, g) in &other.coeffs {
            Self::insert_add(&mut coeffs, *k, g.clone());
        }
        Scalar { coeffs }
    }

    pub fn sub_ref(&self, other: &Scalar) -> Scalar {
        self.add_ref(&other.neg_ref())
    }

    pub fn neg_ref(&self) -> Scalar {
        Scalar {
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, g)| (*k, -g.clone()))
                .collect(),
        }
    }

    pub fn mul_ref(&self, other: &Scalar) -> Scalar {
        let mut coeffs = BTreeMap::new();
        for (k1, g1) in &self.coeffs {
            for (k2, g2) in &other.coeffs {
                Self::insert_add(&mut coeffs, k1 + k2, g1.clone() * g2.clone());
            }
        }
        Scalar { coeffs }
    }

    pub fn scale_gaussian(&self, g: &GaussianRational) -> Scalar {
        if g.is_zero() {
            return Scalar::zero();
        }
        Scalar {
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, c)| (*k, c.clone() * g.clone()))
                .collect(),
        }
    }

    pub fn scale_rational(&self, r: &Rational) -> Scalar {
        self.scale_gaussian(&GaussianRational::new(r.clone(), Rational::zero()))
    }

    pub fn pow(&self, n: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..n {
            acc = acc.mul_ref(self);
        }
        acc
    }

    /// Complex conjugation on the subring `Q(i)[h]`: `i -> -i` on
    /// coefficients with `h` held fixed. A term `g*e^{2k}` equals
    /// `g*(-i)^k*h^k`, so the conjugate stores `conj(g*(-i)^k)*i^k` at the
    /// same exponent. Genuine odd powers of `e` have no canonical conjugate
    /// here and are rejected.
    pub fn conj(&self) -> Result<Scalar> {
        if !self.in_hbar_subring() {
            return Err(Error::OddEpsilonPower);
        }
        let mut coeffs = BTreeMap::new();
        for (exp, g) in &self.coeffs {
            let k = exp / 2;
            let displayed = g.clone() * neg_i_pow(k);
            let stored = displayed.conj() * i_pow(k);
            Self::insert_add(&mut coeffs, *exp, stored);
        }
        Ok(Scalar { coeffs })
    }

    /// Drop all terms of `h`-degree greater than `order` (the `h`-degree of
    /// `e^m` is `m/2`).
    pub fn truncate(&self, order: u32) -> Scalar {
        Scalar {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| **k <= 2 * order)
                .map(|(k, g)| (*k, g.clone()))
                .collect(),
        }
    }

    /// Largest `e`-exponent with a nonzero coefficient.
    pub fn eps_degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        self.add_ref(&rhs)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self.sub_ref(&rhs)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        self.mul_ref(&rhs)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

impl Zero for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
}

impl One for Scalar {
    fn one() -> Self {
        Scalar::one()
    }
}

pub(crate) fn render_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rendering of a Gaussian rational as it appears multiplying other factors:
/// `(negative-leading, text)` where text is `None` for a bare `+-1`.
pub(crate) fn coeff_atom(g: &GaussianRational) -> (bool, Option<String>) {
    let one = Rational::one();
    if g.im.is_zero() {
        if g.re == one {
            (false, None)
        } else if g.re == -one.clone() {
            (true, None)
        } else if g.re.is_negative() {
            (true, Some(render_rational(&-g.re.clone())))
        } else {
            (false, Some(render_rational(&g.re)))
        }
    } else if g.re.is_zero() {
        let (neg, mag) = if g.im.is_negative() {
            (true, -g.im.clone())
        } else {
            (false, g.im.clone())
        };
        if mag.is_one() {
            (neg, Some("i".to_string()))
        } else {
            (neg, Some(format!("{}i", render_rational(&mag))))
        }
    } else {
        // Mixed real and imaginary part: always parenthesized, never
        // negative-leading.
        let re = render_rational(&g.re);
        let (sign, mag) = if g.im.is_negative() {
            ('-', -g.im.clone())
        } else {
            ('+', g.im.clone())
        };
        let im = if mag.is_one() {
            "i".to_string()
        } else {
            format!("{}i", render_rational(&mag))
        };
        (false, Some(format!("({}{}{})", re, sign, im)))
    }
}

/// Standalone rendering (used for matrix entries and counit rows), without
/// the outer parentheses of the mixed case.
pub fn render_gaussian(g: &GaussianRational) -> String {
    if g.is_zero() {
        return "0".to_string();
    }
    let (neg, text) = coeff_atom(g);
    let body = text.unwrap_or_else(|| "1".to_string());
    let body = body
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .map(str::to_string)
        .unwrap_or(body);
    if neg {
        format!("-{}", body)
    } else {
        body
    }
}

/// One printed term: sign, then the `*`-joined factor list. `extra` carries
/// the monomial factors appended after the scalar part.
pub(crate) fn render_term(exp: u32, g: &GaussianRational, extra: &[String]) -> String {
    let k = exp / 2;
    let displayed = g.clone() * neg_i_pow(k);
    let (neg, coeff) = coeff_atom(&displayed);
    let mut factors: Vec<String> = Vec::new();
    if exp % 2 == 1 {
        factors.push("e".to_string());
    }
    if k == 1 {
        factors.push("h".to_string());
    } else if k > 1 {
        factors.push(format!("h^{}", k));
    }
    factors.extend(extra.iter().cloned());
    let mut body = match coeff {
        Some(c) if factors.is_empty() => c,
        Some(c) => format!("{}*{}", c, factors.join("*")),
        None if factors.is_empty() => "1".to_string(),
        None => factors.join("*"),
    };
    if neg {
        body.insert(0, '-');
    }
    body
}

/// Join already-rendered terms with ` + ` / ` - `.
pub(crate) fn join_terms(terms: &[String]) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, t) in terms.iter().enumerate() {
        if idx == 0 {
            out.push_str(t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(t);
        }
    }
    out
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .map(|(exp, g)| render_term(*exp, g, &[]))
            .collect();
        write!(f, "{}", join_terms(&terms))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}
