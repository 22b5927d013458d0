//! Seeded random generators for the identity suites.
//!
//! Everything runs off a `ChaCha8Rng` keyed by a `u64`, so trials are
//! reproducible across platforms and every failure can be replayed from
//! `(suite, seed, trial index)`.

use rand::Rng;
use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

use crate::complexes::{ChainComplex, GradedMap};
use crate::dgla::{DglaPresentation, LieElement};
use crate::error::Result;
use crate::graded::{Context, Element, Monomial};
use crate::matrix::Matrix;
use crate::scalar::{rat, GaussianRational, Rational, Scalar};

pub fn rng_for(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(trial))
}

/// Bounds on random element generation; the defaults keep exact arithmetic
/// fast while still exercising the sign bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementBounds {
    pub max_terms: usize,
    pub max_monomial_degree: u32,
    pub max_coeff: i64,
    pub max_hbar_pow: u32,
}

impl Default for ElementBounds {
    fn default() -> Self {
        ElementBounds {
            max_terms: 4,
            max_monomial_degree: 6,
            max_coeff: 9,
            max_hbar_pow: 2,
        }
    }
}

fn nonzero_rational(rng: &mut ChaCha8Rng, max: i64) -> Rational {
    let numer = loop {
        let n = rng.gen_range(-max..=max);
        if n != 0 {
            break n;
        }
    };
    let denom = rng.gen_range(1..=max);
    rat(numer, denom)
}

pub fn random_gaussian(rng: &mut ChaCha8Rng, max: i64) -> GaussianRational {
    let re = nonzero_rational(rng, max);
    let im = if rng.gen_bool(0.5) {
        nonzero_rational(rng, max)
    } else {
        Rational::from_integer(0.into())
    };
    GaussianRational::new(re, im)
}

/// Random nonzero coefficient `g * h^k`; always in the `h`-subring so that
/// conjugation-sensitive suites accept it.
pub fn random_coeff(rng: &mut ChaCha8Rng, bounds: &ElementBounds) -> Scalar {
    let g = random_gaussian(rng, bounds.max_coeff);
    let k = if bounds.max_hbar_pow > 0 && rng.gen_bool(0.3) {
        rng.gen_range(1..=bounds.max_hbar_pow)
    } else {
        0
    };
    Scalar::from_gaussian(g) * Scalar::hbar_pow(k)
}

/// Random monomial with exponent sum at most `max_monomial_degree`.
pub fn random_monomial(ctx: &Context, bounds: &ElementBounds, rng: &mut ChaCha8Rng) -> Monomial {
    let mut exps = vec![0u32; ctx.len()];
    let mut budget = bounds.max_monomial_degree;
    let steps = rng.gen_range(0..=bounds.max_monomial_degree);
    for _ in 0..steps {
        if budget == 0 || ctx.is_empty() {
            break;
        }
        let idx = rng.gen_range(0..ctx.len());
        let odd = ctx.degree_of(idx).rem_euclid(2) == 1;
        if odd && exps[idx] >= 1 {
            continue;
        }
        exps[idx] += 1;
        budget -= 1;
    }
    Monomial::from_exps(exps)
}

pub fn random_element(ctx: &Context, bounds: &ElementBounds, rng: &mut ChaCha8Rng) -> Element {
    let terms = rng.gen_range(1..=bounds.max_terms);
    let mut out = Element::zero(ctx);
    for _ in 0..terms {
        let m = random_monomial(ctx, bounds, rng);
        let t = Element::from_terms(ctx, vec![(m, random_coeff(rng, bounds))]);
        out = out.add(&t).expect("same context");
    }
    out
}

/// Random element all of whose monomials share one degree; the degree is
/// whatever the first sampled monomial has. Returns `(degree, element)`.
pub fn random_homogeneous_element(
    ctx: &Context,
    bounds: &ElementBounds,
    rng: &mut ChaCha8Rng,
) -> (i64, Element) {
    let first = random_monomial(ctx, bounds, rng);
    let degree = ctx.monomial_degree(&first);
    let mut out = Element::from_terms(ctx, vec![(first, random_coeff(rng, bounds))]);
    let extra = rng.gen_range(0..bounds.max_terms);
    let mut attempts = 0;
    let mut added = 0;
    while added < extra && attempts < 64 {
        attempts += 1;
        let m = random_monomial(ctx, bounds, rng);
        if ctx.monomial_degree(&m) == degree {
            let t = Element::from_terms(ctx, vec![(m, random_coeff(rng, bounds))]);
            out = out.add(&t).expect("same context");
            added += 1;
        }
    }
    (degree, out)
}

/// Random element whose monomials all have even degree (possibly mixed
/// even degrees).
pub fn random_even_element(
    ctx: &Context,
    bounds: &ElementBounds,
    rng: &mut ChaCha8Rng,
) -> Element {
    let mut out = Element::zero(ctx);
    let want = rng.gen_range(1..=bounds.max_terms);
    let mut attempts = 0;
    let mut added = 0;
    while added < want && attempts < 128 {
        attempts += 1;
        let m = random_monomial(ctx, bounds, rng);
        if ctx.monomial_degree(&m).rem_euclid(2) == 0 {
            let t = Element::from_terms(ctx, vec![(m, random_coeff(rng, bounds))]);
            out = out.add(&t).expect("same context");
            added += 1;
        }
    }
    if out.is_zero() {
        Element::one(ctx)
    } else {
        out
    }
}

/// Random invertible matrix with small integer entries, by rejection.
pub fn random_invertible(n: usize, rng: &mut ChaCha8Rng) -> Matrix<GaussianRational> {
    loop {
        let mut m: Matrix<GaussianRational> = Matrix::zero(n, n);
        for r in 0..n {
            for c in 0..n {
                m.set(r, c, crate::scalar::gauss_int(rng.gen_range(-2..=2), 0));
            }
        }
        if m.inverse().is_some() {
            return m;
        }
    }
}

/// Random bounded complex with exact square-zero boundaries: a canonical
/// staircase complex conjugated by random invertible degree-wise changes of
/// basis.
pub fn random_complex(rng: &mut ChaCha8Rng) -> ChainComplex {
    let lo = rng.gen_range(-2..=0);
    // Span at least two, so the degree +2 correction of the deformed
    // composition has room to be nonzero.
    let len = rng.gen_range(3..=4usize);
    let dims: Vec<usize> = (0..len).map(|_| rng.gen_range(1..=4usize)).collect();

    // Ranks from the top down: r_k + r_{k+1} <= dim_{k+1} and r_k <= dim_k.
    let mut ranks = vec![0usize; len - 1];
    let mut above = 0usize;
    for k in (0..len - 1).rev() {
        let cap = dims[k].min(dims[k + 1].saturating_sub(above));
        ranks[k] = if cap == 0 { 0 } else { rng.gen_range(0..=cap) };
        above = ranks[k];
    }

    let changes: Vec<Matrix<GaussianRational>> =
        dims.iter().map(|&n| random_invertible(n, rng)).collect();

    let mut boundaries = Vec::new();
    for k in 0..len - 1 {
        let mut d: Matrix<GaussianRational> = Matrix::zero(dims[k + 1], dims[k]);
        for t in 0..ranks[k] {
            d.set(t, dims[k] - ranks[k] + t, crate::scalar::gauss_int(1, 0));
        }
        let conjugated = changes[k + 1]
            .mul(&d)
            .unwrap()
            .mul(&changes[k].inverse().unwrap())
            .unwrap();
        boundaries.push(conjugated);
    }
    ChainComplex::new(lo, dims, boundaries).expect("staircase boundaries square to zero")
}

/// Random graded endomorphism of `c` of the given degree, with scalar
/// entries mixing plain Gaussian rationals and `h`-multiples.
pub fn random_graded_map(
    c: &ChainComplex,
    degree: i64,
    bounds: &ElementBounds,
    rng: &mut ChaCha8Rng,
) -> GradedMap {
    let mut blocks = Vec::new();
    for k in c.lo()..=c.hi() {
        let (rows, cols) = (c.dim(k + degree), c.dim(k));
        if rows == 0 || cols == 0 {
            continue;
        }
        let mut block: Matrix<Scalar> = Matrix::zero(rows, cols);
        for r in 0..rows {
            for col in 0..cols {
                if rng.gen_bool(0.6) {
                    block.set(r, col, random_coeff(rng, bounds));
                }
            }
        }
        blocks.push((k, block));
    }
    GradedMap::new(c, c, degree, blocks).expect("block shapes match by construction")
}

/// Random degree that actually supports nonzero endomorphisms of `c`.
pub fn random_map_degree(c: &ChainComplex, rng: &mut ChaCha8Rng) -> i64 {
    let span = c.hi() - c.lo();
    for _ in 0..32 {
        let degree = rng.gen_range(-span..=span);
        let has_block = (c.lo()..=c.hi()).any(|k| c.dim(k) > 0 && c.dim(k + degree) > 0);
        if has_block {
            return degree;
        }
    }
    0
}

/// Random Lie element; homogeneous picks a single basis degree.
pub fn random_lie_element(
    l: &DglaPresentation,
    homogeneous: bool,
    bounds: &ElementBounds,
    rng: &mut ChaCha8Rng,
) -> Result<LieElement> {
    let n = l.dim();
    let mut coeffs = Vec::new();
    if homogeneous {
        let pivot = rng.gen_range(0..n);
        let degree = l.degrees()[pivot];
        let indices: Vec<usize> = (0..n).filter(|&i| l.degrees()[i] == degree).collect();
        let count = rng.gen_range(1..=bounds.max_terms.min(indices.len()));
        for _ in 0..count {
            let i = indices[rng.gen_range(0..indices.len())];
            coeffs.push((i, random_coeff(rng, bounds)));
        }
    } else {
        let count = rng.gen_range(1..=bounds.max_terms.min(n));
        for _ in 0..count {
            coeffs.push((rng.gen_range(0..n), random_coeff(rng, bounds)));
        }
    }
    l.element(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::de_rham;

    #[test]
    fn seeded_generation_is_deterministic() {
        let (ctx, _) = de_rham(2).unwrap();
        let bounds = ElementBounds::default();
        let a = random_element(&ctx, &bounds, &mut rng_for(42, 7));
        let b = random_element(&ctx, &bounds, &mut rng_for(42, 7));
        assert_eq!(a, b);
        let c = random_element(&ctx, &bounds, &mut rng_for(42, 8));
        assert_ne!(a, c);
    }

    #[test]
    fn homogeneous_elements_are_homogeneous() {
        let (ctx, _) = de_rham(3).unwrap();
        let bounds = ElementBounds::default();
        for trial in 0..50 {
            let (degree, e) = random_homogeneous_element(&ctx, &bounds, &mut rng_for(1, trial));
            assert_eq!(e.homogeneous_degree(), Some(degree));
        }
    }

    #[test]
    fn random_complexes_validate() {
        for trial in 0..30 {
            let c = random_complex(&mut rng_for(3, trial));
            // Construction re-checks d^2 = 0; exercise boundary access too.
            for k in c.lo()..c.hi() {
                let sq = c.boundary(k + 1).mul(&c.boundary(k)).unwrap();
                assert!(sq.is_zero());
            }
        }
    }

    #[test]
    fn even_elements_are_even() {
        let (ctx, _) = de_rham(2).unwrap();
        let bounds = ElementBounds::default();
        for trial in 0..30 {
            let e = random_even_element(&ctx, &bounds, &mut rng_for(9, trial));
            assert!(e
                .monomial_degrees()
                .iter()
                .all(|d| d.rem_euclid(2) == 0));
        }
    }
}
