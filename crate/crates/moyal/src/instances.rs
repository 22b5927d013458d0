//! Built-in instance catalog binding the modules together: polynomial
//! de Rham contexts, the Weyl pair of partial derivatives, a truncated
//! four-dimensional algebra for dualization, and a family of small chain
//! complexes with their endomorphism Lie algebras.
//!
//! Every catalog object passes its module's validator at construction.

use crate::complexes::{end_dgla, ChainComplex, EndBasisIndex};
use crate::dgla::DglaPresentation;
use crate::error::{Error, Result};
use crate::graded::{de_rham, Context, Derivation, Element};
use crate::matrix::Matrix;
use crate::scalar::{gauss_int, GaussianRational};

pub use crate::graded::de_rham as derham;

/// Phase-space pair: generators `q`, `p` in degree zero with the derivation
/// pair `(d/dp, d/dq)`, the one-pair input of the exponential product whose
/// commutator reproduces the canonical bracket.
pub fn weyl_pair() -> Result<(Context, Vec<(Derivation, Derivation)>)> {
    let ctx = Context::new(vec![("q", 0), ("p", 0)])?;
    let ddp = Derivation::new(&ctx, 0, &[("p", Element::one(&ctx))])?;
    let ddq = Derivation::new(&ctx, 0, &[("q", Element::one(&ctx))])?;
    Ok((ctx, vec![(ddp, ddq)]))
}

/// The four-dimensional algebra on an odd `x` (degree 1) and an even `y`
/// (degree 2) with `dx = y` and `y^2 = 0`; the minimal faithful instance for
/// dualization. Returns the context, the differential, and the nilpotency
/// bound.
pub fn truncated_dga_4dim() -> Result<(Context, Derivation, u32)> {
    let ctx = Context::new(vec![("x", 1), ("y", 2)])?;
    let d = Derivation::new(&ctx, 1, &[("x", Element::generator(&ctx, "y")?)])?;
    d.validate_differential()?;
    Ok((ctx, d, 2))
}

/// Sixteen-dimensional companion of [`truncated_dga_4dim`] with two
/// odd/even generator pairs (`d x1 = y1`, `d x2 = y2`, `y1^2 = y2^2 = 0`).
/// Here `d x1 * d x2 = y1*y2` survives the truncation, so the deformed
/// product and coproduct differ from the undeformed ones on this instance.
pub fn truncated_dga_16dim() -> Result<(Context, Derivation, u32)> {
    let ctx = Context::new(vec![("x1", 1), ("x2", 1), ("y1", 2), ("y2", 2)])?;
    let d = Derivation::new(
        &ctx,
        1,
        &[
            ("x1", Element::generator(&ctx, "y1")?),
            ("x2", Element::generator(&ctx, "y2")?),
        ],
    )?;
    d.validate_differential()?;
    Ok((ctx, d, 2))
}

/// Complex `0 -> Q^m --id--> Q^m -> 0` in degrees 0 and 1.
pub fn two_term_complex(m: usize) -> Result<ChainComplex> {
    if m == 0 || m > 8 {
        return Err(Error::ParamOutOfRange(
            "two-term complex size must be in 1..=8".into(),
        ));
    }
    ChainComplex::new(0, vec![m, m], vec![Matrix::identity(m)])
}

fn gmat(rows: Vec<Vec<i64>>) -> Matrix<GaussianRational> {
    Matrix::from_rows(
        rows.into_iter()
            .map(|r| r.into_iter().map(|v| gauss_int(v, 0)).collect())
            .collect(),
    )
    .expect("rectangular rows")
}

/// Five small validated complexes used by the endomorphism-algebra suites.
pub fn catalog_complexes() -> Vec<(String, ChainComplex)> {
    vec![
        ("two_term_1".to_string(), two_term_complex(1).unwrap()),
        ("two_term_2".to_string(), two_term_complex(2).unwrap()),
        (
            "three_term_chain".to_string(),
            ChainComplex::new(0, vec![1, 1, 1], vec![gmat(vec![vec![1]]), gmat(vec![vec![0]])])
                .unwrap(),
        ),
        (
            "three_term_wide".to_string(),
            ChainComplex::new(
                0,
                vec![1, 2, 1],
                vec![gmat(vec![vec![1], vec![0]]), gmat(vec![vec![0, 1]])],
            )
            .unwrap(),
        ),
        (
            "shifted_line".to_string(),
            ChainComplex::new(-1, vec![1, 1, 1], vec![gmat(vec![vec![2]]), gmat(vec![vec![0]])])
                .unwrap(),
        ),
    ]
}

/// Full endomorphism DGLA of a bounded complex (window spanning every
/// degree with nonzero maps).
pub fn end_dgla_of(c: &ChainComplex) -> Result<(DglaPresentation, Vec<EndBasisIndex>)> {
    let span = c.hi() - c.lo();
    end_dgla(c, (-span, span))
}

/// A catalog object as handed to the script layer.
pub enum CatalogObject {
    Dga {
        context: Context,
        differential: Derivation,
    },
    WeylPair {
        context: Context,
        pairs: Vec<(Derivation, Derivation)>,
    },
    TruncatedDga {
        context: Context,
        differential: Derivation,
        nilpotency: u32,
    },
    Complex(ChainComplex),
    Dgla(DglaPresentation),
}

pub fn catalog_names() -> Vec<&'static str> {
    vec![
        "derham",
        "weyl_pair",
        "truncated_dga_4dim",
        "truncated_dga_16dim",
        "two_term_complex",
        "end_dgla_of",
    ]
}

/// Look up a catalog constructor by name. Integer parameters:
/// `derham(n)`, `two_term_complex(m)`, `end_dgla_of(k)` (index into
/// [`catalog_complexes`]).
pub fn catalog_get(name: &str, params: &[i64]) -> Result<CatalogObject> {
    let want = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::ParamOutOfRange(format!(
                "`{}` takes {} parameter(s), got {}",
                name,
                n,
                params.len()
            )))
        }
    };
    match name {
        "derham" => {
            want(1)?;
            if params[0] < 1 || params[0] > 6 {
                return Err(Error::ParamOutOfRange("derham rank must be in 1..=6".into()));
            }
            let (context, differential) = de_rham(params[0] as usize)?;
            Ok(CatalogObject::Dga {
                context,
                differential,
            })
        }
        "weyl_pair" => {
            want(0)?;
            let (context, pairs) = weyl_pair()?;
            Ok(CatalogObject::WeylPair { context, pairs })
        }
        "truncated_dga_4dim" => {
            want(0)?;
            let (context, differential, nilpotency) = truncated_dga_4dim()?;
            Ok(CatalogObject::TruncatedDga {
                context,
                differential,
                nilpotency,
            })
        }
        "truncated_dga_16dim" => {
            want(0)?;
            let (context, differential, nilpotency) = truncated_dga_16dim()?;
            Ok(CatalogObject::TruncatedDga {
                context,
                differential,
                nilpotency,
            })
        }
        "two_term_complex" => {
            want(1)?;
            if params[0] < 1 {
                return Err(Error::ParamOutOfRange("size must be positive".into()));
            }
            Ok(CatalogObject::Complex(two_term_complex(params[0] as usize)?))
        }
        "end_dgla_of" => {
            want(1)?;
            let complexes = catalog_complexes();
            let idx = params[0];
            if idx < 0 || idx as usize >= complexes.len() {
                return Err(Error::ParamOutOfRange(format!(
                    "complex index must be in 0..{}",
                    complexes.len()
                )));
            }
            let (dgla, _) = end_dgla_of(&complexes[idx as usize].1)?;
            Ok(CatalogObject::Dgla(dgla))
        }
        other => Err(Error::UnknownInstance(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_catalog_complex_builds_a_valid_end_dgla() {
        for (name, c) in catalog_complexes() {
            let (dgla, basis) = end_dgla_of(&c).unwrap();
            assert_eq!(basis.len(), c.total_dim() * c.total_dim(), "{}", name);
            let report = dgla.validate();
            assert!(report.is_valid(), "{}: {}", name, report);
        }
    }

    #[test]
    fn weyl_pair_shape() {
        let (ctx, pairs) = weyl_pair().unwrap();
        assert_eq!(ctx.len(), 2);
        assert_eq!(pairs.len(), 1);
        let q = Element::generator(&ctx, "q").unwrap();
        let (ddp, ddq) = &pairs[0];
        assert!(ddp.apply(&q).unwrap().is_zero());
        assert_eq!(ddq.apply(&q).unwrap(), Element::one(&ctx));
    }

    #[test]
    fn truncated_dga_dualizes() {
        let (ctx, d, nilp) = truncated_dga_4dim().unwrap();
        let dual = crate::coalgebra::dualize_dga(&ctx, &d, Some(nilp)).unwrap();
        assert!(dual.coalgebra.validate().is_valid());
    }

    #[test]
    fn catalog_lookup() {
        assert!(matches!(
            catalog_get("derham", &[2]),
            Ok(CatalogObject::Dga { .. })
        ));
        assert!(matches!(
            catalog_get("nope", &[]),
            Err(Error::UnknownInstance(_))
        ));
        assert!(matches!(
            catalog_get("derham", &[0]),
            Err(Error::ParamOutOfRange(_))
        ));
        assert!(matches!(
            catalog_get("end_dgla_of", &[4]),
            Ok(CatalogObject::Dgla(_))
        ));
    }
}
