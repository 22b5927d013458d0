//! Structure-constant differential graded Lie algebras, the deformed
//! bracket, the graded Jacobiator, and its explicit primitive.
//!
//! The deformed bracket is `[a,b]^d = [a,b] + L*(-1)^{|a|} [da, db]`. Its
//! Jacobiator is no longer zero but is exact: the six-term expression built
//! by [`DglaPresentation::defect_primitive`] maps onto it under the
//! differential, which [`DglaPresentation::exactness_check`] verifies by
//! returning the residual `jacobiator - Q(primitive)` for inspection rather
//! than asserting.
//!
//! Note on signs: a cyclic primitive needs the fifth term to carry the
//! exponent `|a3||a2| + |a3| + |a1|`. The variant with `|a1| + |a2|` in
//! that slot (see [`FifthTermExponent::DegreeSum12`]) fails to be a
//! primitive whenever `|a2|` and `|a3|` have different parity, and is kept
//! available as a negative control.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::deform::DeformationConfig;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{join_terms, rat, render_term, GaussianRational, Scalar};

/// Sparse bracket table rows `((i, j), [(k, c), ...])` meaning
/// `[b_i, b_j] = sum c * b_k`.
pub type StructureConstants = Vec<((usize, usize), Vec<(usize, GaussianRational)>)>;

#[derive(Clone, PartialEq)]
struct DglaData {
    degrees: Vec<i64>,
    /// `[e_i, e_j] = sum_k c * e_k`, stored sparsely.
    table: BTreeMap<(usize, usize), Vec<(usize, GaussianRational)>>,
    q: Matrix<GaussianRational>,
}

/// Finite-dimensional DGLA presented by bracket structure constants and a
/// degree `+1` differential matrix.
#[derive(Clone)]
pub struct DglaPresentation(Arc<DglaData>);

impl PartialEq for DglaPresentation {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}
impl Eq for DglaPresentation {}

impl DglaPresentation {
    /// Shape and grading checks happen here; the algebraic laws (Jacobi,
    /// antisymmetry, Leibniz, `Q^2 = 0`) are report-valued via
    /// [`DglaPresentation::validate`] so that broken presentations can be
    /// constructed as negative controls.
    pub fn new(
        degrees: Vec<i64>,
        brackets: StructureConstants,
        q: Matrix<GaussianRational>,
    ) -> Result<DglaPresentation> {
        let n = degrees.len();
        if q.rows() != n || q.cols() != n {
            return Err(Error::ShapeMismatch(format!(
                "differential must be {}x{}, got {}x{}",
                n,
                n,
                q.rows(),
                q.cols()
            )));
        }
        // Entries for one pair may arrive split across several rows (the
        // script format gives one constant per line); merge and sort so the
        // stored form is canonical.
        let mut merged: BTreeMap<(usize, usize), BTreeMap<usize, GaussianRational>> =
            BTreeMap::new();
        for ((i, j), entries) in brackets {
            if i >= n || j >= n {
                return Err(Error::BasisIndex(i.max(j)));
            }
            for (k, c) in entries {
                if k >= n {
                    return Err(Error::BasisIndex(k));
                }
                if c.is_zero() {
                    continue;
                }
                if degrees[k] != degrees[i] + degrees[j] {
                    return Err(Error::GradingViolation(format!(
                        "[b{}, b{}] hits b{} of degree {}, expected {}",
                        i,
                        j,
                        k,
                        degrees[k],
                        degrees[i] + degrees[j]
                    )));
                }
                let slot = merged
                    .entry((i, j))
                    .or_default()
                    .entry(k)
                    .or_insert_with(GaussianRational::zero);
                *slot = slot.clone() + c;
            }
        }
        let mut table = BTreeMap::new();
        for (pair, entries) in merged {
            let entries: Vec<(usize, GaussianRational)> = entries
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .collect();
            if !entries.is_empty() {
                table.insert(pair, entries);
            }
        }
        for r in 0..n {
            for c in 0..n {
                if !q.get(r, c).is_zero() && degrees[r] != degrees[c] + 1 {
                    return Err(Error::GradingViolation(format!(
                        "Q[b{}] hits b{} of degree {}, expected {}",
                        c,
                        r,
                        degrees[r],
                        degrees[c] + 1
                    )));
                }
            }
        }
        Ok(DglaPresentation(Arc::new(DglaData { degrees, table, q })))
    }

    pub fn dim(&self) -> usize {
        self.0.degrees.len()
    }

    pub fn degrees(&self) -> &[i64] {
        &self.0.degrees
    }

    pub fn differential_matrix(&self) -> &Matrix<GaussianRational> {
        &self.0.q
    }

    pub fn structure_constants(
        &self,
    ) -> impl Iterator<Item = (&(usize, usize), &Vec<(usize, GaussianRational)>)> {
        self.0.table.iter()
    }

    pub fn zero(&self) -> LieElement {
        LieElement {
            dgla: self.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn basis_element(&self, i: usize) -> Result<LieElement> {
        if i >= self.dim() {
            return Err(Error::BasisIndex(i));
        }
        let mut coeffs = BTreeMap::new();
        coeffs.insert(i, Scalar::one());
        Ok(LieElement {
            dgla: self.clone(),
            coeffs,
        })
    }

    pub fn element(&self, coeffs: Vec<(usize, Scalar)>) -> Result<LieElement> {
        let mut out = self.zero();
        for (i, s) in coeffs {
            if i >= self.dim() {
                return Err(Error::BasisIndex(i));
            }
            out.accumulate(i, s);
        }
        Ok(out)
    }

    fn bracket_basis(&self, i: usize, j: usize) -> &[(usize, GaussianRational)] {
        self.0
            .table
            .get(&(i, j))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Bilinear extension of the structure constants; coefficients are
    /// central, so no Koszul signs arise from them.
    pub fn bracket(&self, a: &LieElement, b: &LieElement) -> Result<LieElement> {
        if a.dgla != *self || b.dgla != *self {
            return Err(Error::PresentationMismatch);
        }
        let mut out = self.zero();
        for (i, sa) in &a.coeffs {
            for (j, sb) in &b.coeffs {
                let c = sa.mul_ref(sb);
                for (k, g) in self.bracket_basis(*i, *j) {
                    out.accumulate(*k, c.scale_gaussian(g));
                }
            }
        }
        Ok(out)
    }

    /// Apply the differential.
    pub fn apply_q(&self, a: &LieElement) -> Result<LieElement> {
        if a.dgla != *self {
            return Err(Error::PresentationMismatch);
        }
        let mut out = self.zero();
        for (i, s) in &a.coeffs {
            for r in 0..self.dim() {
                let g = self.0.q.get(r, *i);
                if !g.is_zero() {
                    out.accumulate(r, s.scale_gaussian(g));
                }
            }
        }
        Ok(out)
    }

    /// `[a, b]^d = [a, b] + L*(-1)^{|a|} [Qa, Qb]`, extended bilinearly over
    /// degree-homogeneous components of `a`.
    pub fn deformed_bracket(
        &self,
        a: &LieElement,
        b: &LieElement,
        cfg: &DeformationConfig,
    ) -> Result<LieElement> {
        let qb = self.apply_q(b)?;
        let mut out = self.bracket(a, b)?;
        for (degree, comp) in a.components() {
            let qa = self.apply_q(&comp)?;
            let mut corr = self.bracket(&qa, &qb)?.scale(cfg.lambda());
            if degree.rem_euclid(2) == 1 {
                corr = corr.neg();
            }
            out = out.add(&corr)?;
        }
        Ok(out)
    }

    fn bracket_kind(
        &self,
        a: &LieElement,
        b: &LieElement,
        deformed: bool,
        cfg: &DeformationConfig,
    ) -> Result<LieElement> {
        if deformed {
            self.deformed_bracket(a, b, cfg)
        } else {
            self.bracket(a, b)
        }
    }

    /// Cyclic Jacobi defect
    /// `(-1)^{|a1||a3|}[a1,[a2,a3]] + (-1)^{|a2||a1|}[a2,[a3,a1]] + (-1)^{|a3||a2|}[a3,[a1,a2]]`,
    /// with either the plain or the deformed bracket, extended multilinearly
    /// over homogeneous components.
    pub fn jacobiator(
        &self,
        a1: &LieElement,
        a2: &LieElement,
        a3: &LieElement,
        deformed: bool,
        cfg: &DeformationConfig,
    ) -> Result<LieElement> {
        let mut out = self.zero();
        for (p1, c1) in a1.components() {
            for (p2, c2) in a2.components() {
                for (p3, c3) in a3.components() {
                    for (sign_exp, x, y, z) in [
                        (p1 * p3, &c1, &c2, &c3),
                        (p2 * p1, &c2, &c3, &c1),
                        (p3 * p2, &c3, &c1, &c2),
                    ] {
                        let inner = self.bracket_kind(y, z, deformed, cfg)?;
                        let mut term = self.bracket_kind(x, &inner, deformed, cfg)?;
                        if sign_exp.rem_euclid(2) == 1 {
                            term = term.neg();
                        }
                        out = out.add(&term)?;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Which exponent the fifth primitive term `[a3,[a1,da2]]` carries on top of
/// the cyclic prefactor `|a3||a2|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FifthTermExponent {
    /// `|a3| + |a1|`: the cyclic completion of the first and third positive
    /// terms; with this choice the expression is an exact primitive.
    DegreeSum31,
    /// `|a1| + |a2|`: fails whenever `|a2|` and `|a3|` differ in parity.
    DegreeSum12,
}

impl DglaPresentation {
    /// The six-term expression with prefactor `2L/3` whose differential is
    /// the Jacobiator of the deformed bracket.
    pub fn defect_primitive(
        &self,
        a1: &LieElement,
        a2: &LieElement,
        a3: &LieElement,
        cfg: &DeformationConfig,
    ) -> Result<LieElement> {
        self.defect_primitive_variant(a1, a2, a3, cfg, FifthTermExponent::DegreeSum31)
    }

    pub fn defect_primitive_variant(
        &self,
        a1: &LieElement,
        a2: &LieElement,
        a3: &LieElement,
        cfg: &DeformationConfig,
        fifth: FifthTermExponent,
    ) -> Result<LieElement> {
        let prefactor = cfg.lambda().scale_rational(&rat(2, 3));
        let mut out = self.zero();
        for (p1, c1) in a1.components() {
            for (p2, c2) in a2.components() {
                for (p3, c3) in a3.components() {
                    let q1 = self.apply_q(&c1)?;
                    let q2 = self.apply_q(&c2)?;
                    let q3 = self.apply_q(&c3)?;
                    let fifth_exp = match fifth {
                        FifthTermExponent::DegreeSum31 => p3 + p1,
                        FifthTermExponent::DegreeSum12 => p1 + p2,
                    };
                    // (positive-term sign, x, inner-left, inner-right,
                    //  negative-term sign, dx)
                    let rows = [
                        (p1 * p3 + p1 + p2, &c1, &c2, &q3, p1 * p3, &q1, &c2, &c3),
                        (p2 * p1 + p2 + p3, &c2, &c3, &q1, p2 * p1, &q2, &c3, &c1),
                        (p3 * p2 + fifth_exp, &c3, &c1, &q2, p3 * p2, &q3, &c1, &c2),
                    ];
                    for (pos_exp, x, il, ir, neg_exp, dx, jl, jr) in rows {
                        let mut pos = self.bracket(x, &self.bracket(il, ir)?)?;
                        if pos_exp.rem_euclid(2) == 1 {
                            pos = pos.neg();
                        }
                        let mut neg = self.bracket(dx, &self.bracket(jl, jr)?)?;
                        if neg_exp.rem_euclid(2) == 0 {
                            neg = neg.neg();
                        }
                        out = out.add(&pos)?.add(&neg)?;
                    }
                }
            }
        }
        Ok(out.scale(&prefactor))
    }

    /// Defect, image of the primitive, and their difference. The residual is
    /// returned rather than asserted so a failing sign shows up as a
    /// reproducible witness.
    pub fn exactness_check(
        &self,
        a1: &LieElement,
        a2: &LieElement,
        a3: &LieElement,
        cfg: &DeformationConfig,
    ) -> Result<ExactnessBreakdown> {
        let defect = self.jacobiator(a1, a2, a3, true, cfg)?;
        let primitive = self.defect_primitive(a1, a2, a3, cfg)?;
        let primitive_image = self.apply_q(&primitive)?;
        let residual = defect.sub(&primitive_image)?;
        Ok(ExactnessBreakdown {
            defect,
            primitive_image,
            residual,
        })
    }

    /// Check antisymmetry, the graded Jacobi identity, the Leibniz rule, and
    /// `Q^2 = 0` on basis elements, collecting witnesses for every failure.
    pub fn validate(&self) -> DglaReport {
        let cfg = DeformationConfig::standard();
        let mut report = DglaReport::default();
        let n = self.dim();
        let basis: Vec<LieElement> = (0..n).map(|i| self.basis_element(i).unwrap()).collect();
        for i in 0..n {
            for j in 0..n {
                let ij = self.bracket(&basis[i], &basis[j]).unwrap();
                let ji = self.bracket(&basis[j], &basis[i]).unwrap();
                let sign = (self.0.degrees[i] * self.0.degrees[j]).rem_euclid(2);
                let flipped = if sign == 1 { ji.neg() } else { ji };
                let defect = ij.add(&flipped).unwrap();
                if !defect.is_zero() {
                    report.antisymmetry.push((i, j, defect.render()));
                }
                let lhs = self.apply_q(&ij).unwrap();
                let mut rhs = self
                    .bracket(&self.apply_q(&basis[i]).unwrap(), &basis[j])
                    .unwrap();
                let mut tail = self
                    .bracket(&basis[i], &self.apply_q(&basis[j]).unwrap())
                    .unwrap();
                if self.0.degrees[i].rem_euclid(2) == 1 {
                    tail = tail.neg();
                }
                rhs = rhs.add(&tail).unwrap();
                let defect = lhs.sub(&rhs).unwrap();
                if !defect.is_zero() {
                    report.leibniz.push((i, j, defect.render()));
                }
            }
            let q2 = self
                .apply_q(&self.apply_q(&basis[i]).unwrap())
                .unwrap();
            if !q2.is_zero() {
                report.q_square.push((i, q2.render()));
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let defect = self
                        .jacobiator(&basis[i], &basis[j], &basis[k], false, &cfg)
                        .unwrap();
                    if !defect.is_zero() {
                        report.jacobi.push((i, j, k, defect.render()));
                    }
                }
            }
        }
        report
    }
}

impl fmt::Debug for DglaPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dgla dim {} degrees {:?}", self.dim(), self.degrees())
    }
}

/// Linear combination of basis elements over [`Scalar`].
#[derive(Clone, PartialEq, Eq)]
pub struct LieElement {
    dgla: DglaPresentation,
    coeffs: BTreeMap<usize, Scalar>,
}

impl LieElement {
    pub fn presentation(&self) -> &DglaPresentation {
        &self.dgla
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (usize, &Scalar)> {
        self.coeffs.iter().map(|(i, s)| (*i, s))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn accumulate(&mut self, i: usize, s: Scalar) {
        if s.is_zero() {
            return;
        }
        match self.coeffs.entry(i) {
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

    pub fn add(&self, other: &LieElement) -> Result<LieElement> {
        if self.dgla != other.dgla {
            return Err(Error::PresentationMismatch);
        }
        let mut out = self.clone();
        for (i, s) in &other.coeffs {
            out.accumulate(*i, s.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &LieElement) -> Result<LieElement> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LieElement {
        LieElement {
            dgla: self.dgla.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(i, s)| (*i, s.neg_ref()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> LieElement {
        let mut out = self.dgla.zero();
        for (i, c) in &self.coeffs {
            out.accumulate(*i, c.mul_ref(s));
        }
        out
    }

    /// Split by basis degree, ascending.
    pub fn components(&self) -> Vec<(i64, LieElement)> {
        let mut by_degree: BTreeMap<i64, LieElement> = BTreeMap::new();
        for (i, s) in &self.coeffs {
            let d = self.dgla.degrees()[*i];
            by_degree
                .entry(d)
                .or_insert_with(|| self.dgla.zero())
                .accumulate(*i, s.clone());
        }
        by_degree.into_iter().collect()
    }

    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut degs = self.coeffs.keys().map(|i| self.dgla.degrees()[*i]);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// Largest `h`-order appearing in any coefficient, as twice-the-order in
    /// `e`-exponent units.
    pub fn max_eps_degree(&self) -> Option<u32> {
        self.coeffs.values().filter_map(|s| s.eps_degree()).max()
    }

    pub fn render(&self) -> String {
        let mut terms = Vec::new();
        for (i, s) in &self.coeffs {
            for (exp, g) in s.terms() {
                terms.push(render_term(exp, g, &[format!("b{}", i)]));
            }
        }
        join_terms(&terms)
    }
}

impl fmt::Display for LieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Debug for LieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Result triple of [`DglaPresentation::exactness_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactnessBreakdown {
    pub defect: LieElement,
    pub primitive_image: LieElement,
    pub residual: LieElement,
}

/// Witness-carrying validation report.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DglaReport {
    pub antisymmetry: Vec<(usize, usize, String)>,
    pub jacobi: Vec<(usize, usize, usize, String)>,
    pub leibniz: Vec<(usize, usize, String)>,
    pub q_square: Vec<(usize, String)>,
}

impl DglaReport {
    pub fn is_valid(&self) -> bool {
        self.antisymmetry.is_empty()
            && self.jacobi.is_empty()
            && self.leibniz.is_empty()
            && self.q_square.is_empty()
    }
}

impl fmt::Display for DglaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        let mut lines = Vec::new();
        for (i, j, w) in &self.antisymmetry {
            lines.push(format!("antisymmetry fails on (b{}, b{}): {}", i, j, w));
        }
        for (i, j, k, w) in &self.jacobi {
            lines.push(format!("jacobi fails on (b{}, b{}, b{}): {}", i, j, k, w));
        }
        for (i, j, w) in &self.leibniz {
            lines.push(format!("leibniz fails on (b{}, b{}): {}", i, j, w));
        }
        for (i, w) in &self.q_square {
            lines.push(format!("Q^2 fails on b{}: {}", i, w));
        }
        write!(f, "{}", lines.join("\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{end_dgla, ChainComplex};
    use crate::scalar::gauss_int;

    fn gmat(rows: Vec<Vec<i64>>) -> Matrix<GaussianRational> {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|v| gauss_int(v, 0)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn abelian(n: usize) -> DglaPresentation {
        DglaPresentation::new(vec![0; n], vec![], Matrix::zero(n, n)).unwrap()
    }

    /// End(C) for the three-term complex 0 -> Q -> Q^2 -> Q -> 0.
    fn end_three_term() -> (DglaPresentation, ChainComplex) {
        let c = ChainComplex::new(
            0,
            vec![1, 2, 1],
            vec![gmat(vec![vec![1], vec![0]]), gmat(vec![vec![0, 1]])],
        )
        .unwrap();
        let (dgla, _) = end_dgla(&c, (-2, 2)).unwrap();
        (dgla, c)
    }

    #[test]
    fn abelian_is_valid_and_everything_vanishes() {
        let l = abelian(3);
        assert!(l.validate().is_valid());
        let cfg = DeformationConfig::standard();
        let a = l.basis_element(0).unwrap();
        let b = l.basis_element(1).unwrap();
        let c = l.basis_element(2).unwrap();
        assert!(l.bracket(&a, &b).unwrap().is_zero());
        assert!(l.deformed_bracket(&a, &b, &cfg).unwrap().is_zero());
        assert!(l.jacobiator(&a, &b, &c, true, &cfg).unwrap().is_zero());
        assert!(l.defect_primitive(&a, &b, &c, &cfg).unwrap().is_zero());
        let breakdown = l.exactness_check(&a, &b, &c, &cfg).unwrap();
        assert!(breakdown.defect.is_zero());
        assert!(breakdown.primitive_image.is_zero());
        assert!(breakdown.residual.is_zero());
    }

    #[test]
    fn flipped_sign_breaks_jacobi() {
        // sl2-like even structure constants: [e,f] = h', [h',e] = 2e,
        // [h',f] = -2f, all degree 0, with one sign flipped.
        let two = |v: i64| vec![(0usize, gauss_int(v, 0))];
        let _ = two;
        let mk = |flip: bool| {
            let c_hf = if flip { 2 } else { -2 };
            DglaPresentation::new(
                vec![0, 0, 0],
                vec![
                    // basis: e = b0, f = b1, h' = b2
                    ((0, 1), vec![(2, gauss_int(1, 0))]),
                    ((1, 0), vec![(2, gauss_int(-1, 0))]),
                    ((2, 0), vec![(0, gauss_int(2, 0))]),
                    ((0, 2), vec![(0, gauss_int(-2, 0))]),
                    ((2, 1), vec![(1, gauss_int(c_hf, 0))]),
                    ((1, 2), vec![(1, gauss_int(-c_hf, 0))]),
                ],
                Matrix::zero(3, 3),
            )
            .unwrap()
        };
        assert!(mk(false).validate().is_valid());
        let report = mk(true).validate();
        assert!(!report.is_valid());
        assert!(!report.jacobi.is_empty());
        // Witnesses identify the failing triple.
        assert!(report.jacobi.iter().any(|(_, _, _, w)| !w.is_empty()));
    }

    #[test]
    fn end_dgla_validates() {
        let (l, _) = end_three_term();
        assert!(l.validate().is_valid());
    }

    #[test]
    fn closed_arguments_reduce_to_plain_bracket() {
        let (l, _) = end_three_term();
        let cfg = DeformationConfig::standard();
        // Q-closed elements: anything in the image of Q is closed.
        let a = l
            .apply_q(&l.basis_element(0).unwrap())
            .unwrap();
        let b = l.apply_q(&l.basis_element(5).unwrap()).unwrap();
        assert!(!a.is_zero() || !b.is_zero());
        let plain = l.bracket(&a, &b).unwrap();
        let deformed = l.deformed_bracket(&a, &b, &cfg).unwrap();
        assert_eq!(plain, deformed);

        // On a fully closed triple the deformed Jacobiator reduces to the
        // plain one and the whole exactness triple is zero.
        let c = l.apply_q(&l.basis_element(9).unwrap()).unwrap();
        assert!(l.jacobiator(&a, &b, &c, true, &cfg).unwrap().is_zero());
        let breakdown = l.exactness_check(&a, &b, &c, &cfg).unwrap();
        assert!(breakdown.defect.is_zero());
        assert!(breakdown.primitive_image.is_zero());
        assert!(breakdown.residual.is_zero());
    }

    #[test]
    fn plain_jacobiator_vanishes_on_random_elements() {
        let (l, _) = end_three_term();
        let cfg = DeformationConfig::standard();
        let mix = |idx: &[(usize, i64)]| {
            let coeffs = idx
                .iter()
                .map(|(i, v)| (*i, Scalar::from_int(*v)))
                .collect();
            l.element(coeffs).unwrap()
        };
        let a = mix(&[(0, 2), (3, -1), (7, 5)]);
        let b = mix(&[(1, 1), (8, 3)]);
        let c = mix(&[(2, -2), (12, 1), (15, 4)]);
        assert!(l.jacobiator(&a, &b, &c, false, &cfg).unwrap().is_zero());
    }

    #[test]
    fn deformed_antisymmetry_defect_is_twice_the_bracket_of_images() {
        // [a,b]^d + (-1)^{|a||b|} [b,a]^d = 2L(-1)^{|a|} [Qa, Qb]: the
        // deformed bracket is not graded-antisymmetric, its defect is
        // exactly this correction.
        let (l, _) = end_three_term();
        let cfg = DeformationConfig::standard();
        for (i, j) in [(0usize, 1usize), (2, 9), (4, 13), (10, 3), (6, 6)] {
            let a = l.basis_element(i).unwrap();
            let b = l.basis_element(j).unwrap();
            let (pa, pb) = (l.degrees()[i], l.degrees()[j]);
            let lhs = {
                let mut flip = l.deformed_bracket(&b, &a, &cfg).unwrap();
                if (pa * pb).rem_euclid(2) == 1 {
                    flip = flip.neg();
                }
                l.deformed_bracket(&a, &b, &cfg).unwrap().add(&flip).unwrap()
            };
            let mut rhs = l
                .bracket(&l.apply_q(&a).unwrap(), &l.apply_q(&b).unwrap())
                .unwrap()
                .scale(&cfg.lambda().scale_rational(&rat(2, 1)));
            if pa.rem_euclid(2) == 1 {
                rhs = rhs.neg();
            }
            assert_eq!(lhs, rhs, "pair ({}, {})", i, j);
        }
    }

    #[test]
    fn deformed_jacobiator_is_purely_first_order() {
        let (l, _) = end_three_term();
        let cfg = DeformationConfig::standard();
        let a = l.basis_element(1).unwrap();
        let b = l.basis_element(6).unwrap();
        let c = l.basis_element(11).unwrap();
        let defect = l.jacobiator(&a, &b, &c, true, &cfg).unwrap();
        // No h^2 (e-degree 4) component survives: Q^2 = 0 kills nested
        // corrections.
        if let Some(max) = defect.max_eps_degree() {
            assert!(max <= 2, "unexpected higher-order term in {}", defect);
        }
    }

    #[test]
    fn primitive_is_cyclic_in_its_arguments() {
        let (l, _) = end_three_term();
        let cfg = DeformationConfig::standard();
        let a = l.basis_element(3).unwrap();
        let b = l.basis_element(8).unwrap();
        let c = l.basis_element(13).unwrap();
        let p1 = l.defect_primitive(&a, &b, &c, &cfg).unwrap();
        let p2 = l.defect_primitive(&b, &c, &a, &cfg).unwrap();
        let p3 = l.defect_primitive(&c, &a, &b, &cfg).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(p1, p3);
    }

    #[test]
    fn exactness_holds_on_endomorphism_instances() {
        let (l, _) = end_three_term();
        for cfg in [DeformationConfig::standard(), DeformationConfig::negative()] {
            for (i, j, k) in [
                (0usize, 1usize, 2usize),
                (3, 8, 13),
                (5, 6, 7),
                (15, 2, 9),
                (4, 4, 4),
                (1, 14, 10),
            ] {
                let a = l.basis_element(i).unwrap();
                let b = l.basis_element(j).unwrap();
                let c = l.basis_element(k).unwrap();
                let breakdown = l.exactness_check(&a, &b, &c, &cfg).unwrap();
                assert!(
                    breakdown.residual.is_zero(),
                    "residual {} on triple ({}, {}, {})",
                    breakdown.residual,
                    i,
                    j,
                    k
                );
            }
        }
    }

    #[test]
    fn fifth_exponent_variant_fails_on_mixed_parity() {
        // With the `|a1|+|a2|` exponent the expression stops being a
        // primitive as soon as |a2| and |a3| have different parities.
        let (l, _) = end_three_term();
        let cfg = DeformationConfig::standard();
        let mut found_nonzero = false;
        for i in 0..l.dim() {
            for j in 0..l.dim() {
                for k in 0..l.dim() {
                    if (l.degrees()[j] - l.degrees()[k]).rem_euclid(2) == 0 {
                        continue;
                    }
                    let a = l.basis_element(i).unwrap();
                    let b = l.basis_element(j).unwrap();
                    let c = l.basis_element(k).unwrap();
                    let defect = l.jacobiator(&a, &b, &c, true, &cfg).unwrap();
                    let variant = l
                        .defect_primitive_variant(
                            &a,
                            &b,
                            &c,
                            &cfg,
                            FifthTermExponent::DegreeSum12,
                        )
                        .unwrap();
                    let residual = defect.sub(&l.apply_q(&variant).unwrap()).unwrap();
                    if !residual.is_zero() {
                        found_nonzero = true;
                    }
                }
            }
        }
        assert!(
            found_nonzero,
            "the DegreeSum12 variant should fail somewhere on mixed parity"
        );
    }

    #[test]
    fn bracket_requires_same_presentation() {
        let l1 = abelian(2);
        let l2 = abelian(3);
        let a = l1.basis_element(0).unwrap();
        let b = l2.basis_element(0).unwrap();
        assert_eq!(l1.bracket(&a, &b), Err(Error::PresentationMismatch));
    }

    #[test]
    fn split_bracket_rows_merge() {
        // One structure constant per row, as the script format delivers
        // them; [b0, b1] must come out as b2 + 3*b3, not just the last row.
        let l = DglaPresentation::new(
            vec![0, 0, 0, 0],
            vec![
                ((0, 1), vec![(2, gauss_int(1, 0))]),
                ((0, 1), vec![(3, gauss_int(3, 0))]),
                ((1, 0), vec![(2, gauss_int(-1, 0)), (3, gauss_int(-3, 0))]),
            ],
            Matrix::zero(4, 4),
        )
        .unwrap();
        let bracket = l
            .bracket(&l.basis_element(0).unwrap(), &l.basis_element(1).unwrap())
            .unwrap();
        let expected = l
            .element(vec![(2, Scalar::one()), (3, Scalar::from_int(3))])
            .unwrap();
        assert_eq!(bracket, expected);
    }

    #[test]
    fn grading_checked_at_construction() {
        let bad = DglaPresentation::new(
            vec![0, 1],
            vec![((0, 0), vec![(1, gauss_int(1, 0))])],
            Matrix::zero(2, 2),
        );
        assert!(matches!(bad, Err(Error::GradingViolation(_))));
    }
}
