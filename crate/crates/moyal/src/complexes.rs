//! Bounded chain complexes, graded linear maps between them, the homotopy
//! differential, and the deformed composition.
//!
//! Complexes live in a finite degree window with per-degree dimensions and
//! boundary matrices `d_k : C^k -> C^{k+1}` over `Q(i)`. Graded maps carry
//! per-degree blocks over the full coefficient ring and are not required to
//! commute with the boundaries; the homotopy differential
//! `d(phi) = d . phi - (-1)^{|phi|} phi . d` is the square-zero odd
//! derivation that drives the deformed composition
//!
//! ```text
//! phi o_d alpha = phi.alpha
//!     + L * ((-1)^{|phi|} d_l.phi - phi.d_k) . (d_k.alpha - (-1)^{|alpha|} alpha.d_j)
//! ```
//!
//! The correction raises the plain degree by two, so deformed results are
//! [`MapSum`]s of pure-degree maps; with `h` of degree `-2` each summand
//! has the same weighted degree.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::deform::DeformationConfig;
use crate::dgla::{DglaPresentation, StructureConstants};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{GaussianRational, Scalar};

/// Finite-dimensional chain complex over `Q(i)` with boundaries raising
/// degree by one and squaring to zero.
#[derive(Clone, PartialEq)]
pub struct ChainComplexData {
    lo: i64,
    hi: i64,
    dims: Vec<usize>,
    /// `boundaries[k - lo]` is `d_k : C^k -> C^{k+1}` with shape
    /// `dim(k+1) x dim(k)`; the top boundary is omitted.
    boundaries: Vec<Matrix<GaussianRational>>,
}

#[derive(Clone)]
pub struct ChainComplex(Arc<ChainComplexData>);

impl PartialEq for ChainComplex {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}
impl Eq for ChainComplex {}

impl ChainComplex {
    pub fn new(
        lo: i64,
        dims: Vec<usize>,
        boundaries: Vec<Matrix<GaussianRational>>,
    ) -> Result<ChainComplex> {
        if dims.is_empty() {
            return Err(Error::ParamOutOfRange("complex needs a degree range".into()));
        }
        let hi = lo + dims.len() as i64 - 1;
        if boundaries.len() + 1 != dims.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} boundary matrices, got {}",
                dims.len() - 1,
                boundaries.len()
            )));
        }
        for (idx, b) in boundaries.iter().enumerate() {
            if b.rows() != dims[idx + 1] || b.cols() != dims[idx] {
                return Err(Error::ShapeMismatch(format!(
                    "boundary at degree {} must be {}x{}, got {}x{}",
                    lo + idx as i64,
                    dims[idx + 1],
                    dims[idx],
                    b.rows(),
                    b.cols()
                )));
            }
        }
        for idx in 0..boundaries.len().saturating_sub(1) {
            let square = boundaries[idx + 1].mul(&boundaries[idx])?;
            if !square.is_zero() {
                return Err(Error::BoundaryNotSquareZero {
                    degree: lo + idx as i64,
                });
            }
        }
        Ok(ChainComplex(Arc::new(ChainComplexData {
            lo,
            hi,
            dims,
            boundaries,
        })))
    }

    pub fn lo(&self) -> i64 {
        self.0.lo
    }

    pub fn hi(&self) -> i64 {
        self.0.hi
    }

    pub fn dim(&self, k: i64) -> usize {
        if k < self.0.lo || k > self.0.hi {
            0
        } else {
            self.0.dims[(k - self.0.lo) as usize]
        }
    }

    pub fn total_dim(&self) -> usize {
        self.0.dims.iter().sum()
    }

    /// Boundary `d_k` (a zero-shaped matrix outside the stored range).
    pub fn boundary(&self, k: i64) -> Matrix<GaussianRational> {
        if k >= self.0.lo && k < self.0.hi {
            self.0.boundaries[(k - self.0.lo) as usize].clone()
        } else {
            Matrix::zero(self.dim(k + 1), self.dim(k))
        }
    }

    /// The boundary packaged as a degree `+1` graded map.
    pub fn boundary_map(&self) -> GradedMap {
        let mut blocks = BTreeMap::new();
        for k in self.0.lo..self.0.hi {
            let b = self.boundary(k);
            if !b.is_zero() {
                blocks.insert(k, b.map(|g| Scalar::from_gaussian(g.clone())));
            }
        }
        GradedMap {
            src: self.clone(),
            tgt: self.clone(),
            degree: 1,
            blocks,
        }
    }

    pub fn render(&self) -> String {
        let dims: Vec<String> = self.0.dims.iter().map(|d| d.to_string()).collect();
        let mut out = format!(
            "complex degrees {}..{} dims {}",
            self.0.lo,
            self.0.hi,
            dims.join(" ")
        );
        for k in self.0.lo..self.0.hi {
            let b = self.boundary(k);
            if b.rows() > 0 && b.cols() > 0 {
                out.push_str(&format!("\n  d[{}] = {}", k, b.render()));
            }
        }
        out
    }
}

impl fmt::Debug for ChainComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Degree-homogeneous linear map between complexes, given by blocks
/// `phi_k : C^k_src -> C^{k+r}_tgt`. Zero blocks are not stored, so equality
/// of maps is equality of block tables.
#[derive(Clone, PartialEq, Eq)]
pub struct GradedMap {
    src: ChainComplex,
    tgt: ChainComplex,
    degree: i64,
    blocks: BTreeMap<i64, Matrix<Scalar>>,
}

impl GradedMap {
    pub fn new(
        src: &ChainComplex,
        tgt: &ChainComplex,
        degree: i64,
        blocks: Vec<(i64, Matrix<Scalar>)>,
    ) -> Result<GradedMap> {
        let mut table = BTreeMap::new();
        for (k, block) in blocks {
            let (rows, cols) = (tgt.dim(k + degree), src.dim(k));
            if block.rows() != rows || block.cols() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "block at degree {} must be {}x{}, got {}x{}",
                    k,
                    rows,
                    cols,
                    block.rows(),
                    block.cols()
                )));
            }
            if !block.is_zero() {
                table.insert(k, block);
            }
        }
        Ok(GradedMap {
            src: src.clone(),
            tgt: tgt.clone(),
            degree,
            blocks: table,
        })
    }

    pub fn zero(src: &ChainComplex, tgt: &ChainComplex, degree: i64) -> GradedMap {
        GradedMap {
            src: src.clone(),
            tgt: tgt.clone(),
            degree,
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(c: &ChainComplex) -> GradedMap {
        let mut blocks = BTreeMap::new();
        for k in c.lo()..=c.hi() {
            let n = c.dim(k);
            if n > 0 {
                blocks.insert(k, Matrix::identity(n));
            }
        }
        GradedMap {
            src: c.clone(),
            tgt: c.clone(),
            degree: 0,
            blocks,
        }
    }

    pub fn source(&self) -> &ChainComplex {
        &self.src
    }

    pub fn target(&self) -> &ChainComplex {
        &self.tgt
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn block(&self, k: i64) -> Matrix<Scalar> {
        self.blocks
            .get(&k)
            .cloned()
            .unwrap_or_else(|| Matrix::zero(self.tgt.dim(k + self.degree), self.src.dim(k)))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&i64, &Matrix<Scalar>)> {
        self.blocks.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    fn same_spaces(&self, other: &GradedMap) -> bool {
        self.src == other.src && self.tgt == other.tgt
    }

    pub fn add(&self, other: &GradedMap) -> Result<GradedMap> {
        if !self.same_spaces(other) {
            return Err(Error::ComplexMismatch);
        }
        if self.degree != other.degree {
            return Err(Error::ShapeMismatch(
                "cannot add maps of different degree; use MapSum".into(),
            ));
        }
        let mut blocks = Vec::new();
        for k in self.src.lo()..=self.src.hi() {
            let sum = self.block(k).add(&other.block(k))?;
            blocks.push((k, sum));
        }
        GradedMap::new(&self.src, &self.tgt, self.degree, blocks)
    }

    pub fn neg(&self) -> GradedMap {
        GradedMap {
            src: self.src.clone(),
            tgt: self.tgt.clone(),
            degree: self.degree,
            blocks: self
                .blocks
                .iter()
                .map(|(k, b)| (*k, b.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> GradedMap {
        if s.is_zero() {
            return GradedMap::zero(&self.src, &self.tgt, self.degree);
        }
        GradedMap {
            src: self.src.clone(),
            tgt: self.tgt.clone(),
            degree: self.degree,
            blocks: self
                .blocks
                .iter()
                .map(|(k, b)| (*k, b.scale(s)))
                .collect(),
        }
    }

    /// Blockwise composition `self . other` (`other` applied first).
    pub fn compose(&self, other: &GradedMap) -> Result<GradedMap> {
        if self.src != other.tgt {
            return Err(Error::NotComposable);
        }
        let degree = self.degree + other.degree;
        let mut blocks = Vec::new();
        for k in other.src.lo()..=other.src.hi() {
            let mid = k + other.degree;
            let block = self.block(mid).mul(&other.block(k))?;
            blocks.push((k, block));
        }
        GradedMap::new(&other.src, &self.tgt, degree, blocks)
    }

    /// Homotopy differential `d(phi) = d_tgt . phi - (-1)^{|phi|} phi . d_src`,
    /// of degree `|phi| + 1`; applying it twice gives zero.
    pub fn hom_differential(&self) -> GradedMap {
        let left = self
            .tgt
            .boundary_map()
            .compose(self)
            .expect("same complex");
        let right = self
            .compose(&self.src.boundary_map())
            .expect("same complex");
        let signed = if self.degree.rem_euclid(2) == 1 {
            right
        } else {
            right.neg()
        };
        left.add(&signed).expect("same degree")
    }

    pub fn render(&self) -> String {
        let mut out = format!("graded map deg {}", self.degree);
        if self.blocks.is_empty() {
            out.push_str(" (zero)");
        }
        for (k, b) in &self.blocks {
            out.push_str(&format!("\n  block[{}] = {}", k, b.render()));
        }
        out
    }
}

impl fmt::Debug for GradedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Formal sum of pure-degree graded maps between the same complexes; the
/// result type of the deformed composition.
#[derive(Clone, PartialEq, Eq)]
pub struct MapSum {
    src: ChainComplex,
    tgt: ChainComplex,
    parts: BTreeMap<i64, GradedMap>,
}

impl MapSum {
    pub fn zero(src: &ChainComplex, tgt: &ChainComplex) -> MapSum {
        MapSum {
            src: src.clone(),
            tgt: tgt.clone(),
            parts: BTreeMap::new(),
        }
    }

    pub fn from_map(map: GradedMap) -> MapSum {
        let mut sum = MapSum::zero(&map.src, &map.tgt);
        sum.accumulate(map);
        sum
    }

    fn accumulate(&mut self, map: GradedMap) {
        if map.is_zero() {
            return;
        }
        match self.parts.entry(map.degree) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(map);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add(&map).expect("same degree and spaces");
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &MapSum) -> Result<MapSum> {
        if self.src != other.src || self.tgt != other.tgt {
            return Err(Error::ComplexMismatch);
        }
        let mut out = self.clone();
        for part in other.parts.values() {
            out.accumulate(part.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> MapSum {
        MapSum {
            src: self.src.clone(),
            tgt: self.tgt.clone(),
            parts: self
                .parts
                .iter()
                .map(|(d, m)| (*d, m.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &MapSum) -> Result<MapSum> {
        self.add(&other.neg())
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn parts(&self) -> impl Iterator<Item = &GradedMap> {
        self.parts.values()
    }

    pub fn render(&self) -> String {
        if self.parts.is_empty() {
            return "0".to_string();
        }
        self.parts
            .values()
            .map(GradedMap::render)
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Debug for MapSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Deformed composition of pure-degree maps, transcribing the three-factor
/// form: `phi.alpha + L*((-1)^{|phi|} d_l.phi - phi.d_k).(d_k.alpha - (-1)^{|alpha|} alpha.d_j)`.
pub fn deformed_compose_pure(
    phi: &GradedMap,
    alpha: &GradedMap,
    cfg: &DeformationConfig,
) -> Result<MapSum> {
    if phi.src != alpha.tgt {
        return Err(Error::NotComposable);
    }
    let d_l = phi.tgt.boundary_map();
    let d_k = phi.src.boundary_map();
    let d_j = alpha.src.boundary_map();

    let mut left = d_l.compose(phi)?;
    if phi.degree.rem_euclid(2) == 1 {
        left = left.neg();
    }
    let left = left.add(&phi.compose(&d_k)?.neg())?;

    let mut right_tail = alpha.compose(&d_j)?;
    if alpha.degree.rem_euclid(2) == 0 {
        right_tail = right_tail.neg();
    }
    let right = d_k.compose(alpha)?.add(&right_tail)?;

    let correction = left.compose(&right)?.scale(cfg.lambda());
    let mut out = MapSum::from_map(phi.compose(alpha)?);
    out.accumulate(correction);
    Ok(out)
}

/// Bilinear extension of the deformed composition to formal sums.
pub fn deformed_compose(f: &MapSum, g: &MapSum, cfg: &DeformationConfig) -> Result<MapSum> {
    if f.src != g.tgt {
        return Err(Error::NotComposable);
    }
    let mut out = MapSum::zero(&g.src, &f.tgt);
    for phi in f.parts.values() {
        for alpha in g.parts.values() {
            out = out.add(&deformed_compose_pure(phi, alpha, cfg)?)?;
        }
    }
    Ok(out)
}

/// Index of one elementary basis map of an endomorphism Lie algebra:
/// sends source basis vector `col` in degree `k` to target vector `row` in
/// degree `k + deg`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EndBasisIndex {
    pub src_degree: i64,
    pub col: usize,
    pub row: usize,
    pub deg: i64,
}

/// The endomorphism complex of `c` restricted to map degrees inside
/// `window`, as a structure-constant presentation: bracket
/// `[phi, alpha] = phi.alpha - (-1)^{|phi||alpha|} alpha.phi` and
/// differential from the homotopy formula. The window must be closed under
/// composition degrees and the `+1` shift wherever nonzero maps exist;
/// passing the full range `[lo-hi, hi-lo]` always works.
pub fn end_dgla(
    c: &ChainComplex,
    window: (i64, i64),
) -> Result<(DglaPresentation, Vec<EndBasisIndex>)> {
    let (wlo, whi) = window;
    let mut basis: Vec<EndBasisIndex> = Vec::new();
    for k in c.lo()..=c.hi() {
        for deg in wlo..=whi {
            let l = k + deg;
            for col in 0..c.dim(k) {
                for row in 0..c.dim(l) {
                    basis.push(EndBasisIndex {
                        src_degree: k,
                        col,
                        row,
                        deg,
                    });
                }
            }
        }
    }
    if basis.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let find = |b: &EndBasisIndex| basis.iter().position(|x| x == b);
    let in_window = |deg: i64| deg >= wlo && deg <= whi;

    // Composition of elementary maps: u . v is elementary or zero.
    let compose_elem = |u: &EndBasisIndex, v: &EndBasisIndex| -> Option<EndBasisIndex> {
        (u.src_degree == v.src_degree + v.deg && u.col == v.row).then_some(EndBasisIndex {
            src_degree: v.src_degree,
            col: v.col,
            row: u.row,
            deg: u.deg + v.deg,
        })
    };

    let degrees: Vec<i64> = basis.iter().map(|b| b.deg).collect();
    let n = basis.len();
    let mut brackets: StructureConstants = Vec::new();
    for (iu, u) in basis.iter().enumerate() {
        for (iv, v) in basis.iter().enumerate() {
            let mut entries: BTreeMap<usize, GaussianRational> = BTreeMap::new();
            let mut push = |target: Option<EndBasisIndex>, sign: i64| -> Result<()> {
                if let Some(t) = target {
                    if !in_window(t.deg) {
                        return Err(Error::WindowNotClosed(t.deg));
                    }
                    let idx = find(&t).ok_or(Error::WindowNotClosed(t.deg))?;
                    let entry = entries
                        .entry(idx)
                        .or_insert_with(num_traits::Zero::zero);
                    *entry = entry.clone() + crate::scalar::gauss_int(sign, 0);
                }
                Ok(())
            };
            push(compose_elem(u, v), 1)?;
            let sign = if (u.deg * v.deg).rem_euclid(2) == 1 {
                1
            } else {
                -1
            };
            push(compose_elem(v, u), sign)?;
            let entries: Vec<(usize, GaussianRational)> = entries
                .into_iter()
                .filter(|(_, g)| !num_traits::Zero::is_zero(g))
                .collect();
            if !entries.is_empty() {
                brackets.push(((iu, iv), entries));
            }
        }
    }

    // Differential: d(u) = d . u - (-1)^{|u|} u . d expanded over the basis.
    let mut q: Matrix<GaussianRational> = Matrix::zero(n, n);
    for (iu, u) in basis.iter().enumerate() {
        let tgt_deg = u.src_degree + u.deg;
        let up = c.boundary(tgt_deg);
        for m in 0..c.dim(tgt_deg + 1) {
            let coeff = up.get(m, u.row).clone();
            if !num_traits::Zero::is_zero(&coeff) {
                let t = EndBasisIndex {
                    src_degree: u.src_degree,
                    col: u.col,
                    row: m,
                    deg: u.deg + 1,
                };
                if !in_window(t.deg) {
                    return Err(Error::WindowNotClosed(t.deg));
                }
                let idx = find(&t).ok_or(Error::WindowNotClosed(t.deg))?;
                let cur = q.get(idx, iu).clone();
                q.set(idx, iu, cur + coeff);
            }
        }
        let down = c.boundary(u.src_degree - 1);
        let sign = if u.deg.rem_euclid(2) == 1 { 1 } else { -1 };
        for s in 0..c.dim(u.src_degree - 1) {
            let coeff = down.get(u.col, s).clone();
            if !num_traits::Zero::is_zero(&coeff) {
                let t = EndBasisIndex {
                    src_degree: u.src_degree - 1,
                    col: s,
                    row: u.row,
                    deg: u.deg + 1,
                };
                if !in_window(t.deg) {
                    return Err(Error::WindowNotClosed(t.deg));
                }
                let idx = find(&t).ok_or(Error::WindowNotClosed(t.deg))?;
                let cur = q.get(idx, iu).clone();
                q.set(idx, iu, cur + coeff * crate::scalar::gauss_int(sign, 0));
            }
        }
    }

    let dgla = DglaPresentation::new(degrees, brackets, q)?;
    Ok((dgla, basis))
}

/// Realize a basis index of [`end_dgla`] as an actual graded map, for
/// cross-checking the structure constants against direct composition.
pub fn elementary_map(c: &ChainComplex, b: &EndBasisIndex) -> GradedMap {
    let mut block = Matrix::zero(c.dim(b.src_degree + b.deg), c.dim(b.src_degree));
    block.set(b.row, b.col, Scalar::one());
    GradedMap::new(c, c, b.deg, vec![(b.src_degree, block)]).expect("elementary block shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::gauss_int;

    fn gmat(rows: Vec<Vec<i64>>) -> Matrix<GaussianRational> {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|v| gauss_int(v, 0)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn smat(rows: Vec<Vec<i64>>) -> Matrix<Scalar> {
        gmat(rows).map(|g| Scalar::from_gaussian(g.clone()))
    }

    /// Degrees 0..2 with dims (1, 2, 1), d0 = (1 0)^T, d1 = (0 1).
    fn three_term() -> ChainComplex {
        ChainComplex::new(
            0,
            vec![1, 2, 1],
            vec![gmat(vec![vec![1], vec![0]]), gmat(vec![vec![0, 1]])],
        )
        .unwrap()
    }

    #[test]
    fn boundary_square_enforced() {
        let bad = ChainComplex::new(
            0,
            vec![1, 1, 1],
            vec![gmat(vec![vec![1]]), gmat(vec![vec![1]])],
        );
        assert_eq!(bad, Err(Error::BoundaryNotSquareZero { degree: 0 }));
    }

    #[test]
    fn chain_map_and_identity_are_closed() {
        let c = three_term();
        let id = GradedMap::identity(&c);
        assert!(id.hom_differential().is_zero());
        // The boundary itself is closed.
        assert!(c.boundary_map().hom_differential().is_zero());
    }

    #[test]
    fn hom_differential_squares_to_zero() {
        let c = three_term();
        let phi = GradedMap::new(
            &c,
            &c,
            0,
            vec![
                (0, smat(vec![vec![2]])),
                (1, smat(vec![vec![1, 3], vec![0, 1]])),
                (2, smat(vec![vec![5]])),
            ],
        )
        .unwrap();
        let d_phi = phi.hom_differential();
        assert!(!d_phi.is_zero());
        assert!(d_phi.hom_differential().is_zero());
    }

    #[test]
    fn compose_respects_identity_and_degree() {
        let c = three_term();
        let id = GradedMap::identity(&c);
        let d = c.boundary_map();
        assert_eq!(d.compose(&id).unwrap(), d);
        assert_eq!(id.compose(&d).unwrap(), d);
        let dd = d.compose(&d).unwrap();
        assert_eq!(dd.degree(), 2);
        assert!(dd.is_zero());
    }

    #[test]
    fn leibniz_for_composition() {
        let c = three_term();
        let phi = GradedMap::new(&c, &c, 1, vec![(0, smat(vec![vec![1], vec![2]]))]).unwrap();
        let alpha = GradedMap::new(
            &c,
            &c,
            0,
            vec![(0, smat(vec![vec![3]])), (1, smat(vec![vec![0, 1], vec![1, 0]]))],
        )
        .unwrap();
        let lhs = phi.compose(&alpha).unwrap().hom_differential();
        let mut rhs = phi.hom_differential().compose(&alpha).unwrap();
        let mut tail = phi.compose(&alpha.hom_differential()).unwrap();
        if phi.degree().rem_euclid(2) == 1 {
            tail = tail.neg();
        }
        rhs = rhs.add(&tail).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn deformed_composition_laws() {
        let c = three_term();
        let cfg = DeformationConfig::standard();
        let phi = GradedMap::new(
            &c,
            &c,
            0,
            vec![(0, smat(vec![vec![2]])), (1, smat(vec![vec![1, 1], vec![0, 3]]))],
        )
        .unwrap();
        let id = GradedMap::identity(&c);
        let d = c.boundary_map();

        // phi o_d id = phi = id o_d phi
        let left = deformed_compose_pure(&phi, &id, &cfg).unwrap();
        let right = deformed_compose_pure(&id, &phi, &cfg).unwrap();
        assert_eq!(left, MapSum::from_map(phi.clone()));
        assert_eq!(right, MapSum::from_map(phi.clone()));

        // d o_d phi = d . phi and phi o_d d = phi . d
        let left = deformed_compose_pure(&d, &phi, &cfg).unwrap();
        assert_eq!(left, MapSum::from_map(d.compose(&phi).unwrap()));
        let right = deformed_compose_pure(&phi, &d, &cfg).unwrap();
        assert_eq!(right, MapSum::from_map(phi.compose(&d).unwrap()));

        // Chain maps compose undeformed.
        let closed = GradedMap::identity(&c).scale(&Scalar::from_int(4));
        let out = deformed_compose_pure(&closed, &closed, &cfg).unwrap();
        assert_eq!(
            out,
            MapSum::from_map(closed.compose(&closed).unwrap())
        );
    }

    #[test]
    fn deformed_composition_matches_derivation_form() {
        // The three-factor expansion equals
        // phi.alpha + L*(-1)^{|phi|} d(phi) . d(alpha).
        let c = three_term();
        let cfg = DeformationConfig::standard();
        let phi = GradedMap::new(&c, &c, 1, vec![(0, smat(vec![vec![0], vec![1]]))]).unwrap();
        let alpha = GradedMap::new(
            &c,
            &c,
            -1,
            vec![(1, smat(vec![vec![1, 2]])), (2, smat(vec![vec![1], vec![0]]))],
        )
        .unwrap();
        let via_formula = deformed_compose_pure(&phi, &alpha, &cfg).unwrap();
        let mut corr = phi
            .hom_differential()
            .compose(&alpha.hom_differential())
            .unwrap()
            .scale(cfg.lambda());
        if phi.degree().rem_euclid(2) == 1 {
            corr = corr.neg();
        }
        let mut expected = MapSum::from_map(phi.compose(&alpha).unwrap());
        expected = expected.add(&MapSum::from_map(corr)).unwrap();
        assert_eq!(via_formula, expected);
    }

    #[test]
    fn deformed_associativity_on_sums() {
        let c = three_term();
        let cfg = DeformationConfig::standard();
        let f = MapSum::from_map(
            GradedMap::new(&c, &c, 1, vec![(0, smat(vec![vec![1], vec![2]]))]).unwrap(),
        );
        let g = MapSum::from_map(
            GradedMap::new(
                &c,
                &c,
                0,
                vec![(0, smat(vec![vec![1]])), (1, smat(vec![vec![2, 0], vec![1, 1]]))],
            )
            .unwrap(),
        );
        let h = MapSum::from_map(
            GradedMap::new(&c, &c, -1, vec![(1, smat(vec![vec![3, 1]]))]).unwrap(),
        );
        let left = deformed_compose(&f, &deformed_compose(&g, &h, &cfg).unwrap(), &cfg).unwrap();
        let right = deformed_compose(&deformed_compose(&f, &g, &cfg).unwrap(), &h, &cfg).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn end_dgla_of_two_term_complex() {
        let c = ChainComplex::new(0, vec![1, 1], vec![gmat(vec![vec![1]])]).unwrap();
        let (dgla, basis) = end_dgla(&c, (-1, 1)).unwrap();
        assert_eq!(basis.len(), 4);
        let report = dgla.validate();
        assert!(report.is_valid(), "{}", report);
    }

    #[test]
    fn end_dgla_with_zero_boundary_has_zero_differential() {
        let c = ChainComplex::new(0, vec![2, 1], vec![gmat(vec![vec![0, 0]])]).unwrap();
        let (dgla, _) = end_dgla(&c, (-1, 1)).unwrap();
        assert!(dgla.differential_matrix().is_zero());
    }

    #[test]
    fn end_dgla_bracket_matches_composition() {
        let c = three_term();
        let (dgla, basis) = end_dgla(&c, (-2, 2)).unwrap();
        assert!(dgla.validate().is_valid());
        // Cross-check a handful of structure constants against actual map
        // composition.
        for (iu, u) in basis.iter().enumerate() {
            for (iv, v) in basis.iter().enumerate() {
                let via_constants = dgla
                    .bracket(&dgla.basis_element(iu).unwrap(), &dgla.basis_element(iv).unwrap())
                    .unwrap();
                let mu = elementary_map(&c, u);
                let mv = elementary_map(&c, v);
                let sign_odd = (u.deg * v.deg).rem_euclid(2) == 1;
                let mut direct = mu.compose(&mv).unwrap();
                let mut tail = mv.compose(&mu).unwrap();
                if !sign_odd {
                    tail = tail.neg();
                }
                direct = direct.add(&tail).unwrap();
                // Expand `direct` over the elementary basis and compare.
                let mut expected: Vec<(usize, Scalar)> = Vec::new();
                for (iw, w) in basis.iter().enumerate() {
                    if w.deg != direct.degree() {
                        continue;
                    }
                    let entry = direct.block(w.src_degree).get(w.row, w.col).clone();
                    if !entry.is_zero() {
                        expected.push((iw, entry));
                    }
                }
                let got: Vec<(usize, Scalar)> = via_constants
                    .coeffs()
                    .map(|(i, s)| (i, s.clone()))
                    .collect();
                assert_eq!(got, expected, "bracket [{},{}]", iu, iv);
            }
        }
    }

    #[test]
    fn empty_window_rejected() {
        let c = three_term();
        assert!(matches!(end_dgla(&c, (5, 6)), Err(Error::EmptyWindow)));
    }

    #[test]
    fn unclosed_window_rejected() {
        let c = three_term();
        // Window [0,1] misses degree 2 compositions d.d... and [1,1] misses
        // the differential image of degree-1 maps? Composition of two
        // degree-1 maps lands in degree 2.
        assert!(matches!(
            end_dgla(&c, (0, 1)),
            Err(Error::WindowNotClosed(2))
        ));
    }
}
