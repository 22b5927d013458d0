//! Script execution: named objects, the active deformation config, and the
//! check/show/validate statements.
//!
//! Contexts, complexes, maps, Lie algebras, and coalgebras are declared
//! incrementally (header line plus boundary/block/constant lines) and are
//! frozen on first use; freezing runs the constructor's validation, so a
//! bad boundary matrix or grading surfaces at the first statement that
//! needs the object.

use std::collections::BTreeMap;

use moyal::coalgebra::{dualize_dga, CoElement, CoalgebraMorphism, CoalgebraPresentation};
use moyal::complexes::{deformed_compose, ChainComplex, GradedMap, MapSum};
use moyal::deform::{
    associativity_defect, deformed_mul, exactness_witnesses, moyal_associativity_defect,
    moyal_weyl_mul, morphism_functoriality_defect, parity_closure_check, s_equivalence_defect,
    weak_pauli_defect, DeformationConfig,
};
use moyal::dgla::{DglaPresentation, LieElement, StructureConstants};
use moyal::error::{Error, Result};
use moyal::expr::{eval_element, Expr};
use moyal::graded::{AlgebraMorphism, Context, Derivation, Element};
use moyal::instances;
use moyal::matrix::Matrix;
use moyal::scalar::{GaussianRational, Scalar};

use crate::script::Statement;
use crate::suites;

enum CtxSlot {
    Building(Vec<(String, i64)>),
    Built(Context),
}

enum ComplexSlot {
    Building {
        lo: i64,
        dims: Vec<usize>,
        boundaries: Vec<Option<Matrix<GaussianRational>>>,
    },
    Built(ChainComplex),
}

enum MapSlot {
    Building {
        src: String,
        tgt: String,
        degree: i64,
        blocks: Vec<(i64, Matrix<Scalar>)>,
    },
    Built(GradedMap),
}

enum DglaSlot {
    Building {
        degrees: Vec<i64>,
        brackets: StructureConstants,
        q: Option<Matrix<GaussianRational>>,
    },
    Built(DglaPresentation),
}

enum CoalgSlot {
    Building {
        degrees: Vec<i64>,
        delta: Vec<(usize, usize, usize, GaussianRational)>,
        q: Option<Matrix<GaussianRational>>,
    },
    Built(CoalgebraPresentation),
}

#[derive(Default)]
pub struct Session {
    contexts: BTreeMap<String, CtxSlot>,
    current: Option<String>,
    diffs: BTreeMap<String, Derivation>,
    active_diff: Option<String>,
    ctx_default_diff: BTreeMap<String, String>,
    morphisms: BTreeMap<String, AlgebraMorphism>,
    elements: BTreeMap<String, Element>,
    weyl: BTreeMap<String, Vec<(Derivation, Derivation)>>,
    complexes: BTreeMap<String, ComplexSlot>,
    maps: BTreeMap<String, MapSlot>,
    dglas: BTreeMap<String, DglaSlot>,
    lelems: BTreeMap<String, LieElement>,
    coalgebras: BTreeMap<String, CoalgSlot>,
    celems: BTreeMap<String, CoElement>,
    comorphisms: BTreeMap<String, CoalgebraMorphism>,
    lambda_negative: bool,
    truncation: Option<u32>,
    pub failures: usize,
}

fn fresh<K: Ord, V>(map: &BTreeMap<K, V>, key: &K, kind: &'static str, name: &str) -> Result<()> {
    if map.contains_key(key) {
        Err(Error::DuplicateName {
            kind,
            name: name.to_string(),
        })
    } else {
        Ok(())
    }
}

fn to_gaussian(s: &Scalar) -> Result<GaussianRational> {
    if s.eps_degree().unwrap_or(0) > 0 {
        return Err(Error::GradingViolation(
            "structure constants must be h-free".into(),
        ));
    }
    Ok(s.constant_part())
}

fn gaussian_matrix(rows: &[Vec<Scalar>]) -> Result<Matrix<GaussianRational>> {
    let converted: Result<Vec<Vec<GaussianRational>>> = rows
        .iter()
        .map(|r| r.iter().map(to_gaussian).collect())
        .collect();
    Matrix::from_rows(converted?)
}

fn scalar_matrix(rows: &[Vec<Scalar>]) -> Result<Matrix<Scalar>> {
    Matrix::from_rows(rows.to_vec())
}

/// Shared shape of Lie and coalgebra elements for the `b<k>` expressions.
trait Linear: Sized + Clone {
    fn add(&self, other: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn scale(&self, s: &Scalar) -> Self;
}

impl Linear for LieElement {
    fn add(&self, other: &Self) -> Result<Self> {
        LieElement::add(self, other)
    }
    fn neg(&self) -> Self {
        LieElement::neg(self)
    }
    fn scale(&self, s: &Scalar) -> Self {
        LieElement::scale(self, s)
    }
}

impl Linear for CoElement {
    fn add(&self, other: &Self) -> Result<Self> {
        CoElement::add(self, other)
    }
    fn neg(&self) -> Self {
        CoElement::neg(self)
    }
    fn scale(&self, s: &Scalar) -> Self {
        CoElement::scale(self, s)
    }
}

enum Lin<T> {
    Num(Scalar),
    Vec(T),
}

fn eval_linear<T: Linear>(
    expr: &Expr,
    basis: &dyn Fn(usize) -> Result<T>,
    named: &dyn Fn(&str) -> Option<T>,
) -> Result<Lin<T>> {
    let scalar_of = |e: &Expr| -> Result<Scalar> {
        match eval_linear(e, basis, named)? {
            Lin::Num(s) => Ok(s),
            Lin::Vec(_) => Err(Error::GradingViolation(
                "expected a scalar factor, found a basis element".into(),
            )),
        }
    };
    Ok(match expr {
        Expr::Num(g) => Lin::Num(Scalar::from_gaussian(g.clone())),
        Expr::Reserved('i') => Lin::Num(Scalar::i()),
        Expr::Reserved('h') => Lin::Num(Scalar::hbar()),
        Expr::Reserved('e') => Lin::Num(Scalar::epsilon()),
        Expr::Reserved(_) => unreachable!(),
        Expr::Name(name) => {
            if let Some(rest) = name.strip_prefix('b') {
                if let Ok(idx) = rest.parse::<usize>() {
                    return Ok(Lin::Vec(basis(idx)?));
                }
            }
            if let Some(found) = named(name) {
                return Ok(Lin::Vec(found));
            }
            return Err(Error::NameNotFound {
                kind: "basis element",
                name: name.clone(),
            });
        }
        Expr::Neg(inner) => match eval_linear(inner, basis, named)? {
            Lin::Num(s) => Lin::Num(s.neg_ref()),
            Lin::Vec(v) => Lin::Vec(v.neg()),
        },
        Expr::Add(a, b) => match (eval_linear(a, basis, named)?, eval_linear(b, basis, named)?) {
            (Lin::Num(x), Lin::Num(y)) => Lin::Num(x.add_ref(&y)),
            (Lin::Vec(x), Lin::Vec(y)) => Lin::Vec(x.add(&y)?),
            _ => {
                return Err(Error::GradingViolation(
                    "cannot add a scalar to a basis element".into(),
                ))
            }
        },
        Expr::Sub(a, b) => {
            let negated = Expr::Neg(b.clone());
            return eval_linear(&Expr::Add(a.clone(), Box::new(negated)), basis, named);
        }
        Expr::Mul(a, b) => match (eval_linear(a, basis, named)?, eval_linear(b, basis, named)?) {
            (Lin::Num(x), Lin::Num(y)) => Lin::Num(x.mul_ref(&y)),
            (Lin::Num(x), Lin::Vec(v)) | (Lin::Vec(v), Lin::Num(x)) => Lin::Vec(v.scale(&x)),
            (Lin::Vec(_), Lin::Vec(_)) => {
                return Err(Error::GradingViolation(
                    "basis elements cannot be multiplied here".into(),
                ))
            }
        },
        Expr::Pow(a, n) => Lin::Num(scalar_of(a)?.pow(*n)),
    })
}

impl Session {
    pub fn new() -> Session {
        Session::default()
    }

    pub fn cfg(&self) -> DeformationConfig {
        let base = if self.lambda_negative {
            DeformationConfig::negative()
        } else {
            DeformationConfig::standard()
        };
        match self.truncation {
            Some(order) => base.truncated(order),
            None => base,
        }
    }

    fn current_context(&mut self) -> Result<Context> {
        let name = self
            .current
            .clone()
            .ok_or(Error::NameNotFound {
                kind: "current context",
                name: "(none)".into(),
            })?;
        self.freeze_context(&name)
    }

    fn freeze_context(&mut self, name: &str) -> Result<Context> {
        let slot = self.contexts.get_mut(name).ok_or(Error::NameNotFound {
            kind: "context",
            name: name.to_string(),
        })?;
        match slot {
            CtxSlot::Built(ctx) => Ok(ctx.clone()),
            CtxSlot::Building(gens) => {
                let ctx = Context::new(gens.clone())?;
                *slot = CtxSlot::Built(ctx.clone());
                Ok(ctx)
            }
        }
    }

    fn get_diff(&self, name: &str) -> Result<Derivation> {
        self.diffs.get(name).cloned().ok_or(Error::NameNotFound {
            kind: "derivation",
            name: name.to_string(),
        })
    }

    fn active_derivation(&mut self) -> Result<Derivation> {
        let name = self.active_diff.clone().ok_or(Error::NameNotFound {
            kind: "active derivation",
            name: "(none)".into(),
        })?;
        self.get_diff(&name)
    }

    fn default_diff_for(&self, ctx_name: &str) -> Result<Derivation> {
        let diff_name = self
            .ctx_default_diff
            .get(ctx_name)
            .ok_or(Error::NameNotFound {
                kind: "derivation for context",
                name: ctx_name.to_string(),
            })?;
        self.get_diff(diff_name)
    }

    fn context_name_of(&self, ctx: &Context) -> Option<String> {
        self.contexts.iter().find_map(|(name, slot)| match slot {
            CtxSlot::Built(c) if c == ctx => Some(name.clone()),
            _ => None,
        })
    }

    fn eval(&mut self, expr: &Expr) -> Result<Element> {
        let ctx = self.current_context()?;
        let elements = self.elements.clone();
        eval_element(expr, &ctx, &|name| elements.get(name).cloned())
    }

    /// Evaluate with `*` meaning the deformed product (scalars still
    /// multiply as scalars because the correction kills constants).
    fn eval_deformed(&mut self, expr: &Expr) -> Result<Element> {
        let ctx = self.current_context()?;
        let d = self.active_derivation()?;
        let cfg = self.cfg();
        let elements = self.elements.clone();
        fn go(
            expr: &Expr,
            ctx: &Context,
            d: &Derivation,
            cfg: &DeformationConfig,
            resolve: &dyn Fn(&str) -> Option<Element>,
        ) -> Result<Element> {
            Ok(match expr {
                Expr::Mul(a, b) => {
                    let left = go(a, ctx, d, cfg, resolve)?;
                    let right = go(b, ctx, d, cfg, resolve)?;
                    deformed_mul(&left, &right, d, cfg)?
                }
                Expr::Pow(a, n) => {
                    let base = go(a, ctx, d, cfg, resolve)?;
                    let mut acc = Element::one(ctx);
                    for _ in 0..*n {
                        acc = deformed_mul(&acc, &base, d, cfg)?;
                    }
                    acc
                }
                Expr::Neg(a) => go(a, ctx, d, cfg, resolve)?.neg(),
                Expr::Add(a, b) => {
                    go(a, ctx, d, cfg, resolve)?.add(&go(b, ctx, d, cfg, resolve)?)?
                }
                Expr::Sub(a, b) => {
                    go(a, ctx, d, cfg, resolve)?.sub(&go(b, ctx, d, cfg, resolve)?)?
                }
                leaf => eval_element(leaf, ctx, resolve)?,
            })
        }
        go(expr, &ctx, &d, &cfg, &|name| elements.get(name).cloned())
    }

    fn freeze_complex(&mut self, name: &str) -> Result<ChainComplex> {
        let slot = self.complexes.get_mut(name).ok_or(Error::NameNotFound {
            kind: "complex",
            name: name.to_string(),
        })?;
        match slot {
            ComplexSlot::Built(c) => Ok(c.clone()),
            ComplexSlot::Building { lo, dims, boundaries } => {
                let mut mats = Vec::new();
                for (idx, b) in boundaries.iter().enumerate() {
                    match b {
                        Some(m) => mats.push(m.clone()),
                        None => mats.push(Matrix::zero(dims[idx + 1], dims[idx])),
                    }
                }
                let built = ChainComplex::new(*lo, dims.clone(), mats)?;
                *slot = ComplexSlot::Built(built.clone());
                Ok(built)
            }
        }
    }

    fn freeze_map(&mut self, name: &str) -> Result<GradedMap> {
        let (src, tgt, degree, blocks) = match self.maps.get(name) {
            Some(MapSlot::Built(m)) => return Ok(m.clone()),
            Some(MapSlot::Building {
                src,
                tgt,
                degree,
                blocks,
            }) => (src.clone(), tgt.clone(), *degree, blocks.clone()),
            None => {
                return Err(Error::NameNotFound {
                    kind: "map",
                    name: name.to_string(),
                })
            }
        };
        let src_c = self.freeze_complex(&src)?;
        let tgt_c = self.freeze_complex(&tgt)?;
        let built = GradedMap::new(&src_c, &tgt_c, degree, blocks)?;
        self.maps.insert(name.to_string(), MapSlot::Built(built.clone()));
        Ok(built)
    }

    fn freeze_dgla(&mut self, name: &str) -> Result<DglaPresentation> {
        let slot = self.dglas.get_mut(name).ok_or(Error::NameNotFound {
            kind: "dgla",
            name: name.to_string(),
        })?;
        match slot {
            DglaSlot::Built(l) => Ok(l.clone()),
            DglaSlot::Building { degrees, brackets, q } => {
                let n = degrees.len();
                let q = q.clone().unwrap_or_else(|| Matrix::zero(n, n));
                let built = DglaPresentation::new(degrees.clone(), brackets.clone(), q)?;
                *slot = DglaSlot::Built(built.clone());
                Ok(built)
            }
        }
    }

    fn freeze_coalgebra(&mut self, name: &str) -> Result<CoalgebraPresentation> {
        let slot = self.coalgebras.get_mut(name).ok_or(Error::NameNotFound {
            kind: "coalgebra",
            name: name.to_string(),
        })?;
        match slot {
            CoalgSlot::Built(c) => Ok(c.clone()),
            CoalgSlot::Building { degrees, delta, q } => {
                let n = degrees.len();
                let q = q.clone().unwrap_or_else(|| Matrix::zero(n, n));
                let built =
                    CoalgebraPresentation::new(degrees.clone(), delta.clone(), q, None)?;
                *slot = CoalgSlot::Built(built.clone());
                Ok(built)
            }
        }
    }

    fn check_element(&mut self, out: &mut Vec<String>, defect: Element) {
        if defect.is_zero() {
            out.push("OK".to_string());
        } else {
            out.push(format!("{}", defect));
            self.failures += 1;
        }
    }

    fn check_mapsum(&mut self, out: &mut Vec<String>, defect: MapSum) {
        if defect.is_zero() {
            out.push("OK".to_string());
        } else {
            out.push(defect.render());
            self.failures += 1;
        }
    }

    /// Execute one statement, returning its stdout lines.
    pub fn execute(&mut self, stmt: &Statement) -> Result<Vec<String>> {
        let mut out = Vec::new();
        match stmt {
            Statement::Context { name } => {
                fresh(&self.contexts, name, "context", name)?;
                self.contexts
                    .insert(name.clone(), CtxSlot::Building(Vec::new()));
                self.current = Some(name.clone());
            }
            Statement::Generator { name, degree } => {
                let ctx_name = self.current.clone().ok_or(Error::NameNotFound {
                    kind: "current context",
                    name: "(none)".into(),
                })?;
                match self.contexts.get_mut(&ctx_name) {
                    Some(CtxSlot::Building(gens)) => {
                        gens.push((name.clone(), *degree));
                    }
                    Some(CtxSlot::Built(_)) => {
                        return Err(Error::DuplicateName {
                            kind: "sealed context",
                            name: ctx_name,
                        })
                    }
                    None => unreachable!(),
                }
            }
            Statement::Diff {
                name,
                degree,
                clauses,
            } => {
                fresh(&self.diffs, name, "derivation", name)?;
                let ctx = self.current_context()?;
                let elements = self.elements.clone();
                let mut images: Vec<(String, Element)> = Vec::new();
                for (gen, expr) in clauses {
                    let img = eval_element(expr, &ctx, &|n| elements.get(n).cloned())?;
                    images.push((gen.clone(), img));
                }
                // Infer the degree from the first nonzero image when omitted.
                let degree = match degree {
                    Some(d) => *d,
                    None => {
                        let mut inferred = None;
                        for (gen, img) in &images {
                            if let Some(d) = img.homogeneous_degree() {
                                let idx = ctx.index_of(gen).ok_or_else(|| {
                                    Error::UnknownGenerator(gen.clone())
                                })?;
                                inferred = Some(d - ctx.degree_of(idx));
                                break;
                            }
                        }
                        inferred.unwrap_or(1)
                    }
                };
                let borrowed: Vec<(&str, Element)> = images
                    .iter()
                    .map(|(g, e)| (g.as_str(), e.clone()))
                    .collect();
                let d = Derivation::new(&ctx, degree, &borrowed)?;
                self.diffs.insert(name.clone(), d);
                let ctx_name = self.current.clone().unwrap();
                self.ctx_default_diff.insert(ctx_name, name.clone());
                self.active_diff = Some(name.clone());
            }
            Statement::Morphism {
                name,
                src,
                tgt,
                clauses,
            } => {
                fresh(&self.morphisms, name, "morphism", name)?;
                let src_ctx = self.freeze_context(src)?;
                let tgt_ctx = self.freeze_context(tgt)?;
                let elements = self.elements.clone();
                let mut images: Vec<(String, Element)> = Vec::new();
                for (gen, expr) in clauses {
                    let img = eval_element(expr, &tgt_ctx, &|n| elements.get(n).cloned())?;
                    images.push((gen.clone(), img));
                }
                let borrowed: Vec<(&str, Element)> = images
                    .iter()
                    .map(|(g, e)| (g.as_str(), e.clone()))
                    .collect();
                let phi = AlgebraMorphism::new(&src_ctx, &tgt_ctx, &borrowed)?;
                self.morphisms.insert(name.clone(), phi);
            }
            Statement::Let { name, expr } => {
                fresh(&self.elements, name, "element", name)?;
                let value = self.eval(expr)?;
                self.elements.insert(name.clone(), value);
            }
            Statement::Show { expr, deformed } => {
                let value = if *deformed {
                    self.eval_deformed(expr)?
                } else {
                    self.eval(expr)?
                };
                out.push(format!("{}", value));
            }
            Statement::ShowStar { a, b } => {
                let ctx_name = self.current.clone().ok_or(Error::NameNotFound {
                    kind: "current context",
                    name: "(none)".into(),
                })?;
                let pairs = self.weyl.get(&ctx_name).cloned().ok_or(Error::NameNotFound {
                    kind: "derivation pairs for context",
                    name: ctx_name.clone(),
                })?;
                let left = self.eval(a)?;
                let right = self.eval(b)?;
                let product = moyal_weyl_mul(&left, &right, &pairs, &self.cfg())?;
                out.push(format!("{}", product));
            }
            Statement::ShowMap { name } => {
                let map = self.freeze_map(name)?;
                out.push(map.render());
            }
            Statement::ShowCoproduct {
                coalg,
                expr,
                deformed,
            } => {
                let c = self.freeze_coalgebra(coalg)?;
                let v = self.eval_coelement(&c, expr)?;
                let tensor = if *deformed {
                    c.deformed_coproduct(&v, &self.cfg())?
                } else {
                    c.coproduct(&v)?
                };
                out.push(tensor.render());
            }
            Statement::ShowLelem { name } => {
                let v = self.lelems.get(name).ok_or(Error::NameNotFound {
                    kind: "lie element",
                    name: name.clone(),
                })?;
                out.push(v.render());
            }
            Statement::ConfigLambda { positive } => {
                self.lambda_negative = !positive;
            }
            Statement::ConfigTruncate { order } => {
                self.truncation = *order;
            }
            Statement::ConfigDiff { name } => {
                self.get_diff(name)?;
                self.active_diff = Some(name.clone());
            }
            Statement::CheckDifferential { name } => {
                let d = self.get_diff(name)?;
                match d.validate_differential() {
                    Ok(_) => out.push("OK".to_string()),
                    Err(e @ (Error::EvenDegree(_) | Error::NotSquareZero { .. })) => {
                        out.push(format!("FAIL: {}", e));
                        self.failures += 1;
                    }
                    Err(other) => return Err(other),
                }
            }
            Statement::CheckAssoc { a, b, c } => {
                let (a, b, c) = (self.eval(a)?, self.eval(b)?, self.eval(c)?);
                let d = self.active_derivation()?;
                let defect = associativity_defect(&a, &b, &c, &d, &self.cfg())?;
                self.check_element(&mut out, defect);
            }
            Statement::CheckUnit { a } => {
                let a = self.eval(a)?;
                let d = self.active_derivation()?;
                let one = Element::one(a.context());
                let cfg = self.cfg();
                let left = deformed_mul(&one, &a, &d, &cfg)?.sub(&a)?;
                let right = deformed_mul(&a, &one, &d, &cfg)?.sub(&a)?;
                self.check_element(&mut out, left.add(&right)?);
            }
            Statement::CheckLeibniz { a, b } => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                let d = self.active_derivation()?;
                let cfg = self.cfg();
                let lhs = d.apply(&deformed_mul(&a, &b, &d, &cfg)?)?;
                let mut rhs = deformed_mul(&d.apply(&a)?, &b, &d, &cfg)?;
                for (degree, comp) in a.components() {
                    let mut piece = deformed_mul(&comp, &d.apply(&b)?, &d, &cfg)?;
                    if degree.rem_euclid(2) == 1 {
                        piece = piece.neg();
                    }
                    rhs = rhs.add(&piece)?;
                }
                self.check_element(&mut out, lhs.sub(&rhs)?);
            }
            Statement::CheckExactness { a, b } => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                let d = self.active_derivation()?;
                let cfg = self.cfg();
                let correction = deformed_mul(&a, &b, &d, &cfg)?.sub(&a.mul(&b)?)?;
                let (w1, w2) = exactness_witnesses(&a, &b, &d, &cfg)?;
                let defect = correction
                    .sub(&w1)?
                    .add(&correction.sub(&w2)?)?;
                self.check_element(&mut out, defect);
            }
            Statement::CheckPauli { a, b } => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                let d = self.active_derivation()?;
                let defect = weak_pauli_defect(&a, &b, &d, &self.cfg())?;
                self.check_element(&mut out, defect);
            }
            Statement::CheckSequiv { a, b } => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                let d = self.active_derivation()?;
                let defect = s_equivalence_defect(&a, &b, &d, &self.cfg())?;
                self.check_element(&mut out, defect);
            }
            Statement::CheckParity { a, b } => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                let d = self.active_derivation()?;
                let report = parity_closure_check(&a, &b, &d, &self.cfg())?;
                if report.holds() {
                    out.push("OK".to_string());
                } else {
                    out.push(format!("{}", report));
                    self.failures += 1;
                }
            }
            Statement::CheckFunctorial { morphism, a, b } => {
                let phi = self.morphisms.get(morphism).cloned().ok_or(
                    Error::NameNotFound {
                        kind: "morphism",
                        name: morphism.clone(),
                    },
                )?;
                let src_name =
                    self.context_name_of(phi.source())
                        .ok_or(Error::NameNotFound {
                            kind: "context",
                            name: "source".into(),
                        })?;
                let tgt_name =
                    self.context_name_of(phi.target())
                        .ok_or(Error::NameNotFound {
                            kind: "context",
                            name: "target".into(),
                        })?;
                let d_src = self.default_diff_for(&src_name)?;
                let d_tgt = self.default_diff_for(&tgt_name)?;
                let elements = self.elements.clone();
                let src_ctx = phi.source().clone();
                let a = eval_element(a, &src_ctx, &|n| elements.get(n).cloned())?;
                let b = eval_element(b, &src_ctx, &|n| elements.get(n).cloned())?;
                let defect =
                    morphism_functoriality_defect(&phi, &a, &b, &d_src, &d_tgt, &self.cfg())?;
                self.check_element(&mut out, defect);
            }
            Statement::CheckStarAssoc { a, b, c } => {
                let ctx_name = self.current.clone().ok_or(Error::NameNotFound {
                    kind: "current context",
                    name: "(none)".into(),
                })?;
                let pairs = self.weyl.get(&ctx_name).cloned().ok_or(Error::NameNotFound {
                    kind: "derivation pairs for context",
                    name: ctx_name.clone(),
                })?;
                let (a, b, c) = (self.eval(a)?, self.eval(b)?, self.eval(c)?);
                let defect = moyal_associativity_defect(&a, &b, &c, &pairs, &self.cfg())?;
                self.check_element(&mut out, defect);
            }
            Statement::CheckStarBracket { a, b } => {
                let ctx_name = self.current.clone().ok_or(Error::NameNotFound {
                    kind: "current context",
                    name: "(none)".into(),
                })?;
                let pairs = self.weyl.get(&ctx_name).cloned().ok_or(Error::NameNotFound {
                    kind: "derivation pairs for context",
                    name: ctx_name.clone(),
                })?;
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                let cfg = self.cfg();
                let left = moyal_weyl_mul(&a, &b, &pairs, &cfg)?;
                let right = moyal_weyl_mul(&b, &a, &pairs, &cfg)?;
                let bracket = left.sub(&right)?;
                // The canonical pair satisfies a ? b - b ? a = L exactly.
                let expected = Element::from_scalar(a.context(), cfg.lambda().clone());
                self.check_element(&mut out, bracket.sub(&expected)?);
            }
            Statement::CheckDuality {
                ctx,
                diff,
                nilpotency,
            } => {
                let context = self.freeze_context(ctx)?;
                let d = self.get_diff(diff)?;
                let dual = dualize_dga(&context, &d, Some(nilpotency.unwrap_or(2)))?;
                let defects = dual.duality_defects(&d, &self.cfg())?;
                if defects.is_empty() {
                    out.push("OK".to_string());
                } else {
                    let ((v, w, l), s) = &defects[0];
                    out.push(format!(
                        "{} mismatches; first at ({}, {}, {}): {}",
                        defects.len(),
                        v,
                        w,
                        l,
                        s
                    ));
                    self.failures += 1;
                }
            }
            Statement::CheckDcomposeAssoc { f, g, h } => {
                let f = MapSum::from_map(self.freeze_map(f)?);
                let g = MapSum::from_map(self.freeze_map(g)?);
                let h = MapSum::from_map(self.freeze_map(h)?);
                let cfg = self.cfg();
                let left = deformed_compose(&f, &deformed_compose(&g, &h, &cfg)?, &cfg)?;
                let right = deformed_compose(&deformed_compose(&f, &g, &cfg)?, &h, &cfg)?;
                self.check_mapsum(&mut out, left.sub(&right)?);
            }
            Statement::CheckDcomposeUnit { f } => {
                let f = self.freeze_map(f)?;
                let cfg = self.cfg();
                let id_src = GradedMap::identity(f.source());
                let id_tgt = GradedMap::identity(f.target());
                let f_sum = MapSum::from_map(f.clone());
                let left = deformed_compose(&f_sum, &MapSum::from_map(id_src), &cfg)?
                    .sub(&f_sum)?;
                let right = deformed_compose(&MapSum::from_map(id_tgt), &f_sum, &cfg)?
                    .sub(&f_sum)?;
                self.check_mapsum(&mut out, left.add(&right)?);
            }
            Statement::CheckAbsorption { f } => {
                let f = self.freeze_map(f)?;
                let cfg = self.cfg();
                let d_tgt = f.target().boundary_map();
                let d_src = f.source().boundary_map();
                let f_sum = MapSum::from_map(f.clone());
                let left = deformed_compose(&MapSum::from_map(d_tgt.clone()), &f_sum, &cfg)?
                    .sub(&MapSum::from_map(d_tgt.compose(&f)?))?;
                let right = deformed_compose(&f_sum, &MapSum::from_map(d_src.clone()), &cfg)?
                    .sub(&MapSum::from_map(f.compose(&d_src)?))?;
                self.check_mapsum(&mut out, left.add(&right)?);
            }
            Statement::CheckJacobi {
                dgla,
                deformed,
                a,
                b,
                c,
            } => {
                let l = self.freeze_dgla(dgla)?;
                let a = self.eval_lelement(&l, a)?;
                let b = self.eval_lelement(&l, b)?;
                let c = self.eval_lelement(&l, c)?;
                let defect = l.jacobiator(&a, &b, &c, *deformed, &self.cfg())?;
                if defect.is_zero() {
                    out.push("OK".to_string());
                } else {
                    out.push(defect.render());
                    self.failures += 1;
                }
            }
            Statement::CheckDglaExact { dgla, a, b, c } => {
                let l = self.freeze_dgla(dgla)?;
                let a = self.eval_lelement(&l, a)?;
                let b = self.eval_lelement(&l, b)?;
                let c = self.eval_lelement(&l, c)?;
                let breakdown = l.exactness_check(&a, &b, &c, &self.cfg())?;
                if breakdown.residual.is_zero() {
                    out.push("OK".to_string());
                } else {
                    out.push(breakdown.residual.render());
                    self.failures += 1;
                }
            }
            Statement::CheckCoassoc { coalg, expr } => {
                let c = self.freeze_coalgebra(coalg)?;
                let v = self.eval_coelement(&c, expr)?;
                let check = c.coassociativity_check(&v, &self.cfg())?;
                if check.holds() && check.matches_closed_form() {
                    out.push("OK".to_string());
                } else if !check.holds() {
                    out.push(check.defect.render());
                    self.failures += 1;
                } else {
                    out.push("closed-form mismatch".to_string());
                    self.failures += 1;
                }
            }
            Statement::CheckCofunctorial { morphism, expr } => {
                let phi = self.comorphisms.get(morphism).cloned().ok_or(
                    Error::NameNotFound {
                        kind: "comorphism",
                        name: morphism.clone(),
                    },
                )?;
                let src = phi.source().clone();
                let v = self.eval_coelement(&src, expr)?;
                let defect = phi.functoriality_defect(&v, &self.cfg())?;
                if defect.is_zero() {
                    out.push("OK".to_string());
                } else {
                    out.push(defect.render());
                    self.failures += 1;
                }
            }
            Statement::InstanceDerham { n, ctx, diff } => {
                fresh(&self.contexts, ctx, "context", ctx)?;
                fresh(&self.diffs, diff, "derivation", diff)?;
                if *n < 1 {
                    return Err(Error::ParamOutOfRange("derham rank must be >= 1".into()));
                }
                let (context, d) = moyal::graded::de_rham(*n as usize)?;
                self.contexts
                    .insert(ctx.clone(), CtxSlot::Built(context));
                self.diffs.insert(diff.clone(), d);
                self.current = Some(ctx.clone());
                self.ctx_default_diff.insert(ctx.clone(), diff.clone());
                self.active_diff = Some(diff.clone());
            }
            Statement::InstanceWeyl { ctx } => {
                fresh(&self.contexts, ctx, "context", ctx)?;
                let (context, pairs) = instances::weyl_pair()?;
                self.contexts.insert(ctx.clone(), CtxSlot::Built(context));
                self.weyl.insert(ctx.clone(), pairs);
                self.current = Some(ctx.clone());
            }
            Statement::InstanceTruncatedDga { ctx, diff, wide } => {
                fresh(&self.contexts, ctx, "context", ctx)?;
                fresh(&self.diffs, diff, "derivation", diff)?;
                let (context, d, _) = if *wide {
                    instances::truncated_dga_16dim()?
                } else {
                    instances::truncated_dga_4dim()?
                };
                self.contexts.insert(ctx.clone(), CtxSlot::Built(context));
                self.diffs.insert(diff.clone(), d);
                self.current = Some(ctx.clone());
                self.ctx_default_diff.insert(ctx.clone(), diff.clone());
                self.active_diff = Some(diff.clone());
            }
            Statement::ComplexDecl { name, lo, hi, dims } => {
                fresh(&self.complexes, name, "complex", name)?;
                if *hi < *lo || dims.len() as i64 != hi - lo + 1 {
                    return Err(Error::ShapeMismatch(format!(
                        "degrees {}..{} need {} dims, got {}",
                        lo,
                        hi,
                        hi - lo + 1,
                        dims.len()
                    )));
                }
                let boundaries = vec![None; dims.len().saturating_sub(1)];
                self.complexes.insert(
                    name.clone(),
                    ComplexSlot::Building {
                        lo: *lo,
                        dims: dims.clone(),
                        boundaries,
                    },
                );
            }
            Statement::Boundary {
                name,
                degree,
                matrix,
            } => {
                let m = gaussian_matrix(matrix)?;
                match self.complexes.get_mut(name) {
                    Some(ComplexSlot::Building { lo, dims, boundaries }) => {
                        let idx = degree - *lo;
                        if idx < 0 || idx as usize >= boundaries.len() {
                            return Err(Error::ParamOutOfRange(format!(
                                "no boundary slot at degree {}",
                                degree
                            )));
                        }
                        // Empty text means an explicit zero matrix.
                        let idx = idx as usize;
                        let m = if m.rows() == 0 {
                            Matrix::zero(dims[idx + 1], dims[idx])
                        } else {
                            m
                        };
                        boundaries[idx] = Some(m);
                    }
                    Some(ComplexSlot::Built(_)) => {
                        return Err(Error::DuplicateName {
                            kind: "sealed complex",
                            name: name.clone(),
                        })
                    }
                    None => {
                        return Err(Error::NameNotFound {
                            kind: "complex",
                            name: name.clone(),
                        })
                    }
                }
            }
            Statement::MapDecl {
                name,
                src,
                tgt,
                degree,
            } => {
                fresh(&self.maps, name, "map", name)?;
                self.complexes.get(src).ok_or(Error::NameNotFound {
                    kind: "complex",
                    name: src.clone(),
                })?;
                self.complexes.get(tgt).ok_or(Error::NameNotFound {
                    kind: "complex",
                    name: tgt.clone(),
                })?;
                self.maps.insert(
                    name.clone(),
                    MapSlot::Building {
                        src: src.clone(),
                        tgt: tgt.clone(),
                        degree: *degree,
                        blocks: Vec::new(),
                    },
                );
            }
            Statement::Block {
                name,
                degree,
                matrix,
            } => {
                let m = scalar_matrix(matrix)?;
                match self.maps.get_mut(name) {
                    Some(MapSlot::Building { blocks, .. }) => {
                        blocks.push((*degree, m));
                    }
                    Some(MapSlot::Built(_)) => {
                        return Err(Error::DuplicateName {
                            kind: "sealed map",
                            name: name.clone(),
                        })
                    }
                    None => {
                        return Err(Error::NameNotFound {
                            kind: "map",
                            name: name.clone(),
                        })
                    }
                }
            }
            Statement::DglaFromEnd { name, complex } => {
                fresh(&self.dglas, name, "dgla", name)?;
                let c = self.freeze_complex(complex)?;
                let (dgla, _) = instances::end_dgla_of(&c)?;
                self.dglas.insert(name.clone(), DglaSlot::Built(dgla));
            }
            Statement::DglaDecl { name, degrees } => {
                fresh(&self.dglas, name, "dgla", name)?;
                self.dglas.insert(
                    name.clone(),
                    DglaSlot::Building {
                        degrees: degrees.clone(),
                        brackets: Vec::new(),
                        q: None,
                    },
                );
            }
            Statement::BracketConst {
                name,
                i,
                j,
                k,
                value,
            } => {
                let g = to_gaussian(&eval_scalar_expr(value)?)?;
                match self.dglas.get_mut(name) {
                    Some(DglaSlot::Building { brackets, .. }) => {
                        brackets.push(((*i, *j), vec![(*k, g)]));
                    }
                    Some(DglaSlot::Built(_)) => {
                        return Err(Error::DuplicateName {
                            kind: "sealed dgla",
                            name: name.clone(),
                        })
                    }
                    None => {
                        return Err(Error::NameNotFound {
                            kind: "dgla",
                            name: name.clone(),
                        })
                    }
                }
            }
            Statement::DglaDiff { name, matrix } => {
                let m = gaussian_matrix(matrix)?;
                match self.dglas.get_mut(name) {
                    Some(DglaSlot::Building { q, .. }) => {
                        *q = Some(m);
                    }
                    Some(DglaSlot::Built(_)) => {
                        return Err(Error::DuplicateName {
                            kind: "sealed dgla",
                            name: name.clone(),
                        })
                    }
                    None => {
                        return Err(Error::NameNotFound {
                            kind: "dgla",
                            name: name.clone(),
                        })
                    }
                }
            }
            Statement::ValidateDgla { name } => {
                let l = self.freeze_dgla(name)?;
                let report = l.validate();
                out.push(format!("{}", report));
                if !report.is_valid() {
                    self.failures += 1;
                }
            }
            Statement::Lelem { name, dgla, expr } => {
                fresh(&self.lelems, name, "lie element", name)?;
                let l = self.freeze_dgla(dgla)?;
                let v = self.eval_lelement(&l, expr)?;
                self.lelems.insert(name.clone(), v);
            }
            Statement::CoalgebraDecl { name, degrees } => {
                fresh(&self.coalgebras, name, "coalgebra", name)?;
                self.coalgebras.insert(
                    name.clone(),
                    CoalgSlot::Building {
                        degrees: degrees.clone(),
                        delta: Vec::new(),
                        q: None,
                    },
                );
            }
            Statement::CoalgebraFromDual {
                name,
                ctx,
                diff,
                nilpotency,
            } => {
                fresh(&self.coalgebras, name, "coalgebra", name)?;
                let context = self.freeze_context(ctx)?;
                let d = self.get_diff(diff)?;
                let dual = dualize_dga(&context, &d, Some(nilpotency.unwrap_or(2)))?;
                self.coalgebras
                    .insert(name.clone(), CoalgSlot::Built(dual.coalgebra));
            }
            Statement::DeltaConst {
                name,
                i,
                j,
                k,
                value,
            } => {
                let g = to_gaussian(&eval_scalar_expr(value)?)?;
                match self.coalgebras.get_mut(name) {
                    Some(CoalgSlot::Building { delta, .. }) => {
                        delta.push((*i, *j, *k, g));
                    }
                    Some(CoalgSlot::Built(_)) => {
                        return Err(Error::DuplicateName {
                            kind: "sealed coalgebra",
                            name: name.clone(),
                        })
                    }
                    None => {
                        return Err(Error::NameNotFound {
                            kind: "coalgebra",
                            name: name.clone(),
                        })
                    }
                }
            }
            Statement::Codiff { name, matrix } => {
                let m = gaussian_matrix(matrix)?;
                match self.coalgebras.get_mut(name) {
                    Some(CoalgSlot::Building { q, .. }) => {
                        *q = Some(m);
                    }
                    Some(CoalgSlot::Built(_)) => {
                        return Err(Error::DuplicateName {
                            kind: "sealed coalgebra",
                            name: name.clone(),
                        })
                    }
                    None => {
                        return Err(Error::NameNotFound {
                            kind: "coalgebra",
                            name: name.clone(),
                        })
                    }
                }
            }
            Statement::ValidateCoalgebra { name } => {
                let c = self.freeze_coalgebra(name)?;
                let report = c.validate();
                out.push(format!("{}", report));
                if !report.is_valid() {
                    self.failures += 1;
                }
            }
            Statement::Celem { name, coalg, expr } => {
                fresh(&self.celems, name, "coalgebra element", name)?;
                let c = self.freeze_coalgebra(coalg)?;
                let v = self.eval_coelement(&c, expr)?;
                self.celems.insert(name.clone(), v);
            }
            Statement::Comorphism {
                name,
                src,
                tgt,
                matrix,
            } => {
                fresh(&self.comorphisms, name, "comorphism", name)?;
                let src_c = self.freeze_coalgebra(src)?;
                let tgt_c = self.freeze_coalgebra(tgt)?;
                let m = gaussian_matrix(matrix)?;
                let phi = CoalgebraMorphism::new(&src_c, &tgt_c, m)?;
                self.comorphisms.insert(name.clone(), phi);
            }
            Statement::Suite { name, params } => {
                let report = suites::run_by_params(name, params)?;
                out.extend(report.stdout_lines());
                self.failures += report.failures.len();
            }
        }
        Ok(out)
    }

    fn eval_lelement(&mut self, l: &DglaPresentation, expr: &Expr) -> Result<LieElement> {
        let named = self.lelems.clone();
        match eval_linear(expr, &|i| l.basis_element(i), &|n| named.get(n).cloned())? {
            Lin::Vec(v) => {
                if v.presentation() != l {
                    return Err(Error::PresentationMismatch);
                }
                Ok(v)
            }
            Lin::Num(s) if s.is_zero() => Ok(l.zero()),
            Lin::Num(_) => Err(Error::GradingViolation(
                "expected a combination of basis elements".into(),
            )),
        }
    }

    fn eval_coelement(&mut self, c: &CoalgebraPresentation, expr: &Expr) -> Result<CoElement> {
        let named = self.celems.clone();
        match eval_linear(expr, &|i| c.basis_element(i), &|n| named.get(n).cloned())? {
            Lin::Vec(v) => {
                if v.presentation() != c {
                    return Err(Error::PresentationMismatch);
                }
                Ok(v)
            }
            Lin::Num(s) if s.is_zero() => Ok(c.zero()),
            Lin::Num(_) => Err(Error::GradingViolation(
                "expected a combination of basis elements".into(),
            )),
        }
    }
}

fn eval_scalar_expr(expr: &Expr) -> Result<Scalar> {
    let ctx = Context::empty();
    let elem = eval_element(expr, &ctx, &|_| None)?;
    let mut out = Scalar::zero();
    for (_, coeff) in elem.terms() {
        out = out.add_ref(coeff);
    }
    Ok(out)
}

/// Run a parsed script; returns collected stdout and the failure count.
pub fn run_script(text: &str) -> std::result::Result<(String, usize), String> {
    let statements =
        crate::script::parse_script(text).map_err(|e| format!("error: {}", e))?;
    let mut session = Session::new();
    let mut lines = Vec::new();
    for (line_no, stmt) in &statements {
        match session.execute(stmt) {
            Ok(out) => lines.extend(out),
            Err(e) => return Err(format!("error: line {}: {}", line_no, e)),
        }
    }
    let mut text_out = lines.join("\n");
    if !text_out.is_empty() {
        text_out.push('\n');
    }
    Ok((text_out, session.failures))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn de_rham_script_checks_pass() {
        let script = "\
instance derham 2 as M diff d
let a = t1*dt2 + (2+i)*h*t2
let b = t2 - dt1*dt2
let c = t1*t2
check assoc a b c
check unit a
check exactness a b
show a*b deformed
";
        let (out, failures) = run_script(script).unwrap();
        assert_eq!(failures, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "OK");
        assert_eq!(lines[1], "OK");
        assert_eq!(lines[2], "OK");
        assert!(!lines[3].is_empty());
    }

    #[test]
    fn use_before_define_is_an_error_with_location() {
        let script = "instance derham 1 as M diff d\nshow nope\n";
        let err = run_script(script).unwrap_err();
        assert!(err.contains("line 2"), "{}", err);
        assert!(err.contains("nope"), "{}", err);
    }

    #[test]
    fn manual_context_and_failing_check() {
        // A non-square-zero derivation makes the associativity defect
        // nonzero; the check prints the defect and the script reports a
        // failure.
        let script = "\
context A
generator x deg 1
generator y deg 2
generator z deg 3
diff d: x -> y, y -> z
let a = x
check assoc a a a
";
        let (out, failures) = run_script(script).unwrap();
        assert_eq!(failures, 1);
        assert!(out.contains("h^2"), "{}", out);
    }

    #[test]
    fn deterministic_output() {
        let script = "\
instance derham 2 as M diff d
let a = t1 + dt2
show a*a deformed
check pauli t1 t2
";
        let first = run_script(script).unwrap();
        let second = run_script(script).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn complexes_statements() {
        let script = "\
complex K degrees 0..2 dims 1 2 1
boundary K 0 = [1; 0]
boundary K 1 = [0, 1]
map f : K -> K deg 0
block f 0 = [2]
block f 1 = [1, 1; 0, 3]
map g : K -> K deg 1
block g 0 = [1; 2]
map hh : K -> K deg -1
block hh 1 = [3, 1]
check dcompose assoc f g hh
check dcompose unit f
check absorption g
show map g
";
        let (out, failures) = run_script(script).unwrap();
        assert_eq!(failures, 0, "{}", out);
        assert!(out.contains("graded map deg 1"));
    }

    #[test]
    fn dgla_and_coalgebra_statements() {
        let script = "\
complex K degrees 0..1 dims 1 1
boundary K 0 = [1]
dgla L from end K
lelem u in L = b0 - 2*b3
lelem v in L = h*b1
lelem w in L = b2 + b1
validate dgla L
check jacobi L u v w
check jacobi L deformed u v w
check dgla exact L u v w
instance truncated_dga as T diff dt
coalgebra C from dual T dt
validate coalgebra C
celem x0 in C = b3
check coassoc C x0
check duality T dt
";
        let (out, failures) = run_script(script).unwrap();
        assert_eq!(failures, 0, "{}", out);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "valid");
        assert_eq!(lines[1], "OK");
    }

    #[test]
    fn explicit_structure_constants_and_config_diff() {
        // An even three-dimensional Lie algebra entered as sparse bracket
        // quadruples, plus show/config statements.
        let script = "\
dgla L degrees 0 0 0
bracket L 0 1 2 = 1
bracket L 1 0 2 = -1
bracket L 2 0 0 = 2
bracket L 0 2 0 = -2
bracket L 2 1 1 = -2
bracket L 1 2 1 = 2
dgladiff L = [0, 0, 0; 0, 0, 0; 0, 0, 0]
validate dgla L
lelem u in L = b0 + 1/2*b2
lelem v in L = 3*b1
show lelem u
check jacobi L u v (b2 - b0)
instance derham 2 as M diff d
diff zero deg 1 :
config diff zero
let a = t1
show a*t2 deformed
config diff d
show a*t2 deformed
"
        ;
        let (out, failures) = run_script(script).unwrap();
        assert_eq!(failures, 0, "{}", out);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "valid");
        assert_eq!(lines[1], "b0 + 1/2*b2");
        assert_eq!(lines[2], "OK");
        // With the zero derivation the deformed product is the plain one;
        // with the de Rham differential the correction appears.
        assert_eq!(lines[3], "t1*t2");
        assert_eq!(lines[4], "t1*t2 + i*h*dt1*dt2");
    }

    #[test]
    fn weyl_star_statements() {
        let script = "\
instance weyl_pair as W
config truncate 2
let f = q^2 + p
let g = q*p
check star bracket q p
check star assoc f g q
show star q p
show star p q
";
        let (out, failures) = run_script(script).unwrap();
        assert_eq!(failures, 0, "{}", out);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[2], "q*p");
        assert_eq!(lines[3], "-i*h + q*p");
    }

    #[test]
    fn star_bracket_follows_the_convention() {
        // q ? p - p ? q equals the configured coefficient, in both
        // conventions.
        let script = "\
instance weyl_pair as W
config truncate 1
check star bracket q p
config lambda -ih
check star bracket q p
";
        let (out, failures) = run_script(script).unwrap();
        assert_eq!(failures, 0, "{}", out);
        assert_eq!(out.trim_end(), "OK\nOK");
    }
}
