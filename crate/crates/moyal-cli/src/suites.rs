//! Randomized identity suites with reproduction scripts.
//!
//! Each suite runs `trials` seeded trials of one identity family and
//! collects failures; every failure carries a standalone script that
//! replays exactly the failing inputs through the script language.

use moyal::coalgebra::CoalgebraPresentation;
use moyal::complexes::{deformed_compose, ChainComplex, GradedMap, MapSum};
use moyal::deform::{
    associativity_defect, deformed_mul, exactness_witnesses, moyal_associativity_defect,
    moyal_weyl_mul, morphism_functoriality_defect, parity_closure_check, s_equivalence_defect,
    weak_pauli_defect, DeformationConfig,
};
use moyal::error::{Error, Result};
use moyal::graded::{de_rham, AlgebraMorphism, Context, Derivation, Element};
use moyal::instances::{catalog_complexes, end_dgla_of, truncated_dga_4dim, weyl_pair};
use moyal::matrix::Matrix;
use moyal::random::{
    random_complex, random_element, random_even_element, random_graded_map,
    random_homogeneous_element, random_invertible, random_lie_element, random_map_degree,
    rng_for, ElementBounds,
};
use moyal::scalar::Scalar;
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct SuiteParams {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub truncate: Option<u32>,
    pub lambda_negative: bool,
    pub bounds: ElementBounds,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            n: 3,
            trials: 200,
            seed: 42,
            truncate: None,
            lambda_negative: false,
            bounds: ElementBounds::default(),
        }
    }
}

impl SuiteParams {
    fn cfg(&self) -> DeformationConfig {
        let base = if self.lambda_negative {
            DeformationConfig::negative()
        } else {
            DeformationConfig::standard()
        };
        match self.truncate {
            Some(order) => base.truncated(order),
            None => base,
        }
    }

    fn lambda_word(&self) -> &'static str {
        if self.lambda_negative {
            "-ih"
        } else {
            "+ih"
        }
    }

    fn config_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("config lambda {}", self.lambda_word())];
        if let Some(order) = self.truncate {
            lines.push(format!("config truncate {}", order));
        }
        lines
    }
}

#[derive(Debug, Clone)]
pub struct Failure {
    pub trial: u64,
    pub message: String,
    pub script: String,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub header: String,
    pub trials_run: u64,
    pub failures: Vec<Failure>,
}

impl SuiteReport {
    pub fn stdout_lines(&self) -> Vec<String> {
        let mut out = vec![self.header.clone()];
        out.push(format!(
            "trials {} failures {}",
            self.trials_run,
            self.failures.len()
        ));
        for f in &self.failures {
            out.push(format!("trial {} FAIL: {}", f.trial, f.message));
            out.push("reproduction:".to_string());
            for line in f.script.lines() {
                out.push(format!("  {}", line));
            }
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const SUITE_NAMES: [&str; 12] = [
    "assoc-derham",
    "unit-and-derivation",
    "exactness-rewrites",
    "weak-pauli",
    "s-equivalence",
    "moyal-weyl",
    "complexes-compose",
    "dgla-exactness",
    "coalgebra-coassoc",
    "duality-oracle",
    "functoriality",
    "negative-controls",
];

pub fn run(name: &str, params: &SuiteParams) -> Result<SuiteReport> {
    let canonical = name.replace('_', "-");
    match canonical.as_str() {
        "assoc-derham" => Ok(assoc_derham(params)),
        "unit-and-derivation" => Ok(unit_and_derivation(params)),
        "exactness-rewrites" => Ok(exactness_rewrites(params)),
        "weak-pauli" => Ok(weak_pauli(params)),
        "s-equivalence" => Ok(s_equivalence(params)),
        "moyal-weyl" => Ok(moyal_weyl(params)),
        "complexes-compose" => Ok(complexes_compose(params)),
        "dgla-exactness" => Ok(dgla_exactness(params)),
        "coalgebra-coassoc" => Ok(coalgebra_coassoc(params)),
        "duality-oracle" => Ok(duality_oracle(params)),
        "functoriality" => Ok(functoriality(params)),
        "negative-controls" => Ok(negative_controls(params)),
        _ => Err(Error::NameNotFound {
            kind: "suite",
            name: name.to_string(),
        }),
    }
}

/// Entry point for the script statement `suite NAME key=value ...`.
pub fn run_by_params(name: &str, kv: &[(String, String)]) -> Result<SuiteReport> {
    let mut params = SuiteParams::default();
    for (key, value) in kv {
        match key.as_str() {
            "n" => {
                params.n = value
                    .parse()
                    .map_err(|_| Error::ParamOutOfRange(format!("n={}", value)))?
            }
            "trials" => {
                params.trials = value
                    .parse()
                    .map_err(|_| Error::ParamOutOfRange(format!("trials={}", value)))?
            }
            "seed" => {
                params.seed = value
                    .parse()
                    .map_err(|_| Error::ParamOutOfRange(format!("seed={}", value)))?
            }
            "truncate" => {
                params.truncate = Some(
                    value
                        .parse()
                        .map_err(|_| Error::ParamOutOfRange(format!("truncate={}", value)))?,
                )
            }
            "lambda" => match value.as_str() {
                "+ih" => params.lambda_negative = false,
                "-ih" => params.lambda_negative = true,
                other => {
                    return Err(Error::ParamOutOfRange(format!("lambda={}", other)))
                }
            },
            other => {
                return Err(Error::ParamOutOfRange(format!(
                    "unknown suite parameter `{}`",
                    other
                )))
            }
        }
    }
    run(name, &params)
}

fn header(name: &str, params: &SuiteParams) -> String {
    format!(
        "suite {} n={} trials={} seed={} truncate={} lambda={}",
        name,
        params.n,
        params.trials,
        params.seed,
        params
            .truncate
            .map(|t| t.to_string())
            .unwrap_or_else(|| "-".to_string()),
        params.lambda_word()
    )
}

fn derham_header_lines(n: usize) -> Vec<String> {
    vec![format!("instance derham {} as M diff d", n)]
}

fn let_lines(bindings: &[(&str, &Element)]) -> Vec<String> {
    bindings
        .iter()
        .map(|(name, value)| format!("let {} = {}", name, value))
        .collect()
}

fn script_from(parts: &[Vec<String>]) -> String {
    let mut lines = Vec::new();
    for part in parts {
        lines.extend(part.iter().cloned());
    }
    lines.join("\n")
}

fn assoc_derham(params: &SuiteParams) -> SuiteReport {
    let (ctx, d) = de_rham(params.n).expect("de Rham context");
    let cfg = params.cfg();
    let mut failures = Vec::new();
    for trial in 0..params.trials {
        let mut rng = rng_for(params.seed, trial);
        let a = random_element(&ctx, &params.bounds, &mut rng);
        let b = random_element(&ctx, &params.bounds, &mut rng);
        let c = random_element(&ctx, &params.bounds, &mut rng);
        let defect = associativity_defect(&a, &b, &c, &d, &cfg).expect("same context");
        if !defect.is_zero() {
            let script = script_from(&[
                derham_header_lines(params.n),
                params.config_lines(),
                let_lines(&[("a", &a), ("b", &b), ("c", &c)]),
                vec!["check assoc a b c".to_string()],
            ]);
            failures.push(Failure {
                trial,
                message: format!("associativity defect {}", defect),
                script,
            });
        }
    }
    SuiteReport {
        name: "assoc-derham".into(),
        header: header("assoc-derham", params),
        trials_run: params.trials,
        failures,
    }
}

fn unit_and_derivation(params: &SuiteParams) -> SuiteReport {
    let (ctx, d) = de_rham(params.n).expect("de Rham context");
    let cfg = params.cfg();
    let one = Element::one(&ctx);
    let mut failures = Vec::new();
    for trial in 0..params.trials {
        let mut rng = rng_for(params.seed.wrapping_add(1), trial);
        let (pa, a) = random_homogeneous_element(&ctx, &params.bounds, &mut rng);
        let b = random_element(&ctx, &params.bounds, &mut rng);

        let left_unit = deformed_mul(&one, &a, &d, &cfg).unwrap().sub(&a).unwrap();
        let right_unit = deformed_mul(&a, &one, &d, &cfg).unwrap().sub(&a).unwrap();

        let lhs = d.apply(&deformed_mul(&a, &b, &d, &cfg).unwrap()).unwrap();
        let mut rhs = deformed_mul(&d.apply(&a).unwrap(), &b, &d, &cfg).unwrap();
        let mut tail = deformed_mul(&a, &d.apply(&b).unwrap(), &d, &cfg).unwrap();
        if pa.rem_euclid(2) == 1 {
            tail = tail.neg();
        }
        rhs = rhs.add(&tail).unwrap();
        let leibniz = lhs.sub(&rhs).unwrap();

        let defect = left_unit.add(&right_unit).unwrap().add(&leibniz).unwrap();
        if !defect.is_zero() {
            let script = script_from(&[
                derham_header_lines(params.n),
                params.config_lines(),
                let_lines(&[("a", &a), ("b", &b)]),
                vec![
                    "check unit a".to_string(),
                    "check leibniz a b".to_string(),
                ],
            ]);
            failures.push(Failure {
                trial,
                message: format!("unit or Leibniz defect {}", defect),
                script,
            });
        }
    }
    SuiteReport {
        name: "unit-and-derivation".into(),
        header: header("unit-and-derivation", params),
        trials_run: params.trials,
        failures,
    }
}

fn exactness_rewrites(params: &SuiteParams) -> SuiteReport {
    let (ctx, d) = de_rham(params.n).expect("de Rham context");
    let cfg = params.cfg();
    let mut failures = Vec::new();
    for trial in 0..params.trials {
        let mut rng = rng_for(params.seed.wrapping_add(2), trial);
        let a = random_element(&ctx, &params.bounds, &mut rng);
        let b = random_element(&ctx, &params.bounds, &mut rng);
        let correction = deformed_mul(&a, &b, &d, &cfg)
            .unwrap()
            .sub(&a.mul(&b).unwrap())
            .unwrap();
        let (w1, w2) = exactness_witnesses(&a, &b, &d, &cfg).unwrap();
        let defect = correction
            .sub(&w1)
            .unwrap()
            .add(&correction.sub(&w2).unwrap())
            .unwrap();
        if !defect.is_zero() {
            let script = script_from(&[
                derham_header_lines(params.n),
                params.config_lines(),
                let_lines(&[("a", &a), ("b", &b)]),
                vec!["check exactness a b".to_string()],
            ]);
            failures.push(Failure {
                trial,
                message: format!("rewriting witnesses disagree by {}", defect),
                script,
            });
        }
    }
    SuiteReport {
        name: "exactness-rewrites".into(),
        header: header("exactness-rewrites", params),
        trials_run: params.trials,
        failures,
    }
}

fn weak_pauli(params: &SuiteParams) -> SuiteReport {
    let (ctx, d) = de_rham(params.n).expect("de Rham context");
    let cfg = params.cfg();
    let mut failures = Vec::new();
    for trial in 0..params.trials {
        let mut rng = rng_for(params.seed.wrapping_add(3), trial);
        let (_, a) = random_homogeneous_element(&ctx, &params.bounds, &mut rng);
        let (_, b) = random_homogeneous_element(&ctx, &params.bounds, &mut rng);
        let defect = weak_pauli_defect(&a, &b, &d, &cfg).unwrap();

        // Boson closure: an even-even pair stays even.
        let even_a = random_even_element(&ctx, &params.bounds, &mut rng);
        let even_b = random_even_element(&ctx, &params.bounds, &mut rng);
        let closure = parity_closure_check(&even_a, &even_b, &d, &cfg).unwrap();
        let boson_defect = weak_pauli_defect(
            &even_a.components()[0].1,
            &even_b.components()[0].1,
            &d,
            &cfg,
        )
        .unwrap();

        if !defect.is_zero() || !closure.holds() || !boson_defect.is_zero() {
            let script = script_from(&[
                derham_header_lines(params.n),
                params.config_lines(),
                let_lines(&[("a", &a), ("b", &b), ("u", &even_a), ("v", &even_b)]),
                vec![
                    "check pauli a b".to_string(),
                    "check parity u v".to_string(),
                ],
            ]);
            failures.push(Failure {
                trial,
                message: format!(
                    "conjugation defect {}; closure {}",
                    defect, closure
                ),
                script,
            });
        }
    }
    SuiteReport {
        name: "weak-pauli".into(),
        header: header("weak-pauli", params),
        trials_run: params.trials,
        failures,
    }
}

fn s_equivalence(params: &SuiteParams) -> SuiteReport {
    let (ctx, d) = de_rham(params.n).expect("de Rham context");
    let cfg = params.cfg();
    let mut failures = Vec::new();
    for trial in 0..params.trials {
        let mut rng = rng_for(params.seed.wrapping_add(4), trial);
        let a = random_even_element(&ctx, &params.bounds, &mut rng);
        let b = random_even_element(&ctx, &params.bounds, &mut rng);
        let defect = s_equivalence_defect(&a, &b, &d, &cfg).unwrap();
        if !defect.is_zero() {
            let script = script_from(&[
                derham_header_lines(params.n),
                params.config_lines(),
                let_lines(&[("a", &a), ("b", &b)]),
                vec!["check sequiv a b".to_string()],
            ]);
            failures.push(Failure {
                trial,
                message: format!("transform equivalence defect {}", defect),
                script,
            });
        }
    }
    SuiteReport {
        name: "s-equivalence".into(),
        header: header("s-equivalence", params),
        trials_run: params.trials,
        failures,
    }
}

fn moyal_weyl(params: &SuiteParams) -> SuiteReport {
    let (ctx, pairs) = weyl_pair().expect("weyl pair");
    let order = params.truncate.unwrap_or(3);
    let cfg = params.cfg().truncated(order);
    let bounds = ElementBounds {
        max_terms: 3,
        max_monomial_degree: 4,
        ..params.bounds
    };
    let mut failures = Vec::new();

    // Canonical bracket, once: q*p - p*q = i*h at any order >= 1.
    let q = Element::generator(&ctx, "q").unwrap();
    let p = Element::generator(&ctx, "p").unwrap();
    for check_order in 1..=order.max(1) {
        let c = DeformationConfig::standard().truncated(check_order);
        let bracket = moyal_weyl_mul(&q, &p, &pairs, &c)
            .unwrap()
            .sub(&moyal_weyl_mul(&p, &q, &pairs, &c).unwrap())
            .unwrap();
        let expected = Element::from_scalar(&ctx, Scalar::i() * Scalar::hbar());
        if bracket != expected {
            let script = script_from(&[
                vec![
                    "instance weyl_pair as W".to_string(),
                    format!("config truncate {}", check_order),
                    "check star bracket q p".to_string(),
                ],
            ]);
            failures.push(Failure {
                trial: 0,
                message: format!(
                    "canonical bracket at order {} is {}",
                    check_order, bracket
                ),
                script,
            });
        }
    }

    for trial in 0..params.trials {
        let mut rng = rng_for(params.seed.wrapping_add(5), trial);
        let a = random_element(&ctx, &bounds, &mut rng);
        let b = random_element(&ctx, &bounds, &mut rng);
        let c = random_element(&ctx, &bounds, &mut rng);
        let defect = moyal_associativity_defect(&a, &b, &c, &pairs, &cfg).unwrap();
        if !defect.is_zero() {
            let script = script_from(&[
                vec![
                    "instance weyl_pair as W".to_string(),
                    format!("config truncate {}", order),
                    format!("config lambda {}", params.lambda_word()),
                ],
                let_lines(&[("a", &a), ("b", &b), ("c", &c)]),
                vec!["check star assoc a b c".to_string()],
            ]);
            failures.push(Failure {
                trial,
                message: format!("star associativity defect {}", defect),
                script,
            });
        }
    }
    SuiteReport {
        name: "moyal-weyl".into(),
        header: header("moyal-weyl", params),
        trials_run: params.trials,
        failures,
    }
}

fn complex_script(name: &str, c: &ChainComplex) -> Vec<String> {
    let dims: Vec<String> = (c.lo()..=c.hi()).map(|k| c.dim(k).to_string()).collect();
    let mut lines = vec![format!(
        "complex {} degrees {}..{} dims {}",
        name,
        c.lo(),
        c.hi(),
        dims.join(" ")
    )];
    for k in c.lo()..c.hi() {
        let b = c.boundary(k);
        if !b.is_zero() {
            lines.push(format!("boundary {} {} = {}", name, k, b.render()));
        }
    }
    lines
}

fn map_script(name: &str, complex: &str, m: &GradedMap) -> Vec<String> {
    let mut lines = vec![format!(
        "map {} : {} -> {} deg {}",
        name,
        complex,
        complex,
        m.degree()
    )];
    for (k, block) in m.blocks() {
        lines.push(format!("block {} {} = {}", name, k, block.render()));
    }
    lines
}

fn complexes_compose(params: &SuiteParams) -> SuiteReport {
    let cfg = params.cfg();
    let mut failures = Vec::new();
    for trial in 0..params.trials {
        let mut rng = rng_for(params.seed.wrapping_add(6), trial);
        let c = random_complex(&mut rng);
        let f = random_graded_map(&c, random_map_degree(&c, &mut rng), &params.bounds, &mut rng);
        let g = random_graded_map(&c, random_map_degree(&c, &mut rng), &params.bounds, &mut rng);
        let h = random_graded_map(&c, random_map_degree(&c, &mut rng), &params.bounds, &mut rng);
        let fs = MapSum::from_map(f.clone());
        let gs = MapSum::from_map(g.clone());
        let hs = MapSum::from_map(h.clone());

        let assoc = deformed_compose(&fs, &deformed_compose(&gs, &hs, &cfg).unwrap(), &cfg)
            .unwrap()
            .sub(&deformed_compose(&deformed_compose(&fs, &gs, &cfg).unwrap(), &hs, &cfg).unwrap())
            .unwrap();

        let id = MapSum::from_map(GradedMap::identity(&c));
        let unit = deformed_compose(&fs, &id, &cfg)
            .unwrap()
            .sub(&fs)
            .unwrap()
            .add(&deformed_compose(&id, &fs, &cfg).unwrap().sub(&fs).unwrap())
            .unwrap();

        let dmap = c.boundary_map();
        let dsum = MapSum::from_map(dmap.clone());
        let absorption = deformed_compose(&dsum, &fs, &cfg)
            .unwrap()
            .sub(&MapSum::from_map(dmap.compose(&f).unwrap()))
            .unwrap()
            .add(
                &deformed_compose(&fs, &dsum, &cfg)
                    .unwrap()
                    .sub(&MapSum::from_map(f.compose(&dmap).unwrap()))
                    .unwrap(),
            )
            .unwrap();

        if !assoc.is_zero() || !unit.is_zero() || !absorption.is_zero() {
            let script = script_from(&[
                complex_script("K", &c),
                params.config_lines(),
                map_script("f", "K", &f),
                map_script("g", "K", &g),
                map_script("hh", "K", &h),
                vec![
                    "check dcompose assoc f g hh".to_string(),
                    "check dcompose unit f".to_string(),
                    "check absorption f".to_string(),
                ],
            ]);
            failures.push(Failure {
                trial,
                message: format!(
                    "deformed composition laws fail (assoc zero: {}, unit zero: {}, absorption zero: {})",
                    assoc.is_zero(),
                    unit.is_zero(),
                    absorption.is_zero()
                ),
                script,
            });
        }
    }
    SuiteReport {
        name: "complexes-compose".into(),
        header: header("complexes-compose", params),
        trials_run: params.trials,
        failures,
    }
}

fn dgla_exactness(params: &SuiteParams) -> SuiteReport {
    let cfg = params.cfg();
    let catalog = catalog_complexes();
    let ends: Vec<_> = catalog
        .iter()
        .map(|(name, c)| {
            let (l, _) = end_dgla_of(c).expect("endomorphism algebra");
            (name.clone(), c.clone(), l)
        })
        .collect();
    let mut failures = Vec::new();
    for trial in 0..params.trials {
        let mut rng = rng_for(params.seed.wrapping_add(7), trial);
        let (name, c, l) = &ends[(trial as usize) % ends.len()];
        let a = random_lie_element(l, true, &params.bounds, &mut rng).unwrap();
        let b = random_lie_element(l, true, &params.bounds, &mut rng).unwrap();
        let z = random_lie_element(l, true, &params.bounds, &mut rng).unwrap();
        let breakdown = l.exactness_check(&a, &b, &z, &cfg).unwrap();
        if !breakdown.residual.is_zero() {
            let script = script_from(&[
                complex_script("K", c),
                params.config_lines(),
                vec![
                    "dgla L from end K".to_string(),
                    format!("lelem u in L = {}", a.render()),
                    format!("lelem v in L = {}", b.render()),
                    format!("lelem w in L = {}", z.render()),
                    "check dgla exact L u v w".to_string(),
                ],
            ]);
            failures.push(Failure {
                trial,
                message: format!(
                    "exactness residual {} on {} (defect {}, primitive image {})",
                    breakdown.residual,
                    name,
                    breakdown.defect,
                    breakdown.primitive_image
                ),
                script,
            });
        }
    }
    SuiteReport {
        name: "dgla-exactness".into(),
        header: header("dgla-exactness", params),
        trials_run: params.trials,
        failures,
    }
}

fn coalgebra_script(name: &str, c: &CoalgebraPresentation) -> Vec<String> {
    let degrees: Vec<String> = c.degrees().iter().map(|d| d.to_string()).collect();
    let mut lines = vec![format!("coalgebra {} degrees {}", name, degrees.join(" "))];
    for (i, entries) in c.delta_constants() {
        for (j, k, g) in entries {
            lines.push(format!(
                "delta {} {} {} {} = {}",
                name,
                i,
                j,
                k,
                moyal::scalar::render_gaussian(g)
            ));
        }
    }
    if !c.coderivation_matrix().is_zero() {
        lines.push(format!(
            "codiff {} = {}",
            name,
            c.coderivation_matrix().render()
        ));
    }
    lines
}

/// Random degree-preserving invertible basis change (block diagonal over
/// degree classes).
fn random_degree_preserving_invertible(
    c: &CoalgebraPresentation,
    rng: &mut moyal::random::ChaCha8Rng,
) -> Matrix<moyal::scalar::GaussianRational> {
    let n = c.dim();
    let mut p: Matrix<moyal::scalar::GaussianRational> = Matrix::zero(n, n);
    let mut degrees: Vec<i64> = c.degrees().to_vec();
    degrees.sort_unstable();
    degrees.dedup();
    for deg in degrees {
        let idx: Vec<usize> = (0..n).filter(|&i| c.degrees()[i] == deg).collect();
        let block = random_invertible(idx.len(), rng);
        for (bi, &i) in idx.iter().enumerate() {
            for (bj, &j) in idx.iter().enumerate() {
                p.set(i, j, block.get(bi, bj).clone());
            }
        }
    }
    p
}

fn coalgebra_coassoc(params: &SuiteParams) -> SuiteReport {
    let cfg = params.cfg();
    let (ctx, d, nilp) = truncated_dga_4dim().expect("catalog instance");
    let dual = moyal::coalgebra::dualize_dga(&ctx, &d, Some(nilp)).expect("dualization");
    let mut failures = Vec::new();
    for trial in 0..params.trials {
        let mut rng = rng_for(params.seed.wrapping_add(8), trial);
        // Trial 0 checks the instance itself; later trials re-check random
        // degree-preserving basis changes, revalidated first.
        let presentation = if trial == 0 {
            dual.coalgebra.clone()
        } else {
            let p = random_degree_preserving_invertible(&dual.coalgebra, &mut rng);
            match dual.coalgebra.change_basis(&p) {
                Ok(c) => c,
                Err(e) => {
                    failures.push(Failure {
                        trial,
                        message: format!("basis change failed: {}", e),
                        script: String::new(),
                    });
                    continue;
                }
            }
        };
        let report = presentation.validate();
        if !report.is_valid() {
            failures.push(Failure {
                trial,
                message: format!("revalidation failed: {}", report),
                script: script_from(&[
                    coalgebra_script("C", &presentation),
                    vec!["validate coalgebra C".to_string()],
                ]),
            });
            continue;
        }
        for i in 0..presentation.dim() {
            let e = presentation.basis_element(i).unwrap();
            let check = presentation.coassociativity_check(&e, &cfg).unwrap();
            if !check.holds() || !check.matches_closed_form() {
                let script = script_from(&[
                    coalgebra_script("C", &presentation),
                    params.config_lines(),
                    vec![
                        format!("celem v in C = b{}", i),
                        "check coassoc C v".to_string(),
                    ],
                ]);
                failures.push(Failure {
                    trial,
                    message: format!(
                        "coassociativity defect {} on basis {} (closed form match: {})",
                        check.defect.render(),
                        i,
                        check.matches_closed_form()
                    ),
                    script,
                });
            }
        }
    }

    // One extra pass over the sixteen-dimensional companion, where the
    // deformation correction survives the truncation.
    let (ctx16, d16, nilp16) = moyal::instances::truncated_dga_16dim().expect("instance");
    let wide = moyal::coalgebra::dualize_dga(&ctx16, &d16, Some(nilp16)).expect("dualization");
    for i in 0..wide.coalgebra.dim() {
        let e = wide.coalgebra.basis_element(i).unwrap();
        let check = wide.coalgebra.coassociativity_check(&e, &cfg).unwrap();
        if !check.holds() || !check.matches_closed_form() {
            failures.push(Failure {
                trial: params.trials,
                message: format!(
                    "coassociativity defect {} on wide basis {} (closed form match: {})",
                    check.defect.render(),
                    i,
                    check.matches_closed_form()
                ),
                script: script_from(&[
                    vec![
                        "instance truncated_dga16 as T diff dt".to_string(),
                        "coalgebra C from dual T dt".to_string(),
                    ],
                    params.config_lines(),
                    vec![
                        format!("celem v in C = b{}", i),
                        "check coassoc C v".to_string(),
                    ],
                ]),
            });
        }
    }

    SuiteReport {
        name: "coalgebra-coassoc".into(),
        header: header("coalgebra-coassoc", params),
        trials_run: params.trials + 1,
        failures,
    }
}

fn duality_oracle(params: &SuiteParams) -> SuiteReport {
    let cfg = params.cfg();
    let mut failures = Vec::new();
    // Trial 0 is the four-dimensional instance; trial 1 is the
    // sixteen-dimensional companion on which the deformation correction
    // survives the truncation.
    type DgaBuilder = fn() -> Result<(Context, Derivation, u32)>;
    let instances: [(u64, &str, DgaBuilder); 2] = [
        (0, "truncated_dga", truncated_dga_4dim),
        (1, "truncated_dga16", moyal::instances::truncated_dga_16dim),
    ];
    for (trial, statement_name, build) in instances {
        let (ctx, d, nilp) = build().expect("catalog instance");
        let dual = moyal::coalgebra::dualize_dga(&ctx, &d, Some(nilp)).expect("dualization");
        let defects = dual.duality_defects(&d, &cfg).expect("tables");
        if !defects.is_empty() {
            let ((v, w, l), s) = &defects[0];
            let script = script_from(&[
                vec![format!("instance {} as T diff dt", statement_name)],
                params.config_lines(),
                vec!["check duality T dt".to_string()],
            ]);
            failures.push(Failure {
                trial,
                message: format!(
                    "{} transpose mismatches; first at ({}, {}, {}): {}",
                    defects.len(),
                    v,
                    w,
                    l,
                    s
                ),
                script,
            });
        }
    }
    SuiteReport {
        name: "duality-oracle".into(),
        header: header("duality-oracle", params),
        trials_run: 2,
        failures,
    }
}

fn functoriality(params: &SuiteParams) -> SuiteReport {
    let cfg = params.cfg();
    let (src, d_src) = de_rham(1).expect("de Rham line");
    let (tgt, d_tgt) = de_rham(2).expect("de Rham plane");
    let incl = AlgebraMorphism::new(
        &src,
        &tgt,
        &[
            ("t", Element::generator(&tgt, "t1").unwrap()),
            ("dt", Element::generator(&tgt, "dt1").unwrap()),
        ],
    )
    .unwrap();
    let (ctx4, d4, nilp) = truncated_dga_4dim().expect("catalog instance");
    let dual = moyal::coalgebra::dualize_dga(&ctx4, &d4, Some(nilp)).expect("dualization");

    let mut failures = Vec::new();
    for trial in 0..params.trials {
        let mut rng = rng_for(params.seed.wrapping_add(9), trial);
        let a = random_element(&src, &params.bounds, &mut rng);
        let b = random_element(&src, &params.bounds, &mut rng);
        let defect =
            morphism_functoriality_defect(&incl, &a, &b, &d_src, &d_tgt, &cfg).unwrap();

        // Relabeled copy of the four-dimensional dual.
        let mut perm: Vec<usize> = (0..dual.coalgebra.dim()).collect();
        perm.shuffle(&mut rng);
        let (permuted, phi) = dual.coalgebra.permute_basis(&perm).unwrap();
        let idx = rng.gen_range(0..dual.coalgebra.dim());
        let co_defect = phi
            .functoriality_defect(&dual.coalgebra.basis_element(idx).unwrap(), &cfg)
            .unwrap();

        if !defect.is_zero() || !co_defect.is_zero() {
            let perm_matrix = phi.matrix().clone();
            let script = script_from(&[
                vec![
                    "instance derham 2 as M2 diff d2".to_string(),
                    "instance derham 1 as M1 diff d1".to_string(),
                    "morphism f : M1 -> M2, t -> t1, dt -> dt1".to_string(),
                ],
                params.config_lines(),
                let_lines(&[("a", &a), ("b", &b)]),
                vec!["check functorial f a b".to_string()],
                coalgebra_script("C", &dual.coalgebra),
                coalgebra_script("D", &permuted),
                vec![
                    format!("comorphism g : C -> D = {}", perm_matrix.render()),
                    format!("celem v in C = b{}", idx),
                    "check cofunctorial g v".to_string(),
                ],
            ]);
            failures.push(Failure {
                trial,
                message: format!(
                    "functoriality defect {} / relabeling defect {}",
                    defect,
                    co_defect.render()
                ),
                script,
            });
        }
    }
    SuiteReport {
        name: "functoriality".into(),
        header: header("functoriality", params),
        trials_run: params.trials,
        failures,
    }
}

fn negative_controls(params: &SuiteParams) -> SuiteReport {
    let cfg = params.cfg();
    let mut failures = Vec::new();

    // Control 1: a derivation with d^2 != 0 must produce a nonzero
    // associativity defect; the value on (x, x, x) is 4*L^2*y^2*z.
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
    let expected = Element::generator(&ctx, "y")
        .unwrap()
        .pow(2)
        .mul(&Element::generator(&ctx, "z").unwrap())
        .unwrap()
        .scale(&cfg.lambda().pow(2).scale_rational(&moyal::scalar::rat(4, 1)));
    let broken_script = script_from(&[
        vec![
            "context A".to_string(),
            "generator x deg 1".to_string(),
            "generator y deg 2".to_string(),
            "generator z deg 3".to_string(),
            "diff d: x -> y, y -> z".to_string(),
        ],
        params.config_lines(),
        vec![
            "check differential d".to_string(),
            "check assoc x x x".to_string(),
        ],
    ]);
    if defect.is_zero() || defect != expected {
        failures.push(Failure {
            trial: 0,
            message: format!(
                "broken differential was not detected: defect {}, expected {}",
                defect, expected
            ),
            script: broken_script.clone(),
        });
    }
    if broken.validate_differential().is_ok() {
        failures.push(Failure {
            trial: 0,
            message: "validator accepted a non-square-zero derivation".into(),
            script: broken_script,
        });
    }

    // Control 2: a generator map that does not intertwine the differentials
    // is rejected by the functoriality check.
    let (src, d_src) = de_rham(1).unwrap();
    let (tgt, d_tgt) = de_rham(2).unwrap();
    let bad = AlgebraMorphism::new(
        &src,
        &tgt,
        &[
            ("t", Element::generator(&tgt, "t1").unwrap()),
            ("dt", Element::generator(&tgt, "dt2").unwrap()),
        ],
    )
    .unwrap();
    let a = Element::generator(&src, "t").unwrap();
    match morphism_functoriality_defect(&bad, &a, &a, &d_src, &d_tgt, &cfg) {
        Err(Error::NotChainMap { .. }) => {}
        other => {
            failures.push(Failure {
                trial: 1,
                message: format!(
                    "non-chain map was not rejected (got {:?})",
                    other.map(|e| e.to_string())
                ),
                script: script_from(&[vec![
                    "instance derham 2 as M2 diff d2".to_string(),
                    "instance derham 1 as M1 diff d1".to_string(),
                    "morphism f : M1 -> M2, t -> t1, dt -> dt2".to_string(),
                    "check functorial f t t".to_string(),
                ]]),
            });
        }
    }

    // Control 3: perturbing one coproduct constant breaks validation.
    let (ctx4, d4, nilp) = truncated_dga_4dim().unwrap();
    let dual = moyal::coalgebra::dualize_dga(&ctx4, &d4, Some(nilp)).unwrap();
    let mut delta = Vec::new();
    for (i, entries) in dual.coalgebra.delta_constants() {
        for (j, k, c) in entries {
            delta.push((i, *j, *k, c.clone()));
        }
    }
    let mut flipped = false;
    for entry in &mut delta {
        if entry.1 != entry.2 && !flipped {
            entry.3 = -entry.3.clone();
            flipped = true;
        }
    }
    let perturbed = CoalgebraPresentation::new(
        dual.coalgebra.degrees().to_vec(),
        delta,
        dual.coalgebra.coderivation_matrix().clone(),
        None,
    )
    .unwrap();
    let report = perturbed.validate();
    if report.is_valid() {
        failures.push(Failure {
            trial: 2,
            message: "perturbed coalgebra unexpectedly validated".into(),
            script: script_from(&[
                coalgebra_script("C", &perturbed),
                vec!["validate coalgebra C".to_string()],
            ]),
        });
    }

    SuiteReport {
        name: "negative-controls".into(),
        header: header("negative-controls", params),
        trials_run: 3,
        failures,
    }
}
