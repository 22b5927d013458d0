//! Acceptance criteria, one test per criterion, each printing a pass line.
//! Every comparison is exact equality over the coefficient ring; there are
//! no tolerances anywhere.

use std::process::Command;

use moyal::random::ElementBounds;
use moyal_cli::session::run_script;
use moyal_cli::suites::{run, SuiteParams};

fn params(trials: u64, seed: u64) -> SuiteParams {
    SuiteParams {
        n: 3,
        trials,
        seed,
        truncate: None,
        lambda_negative: false,
        bounds: ElementBounds::default(),
    }
}

fn assert_suite_passes(name: &str, p: &SuiteParams) {
    let report = run(name, p).unwrap_or_else(|e| panic!("suite {} failed to run: {}", name, e));
    assert!(
        report.passed(),
        "suite {} reported failures:\n{}",
        name,
        report.stdout_lines().join("\n")
    );
}

#[test]
fn criterion_01_assoc_derham() {
    let started = std::time::Instant::now();
    for negative in [false, true] {
        let p = SuiteParams {
            lambda_negative: negative,
            ..params(200, 42)
        };
        assert_suite_passes("assoc-derham", &p);
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "assoc-derham took {:.2}s, expected under 10s",
        elapsed.as_secs_f64()
    );
    println!(
        "[PASS] 1 assoc-derham: 200 trials, both conventions, {:.2}s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_02_unit_and_derivation() {
    assert_suite_passes("unit-and-derivation", &params(200, 42));
    println!("[PASS] 2 unit-and-derivation: 200 trials");
}

#[test]
fn criterion_03_exactness_rewrites() {
    assert_suite_passes("exactness-rewrites", &params(200, 42));
    println!("[PASS] 3 exactness-rewrites: 200 trials");
}

#[test]
fn criterion_04_weak_pauli() {
    assert_suite_passes("weak-pauli", &params(200, 42));
    println!("[PASS] 4 weak-pauli: 200 trials");
}

#[test]
fn criterion_05_s_equivalence() {
    for negative in [false, true] {
        let p = SuiteParams {
            lambda_negative: negative,
            ..params(200, 42)
        };
        assert_suite_passes("s-equivalence", &p);
    }
    println!("[PASS] 5 s-equivalence: 200 trials, both conventions");
}

#[test]
fn criterion_06_moyal_weyl_weyl_pair() {
    let p = SuiteParams {
        truncate: Some(3),
        trials: 100,
        ..params(100, 42)
    };
    assert_suite_passes("moyal-weyl", &p);
    println!("[PASS] 6 moyal-weyl-weyl-pair: bracket exact, 100 triples at order 3");
}

#[test]
fn criterion_07_complexes_deformed_compose() {
    assert_suite_passes("complexes-compose", &params(200, 42));
    println!("[PASS] 7 complexes-deformed-compose: 200 trials");
}

#[test]
fn criterion_08_dgla_exactness() {
    assert_suite_passes("dgla-exactness", &params(200, 7));
    println!("[PASS] 8 dgla-exactness: 200 trials over 5 catalog complexes");
}

#[test]
fn criterion_09_coalgebra_coassoc() {
    // Trial 0 is the four-dimensional dual itself; trials 1..=20 are the
    // twenty randomly perturbed-then-revalidated presentations.
    assert_suite_passes("coalgebra-coassoc", &params(21, 42));
    println!("[PASS] 9 coalgebra-coassoc: instance plus 20 perturbations");
}

#[test]
fn criterion_10_duality_oracle() {
    for negative in [false, true] {
        let p = SuiteParams {
            lambda_negative: negative,
            ..params(1, 42)
        };
        assert_suite_passes("duality-oracle", &p);
    }
    println!("[PASS] 10 duality-oracle: coefficient-wise, both conventions");
}

#[test]
fn criterion_11_functoriality() {
    assert_suite_passes("functoriality", &params(100, 42));
    println!("[PASS] 11 functoriality: 100 pairs through the inclusion plus relabelings");
}

#[test]
fn criterion_12_negative_controls() {
    assert_suite_passes("negative-controls", &params(3, 42));
    println!("[PASS] 12 negative-controls: broken d, non-chain map, perturbed coalgebra");
}

#[test]
fn criterion_13_cli_golden() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for demo in ["dga_demo", "complexes_demo", "coalgebra_demo"] {
        let script = dir.join(format!("{}.mwl", demo));
        let golden = dir.join(format!("{}.golden", demo));
        let output = Command::new(env!("CARGO_BIN_EXE_moyal"))
            .arg("run")
            .arg(&script)
            .output()
            .expect("binary runs");
        assert!(
            output.status.success(),
            "{} exited with {:?}: {}",
            demo,
            output.status.code(),
            String::from_utf8_lossy(&output.stderr)
        );
        let expected = std::fs::read(&golden).expect("golden file");
        assert_eq!(
            output.stdout,
            expected,
            "stdout of {} differs from its golden file",
            demo
        );
    }

    // Exit code reflects failures: a failing check makes the process exit
    // with 1, a script error with 2.
    let tmp = std::env::temp_dir().join("moyal_failing_script.mwl");
    std::fs::write(
        &tmp,
        "context A\ngenerator x deg 1\ngenerator y deg 2\ngenerator z deg 3\ndiff d: x -> y, y -> z\ncheck assoc x x x\n",
    )
    .unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_moyal"))
        .arg("run")
        .arg(&tmp)
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(1));

    let tmp2 = std::env::temp_dir().join("moyal_error_script.mwl");
    std::fs::write(&tmp2, "show undefined_name\n").unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_moyal"))
        .arg("run")
        .arg(&tmp2)
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(2));

    println!("[PASS] 13 cli-golden: three demos byte-identical, exit codes reflect failures");
}

#[test]
fn determinism_of_scripted_runs() {
    // Identical (script, seed) pairs produce byte-identical output through
    // the full script path, including an embedded suite statement.
    let script = "\
instance derham 2 as M diff d
let a = t1*dt2 + h*t2
show a*a deformed
suite assoc_derham n=2 trials=15 seed=9
suite weak_pauli n=2 trials=10 seed=3 lambda=-ih
";
    let first = run_script(script).unwrap();
    let second = run_script(script).unwrap();
    assert_eq!(first, second);
    assert_eq!(first.1, 0);
}
