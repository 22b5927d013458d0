//! Every randomized suite stays green across several seeds, so the
//! acceptance results do not hinge on one lucky trajectory.

use moyal_cli::suites::{run, SuiteParams, SUITE_NAMES};

#[test]
fn suites_pass_across_seeds() {
    for seed in [1u64, 7, 2024] {
        for name in SUITE_NAMES {
            let params = SuiteParams {
                trials: 25,
                seed,
                ..SuiteParams::default()
            };
            let report = run(name, &params).unwrap();
            assert!(
                report.passed(),
                "suite {} failed at seed {}:\n{}",
                name,
                seed,
                report.stdout_lines().join("\n")
            );
        }
    }
}

#[test]
fn suites_pass_in_the_negative_convention() {
    for name in SUITE_NAMES {
        let params = SuiteParams {
            trials: 20,
            seed: 99,
            lambda_negative: true,
            ..SuiteParams::default()
        };
        let report = run(name, &params).unwrap();
        assert!(
            report.passed(),
            "suite {} failed with L = -i*h:\n{}",
            name,
            report.stdout_lines().join("\n")
        );
    }
}
