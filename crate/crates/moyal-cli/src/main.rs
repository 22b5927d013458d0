//! Command-line front end: run scripts, an interactive loop, and the
//! randomized identity suites.

use std::io::{BufRead, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use moyal_cli::script;
use moyal_cli::session::{self, Session};
use moyal_cli::suites::{self, SuiteParams, SUITE_NAMES};

#[derive(Parser)]
#[command(
    name = "moyal",
    about = "Exact first-order deformations of graded algebras, brackets, and coproducts",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a script file; exit code 0 iff every check passed.
    Run { file: std::path::PathBuf },
    /// Interactive line-by-line session with the same grammar.
    Repl,
    /// Run one identity suite.
    Suite {
        /// Suite name, e.g. assoc-derham (see --list).
        name: Option<String>,
        /// List available suites and exit.
        #[arg(long)]
        list: bool,
        /// Instance size parameter (de Rham rank).
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Number of randomized trials.
        #[arg(long, default_value_t = 200)]
        trials: u64,
        /// Seed for the trial generator.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Truncation order for the exponential product.
        #[arg(long)]
        truncate: Option<u32>,
        /// Deformation coefficient: +ih or -ih.
        #[arg(long, default_value = "+ih", allow_hyphen_values = true)]
        lambda: String,
        /// Random element bound: maximum number of terms.
        #[arg(long, default_value_t = 4)]
        max_terms: usize,
        /// Random element bound: maximum monomial degree.
        #[arg(long, default_value_t = 6)]
        max_degree: u32,
        /// Random element bound: largest coefficient numerator/denominator.
        #[arg(long, default_value_t = 9)]
        max_coeff: i64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { file } => {
            let text = match std::fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {}", file.display(), e);
                    return ExitCode::from(2);
                }
            };
            match session::run_script(&text) {
                Ok((stdout, failures)) => {
                    print!("{}", stdout);
                    if failures == 0 {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(message) => {
                    eprintln!("{}", message);
                    ExitCode::from(2)
                }
            }
        }
        Command::Repl => repl(),
        Command::Suite {
            name,
            list,
            n,
            trials,
            seed,
            truncate,
            lambda,
            max_terms,
            max_degree,
            max_coeff,
        } => {
            if list || name.is_none() {
                for suite in SUITE_NAMES {
                    println!("{}", suite);
                }
                return if list {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                };
            }
            let lambda_negative = match lambda.as_str() {
                "+ih" | "ih" => false,
                "-ih" => true,
                other => {
                    eprintln!("error: lambda must be +ih or -ih, got {}", other);
                    return ExitCode::from(2);
                }
            };
            if max_terms == 0 || max_coeff < 1 {
                eprintln!("error: --max-terms and --max-coeff must be at least 1");
                return ExitCode::from(2);
            }
            let params = SuiteParams {
                n,
                trials,
                seed,
                truncate,
                lambda_negative,
                bounds: moyal::random::ElementBounds {
                    max_terms,
                    max_monomial_degree: max_degree,
                    max_coeff,
                    ..moyal::random::ElementBounds::default()
                },
            };
            let started = std::time::Instant::now();
            match suites::run(name.as_deref().unwrap(), &params) {
                Ok(report) => {
                    for line in report.stdout_lines() {
                        println!("{}", line);
                    }
                    eprintln!("elapsed: {:.3}s", started.elapsed().as_secs_f64());
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {}", e);
                    eprintln!("available suites:");
                    for suite in SUITE_NAMES {
                        eprintln!("  {}", suite);
                    }
                    ExitCode::from(2)
                }
            }
        }
    }
}

fn repl() -> ExitCode {
    let stdin = std::io::stdin();
    let mut session = Session::new();
    let mut line_no = 0usize;
    loop {
        print!("moyal> ");
        let _ = std::io::stdout().flush();
        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) => break,
            Ok(_) => {}
            Err(e) => {
                eprintln!("error: {}", e);
                return ExitCode::from(2);
            }
        }
        line_no += 1;
        let trimmed = line.trim();
        if trimmed == "exit" || trimmed == "quit" {
            break;
        }
        match script::parse_line(line.trim_end(), line_no) {
            Ok(None) => {}
            Ok(Some(stmt)) => match session.execute(&stmt) {
                Ok(out) => {
                    for l in out {
                        println!("{}", l);
                    }
                }
                Err(e) => println!("error: {}", e),
            },
            Err(e) => println!("error: {}", e),
        }
    }
    if session.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
