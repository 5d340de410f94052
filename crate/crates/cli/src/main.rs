mod bench;
mod report;
mod solve;

use anyhow::Context;
use clap::{Parser, Subcommand};
use nwpc_core::generate::{generate_forest, generate_tree, GeneratorConfig, GraphKind};
use nwpc_core::io::{write_forest, write_tree};
use nwpc_core::rational::{self, Rational};
use report::Format;
use solve::{Algo, Options};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Errors grouped by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or malformed input: exit 2.
    Input(anyhow::Error),
    /// Audit or bound violation: exit 3.
    Violation(String),
    /// Anything else: exit 1.
    Other(anyhow::Error),
}

#[derive(Parser)]
#[command(name = "nwpc", version, about = "Prize-collecting Steiner tree and forest solvers with exact auditing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance file.
    Solve {
        #[arg(value_enum)]
        algo: Algo,
        file: PathBuf,
        /// Run the auditor; exit 3 on any failed check.
        #[arg(long)]
        audit: bool,
        /// Write the event trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value = "1/10", value_parser = parse_rational)]
        eps: Rational,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Largest instance the exact oracle is run on; 0 disables it.
        #[arg(long)]
        oracle_cap: Option<usize>,
    },
    /// Sweep seeded generated instances against the exact oracle.
    Bench {
        #[arg(long, default_value = "grid", value_parser = parse_kind)]
        kind: GraphKind,
        #[arg(long, default_value_t = 9)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, value_enum, default_value = "lmp")]
        algo: Algo,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Demands per forest instance.
        #[arg(long, default_value_t = 3)]
        demands: usize,
        #[arg(long, default_value = "1/10", value_parser = parse_rational)]
        eps: Rational,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        oracle_cap: Option<usize>,
        /// Where a violating instance is written.
        #[arg(long, default_value = ".")]
        witness_dir: PathBuf,
    },
    /// Write a seeded random planar instance.
    Generate {
        #[arg(long, default_value = "grid", value_parser = parse_kind)]
        kind: GraphKind,
        #[arg(long, default_value_t = 9)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit a forest instance instead of a rooted one.
        #[arg(long)]
        forest: bool,
        #[arg(long, default_value_t = 3)]
        demands: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    let r = rational::parse(s).map_err(|e| e.to_string())?;
    if r <= Rational::from_integer(0.into()) {
        return Err("must be positive".into());
    }
    Ok(r)
}

fn parse_kind(s: &str) -> Result<GraphKind, String> {
    s.parse().map_err(|e: nwpc_core::generate::GenerateError| e.to_string())
}

fn execute(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Solve {
            algo,
            file,
            audit,
            trace,
            eps,
            format,
            oracle_cap,
        } => {
            let inst = solve::load(&file)?;
            let opts = Options {
                epsilon: eps,
                oracle_cap,
            };
            let out = solve::run(algo, inst, &opts)?;
            if let Some(path) = trace {
                let mut text = out.trace.join("\n");
                if !text.is_empty() {
                    text.push('\n');
                }
                std::fs::write(&path, text)
                    .with_context(|| format!("cannot write {}", path.display()))
                    .map_err(Failure::Other)?;
            }
            let rendered = report::render(&solve::tables(algo, &out, audit), format);
            if audit && !out.audit.is_ok() {
                emit(&rendered);
                let names: Vec<&str> = out.audit.violations().map(|c| c.name.as_str()).collect();
                return Err(Failure::Violation(format!("audit failed: {}", names.join(", "))));
            }
            Ok(rendered)
        }
        Command::Bench {
            kind,
            n,
            count,
            algo,
            seed,
            demands,
            eps,
            format,
            oracle_cap,
            witness_dir,
        } => {
            let args = bench::BenchArgs {
                kind,
                n,
                count,
                algo,
                seed,
                demands,
                witness_dir,
            };
            let opts = Options {
                epsilon: eps,
                oracle_cap,
            };
            Ok(report::render(&bench::run(&args, &opts)?, format))
        }
        Command::Generate {
            kind,
            n,
            seed,
            forest,
            demands,
            out,
        } => {
            let mut cfg = GeneratorConfig::new(kind, n, seed);
            cfg.demands = demands;
            let text = if forest {
                write_forest(&generate_forest(&cfg).map_err(|e| Failure::Input(e.into()))?)
            } else {
                write_tree(&generate_tree(&cfg).map_err(|e| Failure::Input(e.into()))?)
            };
            match out {
                Some(path) => {
                    std::fs::write(&path, text)
                        .with_context(|| format!("cannot write {}", path.display()))
                        .map_err(Failure::Other)?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
    }
}

/// Writes to stdout, ignoring a closed pipe (e.g. output piped into `head`).
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(text) => {
            emit(&text);
            ExitCode::SUCCESS
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
