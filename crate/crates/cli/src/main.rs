use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mehler_cli::{emit_report, run_suite, ExperimentConfig, Format, Overrides, Suite, Verdict};

#[derive(Parser)]
#[command(name = "mehler", version, about = "Run verification suites for the mehler library")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite and write its report.
    Run {
        /// kernels, operators, asymptotics, fock or all.
        #[arg(long)]
        suite: Option<Suite>,
        /// TOML configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated values of epsilon.
        #[arg(long, value_delimiter = ',')]
        epsilon: Option<Vec<f64>>,
        #[arg(long)]
        basis_size: Option<usize>,
        #[arg(long)]
        quad_order: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Report path; standard output if absent.
        #[arg(long)]
        output: Option<PathBuf>,
        /// json or csv.
        #[arg(long)]
        format: Option<Format>,
    },
}

fn main() -> ExitCode {
    let Command::Run {
        suite,
        config,
        epsilon,
        basis_size,
        quad_order,
        seed,
        output,
        format,
    } = Cli::parse().command;

    let base = match &config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    let cfg = base.apply(Overrides {
        suite,
        epsilons: epsilon,
        basis_size,
        quad_order,
        seed,
        output_path: output,
        format,
    });

    let report = match run_suite(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let written = match &cfg.output_path {
        Some(p) => File::create(p).and_then(|f| {
            let mut w = BufWriter::new(f);
            emit_report(&report, cfg.format, &mut w)?;
            w.flush()
        }),
        None => emit_report(&report, cfg.format, std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }

    for r in report.records.iter().filter(|r| r.verdict == Verdict::Fail) {
        eprintln!("FAIL {}: measured {:?}, expected {} ± {}", r.id, r.measured, r.expected, r.tolerance);
    }
    eprintln!("{}", report.summary());
    if report.has_failures() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
