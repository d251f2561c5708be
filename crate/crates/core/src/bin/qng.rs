use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qng_core::io::{self, golden, AnalyzeOptions};
use qng_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "qng",
    version,
    about = "Quantum non-Gaussianity witness for photon-counting data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a counts CSV (label,R0,R1A,R1B,R2[,duration_s,inclusive]) or a pairs CSV (label,p0,p1[,sigma_p0,sigma_p1,cov_p0_p1]).
    Analyze {
        file: PathBuf,
        /// JSON report (default).
        #[arg(long, conflicts_with = "csv")]
        json: bool,
        /// CSV report.
        #[arg(long)]
        csv: bool,
        /// Required significance, in standard deviations, for a non-Gaussian verdict.
        #[arg(long, default_value_t = 3.0)]
        sigma_k: f64,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the Gaussian-mixture boundary to CSV.
    Boundary {
        #[arg(long, default_value_t = 0.0)]
        r_min: f64,
        #[arg(long, default_value_t = 2.0)]
        r_max: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a heralded source; writes counts CSV and `<out>.truth.json`.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed; run i of a batch uses seed + i.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recompute the bundled reference tables and report pass/fail per check.
    Tables,
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Analyze {
            file,
            json: _,
            csv,
            sigma_k,
            out,
        } => {
            let text = std::fs::read_to_string(&file).map_err(|e| Error::Io { path: file, source: e })?;
            let inputs = io::parse_input(&text)?;
            let opts = AnalyzeOptions {
                sigma_k,
                ..AnalyzeOptions::default()
            };
            let reports = io::analyze(&inputs, &opts)?;
            let mut buf = Vec::new();
            if csv {
                io::write_reports_csv(&mut buf, &reports)?;
            } else {
                io::write_reports_json(&mut buf, &reports)?;
            }
            match out {
                Some(path) => std::fs::write(&path, &buf).map_err(|e| Error::Io { path, source: e })?,
                None => std::io::stdout().write_all(&buf).map_err(stdout_err)?,
            }
            Ok(true)
        }
        Command::Boundary {
            r_min,
            r_max,
            samples,
            out,
        } => {
            io::emit_boundary(r_min, r_max, samples, &out)?;
            Ok(true)
        }
        Command::Simulate { config, out, seed } => {
            let outcome = io::simulate(&config, &out, seed)?;
            eprintln!(
                "simulated {} run(s): {} and {}",
                outcome.counts.len(),
                out.display(),
                io::simulate::truth_path(&out).display()
            );
            Ok(true)
        }
        Command::Tables => {
            let checks = golden::all_checks()?;
            let mut stdout = std::io::stdout().lock();
            for c in &checks {
                writeln!(stdout, "{c}").map_err(stdout_err)?;
            }
            let failed = checks.iter().filter(|c| !c.informational && !c.passed).count();
            let total = checks.iter().filter(|c| !c.informational).count();
            writeln!(stdout, "{} of {total} checks passed", total - failed).map_err(stdout_err)?;
            Ok(failed == 0)
        }
    }
}

fn main() -> ExitCode {
    // usage errors are validation errors (1); 2 is reserved for I/O
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
