//! `radonlab` — experiment runner. Exit codes: 0 all checks passed,
//! 1 a tolerance check failed, 2 usage/config error, 3 budget exceeded.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use radonlab_cli::config::Config;
use radonlab_cli::experiments::{self, CliError, RunContext};
use radonlab_cli::report::{OutputFormat, Report};

#[derive(Parser)]
#[command(name = "radonlab", version, about = "Truncated singular Radon transform laboratory")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random draw; same (config, seed) ⇒ same report bytes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output directory for the report.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Cap on lattice cells / enumeration sizes per operation.
    #[arg(long, global = true, default_value_t = 50_000_000)]
    budget_cells: usize,

    /// Worker threads (recorded in the report; execution is deterministic).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check Calderón–Zygmund kernel axioms numerically.
    VerifyKernel,
    /// Worst-sequence oscillation ratios across input sizes.
    ProbeOscillation,
    /// Gauss-sum table and decay-exponent fit.
    GaussTable,
    /// Multiplier identities for the cubic-Hilbert preset.
    MultiplierScan,
    /// Conditional-expectation axioms, oscillation probe, telescoping.
    MartingaleProbe,
    /// Long/short split bound, projection multiplier, shell partition.
    SplitCheck,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifyKernel => "verify-kernel",
            Command::ProbeOscillation => "probe-oscillation",
            Command::GaussTable => "gauss-table",
            Command::MultiplierScan => "multiplier-scan",
            Command::MartingaleProbe => "martingale-probe",
            Command::SplitCheck => "split-check",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let format = match cli.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };

    let config = match &cli.config {
        Some(path) => match Config::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{}", e);
                return ExitCode::from(2);
            }
        },
        None => Config::empty(),
    };
    let unknown = config.unknown_keys(experiments::known_keys(name));
    if !unknown.is_empty() {
        eprintln!(
            "config field `{}`: unknown key for `{}` (known: {})",
            unknown[0],
            name,
            experiments::known_keys(name).join(", ")
        );
        return ExitCode::from(2);
    }

    let ctx = RunContext {
        seed: cli.seed,
        budget_cells: cli.budget_cells,
        threads: cli.threads.max(1),
    };

    let result = match cli.command {
        Command::VerifyKernel => experiments::verify_kernel(&config, &ctx),
        Command::ProbeOscillation => experiments::probe_oscillation(&config, &ctx),
        Command::GaussTable => experiments::gauss_table(&config, &ctx),
        Command::MultiplierScan => experiments::multiplier_scan(&config, &ctx),
        Command::MartingaleProbe => experiments::martingale_probe(&config, &ctx),
        Command::SplitCheck => experiments::split_check(&config, &ctx),
    };

    match result {
        Ok(report) => {
            if let Err(e) = report.emit(&cli.out, format) {
                eprintln!("cannot write report: {}", e);
                return ExitCode::from(2);
            }
            let verdict = if report.passed { "PASS" } else { "FAIL" };
            println!("{}: {} ({} rows)", name, verdict, report.rows.len());
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Budget(msg)) => {
            eprintln!("budget exceeded: {}", msg);
            let mut cfg = BTreeMap::new();
            cfg.insert("seed".into(), cli.seed.to_string());
            cfg.insert("budget_cells".into(), cli.budget_cells.to_string());
            let mut partial = Report::new(name, cfg);
            partial.complete = false;
            let _ = partial.emit(&cli.out, format);
            ExitCode::from(3)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("{}", msg);
            ExitCode::from(2)
        }
    }
}
