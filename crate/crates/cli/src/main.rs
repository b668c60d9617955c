use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hmc_core::analysis::{correlation_profile, verify_lemmas};
use hmc_core::designer::{design, DesignSpec};
use hmc_core::document::{Format, TableDocument};
use hmc_core::sequences::{hmc_sequence, hmc_set, prime_set};
use hmc_core::sim::{simulate_period, Scenario};
use hmc_core::{Error, Prime};

/// Largest prime accepted on the command line.
const MAX_P: u32 = 1 << 20;

#[derive(Parser)]
#[command(
    name = "hmcseq",
    version,
    about = "One-coincidence HMC frequency-hopping sequence sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the prime or HMC sequence set for p.
    Gen {
        #[arg(long)]
        p: u32,
        #[arg(long, value_enum, default_value_t = FamilyArg::Hmc)]
        family: FamilyArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Drop HMC sequences below a minimum adjacent distance or using bad frequencies.
    Filter {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        dreq: u32,
        /// Comma-separated frequencies to avoid.
        #[arg(long, value_delimiter = ',')]
        bad: Vec<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check every structural property of H_1..H_{p-1}; exits non-zero on any failure.
    Verify {
        #[arg(long, conflicts_with = "pmax", required_unless_present = "pmax")]
        p: Option<u32>,
        /// Verify every prime from 3 up to this bound.
        #[arg(long)]
        pmax: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Hamming cross-correlation of H_k against H_l at every shift.
    Correlate {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run one hopping period for the users in a scenario file.
    Simulate {
        scenario: PathBuf,
        /// Seed for users without a delay; overrides the file's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Prime,
    Hmc,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutputArgs {
    fn emit(&self, doc: &TableDocument) -> anyhow::Result<()> {
        let text = doc.render(self.format.into())?;
        match &self.out {
            Some(path) => {
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                let mut stdout = io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()?;
                Ok(())
            }
        }
    }
}

/// Bad arguments, reported with exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: Error) -> anyhow::Error {
    if e.is_invalid_input() {
        Usage(e.to_string()).into()
    } else {
        e.into()
    }
}

fn prime_arg(p: u32) -> anyhow::Result<Prime> {
    if p > MAX_P {
        return Err(Usage(format!("p = {p} exceeds the limit {MAX_P}")).into());
    }
    Prime::new(p).map_err(usage)
}

fn sequence_index(name: &str, value: u32, p: Prime) -> anyhow::Result<u32> {
    if value == 0 || value >= p.get() {
        return Err(Usage(format!(
            "--{name} {value} out of range [1, {}]",
            p.get() - 1
        ))
        .into());
    }
    Ok(value)
}

/// Ok(true) when every check passed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Gen { p, family, output } => {
            let p = prime_arg(p)?;
            let doc = match family {
                FamilyArg::Prime => TableDocument::prime_set(p, &prime_set(p)),
                FamilyArg::Hmc => TableDocument::hmc_set(&hmc_set(p)),
            };
            output.emit(&doc)?;
            Ok(true)
        }
        Command::Filter {
            p,
            dreq,
            bad,
            output,
        } => {
            let p = prime_arg(p)?;
            let spec = DesignSpec::new(dreq, bad).map_err(usage)?;
            let result = design(&hmc_set(p), &spec);
            output.emit(&TableDocument::filtered_set(&result, &spec))?;
            Ok(true)
        }
        Command::Verify { p, pmax, output } => {
            let primes = match (p, pmax) {
                (Some(p), _) => vec![prime_arg(p)?],
                (None, Some(max)) => {
                    if max > MAX_P {
                        bail!(Usage(format!("--pmax {max} exceeds the limit {MAX_P}")));
                    }
                    let primes = Prime::range(3, max);
                    if primes.is_empty() {
                        bail!(Usage(format!("no odd primes up to {max}")));
                    }
                    primes
                }
                (None, None) => unreachable!("clap requires --p or --pmax"),
            };
            let reports: Vec<_> = primes.into_iter().map(verify_lemmas).collect();
            let failed: Vec<String> = reports
                .iter()
                .flat_map(|r| r.failures().map(move |c| format!("p={} {}", r.p, c.check)))
                .collect();
            output.emit(&TableDocument::verification(reports))?;
            if failed.is_empty() {
                Ok(true)
            } else {
                eprintln!(
                    "hmcseq: {} check(s) failed: {}",
                    failed.len(),
                    failed.join(", ")
                );
                Ok(false)
            }
        }
        Command::Correlate { p, k, l, output } => {
            let p = prime_arg(p)?;
            let k = sequence_index("k", k, p)?;
            let l = sequence_index("l", l, p)?;
            let x = hmc_sequence(p, k)?;
            let y = hmc_sequence(p, l)?;
            let profile = correlation_profile(x.elements(), y.elements())?;
            output.emit(&TableDocument::correlation(p, k, l, profile))?;
            Ok(true)
        }
        Command::Simulate {
            scenario,
            seed,
            output,
        } => {
            let text = fs::read_to_string(&scenario)
                .with_context(|| format!("reading {}", scenario.display()))?;
            let scenario = Scenario::from_json(&text).map_err(|e| Usage(e.to_string()))?;
            let assignments = scenario.assignments(seed).map_err(usage)?;
            let report = simulate_period(&assignments).map_err(usage)?;
            let doc = TableDocument::hit_report(&assignments, &report, seed.or(scenario.seed))?;
            output.emit(&doc)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("hmcseq: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
