use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use exlab::{Budget, Error};

use exlab_cli::config::{ExperimentConfig, FnSpec, ProtocolSource, ProtocolSpec};
use exlab_cli::report::{write_csv, write_report, Output, RunReport};
use exlab_cli::run::run;

#[derive(Parser)]
#[command(
    name = "exlab",
    version,
    about = "Exact verification lab for leakage-resilient extractors"
)]
struct Cli {
    /// Load a full experiment config instead of giving a subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write the JSON report here (default: stdout).
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Also write one CSV summary row per bound check.
    #[arg(long, global = true, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Worker thread count (default: all cores). Results are identical
    /// for every value.
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,
    /// Evaluation budget; oversized runs are refused up front.
    /// Overrides the EXLAB_BUDGET environment variable.
    #[arg(long, global = true, value_name = "EVALS")]
    budget: Option<u128>,
    /// Base seed for every seeded draw in the run.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Binary-field arithmetic.
    Field {
        #[command(subcommand)]
        cmd: FieldCmd,
    },
    /// Exact distribution metrics.
    Dist {
        #[command(subcommand)]
        cmd: DistCmd,
    },
    /// Number-on-forehead protocol quantities.
    Nof {
        #[command(subcommand)]
        cmd: NofCmd,
    },
    /// Evaluate the composed maps.
    Extract {
        #[command(subcommand)]
        cmd: ExtractCmd,
    },
    /// Brute-force bound checks.
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
    /// Regenerate or check the derived-constant fixtures.
    Fixtures {
        #[command(subcommand)]
        cmd: FixturesCmd,
    },
}

#[derive(Subcommand)]
enum FieldCmd {
    /// Multiply two field elements (hex, most significant nibble first).
    Mul {
        #[arg(long)]
        width: u32,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Print the reduction modulus for a width.
    Table {
        #[arg(long)]
        width: u32,
    },
}

#[derive(Subcommand)]
enum DistCmd {
    /// Statistical distance between two distribution files.
    Sd {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
    },
    /// Exact min-entropy.
    Hmin {
        #[arg(long)]
        p: PathBuf,
    },
    /// Distance from having k bits of min-entropy.
    Close {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Subcommand)]
enum NofCmd {
    /// Cube bias of a boolean function under uniform inputs.
    Cube {
        /// gip | hex:BYTES | params:FILE | a function-table file.
        #[arg(long)]
        f: String,
        #[arg(long = "N")]
        parties: usize,
        #[arg(long = "n")]
        input_bits: u32,
    },
    /// Leakage distance of a function against one protocol.
    Leak {
        #[arg(long)]
        f: String,
        #[arg(long = "N")]
        parties: usize,
        #[arg(long = "n")]
        input_bits: u32,
        /// Protocol file; omit to draw one from the seed.
        #[arg(long)]
        protocol: Option<PathBuf>,
        /// Steps of the seeded protocol.
        #[arg(long)]
        mu: Option<u32>,
        #[arg(long)]
        adaptive: bool,
        /// Source family file (default: uniform).
        #[arg(long)]
        family: Option<PathBuf>,
    },
    /// Entropy-requirement check: low-entropy leakage against the
    /// uniform-case bound.
    MissingEntropy {
        #[arg(long)]
        f: String,
        #[arg(long = "N")]
        parties: usize,
        #[arg(long = "n")]
        input_bits: u32,
        #[arg(long)]
        mu: u32,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Subcommand)]
enum ExtractCmd {
    /// Run the composed map on explicit inputs.
    Nme {
        #[arg(long)]
        params: PathBuf,
        /// Comma-separated hex inputs, one per source.
        #[arg(long, value_delimiter = ',')]
        inputs: Vec<String>,
    },
    /// Run the XOR-of-triples map on explicit inputs.
    Adversarial {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_delimiter = ',')]
        inputs: Vec<String>,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Exact tampering distance against a bound.
    Nme {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        family: Option<PathBuf>,
        /// Bound as "num/den" (default: the 1 - 2^-m gap).
        #[arg(long)]
        bound: Option<String>,
        /// Add a Monte-Carlo cross-check with this many samples.
        #[arg(long)]
        mc_samples: Option<u64>,
    },
    /// Per-protocol leakage against the tampering-distance bound.
    Reduction {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        mu: u32,
        /// Check every protocol of length mu.
        #[arg(long, conflicts_with_all = ["count", "protocol_files"])]
        enumerate: bool,
        /// Check this many seeded protocols (seeds base, base+1, ...).
        #[arg(long)]
        count: Option<u64>,
        #[arg(long)]
        adaptive: bool,
        #[arg(long, value_delimiter = ',')]
        protocol_files: Vec<PathBuf>,
    },
    /// Worst-pair condenser profile, optionally with a strongness check.
    Condenser {
        /// Params file whose condenser stage is profiled ...
        #[arg(long, conflicts_with_all = ["input_bits", "cond_bits"])]
        params: Option<PathBuf>,
        /// ... or an inline field-product condenser n -> r.
        #[arg(long = "n")]
        input_bits: Option<u32>,
        #[arg(long = "r")]
        cond_bits: Option<u32>,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        /// Error threshold "num/den" (default: measured profile maximum).
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        k_prime: Option<u32>,
        /// Sample this many pairs instead of enumerating all.
        #[arg(long)]
        sample_pairs: Option<u64>,
    },
    /// Decomposition and output-uniformity checks with fixed sources.
    Adversarial {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        n_total: usize,
        /// The three non-fixed source indices.
        #[arg(long, value_delimiter = ',')]
        good: Vec<usize>,
        /// Hex constants for the fixed sources, in index order.
        #[arg(long, value_delimiter = ',')]
        bad: Vec<String>,
        #[arg(long)]
        family: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FixturesCmd {
    /// Recompute every derived constant from its oracle and write the set.
    Regen {
        #[arg(long, default_value = "fixtures/derived.json")]
        path: PathBuf,
    },
    /// Compare the committed set against freshly regenerated values.
    Check {
        #[arg(long, default_value = "fixtures/derived.json")]
        path: PathBuf,
    },
}

fn into_config(cmd: Command, seed: u64) -> Result<ExperimentConfig, Error> {
    Ok(match cmd {
        Command::Field { cmd } => match cmd {
            FieldCmd::Mul { width, a, b } => ExperimentConfig::FieldMul { width, a, b },
            FieldCmd::Table { width } => ExperimentConfig::FieldTable { width },
        },
        Command::Dist { cmd } => match cmd {
            DistCmd::Sd { p, q } => ExperimentConfig::DistSd { p, q },
            DistCmd::Hmin { p } => ExperimentConfig::DistHmin { p },
            DistCmd::Close { p, k } => ExperimentConfig::DistClose { p, k },
        },
        Command::Nof { cmd } => match cmd {
            NofCmd::Cube {
                f,
                parties,
                input_bits,
            } => ExperimentConfig::NofCube {
                f: FnSpec::parse(&f),
                parties,
                input_bits,
            },
            NofCmd::Leak {
                f,
                parties,
                input_bits,
                protocol,
                mu,
                adaptive,
                family,
            } => {
                let protocol = match (protocol, mu) {
                    (Some(path), None) => ProtocolSpec::File { path },
                    (None, Some(mu)) => ProtocolSpec::Seeded { mu, seed, adaptive },
                    _ => {
                        return Err(Error::config(
                            "give exactly one of --protocol or --mu (seeded)",
                        ))
                    }
                };
                ExperimentConfig::NofLeak {
                    f: FnSpec::parse(&f),
                    parties,
                    input_bits,
                    protocol,
                    family,
                }
            }
            NofCmd::MissingEntropy {
                f,
                parties,
                input_bits,
                mu,
                k,
            } => ExperimentConfig::NofMissingEntropy {
                f: FnSpec::parse(&f),
                parties,
                input_bits,
                mu,
                k,
            },
        },
        Command::Extract { cmd } => match cmd {
            ExtractCmd::Nme { params, inputs } => ExperimentConfig::ExtractNme { params, inputs },
            ExtractCmd::Adversarial { params, inputs } => {
                ExperimentConfig::ExtractAdversarial { params, inputs }
            }
        },
        Command::Verify { cmd } => match cmd {
            VerifyCmd::Nme {
                params,
                family,
                bound,
                mc_samples,
            } => ExperimentConfig::VerifyNme {
                params,
                family,
                bound,
                mc_samples,
                seed,
            },
            VerifyCmd::Reduction {
                params,
                family,
                mu,
                enumerate,
                count,
                adaptive,
                protocol_files,
            } => {
                let protocols = if enumerate {
                    ProtocolSource::Enumerate { mu }
                } else if let Some(count) = count {
                    ProtocolSource::Seeded {
                        mu,
                        seeds: (seed..seed.saturating_add(count)).collect(),
                        adaptive,
                    }
                } else if !protocol_files.is_empty() {
                    ProtocolSource::Files {
                        paths: protocol_files,
                    }
                } else {
                    return Err(Error::config(
                        "give one of --enumerate, --count, or --protocol-files",
                    ));
                };
                ExperimentConfig::VerifyReduction {
                    params,
                    family,
                    protocols,
                }
            }
            VerifyCmd::Condenser {
                params,
                input_bits,
                cond_bits,
                k,
                l,
                eps,
                k_prime,
                sample_pairs,
            } => ExperimentConfig::VerifyCondenser {
                params,
                input_bits,
                cond_bits,
                k,
                l,
                eps,
                k_prime,
                sample_pairs,
                seed,
            },
            VerifyCmd::Adversarial {
                params,
                n_total,
                good,
                bad,
                family,
            } => ExperimentConfig::VerifyAdversarial {
                params,
                n_total,
                good,
                bad_values: bad,
                family,
            },
        },
        Command::Fixtures { cmd } => match cmd {
            FixturesCmd::Regen { path } => ExperimentConfig::FixturesRegen { path },
            FixturesCmd::Check { path } => ExperimentConfig::FixturesCheck { path },
        },
    })
}

fn resolve_budget(flag: Option<u128>) -> Result<Budget, String> {
    if let Some(v) = flag {
        if v == 0 {
            return Err("--budget must be positive".into());
        }
        return Ok(Budget(v));
    }
    match std::env::var("EXLAB_BUDGET") {
        Ok(s) => s
            .trim()
            .parse::<u128>()
            .ok()
            .filter(|v| *v > 0)
            .map(Budget)
            .ok_or(format!("EXLAB_BUDGET {s:?} is not a positive integer")),
        Err(_) => Ok(Budget::default()),
    }
}

fn emit(report: &RunReport, out: Option<&PathBuf>, csv: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => write_report(path, report)?,
        None => {
            let text =
                serde_json::to_string_pretty(report).map_err(|e| Error::config(e.to_string()))?;
            println!("{text}");
        }
    }
    if let Some(path) = csv {
        write_csv(path, report)?;
    }
    Ok(())
}

fn real_main() -> i32 {
    let cli = Cli::parse();

    let budget = match resolve_budget(cli.budget) {
        Ok(b) => b,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };

    let config = match (cli.config, cli.command) {
        (Some(path), None) => {
            let text = match std::fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    return 2;
                }
            };
            match serde_json::from_str::<ExperimentConfig>(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    return 2;
                }
            }
        }
        (None, Some(cmd)) => match into_config(cmd, cli.seed.unwrap_or(0)) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        },
        (Some(_), Some(_)) => {
            eprintln!("error: --config conflicts with a subcommand");
            return 2;
        }
        (None, None) => {
            eprintln!("error: expected a subcommand or --config (see --help)");
            return 2;
        }
    };

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };

    let started = Instant::now();
    let outcome = pool.install(|| run(&config, &budget));
    match outcome {
        Ok(mut report) => {
            report.runtime_ms = started.elapsed().as_millis() as u64;
            if let Err(e) = emit(&report, cli.out.as_ref(), cli.csv.as_ref()) {
                eprintln!("error: {e}");
                return 2;
            }
            if report.holds {
                0
            } else {
                1
            }
        }
        Err(Error::Budget { estimated, budget }) => {
            let mut report = RunReport::new(
                config,
                vec![Output::ResourceExceeded {
                    estimated: estimated.to_string(),
                    budget: budget.to_string(),
                }],
                false,
                0,
            );
            report.runtime_ms = started.elapsed().as_millis() as u64;
            if let Err(e) = emit(&report, cli.out.as_ref(), cli.csv.as_ref()) {
                eprintln!("error: {e}");
                return 2;
            }
            3
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn main() {
    std::process::exit(real_main());
}
