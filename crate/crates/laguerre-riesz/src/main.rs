use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use laguerre_riesz::error::{Error, Result};
use laguerre_riesz::lab::runner::{self, RunConfig, EXPERIMENTS};
use laguerre_riesz::special;
use laguerre_riesz::AlphaVector;

#[derive(Parser)]
#[command(
    name = "laguerre-riesz",
    about = "Laguerre expansions on (0,inf)^d: spectral projections, Riesz/Cesaro summability, heat kernels, and exponent-law experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one named experiment and write runs/<timestamp>-<name>/
    Run {
        /// Experiment name (see `list`)
        name: String,
        /// Line-oriented `key = value` config file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a single key, repeatable: --set key=value
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output root directory
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (defaults to all cores)
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the experiments and what each one measures
    List,
    /// Run the full verification suite, one pass/fail line per criterion
    Verify {
        #[arg(long, default_value = "runs/verify")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print one special-function evaluation in full precision
    DumpSpecial {
        /// One of: laguerre_poly, laguerre_fn_1d, normalized_laguerre,
        /// bessel_i, eigenvalue, envelope, oscillatory_main_term
        #[arg(long = "fn")]
        function: String,
        /// Comma-separated arguments, e.g. --args "3,0.5,2.0"
        #[arg(long)]
        args: String,
    },
}

fn setup_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // best effort; a second global initialization is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn parse_overrides(set: &[String]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for kv in set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("--set expects key=value, got {kv:?}")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn dump_special(function: &str, args: &str) -> Result<()> {
    let vals: Vec<f64> = args
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad argument: {e}")))
        })
        .collect::<Result<_>>()?;
    let need = |k: usize| -> Result<()> {
        if vals.len() != k {
            return Err(Error::InvalidArgument(format!(
                "{function} takes {k} arguments, got {}",
                vals.len()
            )));
        }
        Ok(())
    };
    match function {
        "laguerre_poly" => {
            need(3)?;
            println!(
                "{:.17e}",
                special::laguerre_poly(vals[0] as usize, vals[1], vals[2])?
            );
        }
        "laguerre_fn_1d" => {
            need(3)?;
            println!(
                "{:.17e}",
                special::laguerre_fn_1d(vals[0] as usize, vals[1], vals[2])?
            );
        }
        "normalized_laguerre" => {
            need(3)?;
            println!(
                "{:.17e}",
                special::normalized_laguerre(vals[0] as usize, vals[1], vals[2])?
            );
        }
        "bessel_i" => {
            need(2)?;
            println!("{:.17e}", special::bessel_i(vals[0], vals[1])?);
        }
        "eigenvalue" => {
            // n, then the type entries
            if vals.len() < 2 {
                return Err(Error::InvalidArgument("eigenvalue takes n,alpha...".into()));
            }
            let alpha = AlphaVector::new(vals[1..].to_vec())?;
            println!("{:.17e}", special::eigenvalue(vals[0] as usize, &alpha));
        }
        "envelope" => {
            need(3)?;
            let (regime, bound) = special::asymptotic_envelope(vals[0] as usize, vals[1], vals[2])?;
            println!("{:?} {:.17e}", regime.regime_tag, bound);
        }
        "oscillatory_main_term" => {
            need(3)?;
            println!(
                "{:.17e}",
                special::oscillatory_main_term(vals[0] as usize, vals[1], vals[2])?
            );
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown function {other:?}"
            )));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for (name, what) in EXPERIMENTS {
                println!("{name:26} {what}");
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            name,
            config,
            set,
            out,
            seed,
            threads,
        } => {
            setup_threads(threads);
            let mut overrides = BTreeMap::new();
            if let Some(path) = config {
                match std::fs::read_to_string(&path) {
                    Ok(text) => match runner::parse_config(&text) {
                        Ok(map) => overrides.extend(map),
                        Err(e) => {
                            eprintln!("config error: {e}");
                            return ExitCode::FAILURE;
                        }
                    },
                    Err(e) => {
                        eprintln!("cannot read {}: {e}", path.display());
                        return ExitCode::FAILURE;
                    }
                }
            }
            match parse_overrides(&set) {
                Ok(map) => overrides.extend(map),
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::FAILURE;
                }
            }
            let cfg = RunConfig {
                seed,
                out_dir: out,
                overrides,
            };
            match runner::run_and_write(&name, &cfg) {
                Ok((report, dir)) => {
                    println!(
                        "{name}: {:?} (fitted {:.4}, expected {:.4} +- {:.4}) -> {}",
                        report.verdict,
                        report.fitted_slope,
                        report.expected_slope,
                        report.tolerance,
                        dir.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{name} failed: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Verify { out, seed, threads } => {
            setup_threads(threads);
            let outcomes = runner::verify(seed, &out);
            let all = outcomes.iter().all(|o| o.passed);
            println!(
                "{}/{} criteria passed",
                outcomes.iter().filter(|o| o.passed).count(),
                outcomes.len()
            );
            if all {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::DumpSpecial { function, args } => match dump_special(&function, &args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{e}");
                ExitCode::FAILURE
            }
        },
    }
}
