use std::io::{ErrorKind, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};
use serde::Deserialize;

use dsq_core::fridman::fridman_lower_bound;
use dsq_core::lab::report::{csv_string, write_reports};
use dsq_core::lab::trace::{render_markdown, traceability_matrix};
use dsq_core::lab::{run_suite, CheckId, SuiteConfig};
use dsq_core::minkowski::{d_minkowski, DEFAULT_TOL};
use dsq_core::squeeze::certify_lower_bound;
use dsq_core::{DomainSpec, FridmanFamily, MapFamily, MultiIndex, Point, SearchBudget};

#[derive(Parser)]
#[command(name = "dsqlab", version, about = "Weighted Minkowski gauges, squeezing and Fridman estimates")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite and write results.csv, report.json, certificates.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Evaluate a functional at a point.
    Eval {
        #[command(subcommand)]
        what: EvalCmd,
    },
    /// Certified squeezing lower bound for a pair {"source","target","z","d"?}.
    Squeeze {
        #[arg(long)]
        pair: String,
        #[arg(long, default_value = "auto")]
        family: String,
        /// Maximum number of map evaluations.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fridman lower bound for {"domain","model","center","family"?}.
    Fridman {
        #[arg(long)]
        pair: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the claim-to-check matrix.
    Trace {
        /// Treat these checks as unavailable.
        #[arg(long, value_delimiter = ',')]
        disable: Vec<String>,
    },
}

#[derive(Subcommand)]
enum EvalCmd {
    /// Weighted Minkowski gauge h_d(z).
    H {
        #[arg(long)]
        domain: String,
        #[arg(long)]
        d: Option<String>,
        #[arg(long)]
        z: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SqueezePair {
    source: DomainSpec,
    target: DomainSpec,
    z: Point,
    #[serde(default)]
    d: Option<MultiIndex>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FridmanPair {
    domain: DomainSpec,
    model: DomainSpec,
    center: Point,
    #[serde(default)]
    family: Option<String>,
    /// Squeezing family used by the pullback family.
    #[serde(default)]
    squeeze_family: Option<String>,
}

/// Errors in user input; mapped to exit code 2.
fn config_err(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow!(ConfigErrorWrap(format!("{:#}", e.into())))
}

#[derive(Debug)]
struct ConfigErrorWrap(String);

impl std::fmt::Display for ConfigErrorWrap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigErrorWrap {}

fn weights_for(domain: &DomainSpec, d: Option<MultiIndex>) -> Result<MultiIndex> {
    d.or_else(|| domain.filled().canonical_dindex().cloned())
        .ok_or_else(|| config_err(anyhow!("no weights given and {} has no canonical weights", domain.label())))
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Run { config, out, seed, tol } => {
            let mut cfg = SuiteConfig::load(&config).map_err(config_err)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = tol {
                cfg.tol = t;
            }
            cfg.validate().map_err(config_err)?;
            let outcome = run_suite(&cfg);
            let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
            let paths = write_reports(&outcome, &cfg, &dir)?;
            emit(&csv_string(&outcome.results))?;
            eprintln!("reports written to {}", paths.csv.parent().unwrap_or(&dir).display());
            Ok(outcome.exit_code())
        }
        Cmd::Eval { what: EvalCmd::H { domain, d, z, tol } } => {
            let domain: DomainSpec = serde_json::from_str(&domain).map_err(config_err)?;
            let d = match d {
                Some(s) => MultiIndex::parse_csv(&s).map_err(config_err)?,
                None => weights_for(&domain, None)?,
            };
            let z: Point = serde_json::from_str(&z).map_err(config_err)?;
            let h = d_minkowski(&domain, &d, &z, tol)?;
            emit(&format!("{}\n", serde_json::json!({ "lo": h.lo, "hi": h.hi, "mid": h.mid() })))?;
            Ok(0)
        }
        Cmd::Squeeze { pair, family, budget, seed } => {
            let p: SqueezePair = serde_json::from_str(&pair).map_err(config_err)?;
            let family: MapFamily = family.parse().map_err(config_err)?;
            let d = weights_for(&p.target, p.d)?;
            let mut b = SearchBudget { seed, ..SearchBudget::default() };
            if let Some(n) = budget {
                if !(n >= 1.0 && n.is_finite()) {
                    return Err(config_err(anyhow!("budget must be a positive number")));
                }
                b.max_evals = n as usize;
            }
            let cert = certify_lower_bound(&p.source, &p.target, &d, &p.z, family, &b)?;
            emit(&format!("{}\n", cert.to_json()))?;
            Ok(0)
        }
        Cmd::Fridman { pair, seed } => {
            let p: FridmanPair = serde_json::from_str(&pair).map_err(config_err)?;
            let b = SearchBudget { seed, ..SearchBudget::default() };
            let family = match p.family.as_deref().unwrap_or("chart-scale") {
                "chart-scale" => FridmanFamily::ChartScale,
                "squeeze-pullback" => {
                    let sf: MapFamily = p.squeeze_family.as_deref().unwrap_or("auto").parse().map_err(config_err)?;
                    let d = weights_for(&p.model, None)?;
                    let sq = certify_lower_bound(&p.domain, &p.model, &d, &p.center, sf, &b)?;
                    FridmanFamily::SqueezePullback(Box::new(sq))
                }
                other => return Err(config_err(anyhow!("unknown Fridman family '{other}'"))),
            };
            let cert = fridman_lower_bound(&p.domain, &p.model, &p.center, &family, &b)?;
            emit(&format!("{}\n", cert.to_json()))?;
            Ok(0)
        }
        Cmd::Trace { disable } => {
            let disabled: Vec<CheckId> =
                disable.iter().map(|s| s.parse()).collect::<std::result::Result<_, _>>().map_err(config_err)?;
            let avail: Vec<CheckId> = CheckId::ALL.into_iter().filter(|c| !disabled.contains(c)).collect();
            emit(&render_markdown(&traceability_matrix(&avail)))?;
            Ok(0)
        }
    }
}

/// Writes to stdout; a reader that closed the pipe early is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("dsqlab: {e:#}");
            if e.downcast_ref::<ConfigErrorWrap>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
