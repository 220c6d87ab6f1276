//! `jnseq`: batch verification harness around the measure-sequence crate.
//!
//! Four subcommands write CSV (or field-identical JSON) tables: worst-case
//! rectangle decay, the Bernoulli tail-bound grid, per-rectangle bound
//! reports from a spec file, and push-forward convergence tables. Output
//! is byte-identical for identical (config, seed); the exit status is
//! nonzero iff some asserted inequality reported false.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand};

use jn_core::numerics::{rat, DEFAULT_DECIMAL_DIGITS};
use jn_core::optimizer::MethodChoice;
use jn_core::transfer::{ModelSpace, TestFunction};

use config::{parse_eps_list, parse_range, FileConfig};
use output::Format;

#[derive(Parser)]
#[command(
    name = "jnseq",
    version,
    about = "Exact verification harness for a weak*-null sequence of finitely supported measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// Config file with `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Significant digits in decimal columns.
    #[arg(long)]
    precision: Option<usize>,
    /// Base seed shifted into every random draw.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact worst-case rectangle values W(n) over a level range.
    MuTable {
        #[command(flatten)]
        common: Common,
        /// Levels, as `a..b` (inclusive) or a single level.
        #[arg(long)]
        n_range: Option<String>,
        /// auto, oracle, reduction, or closed-form.
        #[arg(long)]
        method: Option<String>,
    },
    /// Check the Bernoulli tail bound over an (m, eps) grid.
    CheckBollobas {
        #[command(flatten)]
        common: Common,
        /// Comma-separated exact rationals, e.g. `1/12,1/16`.
        #[arg(long)]
        eps: Option<String>,
        /// Coordinate counts m, as `a..b`; defaults to the canonical grid.
        #[arg(long)]
        n_range: Option<String>,
    },
    /// Evaluate rectangle specs with every per-rectangle bound.
    RectangleEval {
        #[command(flatten)]
        common: Common,
        /// JSON file holding one rectangle spec or an array of them.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        n_range: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        /// Replications of each random spec (seeds shift per sample).
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Push-forward convergence tables on model spaces.
    TransferDemo {
        #[command(flatten)]
        common: Common,
        /// omega-plus-one, unit-interval, or cantor-dyadic.
        #[arg(long)]
        model_k: Option<String>,
        #[arg(long)]
        model_l: Option<String>,
        /// A test-function name, or `all`.
        #[arg(long)]
        function: Option<String>,
        #[arg(long)]
        n_max: Option<u32>,
    },
}

struct Resolved {
    out: Option<PathBuf>,
    format: Format,
    precision: usize,
    seed: u64,
    cfg: FileConfig,
}

fn resolve_common(common: &Common) -> Result<Resolved> {
    let cfg = FileConfig::load(common.config.as_deref())?;
    let out = cfg.pick(common.out.clone(), "out", |s| Ok(PathBuf::from(s)))?;
    let format = cfg
        .pick(
            common.format.as_deref().map(str::parse).transpose()?,
            "format",
            |s| s.parse(),
        )?
        .unwrap_or(Format::Csv);
    let precision = cfg
        .pick(common.precision, "precision", |s| Ok(s.parse()?))?
        .unwrap_or(DEFAULT_DECIMAL_DIGITS)
        .max(1);
    let seed = cfg.pick(common.seed, "seed", |s| Ok(s.parse()?))?.unwrap_or(0);
    Ok(Resolved { out, format, precision, seed, cfg })
}

fn parse_method(text: &str) -> Result<MethodChoice> {
    match text {
        "auto" => Ok(MethodChoice::Auto),
        "oracle" => Ok(MethodChoice::Oracle),
        "reduction" => Ok(MethodChoice::Reduction),
        "closed-form" => Ok(MethodChoice::ClosedForm),
        other => bail!("unknown method `{other}` (auto, oracle, reduction, closed-form)"),
    }
}

fn parse_functions(text: &str) -> Result<Vec<TestFunction>> {
    if text == "all" {
        return Ok(TestFunction::ALL.to_vec());
    }
    text.split(',')
        .map(|name| name.trim().parse::<TestFunction>().map_err(|e| anyhow!(e)))
        .collect()
}

fn levels(range: (u64, u64)) -> Vec<u64> {
    if range.0 > range.1 {
        Vec::new()
    } else {
        (range.0..=range.1).collect()
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Cmd::MuTable { common, n_range, method } => {
            let r = resolve_common(&common)?;
            let range = r
                .cfg
                .pick(n_range.as_deref().map(parse_range).transpose()?, "n-range", parse_range)?
                .ok_or_else(|| anyhow!("mu-table needs --n-range (or `n-range` in the config)"))?;
            let method = r
                .cfg
                .pick(method.as_deref().map(parse_method).transpose()?, "method", parse_method)?
                .unwrap_or(MethodChoice::Auto);
            let (rows, ok) = commands::cmd_mu_table(&levels(range), method, r.precision);
            output::emit(&output::render(&rows, r.format, commands::MU_HEADERS)?, r.out.as_deref())?;
            Ok(ok)
        }
        Cmd::CheckBollobas { common, eps, n_range } => {
            let r = resolve_common(&common)?;
            let eps_list = r
                .cfg
                .pick(eps.as_deref().map(parse_eps_list).transpose()?, "eps", parse_eps_list)?
                .unwrap_or_else(|| vec![rat(1, 12), rat(1, 16), rat(1, 24), rat(1, 48)]);
            let m_range =
                r.cfg.pick(n_range.as_deref().map(parse_range).transpose()?, "n-range", parse_range)?;
            let (rows, ok) = commands::cmd_check_bollobas(&eps_list, m_range, r.precision)?;
            output::emit(
                &output::render(&rows, r.format, commands::BOLLOBAS_HEADERS)?,
                r.out.as_deref(),
            )?;
            Ok(ok)
        }
        Cmd::RectangleEval { common, spec, n_range, eps, samples } => {
            let r = resolve_common(&common)?;
            let spec_path = r
                .cfg
                .pick(spec, "spec", |s| Ok(PathBuf::from(s)))?
                .ok_or_else(|| anyhow!("rectangle-eval needs --spec FILE"))?;
            let specs = commands::load_specs(&spec_path)?;
            let range = r
                .cfg
                .pick(n_range.as_deref().map(parse_range).transpose()?, "n-range", parse_range)?
                .ok_or_else(|| anyhow!("rectangle-eval needs --n-range"))?;
            let eps_list = r
                .cfg
                .pick(eps.as_deref().map(parse_eps_list).transpose()?, "eps", parse_eps_list)?
                .unwrap_or_else(|| vec![rat(1, 12)]);
            let samples = r.cfg.pick(samples, "samples", |s| Ok(s.parse()?))?.unwrap_or(1);
            let (rows, ok) = commands::cmd_rectangle_eval(
                &specs,
                &levels(range),
                &eps_list,
                samples,
                r.seed,
                r.precision,
            )?;
            output::emit(&output::render(&rows, r.format, commands::RECT_HEADERS)?, r.out.as_deref())?;
            Ok(ok)
        }
        Cmd::TransferDemo { common, model_k, model_l, function, n_max } => {
            let r = resolve_common(&common)?;
            let parse_model = |s: &str| s.parse::<ModelSpace>().map_err(|e| anyhow!(e));
            let k = r
                .cfg
                .pick(model_k.as_deref().map(parse_model).transpose()?, "model-k", parse_model)?
                .unwrap_or(ModelSpace::OmegaPlusOne);
            let l = r
                .cfg
                .pick(model_l.as_deref().map(parse_model).transpose()?, "model-l", parse_model)?
                .unwrap_or(ModelSpace::OmegaPlusOne);
            let functions = r
                .cfg
                .pick(function.as_deref().map(parse_functions).transpose()?, "function", parse_functions)?
                .unwrap_or_else(|| TestFunction::ALL.to_vec());
            let n_max = r.cfg.pick(n_max, "n-max", |s| Ok(s.parse()?))?.unwrap_or(10);
            let (rows, ok) = commands::cmd_transfer_demo(k, l, &functions, n_max, r.precision);
            output::emit(&output::render(&rows, r.format, commands::DEMO_HEADERS)?, r.out.as_deref())?;
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("jnseq: an asserted inequality reported false");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("jnseq: error: {e:#}");
            ExitCode::from(2)
        }
    }
}
