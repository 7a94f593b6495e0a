use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fxseason::evt::{CrossingRule, EtaRule};
use fxseason::pipeline::{self, Command, PipelineError, RunConfig, SynthSettings};
use fxseason::synth::BaseDist;
use fxseason::tickstore::OrderType;

/// Intraday seasonality and tail-index reports for FX order transactions.
///
/// Every flag can also be set through an `FXSEASON_*` environment variable.
#[derive(Parser, Debug)]
#[command(name = "fxseason", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Block-wise summary statistics and return/volatility plot series.
    Summary(Common),
    /// Cross-block correlation matrices.
    Corr(Common),
    /// Tail-index estimates, moment tests and tail plot data.
    Tails(Common),
    /// Generate a synthetic week of returns and ticks.
    Synth(SynthArgs),
    /// Every report.
    All(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Tick CSV files, concatenated in order.
    #[arg(env = "FXSEASON_INPUTS", value_delimiter = ',')]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Per-block volatility multipliers, comma separated.
    #[arg(long, env = "FXSEASON_BLOCK_SCALE", value_delimiter = ',',
          default_values_t = vec![0.05; 8])]
    block_scale: Vec<f64>,
    /// Base law: `student_t:NU`, `pareto:ALPHA[:SCALE]` or `gaussian[:MU:SIGMA]`.
    #[arg(long, env = "FXSEASON_DIST", default_value = "student_t:3")]
    dist: BaseDist,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug)]
struct Opts {
    /// Order types to analyse.
    #[arg(long, env = "FXSEASON_ORDER_TYPES", value_delimiter = ',',
          default_values_t = vec![OrderType::Limit, OrderType::Market])]
    order_types: Vec<OrderType>,
    #[arg(long, env = "FXSEASON_GRID_INTERVAL_S", default_value_t = 20)]
    grid_interval_s: u64,
    #[arg(long, env = "FXSEASON_BAR_INTERVAL_S", default_value_t = 300)]
    bar_interval_s: u64,
    #[arg(long, env = "FXSEASON_BLOCK_HOURS", default_value_t = 3)]
    block_hours: u64,
    #[arg(long, env = "FXSEASON_PERIODS_PER_YEAR", default_value_t = 72_576.0)]
    periods_per_year: f64,
    /// Hill thresholds in the weighted fit; default floor(n/2).
    #[arg(long, env = "FXSEASON_ETA")]
    eta: Option<usize>,
    #[arg(long, env = "FXSEASON_MIN_TAIL_N", default_value_t = 20)]
    min_tail_n: usize,
    #[arg(long, env = "FXSEASON_CRIT", default_value_t = 1.64)]
    crit: f64,
    /// Which Hill-curve crossing sets m*: `first` or `last`.
    #[arg(long, env = "FXSEASON_M_STAR_RULE", default_value = "last")]
    m_star_rule: CrossingRule,
    #[arg(long, env = "FXSEASON_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "FXSEASON_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,
    /// Count and skip invalid tick rows instead of aborting.
    #[arg(long, env = "FXSEASON_SKIP_BAD_ROWS")]
    skip_bad_rows: bool,
}

impl Opts {
    fn into_config(self, inputs: Vec<PathBuf>, synth: SynthSettings) -> RunConfig {
        RunConfig {
            inputs,
            order_types: self.order_types,
            grid_interval_s: self.grid_interval_s,
            bar_interval_s: self.bar_interval_s,
            block_hours: self.block_hours,
            periods_per_year: self.periods_per_year,
            eta: self.eta.map_or(EtaRule::HalfSample, EtaRule::Fixed),
            min_tail_n: self.min_tail_n,
            crit: self.crit,
            m_star_rule: self.m_star_rule,
            out_dir: self.out_dir,
            seed: self.seed,
            skip_bad_rows: self.skip_bad_rows,
            synth,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, cfg) = match cli.command {
        Cmd::Summary(c) => (
            Command::Summary,
            c.opts.into_config(c.inputs, Default::default()),
        ),
        Cmd::Corr(c) => (
            Command::Corr,
            c.opts.into_config(c.inputs, Default::default()),
        ),
        Cmd::Tails(c) => (
            Command::Tails,
            c.opts.into_config(c.inputs, Default::default()),
        ),
        Cmd::All(c) => (
            Command::All,
            c.opts.into_config(c.inputs, Default::default()),
        ),
        Cmd::Synth(s) => (
            Command::Synth,
            s.opts.into_config(
                Vec::new(),
                SynthSettings {
                    block_scale: s.block_scale,
                    base_dist: s.dist,
                },
            ),
        ),
    };

    match pipeline::run(command, &cfg) {
        Ok(out) => {
            for w in &out.metadata.warnings {
                eprintln!("warning: {w}");
            }
            for f in &out.metadata.outputs {
                println!("{}", cfg.out_dir.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let summary = serde_json::json!({
                "status": "error",
                "command": command.as_str(),
                "kind": e.kind(),
                "message": e.to_string(),
            });
            eprintln!("{summary}");
            match e {
                PipelineError::Config(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
