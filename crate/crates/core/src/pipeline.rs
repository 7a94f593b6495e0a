//! End-to-end runs: ingestion → sampling → statistics → tail estimation,
//! rendered as CSV tables with a JSON metadata sidecar.
//!
//! Every report is assembled single-threaded in a fixed key order (order
//! type, then series or tail kind, then block), so identical inputs and
//! configuration give byte-identical files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::evt::{
    estimate_tail, CrossingRule, EtaRule, TailConfig, TailKind, TailOutcome, DEFAULT_CRIT,
    DEFAULT_MIN_TAIL_N,
};
use crate::sampler::{
    build_midquote_grid, compute_returns, to_bars, BarSeries, Calendar, MidquoteGrid, ReturnSeries,
    SamplerError, DEFAULT_BAR_INTERVAL_S, DEFAULT_BLOCK_HOURS, DEFAULT_GRID_INTERVAL_S,
    DEFAULT_PERIODS_PER_YEAR,
};
use crate::stats::{
    cross_block_correlation, summarize, BlockCorrelationMatrix, SeriesKind, StatsError,
    SummaryStats,
};
use crate::synth::{
    gen_seasonal_week_with, ticks_for_returns, BaseDist, SeasonProfile, SynthError, RNG_ALGORITHM,
    SYNTH_START_PRICE,
};
use crate::tickstore::{
    filter_filled, parse_tick_file_with, split_by_type, write_tick_file, OrderType, ParseOptions,
    TickError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Tick {
        path: PathBuf,
        #[source]
        source: TickError,
    },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

impl PipelineError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            PipelineError::Io { .. } => "io",
            PipelineError::Tick { .. } => "parse",
            PipelineError::Config(_) => "config",
            PipelineError::Sampler(_) => "sampler",
            PipelineError::Synth(_) => "synth",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthSettings {
    pub block_scale: Vec<f64>,
    pub base_dist: BaseDist,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            block_scale: vec![0.05; 8],
            base_dist: BaseDist::StudentT { nu: 3.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub order_types: Vec<OrderType>,
    pub grid_interval_s: u64,
    pub bar_interval_s: u64,
    pub block_hours: u64,
    pub periods_per_year: f64,
    pub eta: EtaRule,
    pub min_tail_n: usize,
    pub crit: f64,
    pub m_star_rule: CrossingRule,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub skip_bad_rows: bool,
    pub synth: SynthSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            order_types: OrderType::ALL.to_vec(),
            grid_interval_s: DEFAULT_GRID_INTERVAL_S,
            bar_interval_s: DEFAULT_BAR_INTERVAL_S,
            block_hours: DEFAULT_BLOCK_HOURS,
            periods_per_year: DEFAULT_PERIODS_PER_YEAR,
            eta: EtaRule::HalfSample,
            min_tail_n: DEFAULT_MIN_TAIL_N,
            crit: DEFAULT_CRIT,
            m_star_rule: CrossingRule::Last,
            out_dir: PathBuf::from("out"),
            seed: 0,
            skip_bad_rows: false,
            synth: SynthSettings::default(),
        }
    }
}

impl RunConfig {
    /// Checks invariants and returns the calendar the run uses.
    pub fn calendar(&self) -> Result<Calendar, PipelineError> {
        if self.grid_interval_s == 0 {
            return Err(PipelineError::Config(
                "grid interval must be positive".into(),
            ));
        }
        if !self.bar_interval_s.is_multiple_of(self.grid_interval_s) {
            return Err(PipelineError::Config(format!(
                "bar interval {}s is not a multiple of grid interval {}s",
                self.bar_interval_s, self.grid_interval_s
            )));
        }
        if !(self.crit > 0.0 && self.crit.is_finite()) {
            return Err(PipelineError::Config(format!(
                "critical value must be positive, got {}",
                self.crit
            )));
        }
        if !(self.periods_per_year > 0.0 && self.periods_per_year.is_finite()) {
            return Err(PipelineError::Config(format!(
                "periods per year must be positive, got {}",
                self.periods_per_year
            )));
        }
        if self.order_types.is_empty() {
            return Err(PipelineError::Config("no order types selected".into()));
        }
        Calendar::new(self.block_hours, self.bar_interval_s)
            .map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn tail_config(&self) -> TailConfig {
        TailConfig {
            eta: self.eta,
            min_tail_n: self.min_tail_n,
            crit: self.crit,
            crossing: self.m_star_rule,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputSummary {
    pub path: PathBuf,
    pub rows: usize,
    pub skipped_rows: Vec<String>,
}

/// Sampled data for one order type.
#[derive(Debug, Clone)]
pub struct OrderData {
    pub order_type: OrderType,
    pub filled_events: usize,
    pub grid: MidquoteGrid,
    pub bars: BarSeries,
    /// `None` when fewer than two bars exist.
    pub returns: Option<ReturnSeries>,
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub calendar: Calendar,
    pub inputs: Vec<InputSummary>,
    pub orders: Vec<OrderData>,
}

/// Parses every input, keeps filled orders and samples each requested
/// order type.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared, PipelineError> {
    let calendar = cfg.calendar()?;
    let mut events = Vec::new();
    let mut inputs = Vec::new();
    for path in &cfg.inputs {
        let file = File::open(path).map_err(io_err(path))?;
        let parsed = parse_tick_file_with(
            std::io::BufReader::new(file),
            ParseOptions {
                skip_bad_rows: cfg.skip_bad_rows,
            },
        )
        .map_err(|source| PipelineError::Tick {
            path: path.clone(),
            source,
        })?;
        inputs.push(InputSummary {
            path: path.clone(),
            rows: parsed.ticks.len() + parsed.skipped.len(),
            skipped_rows: parsed.skipped.iter().map(ToString::to_string).collect(),
        });
        events.extend(parsed.into_events());
    }
    let filled = filter_filled(&events);
    let (limit, market) = split_by_type(&filled);

    let mut orders = Vec::new();
    for ot in OrderType::ALL {
        if !cfg.order_types.contains(&ot) {
            continue;
        }
        let stream = match ot {
            OrderType::Limit => &limit,
            OrderType::Market => &market,
        };
        let grid = build_midquote_grid(stream, &calendar, cfg.grid_interval_s)?;
        let bars = to_bars(&grid, &calendar)?;
        let returns = match compute_returns(&bars) {
            Ok(r) => Some(r),
            Err(SamplerError::InsufficientData(_)) => None,
            Err(e) => return Err(e.into()),
        };
        orders.push(OrderData {
            order_type: ot,
            filled_events: stream.len(),
            grid,
            bars,
            returns,
        });
    }
    Ok(Prepared {
        calendar,
        inputs,
        orders,
    })
}

fn fmt_f(x: f64) -> String {
    format!("{x:.10}")
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), PipelineError> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(io_err(&path))?;
    Ok((path, BufWriter::new(f)))
}

/// Status of one block-summary cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SummaryCell {
    Ok(SummaryStats),
    Missing,
    Insufficient { n: usize },
    Degenerate { n: usize },
}

impl SummaryCell {
    pub fn stats(&self) -> Option<&SummaryStats> {
        match self {
            SummaryCell::Ok(s) => Some(s),
            _ => None,
        }
    }

    fn status(&self) -> &'static str {
        match self {
            SummaryCell::Ok(_) => "ok",
            SummaryCell::Missing => "missing",
            SummaryCell::Insufficient { .. } => "insufficient",
            SummaryCell::Degenerate { .. } => "degenerate",
        }
    }
}

/// Block summary: rows are (series kind, block); one column group per order type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub order_types: Vec<OrderType>,
    pub block_names: Vec<String>,
    /// `cells[series][block][order]`, series in [`SeriesKind::ALL`] order.
    pub cells: Vec<Vec<Vec<SummaryCell>>>,
}

impl SummaryReport {
    pub fn cell(&self, kind: SeriesKind, block: usize, ot: OrderType) -> Option<&SummaryCell> {
        let s = SeriesKind::ALL.iter().position(|&k| k == kind)?;
        let o = self.order_types.iter().position(|&t| t == ot)?;
        Some(&self.cells[s][block][o])
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["series".to_string(), "block".to_string()];
        for ot in &self.order_types {
            for col in [
                "n",
                "mean_ann_pct",
                "sd_ann_pct",
                "skew",
                "kurt",
                "ks",
                "ks_sig5",
                "status",
            ] {
                header.push(format!("{ot}_{col}"));
            }
        }
        w.write_record(&header)?;
        for (s, kind) in SeriesKind::ALL.iter().enumerate() {
            for (b, name) in self.block_names.iter().enumerate() {
                let mut row = vec![kind.as_str().to_string(), name.clone()];
                for cell in &self.cells[s][b] {
                    let n = match cell {
                        SummaryCell::Ok(st) => st.n,
                        SummaryCell::Missing => 0,
                        SummaryCell::Insufficient { n } | SummaryCell::Degenerate { n } => *n,
                    };
                    row.push(n.to_string());
                    match cell.stats() {
                        Some(st) => {
                            row.extend([
                                fmt_f(st.mean_ann_pct),
                                fmt_f(st.sd_ann_pct),
                                fmt_f(st.skewness),
                                fmt_f(st.kurtosis),
                            ]);
                            match st.ks {
                                Some(ks) => {
                                    row.push(fmt_f(ks.stat));
                                    row.push(u8::from(ks.significant_5pct).to_string());
                                }
                                None => row.extend([String::new(), String::new()]),
                            }
                        }
                        None => row.extend(std::iter::repeat_n(String::new(), 6)),
                    }
                    row.push(cell.status().to_string());
                }
                w.write_record(&row)?;
            }
        }
        w.flush()
    }
}

pub fn summary_report(prep: &Prepared, periods_per_year: f64) -> SummaryReport {
    let cal = &prep.calendar;
    let n_blocks = cal.blocks_per_day();
    let cells = SeriesKind::ALL
        .iter()
        .map(|&kind| {
            (0..n_blocks)
                .map(|b| {
                    prep.orders
                        .iter()
                        .map(|od| {
                            let Some(rs) = &od.returns else {
                                return SummaryCell::Missing;
                            };
                            let xs: Vec<f64> = rs
                                .in_block(b as u32)
                                .map(|v| match kind {
                                    SeriesKind::Returns => v.r,
                                    SeriesKind::Volatility => v.abs_r,
                                })
                                .collect();
                            if xs.is_empty() {
                                return SummaryCell::Missing;
                            }
                            match summarize(&xs, periods_per_year) {
                                Ok(s) => SummaryCell::Ok(s),
                                Err(StatsError::InsufficientData { n, .. }) => {
                                    SummaryCell::Insufficient { n }
                                }
                                Err(StatsError::Degenerate) => {
                                    SummaryCell::Degenerate { n: xs.len() }
                                }
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    SummaryReport {
        order_types: prep.orders.iter().map(|o| o.order_type).collect(),
        block_names: (0..n_blocks).map(|b| cal.block_name(b)).collect(),
        cells,
    }
}

/// Block correlations: one lower-triangular matrix per (series kind, order type).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub block_names: Vec<String>,
    pub matrices: Vec<BlockCorrelationMatrix>,
}

impl CorrelationReport {
    pub fn matrix(&self, kind: SeriesKind, ot: OrderType) -> Option<&BlockCorrelationMatrix> {
        self.matrices
            .iter()
            .find(|m| m.series_kind == kind && m.order_type == ot)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["series".to_string(), "order_type".into(), "block".into()];
        header.extend(self.block_names.iter().cloned());
        w.write_record(&header)?;
        for m in &self.matrices {
            for (a, name) in self.block_names.iter().enumerate() {
                let mut row = vec![
                    m.series_kind.as_str().to_string(),
                    m.order_type.to_string(),
                    name.clone(),
                ];
                for b in 0..self.block_names.len() {
                    row.push(if b > a {
                        String::new()
                    } else {
                        m.get(a, b).map(fmt_f).unwrap_or_else(|| "NA".into())
                    });
                }
                w.write_record(&row)?;
            }
        }
        w.flush()
    }
}

pub fn correlation_report(prep: &Prepared) -> CorrelationReport {
    let n_blocks = prep.calendar.blocks_per_day();
    let mut matrices = Vec::new();
    for kind in SeriesKind::ALL {
        for od in &prep.orders {
            let empty = ReturnSeries {
                order_type: od.order_type,
                values: Vec::new(),
            };
            let rs = od.returns.as_ref().unwrap_or(&empty);
            matrices.push(cross_block_correlation(rs, kind, n_blocks));
        }
    }
    CorrelationReport {
        block_names: (0..n_blocks).map(|b| prep.calendar.block_name(b)).collect(),
        matrices,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TailCell {
    Outcome(TailOutcome),
    Failed { message: String },
}

/// Tail estimates: rows are (tail kind, block); one column group per order type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub order_types: Vec<OrderType>,
    pub block_names: Vec<String>,
    /// `cells[tail][block][order]`, tails in [`TailKind::ALL`] order.
    pub cells: Vec<Vec<Vec<TailCell>>>,
    pub warnings: Vec<String>,
}

impl TailReport {
    pub fn cell(&self, kind: TailKind, block: usize, ot: OrderType) -> Option<&TailCell> {
        let k = TailKind::ALL.iter().position(|&t| t == kind)?;
        let o = self.order_types.iter().position(|&t| t == ot)?;
        Some(&self.cells[k][block][o])
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["tail".to_string(), "block".to_string()];
        for ot in &self.order_types {
            for col in [
                "alpha",
                "se_alpha",
                "t0",
                "t2",
                "t4",
                "m_star",
                "n",
                "excluded",
                "heavy_tails",
                "finite_var",
                "finite_4th",
                "note",
            ] {
                header.push(format!("{ot}_{col}"));
            }
        }
        w.write_record(&header)?;
        for (k, kind) in TailKind::ALL.iter().enumerate() {
            for (b, name) in self.block_names.iter().enumerate() {
                let mut row = vec![kind.as_str().to_string(), name.clone()];
                for cell in &self.cells[k][b] {
                    match cell {
                        TailCell::Outcome(TailOutcome::Estimated(e)) => {
                            row.extend([
                                fmt_f(e.alpha),
                                fmt_f(e.se_alpha),
                                fmt_f(e.tests.t0),
                                fmt_f(e.tests.t2),
                                fmt_f(e.tests.t4),
                                fmt_f(e.m_star),
                                e.n.to_string(),
                                "0".into(),
                                u8::from(e.tests.heavy_tails).to_string(),
                                u8::from(e.tests.finite_variance).to_string(),
                                u8::from(e.tests.finite_fourth_moment).to_string(),
                                if e.no_crossing {
                                    "no_crossing".into()
                                } else {
                                    String::new()
                                },
                            ]);
                        }
                        TailCell::Outcome(TailOutcome::Excluded { n, .. }) => {
                            row.extend(std::iter::repeat_n(String::new(), 6));
                            row.extend([n.to_string(), "1".into()]);
                            row.extend(std::iter::repeat_n(String::new(), 3));
                            row.push(if *n == 0 { "no_data" } else { "thin_trading" }.into());
                        }
                        TailCell::Failed { message } => {
                            row.extend(std::iter::repeat_n(String::new(), 6));
                            row.extend([String::new(), "1".into()]);
                            row.extend(std::iter::repeat_n(String::new(), 3));
                            row.push(format!("error: {message}"));
                        }
                    }
                }
                w.write_record(&row)?;
            }
        }
        w.flush()
    }

    /// Long-format `block,order_type,kind,alpha` rows; excluded cells have
    /// an empty alpha.
    pub fn write_plot_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["block", "order_type", "kind", "alpha"])?;
        for (o, ot) in self.order_types.iter().enumerate() {
            for (k, kind) in TailKind::ALL.iter().enumerate() {
                for (b, name) in self.block_names.iter().enumerate() {
                    let alpha = match &self.cells[k][b][o] {
                        TailCell::Outcome(TailOutcome::Estimated(e)) => fmt_f(e.alpha),
                        _ => String::new(),
                    };
                    w.write_record([name.as_str(), ot.as_str(), kind.as_str(), &alpha])?;
                }
            }
        }
        w.flush()
    }
}

pub fn tail_report(prep: &Prepared, cfg: &TailConfig) -> TailReport {
    let cal = &prep.calendar;
    let n_blocks = cal.blocks_per_day();
    let mut warnings = Vec::new();
    let mut cells = Vec::new();
    for kind in TailKind::ALL {
        let mut rows = Vec::new();
        for b in 0..n_blocks {
            let mut row = Vec::new();
            for od in &prep.orders {
                let empty = ReturnSeries {
                    order_type: od.order_type,
                    values: Vec::new(),
                };
                let rs = od.returns.as_ref().unwrap_or(&empty);
                let where_ = format!(
                    "{} {} tail, block {}",
                    od.order_type,
                    kind,
                    cal.block_name(b)
                );
                let cell = match estimate_tail(rs, b as u32, kind, cfg) {
                    Ok(out) => {
                        match &out {
                            TailOutcome::Excluded { n, min_n } => warnings.push(format!(
                                "{where_}: excluded, {n} tail observations below minimum {min_n} (lack of trading activity)"
                            )),
                            TailOutcome::Estimated(e) if e.no_crossing => warnings.push(format!(
                                "{where_}: Hill curve never reaches the intercept; m* set to eta = {}",
                                e.eta
                            )),
                            _ => {}
                        }
                        TailCell::Outcome(out)
                    }
                    Err(e) => {
                        warnings.push(format!("{where_}: estimation failed: {e}"));
                        TailCell::Failed {
                            message: match e {
                                crate::evt::EvtError::Cell { source, .. } => source.to_string(),
                                other => other.to_string(),
                            },
                        }
                    }
                };
                row.push(cell);
            }
            rows.push(row);
        }
        cells.push(rows);
    }
    TailReport {
        order_types: prep.orders.iter().map(|o| o.order_type).collect(),
        block_names: (0..n_blocks).map(|b| cal.block_name(b)).collect(),
        cells,
        warnings,
    }
}

/// Writes the long-format return and volatility series
/// (`timestamp,order_type,series,value`, timestamp = slot start in cs).
pub fn write_series_plot<W: Write>(prep: &Prepared, writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "order_type", "series", "value"])?;
    for od in &prep.orders {
        let Some(rs) = &od.returns else { continue };
        for (series, pick) in [("return", false), ("volatility", true)] {
            for v in &rs.values {
                let t = prep.calendar.slot_start(v.label);
                let x = if pick { v.abs_r } else { v.r };
                w.write_record([
                    t.to_string(),
                    od.order_type.to_string(),
                    series.into(),
                    x.to_string(),
                ])?;
            }
        }
    }
    w.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Summary,
    Corr,
    Tails,
    Synth,
    All,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Summary => "summary",
            Command::Corr => "corr",
            Command::Tails => "tails",
            Command::Synth => "synth",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub annualization_factor: f64,
    pub annualization_note: &'static str,
    pub moments: &'static str,
    pub kurtosis: &'static str,
    pub ks_test: &'static str,
    pub pairing_rule: &'static str,
    pub wls_weights: &'static str,
    pub eta_rule: String,
    pub m_star_rule: &'static str,
    pub min_tail_n: usize,
    pub critical_value: f64,
    pub quote_sides: &'static str,
    pub missing_quotes: &'static str,
    pub tail_pooling: &'static str,
}

impl Conventions {
    pub fn for_config(cfg: &RunConfig) -> Self {
        Self {
            annualization_factor: cfg.periods_per_year,
            annualization_note: "mean x periods_per_year, sd x sqrt(periods_per_year); default 252 days x 288 five-minute periods, not taken from the source data",
            moments: "central sample moments with n denominator",
            kurtosis: "raw m4/m2^2 (Gaussian = 3)",
            ks_test: "sup |F_n - Phi((x - mean)/sd)| with estimated parameters; significant when > 1.36/sqrt(n)",
            pairing_rule: "blocks paired by (day, slot within block); cells with < 2 pairs or a constant side are NA",
            wls_weights: "sqrt(m), m = 1..eta",
            eta_rule: cfg.eta.to_string(),
            m_star_rule: match cfg.m_star_rule {
                CrossingRule::First => "smallest linearly interpolated crossing of the Hill curve with the intercept; eta if none",
                CrossingRule::Last => "largest linearly interpolated crossing of the Hill curve with the intercept; eta if none",
            },
            min_tail_n: cfg.min_tail_n,
            critical_value: cfg.crit,
            quote_sides: "limit_buy and market_sell set the bid; limit_sell and market_buy set the ask",
            missing_quotes: "quote state carried forward across empty intervals; a crossing quote invalidates the stale opposite side",
            tail_pooling: "all days of a block pooled",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub config: RunConfig,
    pub conventions: Conventions,
    pub inputs: Vec<InputSummary>,
    pub filled_events: Vec<(OrderType, usize)>,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthMetadata>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthMetadata {
    pub rng: &'static str,
    pub profile: SeasonProfile,
    pub start_price: f64,
    pub note: &'static str,
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metadata: RunMetadata,
    pub summary: Option<SummaryReport>,
    pub correlation: Option<CorrelationReport>,
    pub tails: Option<TailReport>,
}

fn ensure_dir(dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_with(
    dir: &Path,
    name: &str,
    outputs: &mut Vec<String>,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), PipelineError> {
    let (path, mut w) = create(dir, name)?;
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(&path))?;
    outputs.push(name.to_string());
    Ok(())
}

fn write_metadata(dir: &Path, meta: &RunMetadata) -> Result<(), PipelineError> {
    let name = format!("{}.metadata.json", meta.command.as_str());
    let (path, mut w) = create(dir, &name)?;
    serde_json::to_writer_pretty(&mut w, meta)
        .map_err(std::io::Error::from)
        .and_then(|_| writeln!(w))
        .and_then(|_| w.flush())
        .map_err(io_err(&path))
}

/// Runs an analysis command (`summary`, `corr`, `tails` or `all`), writing
/// its files into `cfg.out_dir`.
pub fn run(command: Command, cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    if command == Command::Synth {
        return run_synth(cfg);
    }
    let prep = prepare(cfg)?;
    let dir = &cfg.out_dir;
    ensure_dir(dir)?;
    let mut outputs = Vec::new();
    let mut warnings: Vec<String> = prep
        .inputs
        .iter()
        .filter(|i| !i.skipped_rows.is_empty())
        .map(|i| {
            format!(
                "{}: skipped {} bad rows",
                i.path.display(),
                i.skipped_rows.len()
            )
        })
        .collect();

    for od in &prep.orders {
        write_with(
            dir,
            &format!("midquotes_{}.csv", od.order_type),
            &mut outputs,
            |w| od.grid.write_csv(w),
        )?;
        write_with(
            dir,
            &format!("bars_{}.csv", od.order_type),
            &mut outputs,
            |w| od.bars.write_csv(w),
        )?;
        let empty = ReturnSeries {
            order_type: od.order_type,
            values: Vec::new(),
        };
        write_with(
            dir,
            &format!("returns_{}.csv", od.order_type),
            &mut outputs,
            |w| od.returns.as_ref().unwrap_or(&empty).write_csv(w),
        )?;
        if od.returns.is_none() {
            warnings.push(format!(
                "{}: fewer than two bars, no returns",
                od.order_type
            ));
        }
    }

    let wants = |c: Command| command == c || command == Command::All;
    let mut out = RunOutput {
        metadata: RunMetadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: cfg.clone(),
            conventions: Conventions::for_config(cfg),
            inputs: prep.inputs.clone(),
            filled_events: prep
                .orders
                .iter()
                .map(|o| (o.order_type, o.filled_events))
                .collect(),
            outputs: Vec::new(),
            warnings: Vec::new(),
            synth: None,
        },
        summary: None,
        correlation: None,
        tails: None,
    };

    if wants(Command::Summary) {
        let rep = summary_report(&prep, cfg.periods_per_year);
        write_with(dir, "block_summary.csv", &mut outputs, |w| {
            rep.write_csv(w)
        })?;
        write_with(dir, "series_plot.csv", &mut outputs, |w| {
            write_series_plot(&prep, w)
        })?;
        out.summary = Some(rep);
    }
    if wants(Command::Corr) {
        let rep = correlation_report(&prep);
        write_with(dir, "block_correlation.csv", &mut outputs, |w| {
            rep.write_csv(w)
        })?;
        out.correlation = Some(rep);
    }
    if wants(Command::Tails) {
        let rep = tail_report(&prep, &cfg.tail_config());
        write_with(dir, "tail_estimates.csv", &mut outputs, |w| rep.write_csv(w))?;
        write_with(dir, "tail_plot.csv", &mut outputs, |w| {
            rep.write_plot_csv(w)
        })?;
        warnings.extend(rep.warnings.iter().cloned());
        out.tails = Some(rep);
    }

    out.metadata.outputs = outputs;
    out.metadata.warnings = warnings;
    write_metadata(dir, &out.metadata)?;
    Ok(out)
}

pub fn run_summary(cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    run(Command::Summary, cfg)
}

pub fn run_corr(cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    run(Command::Corr, cfg)
}

pub fn run_tails(cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    run(Command::Tails, cfg)
}

pub fn run_all(cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    run(Command::All, cfg)
}

/// Generates a synthetic week: `synth_returns.csv` in the return-series
/// schema and `synth_ticks.csv` in the tick schema.
pub fn run_synth(cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    let calendar = cfg.calendar()?;
    let profile = SeasonProfile {
        block_scale: cfg.synth.block_scale.clone(),
        base_dist: cfg.synth.base_dist,
        seed: cfg.seed,
    };
    profile
        .validate(&calendar)
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let series = gen_seasonal_week_with(&profile, &calendar, OrderType::Limit)?;
    let ticks = ticks_for_returns(&series, &calendar, cfg.grid_interval_s, SYNTH_START_PRICE)?;

    let dir = &cfg.out_dir;
    ensure_dir(dir)?;
    let mut outputs = Vec::new();
    write_with(dir, "synth_returns.csv", &mut outputs, |w| {
        series.write_csv(w)
    })?;
    write_with(dir, "synth_ticks.csv", &mut outputs, |w| {
        write_tick_file(w, &ticks)
    })?;

    let metadata = RunMetadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: Command::Synth,
        config: cfg.clone(),
        conventions: Conventions::for_config(cfg),
        inputs: Vec::new(),
        filled_events: vec![(OrderType::Limit, ticks.len())],
        outputs,
        warnings: Vec::new(),
        synth: Some(SynthMetadata {
            rng: RNG_ALGORITHM,
            profile,
            start_price: SYNTH_START_PRICE,
            note:
                "ticks encode returns 2..N; the first return has no preceding price inside the week",
        }),
    };
    write_metadata(dir, &metadata)?;
    Ok(RunOutput {
        metadata,
        summary: None,
        correlation: None,
        tails: None,
    })
}
