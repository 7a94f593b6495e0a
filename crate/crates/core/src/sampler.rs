//! Calendar-time resampling: the midquote grid, bars, returns and the
//! (day, block, slot) labelling used by every downstream table.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::tickstore::{Centis, OrderKind, OrderType, OrderTypeStream};

pub const SECONDS_PER_DAY: u64 = 86_400;
pub const DAYS_PER_WEEK: u64 = 5;
pub const DEFAULT_GRID_INTERVAL_S: u64 = 20;
pub const DEFAULT_BAR_INTERVAL_S: u64 = 300;
pub const DEFAULT_BLOCK_HOURS: u64 = 3;
/// 252 trading days of 288 five-minute periods.
pub const DEFAULT_PERIODS_PER_YEAR: f64 = 72_576.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("timestamp {0} cs lies outside the data week")]
    OutOfRange(u64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

/// Position of an observation inside the data week.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SlotLabel {
    pub day: u32,
    pub block: u32,
    pub slot: u32,
}

/// Week layout: five GMT days cut into equal blocks of bar-sized slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Calendar {
    pub block_hours: u64,
    pub bar_interval_s: u64,
}

impl Default for Calendar {
    fn default() -> Self {
        Self {
            block_hours: DEFAULT_BLOCK_HOURS,
            bar_interval_s: DEFAULT_BAR_INTERVAL_S,
        }
    }
}

impl Calendar {
    pub fn new(block_hours: u64, bar_interval_s: u64) -> Result<Self, SamplerError> {
        if block_hours == 0 || 24 % block_hours != 0 {
            return Err(SamplerError::Config(format!(
                "block hours must divide 24, got {block_hours}"
            )));
        }
        if bar_interval_s == 0 || !(block_hours * 3600).is_multiple_of(bar_interval_s) {
            return Err(SamplerError::Config(format!(
                "bar interval {bar_interval_s}s must divide the {block_hours}h block"
            )));
        }
        Ok(Self {
            block_hours,
            bar_interval_s,
        })
    }

    pub fn blocks_per_day(&self) -> usize {
        (24 / self.block_hours) as usize
    }

    pub fn slots_per_block(&self) -> usize {
        (self.block_hours * 3600 / self.bar_interval_s) as usize
    }

    pub fn week_span(&self) -> Centis {
        Centis::from_secs(DAYS_PER_WEEK * SECONDS_PER_DAY)
    }

    /// `"0-3"`, `"3-6"`, ... for GMT hour ranges.
    pub fn block_name(&self, block: usize) -> String {
        let lo = block as u64 * self.block_hours;
        format!("{}-{}", lo, lo + self.block_hours)
    }

    pub fn label(&self, t: Centis) -> Result<SlotLabel, SamplerError> {
        if t >= self.week_span() {
            return Err(SamplerError::OutOfRange(t.0));
        }
        let secs = t.0 / Centis::PER_SECOND;
        let day = secs / SECONDS_PER_DAY;
        let in_day = secs % SECONDS_PER_DAY;
        let block_s = self.block_hours * 3600;
        Ok(SlotLabel {
            day: day as u32,
            block: (in_day / block_s) as u32,
            slot: ((in_day % block_s) / self.bar_interval_s) as u32,
        })
    }

    /// Start of the slot a label refers to.
    pub fn slot_start(&self, l: SlotLabel) -> Centis {
        Centis::from_secs(
            l.day as u64 * SECONDS_PER_DAY
                + l.block as u64 * self.block_hours * 3600
                + l.slot as u64 * self.bar_interval_s,
        )
    }
}

/// Labels a timestamp with the default 3-hour blocks and 5-minute slots.
pub fn assign_block(t: Centis) -> Result<SlotLabel, SamplerError> {
    Calendar::default().label(t)
}

/// Side of the book an order's price reveals.
fn quote_side(kind: OrderKind) -> Side {
    match kind {
        OrderKind::LimitBuy | OrderKind::MarketSell => Side::Bid,
        OrderKind::LimitSell | OrderKind::MarketBuy => Side::Ask,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Bid,
    Ask,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GridPoint {
    pub best_bid: Option<f64>,
    pub best_ask: Option<f64>,
    pub midquote: Option<f64>,
    pub tick_count: u32,
}

/// Best quotes at the end of each fixed calendar interval across the week.
#[derive(Debug, Clone, PartialEq)]
pub struct MidquoteGrid {
    pub order_type: OrderType,
    pub grid_start: Centis,
    pub interval_s: u64,
    pub points: Vec<GridPoint>,
}

impl MidquoteGrid {
    pub fn point_time(&self, i: usize) -> Centis {
        Centis(self.grid_start.0 + i as u64 * self.interval_s * Centis::PER_SECOND)
    }

    /// Writes the grid sparsely: a row is emitted for point 0 and for every
    /// point whose tick count is nonzero or whose quote state differs from
    /// the preceding point. Omitted points repeat the previous state with
    /// zero ticks.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "point",
            "time_cs",
            "best_bid",
            "best_ask",
            "midquote",
            "tick_count",
        ])?;
        let mut prev: Option<&GridPoint> = None;
        for (i, p) in self.points.iter().enumerate() {
            let changed = match prev {
                None => true,
                Some(q) => {
                    q.best_bid != p.best_bid || q.best_ask != p.best_ask || q.midquote != p.midquote
                }
            };
            if changed || p.tick_count > 0 {
                w.write_record([
                    i.to_string(),
                    self.point_time(i).to_string(),
                    fmt_opt(p.best_bid),
                    fmt_opt(p.best_ask),
                    fmt_opt(p.midquote),
                    p.tick_count.to_string(),
                ])?;
            }
            prev = Some(p);
        }
        w.flush()
    }
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Replays a stream into a grid covering the whole data week.
///
/// Point `k` covers `[k·I, (k+1)·I)`; its quotes are the quote state after the
/// last event entered before the interval end. A new quote that crosses the
/// opposite side invalidates that (stale) side until it is refreshed.
pub fn build_midquote_grid(
    stream: &OrderTypeStream,
    calendar: &Calendar,
    interval_s: u64,
) -> Result<MidquoteGrid, SamplerError> {
    if interval_s == 0 {
        return Err(SamplerError::Config(
            "grid interval must be positive".into(),
        ));
    }
    let span = calendar.week_span().0;
    let step = interval_s * Centis::PER_SECOND;
    let n_points = span.div_ceil(step) as usize;
    let mut points = Vec::with_capacity(n_points);

    let events = stream.events();
    if let Some(last) = events.last() {
        if last.entry_time.0 >= span {
            return Err(SamplerError::OutOfRange(last.entry_time.0));
        }
    }

    let mut bid: Option<f64> = None;
    let mut ask: Option<f64> = None;
    let mut next = 0usize;
    for k in 0..n_points {
        let end = (k as u64 + 1) * step;
        let mut ticks = 0u32;
        while next < events.len() && events[next].entry_time.0 < end {
            let e = &events[next];
            match quote_side(e.kind) {
                Side::Bid => {
                    bid = Some(e.price);
                    if ask.is_some_and(|a| a < e.price) {
                        ask = None;
                    }
                }
                Side::Ask => {
                    ask = Some(e.price);
                    if bid.is_some_and(|b| b > e.price) {
                        bid = None;
                    }
                }
            }
            ticks += 1;
            next += 1;
        }
        let midquote = match (bid, ask) {
            (Some(b), Some(a)) => Some((b + a) / 2.0),
            _ => None,
        };
        points.push(GridPoint {
            best_bid: bid,
            best_ask: ask,
            midquote,
            tick_count: ticks,
        });
    }

    Ok(MidquoteGrid {
        order_type: stream.order_type(),
        grid_start: Centis(0),
        interval_s,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bar {
    pub start: Centis,
    pub log_price: f64,
    pub label: SlotLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarSeries {
    pub order_type: OrderType,
    pub bar_interval_s: u64,
    pub bars: Vec<Bar>,
}

impl BarSeries {
    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["day", "block", "slot", "log_price"])?;
        for b in &self.bars {
            w.write_record([
                b.label.day.to_string(),
                b.label.block.to_string(),
                b.label.slot.to_string(),
                b.log_price.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Samples the grid every `calendar.bar_interval_s` seconds. Leading bars
/// before the first midquote are dropped.
pub fn to_bars(grid: &MidquoteGrid, calendar: &Calendar) -> Result<BarSeries, SamplerError> {
    let bar_s = calendar.bar_interval_s;
    if bar_s == 0 || !bar_s.is_multiple_of(grid.interval_s) {
        return Err(SamplerError::Config(format!(
            "bar interval {bar_s}s is not a multiple of the {}s grid interval",
            grid.interval_s
        )));
    }
    let per_bar = (bar_s / grid.interval_s) as usize;
    let mut bars = Vec::with_capacity(grid.points.len() / per_bar + 1);
    let mut last_mid: Option<f64> = None;
    for (j, chunk) in grid.points.chunks(per_bar).enumerate() {
        if let Some(m) = chunk.iter().rev().find_map(|p| p.midquote) {
            last_mid = Some(m);
        }
        let Some(mid) = last_mid else { continue };
        let start = Centis(grid.grid_start.0 + j as u64 * bar_s * Centis::PER_SECOND);
        bars.push(Bar {
            start,
            log_price: mid.ln(),
            label: calendar.label(start)?,
        });
    }
    Ok(BarSeries {
        order_type: grid.order_type,
        bar_interval_s: bar_s,
        bars,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnObs {
    /// Percent log-return.
    pub r: f64,
    pub abs_r: f64,
    pub label: SlotLabel,
}

impl ReturnObs {
    pub fn new(r: f64, label: SlotLabel) -> Self {
        Self {
            r,
            abs_r: r.abs(),
            label,
        }
    }
}

/// Percent log-returns labelled by (day, block, slot).
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub order_type: OrderType,
    pub values: Vec<ReturnObs>,
}

impl ReturnSeries {
    pub fn in_block(&self, block: u32) -> impl Iterator<Item = &ReturnObs> {
        self.values.iter().filter(move |v| v.label.block == block)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["day", "block", "slot", "r_pct", "abs_r_pct"])?;
        for v in &self.values {
            w.write_record([
                v.label.day.to_string(),
                v.label.block.to_string(),
                v.label.slot.to_string(),
                v.r.to_string(),
                v.abs_r.to_string(),
            ])?;
        }
        w.flush()
    }

    /// Reads the `day,block,slot,r_pct,abs_r_pct` schema back.
    pub fn read_csv<R: std::io::Read>(
        reader: R,
        order_type: OrderType,
    ) -> Result<Self, csv::Error> {
        #[derive(serde::Deserialize)]
        struct Row {
            day: u32,
            block: u32,
            slot: u32,
            r_pct: f64,
        }
        let mut rdr = csv::Reader::from_reader(reader);
        let values = rdr
            .deserialize::<Row>()
            .map(|r| {
                r.map(|r| {
                    ReturnObs::new(
                        r.r_pct,
                        SlotLabel {
                            day: r.day,
                            block: r.block,
                            slot: r.slot,
                        },
                    )
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { order_type, values })
    }
}

/// First differences of log prices, in percent, labelled by the later bar.
pub fn compute_returns(bars: &BarSeries) -> Result<ReturnSeries, SamplerError> {
    if bars.bars.len() < 2 {
        return Err(SamplerError::InsufficientData(format!(
            "{} bars, need at least 2",
            bars.bars.len()
        )));
    }
    let values = bars
        .bars
        .windows(2)
        .map(|w| ReturnObs::new(100.0 * (w[1].log_price - w[0].log_price), w[1].label))
        .collect();
    Ok(ReturnSeries {
        order_type: bars.order_type,
        values,
    })
}

/// Scales a per-period mean and standard deviation to annual figures.
pub fn annualize(mean: f64, sd: f64, periods_per_year: f64) -> (f64, f64) {
    (mean * periods_per_year, sd * periods_per_year.sqrt())
}
