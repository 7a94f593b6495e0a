//! Transaction-log ingestion.
//!
//! Tick files are CSV with a required header:
//!
//! ```text
//! event_id,kind,entry_time_cs,exit_time_cs,price,qty_available,qty_traded,aggressor
//! ```
//!
//! Times are integer centiseconds from Monday 00:00:00 GMT of the data week.
//! `exit_time_cs` and `aggressor` accept the literal `na`.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

pub const HEADER: [&str; 8] = [
    "event_id",
    "kind",
    "entry_time_cs",
    "exit_time_cs",
    "price",
    "qty_available",
    "qty_traded",
    "aggressor",
];

/// Centiseconds since Monday 00:00:00 GMT of the data week.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Centis(pub u64);

impl Centis {
    pub const PER_SECOND: u64 = 100;

    pub fn from_secs(secs: u64) -> Self {
        Centis(secs * Self::PER_SECOND)
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / Self::PER_SECOND as f64
    }
}

impl fmt::Display for Centis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderKind {
    LimitBuy,
    LimitSell,
    MarketBuy,
    MarketSell,
}

impl OrderKind {
    pub const ALL: [OrderKind; 4] = [
        OrderKind::LimitBuy,
        OrderKind::LimitSell,
        OrderKind::MarketBuy,
        OrderKind::MarketSell,
    ];

    pub fn order_type(self) -> OrderType {
        match self {
            OrderKind::LimitBuy | OrderKind::LimitSell => OrderType::Limit,
            OrderKind::MarketBuy | OrderKind::MarketSell => OrderType::Market,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OrderKind::LimitBuy => "limit_buy",
            OrderKind::LimitSell => "limit_sell",
            OrderKind::MarketBuy => "market_buy",
            OrderKind::MarketSell => "market_sell",
        }
    }
}

impl FromStr for OrderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OrderKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown order kind `{s}`"))
    }
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The two order families analysed separately throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderType {
    Limit,
    Market,
}

impl OrderType {
    pub const ALL: [OrderType; 2] = [OrderType::Limit, OrderType::Market];

    pub fn as_str(self) -> &'static str {
        match self {
            OrderType::Limit => "limit",
            OrderType::Market => "market",
        }
    }
}

impl FromStr for OrderType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "limit" => Ok(OrderType::Limit),
            "market" => Ok(OrderType::Market),
            other => Err(format!("unknown order type `{other}`")),
        }
    }
}

impl fmt::Display for OrderType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggressor {
    BuyerInitiated,
    SellerInitiated,
    NotApplicable,
}

impl Aggressor {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggressor::BuyerInitiated => "buyer_initiated",
            Aggressor::SellerInitiated => "seller_initiated",
            Aggressor::NotApplicable => "na",
        }
    }
}

impl FromStr for Aggressor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "buyer_initiated" => Ok(Aggressor::BuyerInitiated),
            "seller_initiated" => Ok(Aggressor::SellerInitiated),
            "na" => Ok(Aggressor::NotApplicable),
            other => Err(format!("unknown aggressor `{other}`")),
        }
    }
}

/// One transaction-log record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TickEvent {
    pub event_id: String,
    pub kind: OrderKind,
    pub entry_time: Centis,
    /// Only limit orders carry an exit time.
    pub exit_time: Option<Centis>,
    /// DEM per USD.
    pub price: f64,
    /// Thousands of USD.
    pub qty_available: u64,
    /// Thousands of USD.
    pub qty_traded: u64,
    pub aggressor: Aggressor,
}

impl TickEvent {
    pub fn is_filled(&self) -> bool {
        self.qty_traded > 0
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.price.is_finite() && self.price > 0.0) {
            return Err(format!("price must be positive, got {}", self.price));
        }
        if let Some(exit) = self.exit_time {
            if exit < self.entry_time {
                return Err(format!(
                    "exit time {exit} precedes entry time {}",
                    self.entry_time
                ));
            }
        }
        match self.kind.order_type() {
            OrderType::Limit if self.qty_traded > self.qty_available => Err(format!(
                "qty_traded {} exceeds qty_available {}",
                self.qty_traded, self.qty_available
            )),
            OrderType::Market if self.qty_traded == 0 => {
                Err("market orders must have qty_traded > 0".to_string())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TickError {
    #[error("row {row}: field `{field}`: {message}")]
    Parse {
        row: u64,
        field: &'static str,
        message: String,
    },
    #[error("row {row}: {message}")]
    Validation { row: u64, message: String },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
}

impl TickError {
    pub fn row(&self) -> Option<u64> {
        match self {
            TickError::Parse { row, .. } | TickError::Validation { row, .. } => Some(*row),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Count and skip invalid rows instead of aborting.
    pub skip_bad_rows: bool,
}

/// A parsed event together with its 1-based data row number.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTick {
    pub row: u64,
    pub event: TickEvent,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedTicks {
    pub ticks: Vec<ParsedTick>,
    /// Rows rejected in lenient mode.
    pub skipped: Vec<TickError>,
}

impl ParsedTicks {
    pub fn events(&self) -> Vec<TickEvent> {
        self.ticks.iter().map(|t| t.event.clone()).collect()
    }

    pub fn into_events(self) -> Vec<TickEvent> {
        self.ticks.into_iter().map(|t| t.event).collect()
    }
}

/// Strict parse: the first bad row aborts.
pub fn parse_tick_file<R: Read>(reader: R) -> Result<Vec<TickEvent>, TickError> {
    parse_tick_file_with(reader, ParseOptions::default()).map(ParsedTicks::into_events)
}

pub fn parse_tick_file_with<R: Read>(
    reader: R,
    opts: ParseOptions,
) -> Result<ParsedTicks, TickError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header = rdr.headers().map_err(|e| TickError::Csv(e.to_string()))?;
    // An entirely empty input has no header row and yields no events.
    let header_empty = header.is_empty() || (header.len() == 1 && header[0].is_empty());
    if !header_empty && header.iter().ne(HEADER.iter().copied()) {
        return Err(TickError::Header {
            expected: HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut out = ParsedTicks::default();
    let mut seen_ids = HashSet::new();
    let mut record = csv::StringRecord::new();
    let mut row = 0u64;
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(TickError::Csv(e.to_string())),
        }
        row += 1;
        let parsed = parse_record(&record, row).and_then(|ev| {
            if seen_ids.contains(&ev.event_id) {
                Err(TickError::Validation {
                    row,
                    message: format!("duplicate event_id `{}`", ev.event_id),
                })
            } else {
                Ok(ev)
            }
        });
        match parsed {
            Ok(event) => {
                seen_ids.insert(event.event_id.clone());
                out.ticks.push(ParsedTick { row, event });
            }
            Err(e) if opts.skip_bad_rows => out.skipped.push(e),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn parse_record(rec: &csv::StringRecord, row: u64) -> Result<TickEvent, TickError> {
    if rec.len() != HEADER.len() {
        return Err(TickError::Parse {
            row,
            field: "record",
            message: format!("expected {} fields, found {}", HEADER.len(), rec.len()),
        });
    }
    let perr = |field: &'static str, message: String| TickError::Parse {
        row,
        field,
        message,
    };

    let event_id = rec[0].to_string();
    if event_id.is_empty() {
        return Err(perr("event_id", "empty identifier".into()));
    }
    let kind: OrderKind = rec[1].parse().map_err(|m| perr("kind", m))?;
    let entry_time = Centis(parse_time(&rec[2], row, "entry_time_cs")?);
    let exit_time = match &rec[3] {
        "na" => None,
        s => Some(Centis(parse_time(s, row, "exit_time_cs")?)),
    };
    let price: f64 = rec[4]
        .parse()
        .map_err(|_| perr("price", format!("not a decimal: `{}`", &rec[4])))?;
    let qty_available = parse_qty(&rec[5], row, "qty_available")?;
    let qty_traded = parse_qty(&rec[6], row, "qty_traded")?;
    let aggressor: Aggressor = rec[7].parse().map_err(|m| perr("aggressor", m))?;

    let event = TickEvent {
        event_id,
        kind,
        entry_time,
        exit_time,
        price,
        qty_available,
        qty_traded,
        aggressor,
    };
    event
        .validate()
        .map_err(|message| TickError::Validation { row, message })?;
    Ok(event)
}

fn parse_time(s: &str, row: u64, field: &'static str) -> Result<u64, TickError> {
    match s.parse::<i64>() {
        Ok(v) if v >= 0 => Ok(v as u64),
        Ok(v) => Err(TickError::Validation {
            row,
            message: format!("{field} must be non-negative, got {v}"),
        }),
        Err(_) => Err(TickError::Parse {
            row,
            field,
            message: format!("not an integer: `{s}`"),
        }),
    }
}

fn parse_qty(s: &str, row: u64, field: &'static str) -> Result<u64, TickError> {
    match s.parse::<i64>() {
        Ok(v) if v >= 0 => Ok(v as u64),
        Ok(v) => Err(TickError::Validation {
            row,
            message: format!("{field} must be non-negative, got {v}"),
        }),
        Err(_) => Err(TickError::Parse {
            row,
            field,
            message: format!("not an integer: `{s}`"),
        }),
    }
}

/// Writes events in the tick CSV schema. Prices use the shortest
/// representation that parses back to the same `f64`.
pub fn write_tick_file<W: Write>(writer: W, events: &[TickEvent]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for e in events {
        let exit = e
            .exit_time
            .map(|t| t.0.to_string())
            .unwrap_or_else(|| "na".into());
        w.write_record([
            e.event_id.as_str(),
            e.kind.as_str(),
            &e.entry_time.0.to_string(),
            &exit,
            &e.price.to_string(),
            &e.qty_available.to_string(),
            &e.qty_traded.to_string(),
            e.aggressor.as_str(),
        ])?;
    }
    w.flush()
}

/// Keeps only events with a positive traded quantity, in order.
pub fn filter_filled(events: &[TickEvent]) -> Vec<TickEvent> {
    events.iter().filter(|e| e.is_filled()).cloned().collect()
}

/// Time-ordered events of a single order type.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderTypeStream {
    order_type: OrderType,
    events: Vec<TickEvent>,
}

impl OrderTypeStream {
    /// Builds a stream, stably sorting by entry time. Fails if any event has
    /// a different order type.
    pub fn new(order_type: OrderType, mut events: Vec<TickEvent>) -> Result<Self, TickError> {
        if let Some(bad) = events.iter().find(|e| e.kind.order_type() != order_type) {
            return Err(TickError::Validation {
                row: 0,
                message: format!(
                    "event `{}` of kind {} in {} stream",
                    bad.event_id, bad.kind, order_type
                ),
            });
        }
        events.sort_by_key(|e| e.entry_time);
        Ok(Self { order_type, events })
    }

    pub fn order_type(&self) -> OrderType {
        self.order_type
    }

    pub fn events(&self) -> &[TickEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Partitions events into the limit and market streams.
pub fn split_by_type(events: &[TickEvent]) -> (OrderTypeStream, OrderTypeStream) {
    let (limit, market): (Vec<_>, Vec<_>) = events
        .iter()
        .cloned()
        .partition(|e| e.kind.order_type() == OrderType::Limit);
    // partition guarantees homogeneous streams
    (
        OrderTypeStream::new(OrderType::Limit, limit).expect("limit partition"),
        OrderTypeStream::new(OrderType::Market, market).expect("market partition"),
    )
}
