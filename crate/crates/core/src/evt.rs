//! Tail-index estimation for Fréchet-domain samples.
//!
//! The pipeline for one cell is
//! [`tail_split`] → [`hill_curve`] → [`huisman_fit`] → [`alpha_from_fit`]
//! → [`interpolated_m_star`] → [`tail_standard_error`] → [`moment_tests`],
//! composed by [`estimate_tail`].
//!
//! The Hill estimator works on the inverse-index scale:
//!
//! ```text
//! chi(m) = (1/m) * sum_{i=1..m} [ ln x_(i) - ln x_(m+1) ]
//! ```
//!
//! with `x_(1) >= x_(2) >= ...` the descending order statistics. The bias
//! correction regresses `chi(m) = gamma + beta*m + e(m)` for `m = 1..eta`
//! by weighted least squares with weights `sqrt(m)`; the intercept `gamma`
//! estimates `1/alpha`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::sampler::ReturnSeries;
use crate::tickstore::OrderType;

pub const DEFAULT_MIN_TAIL_N: usize = 20;
pub const DEFAULT_CRIT: f64 = 1.64;
pub const MIN_FIT_POINTS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvtError {
    #[error("threshold m = {m} outside 1..={max}")]
    Threshold { m: usize, max: usize },
    #[error("tail values must be positive, found {0}")]
    Domain(f64),
    #[error("insufficient data: {n} tail values, need at least {need}")]
    InsufficientData { n: usize, need: usize },
    #[error("weighted fit needs at least {MIN_FIT_POINTS} points, got {0}")]
    Fit(usize),
    #[error("non-positive intercept {0}: tail index undefined")]
    NonPositiveIntercept(f64),
    #[error("{order_type} block {block} {kind} tail: {source}")]
    Cell {
        order_type: OrderType,
        block: u32,
        kind: TailKind,
        #[source]
        source: Box<EvtError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    Common,
    Lower,
    Upper,
}

impl TailKind {
    pub const ALL: [TailKind; 3] = [TailKind::Common, TailKind::Lower, TailKind::Upper];

    pub fn as_str(self) -> &'static str {
        match self {
            TailKind::Common => "common",
            TailKind::Lower => "lower",
            TailKind::Upper => "upper",
        }
    }

    /// Maps a return to its exceedance in this tail, if any.
    fn exceedance(self, r: f64) -> Option<f64> {
        match self {
            TailKind::Common if r != 0.0 => Some(r.abs()),
            TailKind::Lower if r < 0.0 => Some(-r),
            TailKind::Upper if r > 0.0 => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for TailKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Positive exceedances sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct TailSample {
    kind: TailKind,
    values: Vec<f64>,
}

impl TailSample {
    /// Sorts `values` descending; every value must be positive and finite.
    pub fn new(kind: TailKind, mut values: Vec<f64>) -> Result<Self, EvtError> {
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(EvtError::Domain(bad));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { kind, values })
    }

    /// Builds the `kind` tail of raw (signed) returns; zeros are dropped.
    pub fn from_returns(kind: TailKind, returns: impl IntoIterator<Item = f64>) -> Self {
        let mut values: Vec<f64> = returns
            .into_iter()
            .filter(|r| r.is_finite())
            .filter_map(|r| kind.exceedance(r))
            .collect();
        values.sort_by(|a, b| b.total_cmp(a));
        Self { kind, values }
    }

    pub fn kind(&self) -> TailKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multiplies every value by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            kind: self.kind,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

/// Splits a whole return series into one tail.
pub fn tail_split(series: &ReturnSeries, kind: TailKind) -> TailSample {
    TailSample::from_returns(kind, series.values.iter().map(|v| v.r))
}

/// Hill estimate of `1/alpha` from the `m` largest values.
pub fn hill_estimate(sample: &TailSample, m: usize) -> Result<f64, EvtError> {
    let v = sample.values();
    if m == 0 || m >= v.len() {
        return Err(EvtError::Threshold {
            m,
            max: v.len().saturating_sub(1),
        });
    }
    let base = v[m];
    if base <= 0.0 {
        return Err(EvtError::Domain(base));
    }
    let ln_base = base.ln();
    let sum: f64 = v[..m].iter().map(|x| x.ln() - ln_base).sum();
    Ok(sum / m as f64)
}

/// `chi[m-1] = chi(m)` for `m = 1..=eta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HillCurve {
    pub chi: Vec<f64>,
}

impl HillCurve {
    pub fn eta(&self) -> usize {
        self.chi.len()
    }

    /// `chi(m)`, 1-based.
    pub fn at(&self, m: usize) -> f64 {
        self.chi[m - 1]
    }
}

/// Evaluates the Hill estimator at every threshold up to `eta`
/// (default `floor(n/2)`, which needs `n >= 4`).
pub fn hill_curve(sample: &TailSample, eta: Option<usize>) -> Result<HillCurve, EvtError> {
    let n = sample.len();
    let eta = match eta {
        Some(e) => e,
        None if n < 4 => return Err(EvtError::InsufficientData { n, need: 4 }),
        None => n / 2,
    };
    if eta == 0 || eta >= n {
        return Err(EvtError::Threshold {
            m: eta,
            max: n.saturating_sub(1),
        });
    }
    let logs: Vec<f64> = sample.values()[..=eta].iter().map(|x| x.ln()).collect();
    let mut prefix = 0.0;
    let chi = (1..=eta)
        .map(|m| {
            prefix += logs[m - 1];
            // clamp rounding residue on tied values
            (prefix / m as f64 - logs[m]).max(0.0)
        })
        .collect();
    Ok(HillCurve { chi })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WlsFit {
    pub chi_intercept: f64,
    pub slope: f64,
}

/// Weighted least squares of `chi(m)` on `(1, m)` with weights `sqrt(m)`.
pub fn huisman_fit(curve: &HillCurve) -> Result<WlsFit, EvtError> {
    let eta = curve.eta();
    if eta < MIN_FIT_POINTS {
        return Err(EvtError::Fit(eta));
    }
    let (mut sw, mut swm, mut swy) = (0.0, 0.0, 0.0);
    for (i, &y) in curve.chi.iter().enumerate() {
        let m = (i + 1) as f64;
        let w = m.sqrt();
        sw += w;
        swm += w * m;
        swy += w * y;
    }
    let (m_bar, y_bar) = (swm / sw, swy / sw);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (i, &y) in curve.chi.iter().enumerate() {
        let m = (i + 1) as f64;
        let w = m.sqrt();
        let dm = m - m_bar;
        sxx += w * dm * dm;
        sxy += w * dm * (y - y_bar);
    }
    let slope = sxy / sxx;
    Ok(WlsFit {
        chi_intercept: y_bar - slope * m_bar,
        slope,
    })
}

pub fn alpha_from_fit(chi_intercept: f64) -> Result<f64, EvtError> {
    if chi_intercept > 0.0 && chi_intercept.is_finite() {
        Ok(1.0 / chi_intercept)
    } else {
        Err(EvtError::NonPositiveIntercept(chi_intercept))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MStar {
    pub value: f64,
    /// `false` when the curve never reaches the intercept and `value = eta`.
    pub crossed: bool,
}

/// Which intersection of the Hill curve with the intercept sets `m*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CrossingRule {
    /// Smallest crossing. On an unbiased curve this lands in the noisy
    /// small-`m` region, so the implied standard error is inflated.
    First,
    /// Largest crossing: the furthest threshold at which the Hill curve
    /// still agrees with the intercept.
    #[default]
    Last,
}

impl CrossingRule {
    pub fn as_str(self) -> &'static str {
        match self {
            CrossingRule::First => "first",
            CrossingRule::Last => "last",
        }
    }
}

impl std::str::FromStr for CrossingRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first" => Ok(CrossingRule::First),
            "last" => Ok(CrossingRule::Last),
            other => Err(format!("unknown crossing rule `{other}` (first|last)")),
        }
    }
}

/// All real thresholds at which the linearly interpolated Hill curve meets
/// `chi_intercept`, ascending. Integer points lying exactly on the intercept
/// count as touches.
pub fn curve_crossings(curve: &HillCurve, chi_intercept: f64) -> Vec<f64> {
    let chi = &curve.chi;
    let mut out = Vec::new();
    for i in 0..chi.len() {
        let lo = chi[i] - chi_intercept;
        if lo == 0.0 {
            out.push((i + 1) as f64);
        }
        if let Some(&next) = chi.get(i + 1) {
            let hi = next - chi_intercept;
            if lo * hi < 0.0 {
                out.push((i + 1) as f64 + lo / (chi[i] - next));
            }
        }
    }
    out
}

/// Threshold at which the linearly interpolated Hill curve meets
/// `chi_intercept`; falls back to `eta` when it never does.
pub fn interpolated_m_star(curve: &HillCurve, chi_intercept: f64, rule: CrossingRule) -> MStar {
    let xs = curve_crossings(curve, chi_intercept);
    let pick = match rule {
        CrossingRule::First => xs.first(),
        CrossingRule::Last => xs.last(),
    };
    match pick {
        Some(&value) => MStar {
            value,
            crossed: true,
        },
        None => MStar {
            value: curve.eta().max(1) as f64,
            crossed: false,
        },
    }
}

/// Asymptotic standard error of the index-scale estimate.
pub fn tail_standard_error(alpha: f64, m_star: f64) -> f64 {
    alpha / m_star.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentTests {
    pub t0: f64,
    pub t2: f64,
    pub t4: f64,
    pub crit: f64,
    /// `t0 > crit`.
    pub heavy_tails: bool,
    /// `t2 > -crit`: alpha = 2 is not rejected downward.
    pub finite_variance: bool,
    /// `t4 > -crit`.
    pub finite_fourth_moment: bool,
}

pub fn moment_tests(alpha: f64, se_alpha: f64, crit: f64) -> MomentTests {
    let t = |c: f64| (alpha - c) / se_alpha;
    let (t0, t2, t4) = (t(0.0), t(2.0), t(4.0));
    MomentTests {
        t0,
        t2,
        t4,
        crit,
        heavy_tails: t0 > crit,
        finite_variance: t2 > -crit,
        finite_fourth_moment: t4 > -crit,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EtaRule {
    /// `floor(n/2)`.
    #[default]
    HalfSample,
    /// Fixed threshold count, capped at `n - 1`.
    Fixed(usize),
}

impl EtaRule {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            EtaRule::HalfSample => n / 2,
            EtaRule::Fixed(e) => e.min(n.saturating_sub(1)),
        }
    }
}

impl fmt::Display for EtaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EtaRule::HalfSample => f.write_str("floor(n/2)"),
            EtaRule::Fixed(e) => write!(f, "min({e}, n-1)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailConfig {
    pub eta: EtaRule,
    pub min_tail_n: usize,
    pub crit: f64,
    pub crossing: CrossingRule,
}

impl Default for TailConfig {
    fn default() -> Self {
        Self {
            eta: EtaRule::HalfSample,
            min_tail_n: DEFAULT_MIN_TAIL_N,
            crit: DEFAULT_CRIT,
            crossing: CrossingRule::Last,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub kind: TailKind,
    pub n: usize,
    pub eta: usize,
    pub alpha: f64,
    pub chi_intercept: f64,
    pub slope: f64,
    pub m_star: f64,
    pub se_alpha: f64,
    pub tests: MomentTests,
    /// Set when the Hill curve never reaches the intercept.
    pub no_crossing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TailOutcome {
    Estimated(TailEstimate),
    /// Too few tail observations to estimate.
    Excluded {
        n: usize,
        min_n: usize,
    },
}

impl TailOutcome {
    pub fn estimate(&self) -> Option<&TailEstimate> {
        match self {
            TailOutcome::Estimated(e) => Some(e),
            TailOutcome::Excluded { .. } => None,
        }
    }
}

/// Runs the full tail pipeline on an already-built sample.
pub fn estimate_sample(sample: &TailSample, cfg: &TailConfig) -> Result<TailOutcome, EvtError> {
    let n = sample.len();
    let min_n = cfg.min_tail_n.max(4);
    if n < min_n {
        return Ok(TailOutcome::Excluded { n, min_n });
    }
    let eta = cfg.eta.resolve(n);
    let curve = hill_curve(sample, Some(eta))?;
    let fit = huisman_fit(&curve)?;
    let alpha = alpha_from_fit(fit.chi_intercept)?;
    let m_star = interpolated_m_star(&curve, fit.chi_intercept, cfg.crossing);
    let se_alpha = tail_standard_error(alpha, m_star.value);
    Ok(TailOutcome::Estimated(TailEstimate {
        kind: sample.kind(),
        n,
        eta,
        alpha,
        chi_intercept: fit.chi_intercept,
        slope: fit.slope,
        m_star: m_star.value,
        se_alpha,
        tests: moment_tests(alpha, se_alpha, cfg.crit),
        no_crossing: !m_star.crossed,
    }))
}

/// Estimates one (block, tail) cell, pooling all days of the block.
pub fn estimate_tail(
    series: &ReturnSeries,
    block: u32,
    kind: TailKind,
    cfg: &TailConfig,
) -> Result<TailOutcome, EvtError> {
    let sample = TailSample::from_returns(kind, series.in_block(block).map(|v| v.r));
    estimate_sample(&sample, cfg).map_err(|e| EvtError::Cell {
        order_type: series.order_type,
        block,
        kind,
        source: Box::new(e),
    })
}
