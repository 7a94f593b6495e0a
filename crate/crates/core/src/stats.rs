//! Block-wise descriptive statistics and cross-block correlations.
//!
//! Central moments use the `n` denominator. Kurtosis is raw (Gaussian = 3).

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::sampler::{annualize, ReturnSeries};
use crate::tickstore::OrderType;

/// Asymptotic 5% Kolmogorov-Smirnov coefficient.
pub const KS_CRIT_5PCT: f64 = 1.36;
pub const MIN_SUMMARY_N: usize = 4;
pub const MIN_KS_N: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("insufficient data: {n} values, need at least {need}")]
    InsufficientData { n: usize, need: usize },
    #[error("degenerate sample: zero variance")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub stat: f64,
    pub significant_5pct: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean_ann_pct: f64,
    pub sd_ann_pct: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    /// Absent when `n` is below [`MIN_KS_N`].
    pub ks: Option<KsResult>,
}

struct Moments {
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

fn central_moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    Moments {
        mean,
        m2: m2 / n,
        m3: m3 / n,
        m4: m4 / n,
    }
}

/// Mean, sd (annualised), skewness, raw kurtosis and the KS normality
/// statistic of a sample of percent returns.
pub fn summarize(values: &[f64], periods_per_year: f64) -> Result<SummaryStats, StatsError> {
    let n = values.len();
    if n < MIN_SUMMARY_N {
        return Err(StatsError::InsufficientData {
            n,
            need: MIN_SUMMARY_N,
        });
    }
    let m = central_moments(values);
    if m.m2 <= 0.0 {
        return Err(StatsError::Degenerate);
    }
    let sd = m.m2.sqrt();
    let (mean_ann_pct, sd_ann_pct) = annualize(m.mean, sd, periods_per_year);
    let ks = if n >= MIN_KS_N {
        Some(ks_normality(values)?)
    } else {
        None
    };
    Ok(SummaryStats {
        n,
        mean_ann_pct,
        sd_ann_pct,
        skewness: m.m3 / m.m2.powf(1.5),
        kurtosis: m.m4 / (m.m2 * m.m2),
        ks,
    })
}

/// Sup-distance between the empirical CDF and a normal with the sample's
/// mean and (n-denominator) standard deviation.
pub fn ks_normality(values: &[f64]) -> Result<KsResult, StatsError> {
    let n = values.len();
    if n < MIN_KS_N {
        return Err(StatsError::InsufficientData { n, need: MIN_KS_N });
    }
    let m = central_moments(values);
    if m.m2 <= 0.0 {
        return Err(StatsError::Degenerate);
    }
    let sd = m.m2.sqrt();
    let stat = ks_distance(values, |x| normal_cdf((x - m.mean) / sd));
    Ok(KsResult {
        stat,
        significant_5pct: stat > KS_CRIT_5PCT / (n as f64).sqrt(),
    })
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// `sup_x |F_n(x) - F(x)|` for a continuous reference CDF `F`.
pub fn ks_distance(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / nf - f).max(f - i as f64 / nf)
        })
        .fold(0.0f64, f64::max)
        .clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Returns,
    Volatility,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 2] = [SeriesKind::Returns, SeriesKind::Volatility];

    pub fn as_str(self) -> &'static str {
        match self {
            SeriesKind::Returns => "returns",
            SeriesKind::Volatility => "volatility",
        }
    }
}

/// Pearson correlations between blocks, observations paired by (day, slot).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockCorrelationMatrix {
    pub series_kind: SeriesKind,
    pub order_type: OrderType,
    /// `None` marks cells with fewer than two pairs or a constant side.
    pub entries: Vec<Vec<Option<f64>>>,
}

impl BlockCorrelationMatrix {
    pub fn n_blocks(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        self.entries[a][b]
    }
}

/// Pearson correlation; `None` when undefined.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn cross_block_correlation(
    series: &ReturnSeries,
    kind: SeriesKind,
    n_blocks: usize,
) -> BlockCorrelationMatrix {
    // (day, slot) -> value, per block; later duplicates overwrite
    let mut by_block: Vec<BTreeMap<(u32, u32), f64>> = vec![BTreeMap::new(); n_blocks];
    for v in &series.values {
        let b = v.label.block as usize;
        if b < n_blocks {
            let x = match kind {
                SeriesKind::Returns => v.r,
                SeriesKind::Volatility => v.abs_r,
            };
            by_block[b].insert((v.label.day, v.label.slot), x);
        }
    }

    let mut entries = vec![vec![None; n_blocks]; n_blocks];
    for a in 0..n_blocks {
        for b in 0..=a {
            let (xs, ys): (Vec<f64>, Vec<f64>) = by_block[a]
                .iter()
                .filter_map(|(k, &x)| by_block[b].get(k).map(|&y| (x, y)))
                .unzip();
            let rho = pearson(&xs, &ys).map(|r| if a == b { 1.0 } else { r });
            entries[a][b] = rho;
            entries[b][a] = rho;
        }
    }
    BlockCorrelationMatrix {
        series_kind: kind,
        order_type: series.order_type,
        entries,
    }
}
