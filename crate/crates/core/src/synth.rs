//! Seeded synthetic data with known tail indices.
//!
//! All draws come from ChaCha20 (`rand_chacha` 0.9). Seeds select the key;
//! independent substreams use the ChaCha stream id.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampler::{Calendar, ReturnObs, ReturnSeries, SlotLabel, DAYS_PER_WEEK};
use crate::tickstore::{Aggressor, Centis, OrderKind, OrderType, TickEvent};

/// Recorded in run metadata.
pub const RNG_ALGORITHM: &str =
    "ChaCha20 (rand_chacha 0.9), f64 uniforms in [0,1) from 53 random bits";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid parameter: {0}")]
    Domain(String),
}

/// Generator for one seeded stream.
pub fn rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Pareto variate by inversion: `scale * (1 - u)^(-1/alpha)`.
pub fn pareto_quantile(u: f64, alpha: f64, scale: f64) -> f64 {
    scale * (1.0 - u).powf(-1.0 / alpha)
}

fn check_pareto(alpha: f64, scale: f64) -> Result<(), SynthError> {
    if !(alpha > 0.0 && alpha.is_finite() && scale > 0.0 && scale.is_finite()) {
        return Err(SynthError::Domain(format!(
            "pareto needs alpha > 0 and scale > 0, got alpha={alpha}, scale={scale}"
        )));
    }
    Ok(())
}

fn check_nu(nu: f64) -> Result<(), SynthError> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(SynthError::Domain(format!(
            "student-t needs nu > 0, got {nu}"
        )));
    }
    Ok(())
}

pub fn gen_pareto(alpha: f64, scale: f64, n: usize, seed: u64) -> Result<Vec<f64>, SynthError> {
    check_pareto(alpha, scale)?;
    if n == 0 {
        return Err(SynthError::Domain("n must be at least 1".into()));
    }
    let mut r = rng(seed, 0);
    Ok((0..n)
        .map(|_| pareto_quantile(r.random::<f64>(), alpha, scale))
        .collect())
}

fn student_t_draw<R: Rng>(r: &mut R, nu: f64, chi2: &ChiSquared<f64>) -> f64 {
    let z: f64 = r.sample(StandardNormal);
    let v = chi2.sample(r);
    z / (v / nu).sqrt()
}

/// Student-t draws as `Z / sqrt(V / nu)` with `V ~ chi-square(nu)`.
pub fn gen_student_t(nu: f64, n: usize, seed: u64) -> Result<Vec<f64>, SynthError> {
    check_nu(nu)?;
    let chi2 = ChiSquared::new(nu).map_err(|e| SynthError::Domain(e.to_string()))?;
    let mut r = rng(seed, 0);
    Ok((0..n).map(|_| student_t_draw(&mut r, nu, &chi2)).collect())
}

pub fn gen_gaussian(mu: f64, sigma: f64, n: usize, seed: u64) -> Result<Vec<f64>, SynthError> {
    let dist = BaseDist::Gaussian { mu, sigma };
    dist.validate()?;
    let mut r = rng(seed, 0);
    Ok((0..n)
        .map(|_| mu + sigma * r.sample::<f64, _>(StandardNormal))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum BaseDist {
    Pareto { alpha: f64, scale: f64 },
    StudentT { nu: f64 },
    Gaussian { mu: f64, sigma: f64 },
}

impl BaseDist {
    pub fn validate(&self) -> Result<(), SynthError> {
        match *self {
            BaseDist::Pareto { alpha, scale } => check_pareto(alpha, scale),
            BaseDist::StudentT { nu } => check_nu(nu),
            BaseDist::Gaussian { mu, sigma } => {
                if mu.is_finite() && sigma > 0.0 && sigma.is_finite() {
                    Ok(())
                } else {
                    Err(SynthError::Domain(format!(
                        "gaussian needs finite mu and sigma > 0, got mu={mu}, sigma={sigma}"
                    )))
                }
            }
        }
    }
}

impl std::str::FromStr for BaseDist {
    type Err = SynthError;

    /// `pareto:ALPHA[:SCALE]`, `student_t:NU`, `gaussian[:MU:SIGMA]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64, SynthError> {
            parts[i]
                .parse()
                .map_err(|_| SynthError::Domain(format!("bad number `{}` in `{s}`", parts[i])))
        };
        let dist = match (parts[0], parts.len()) {
            ("pareto", 2) => BaseDist::Pareto {
                alpha: num(1)?,
                scale: 1.0,
            },
            ("pareto", 3) => BaseDist::Pareto {
                alpha: num(1)?,
                scale: num(2)?,
            },
            ("student_t", 2) => BaseDist::StudentT { nu: num(1)? },
            ("gaussian", 1) => BaseDist::Gaussian {
                mu: 0.0,
                sigma: 1.0,
            },
            ("gaussian", 3) => BaseDist::Gaussian {
                mu: num(1)?,
                sigma: num(2)?,
            },
            _ => {
                return Err(SynthError::Domain(format!(
                    "unrecognised distribution `{s}`"
                )))
            }
        };
        dist.validate()?;
        Ok(dist)
    }
}

/// Block multipliers and base law for a synthetic week.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonProfile {
    pub block_scale: Vec<f64>,
    pub base_dist: BaseDist,
    pub seed: u64,
}

impl SeasonProfile {
    pub fn flat(base_dist: BaseDist, seed: u64) -> Self {
        Self {
            block_scale: vec![1.0; 8],
            base_dist,
            seed,
        }
    }

    pub fn validate(&self, calendar: &Calendar) -> Result<(), SynthError> {
        if self.block_scale.len() != calendar.blocks_per_day() {
            return Err(SynthError::Domain(format!(
                "{} block multipliers for {} blocks",
                self.block_scale.len(),
                calendar.blocks_per_day()
            )));
        }
        if let Some(bad) = self
            .block_scale
            .iter()
            .find(|&&m| !(m > 0.0 && m.is_finite()))
        {
            return Err(SynthError::Domain(format!(
                "block multiplier {bad} is not positive"
            )));
        }
        self.base_dist.validate()
    }
}

/// One scaled draw per (day, block, slot) in time order, using the default
/// calendar.
pub fn gen_seasonal_week(profile: &SeasonProfile) -> Result<ReturnSeries, SynthError> {
    gen_seasonal_week_with(profile, &Calendar::default(), OrderType::Limit)
}

pub fn gen_seasonal_week_with(
    profile: &SeasonProfile,
    calendar: &Calendar,
    order_type: OrderType,
) -> Result<ReturnSeries, SynthError> {
    profile.validate(calendar)?;
    let mut r = rng(profile.seed, 0);
    let chi2 = match profile.base_dist {
        BaseDist::StudentT { nu } => {
            Some(ChiSquared::new(nu).map_err(|e| SynthError::Domain(e.to_string()))?)
        }
        _ => None,
    };
    let mut draw = || match profile.base_dist {
        BaseDist::Pareto { alpha, scale } => pareto_quantile(r.random::<f64>(), alpha, scale),
        BaseDist::StudentT { nu } => student_t_draw(&mut r, nu, chi2.as_ref().unwrap()),
        BaseDist::Gaussian { mu, sigma } => mu + sigma * r.sample::<f64, _>(StandardNormal),
    };

    let mut values = Vec::with_capacity(
        DAYS_PER_WEEK as usize * calendar.blocks_per_day() * calendar.slots_per_block(),
    );
    for day in 0..DAYS_PER_WEEK as u32 {
        for block in 0..calendar.blocks_per_day() as u32 {
            for slot in 0..calendar.slots_per_block() as u32 {
                let x = profile.block_scale[block as usize] * draw();
                values.push(ReturnObs::new(x, SlotLabel { day, block, slot }));
            }
        }
    }
    Ok(ReturnSeries { order_type, values })
}

/// Default starting price of synthetic paths, DEM per USD.
pub const SYNTH_START_PRICE: f64 = 1.76;
/// Relative half-spread placed around the synthetic path.
pub const SYNTH_HALF_SPREAD: f64 = 1e-4;

/// Renders a return series as limit-order ticks: one bid/ask pair at the
/// start of every grid interval, centred on the price path.
///
/// The first bar carries the starting price, so the first return of the
/// series cannot be recovered from the ticks; every later return is.
/// The series must be in time order with one observation per bar.
pub fn ticks_for_returns(
    series: &ReturnSeries,
    calendar: &Calendar,
    grid_interval_s: u64,
    start_price: f64,
) -> Result<Vec<TickEvent>, SynthError> {
    if grid_interval_s == 0 || !calendar.bar_interval_s.is_multiple_of(grid_interval_s) {
        return Err(SynthError::Domain(format!(
            "grid interval {grid_interval_s}s must divide the bar interval"
        )));
    }
    let per_bar = calendar.bar_interval_s / grid_interval_s;
    let mut events = Vec::with_capacity(series.values.len() * per_bar as usize * 2);
    let mut log_p = start_price.ln();
    for (j, obs) in series.values.iter().enumerate() {
        if j > 0 {
            log_p += obs.r / 100.0;
        }
        let p = log_p.exp();
        let bar_start = calendar.slot_start(obs.label);
        for k in 0..per_bar {
            let t = Centis(bar_start.0 + k * grid_interval_s * Centis::PER_SECOND);
            for (kind, price) in [
                (OrderKind::LimitBuy, p * (1.0 - SYNTH_HALF_SPREAD)),
                (OrderKind::LimitSell, p * (1.0 + SYNTH_HALF_SPREAD)),
            ] {
                events.push(TickEvent {
                    event_id: format!("S{}", events.len() + 1),
                    kind,
                    entry_time: t,
                    exit_time: Some(t),
                    price,
                    qty_available: 1000,
                    qty_traded: 1000,
                    aggressor: Aggressor::NotApplicable,
                });
            }
        }
    }
    Ok(events)
}
