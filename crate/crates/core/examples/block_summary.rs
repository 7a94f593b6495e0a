// Annualised mean and sd, skewness, kurtosis and the KS normality check for
// each 3-hour block of a synthetic week with a volatility profile.

use std::error::Error;

use fxseason::sampler::{Calendar, DEFAULT_PERIODS_PER_YEAR};
use fxseason::stats::summarize;
use fxseason::synth::{gen_seasonal_week, BaseDist, SeasonProfile};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let profile = SeasonProfile {
        block_scale: vec![0.02, 0.02, 0.04, 0.06, 0.06, 0.04, 0.02, 0.01],
        base_dist: BaseDist::StudentT { nu: 4.0 },
        seed: 1,
    };
    let week = gen_seasonal_week(&profile)?;
    let cal = Calendar::default();
    println!("block    n   mean%   sd%     skew    kurt   ks");
    for b in 0..cal.blocks_per_day() {
        let xs: Vec<f64> = week.in_block(b as u32).map(|o| o.r).collect();
        let s = summarize(&xs, DEFAULT_PERIODS_PER_YEAR)?;
        let ks = s.ks.map_or("-".to_string(), |k| {
            format!("{:.3}{}", k.stat, if k.significant_5pct { "*" } else { "" })
        });
        println!(
            "{:<6} {:>4} {:>7.2} {:>6.2} {:>7.3} {:>7.3}  {ks}",
            cal.block_name(b),
            s.n,
            s.mean_ann_pct,
            s.sd_ann_pct,
            s.skewness,
            s.kurtosis
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
