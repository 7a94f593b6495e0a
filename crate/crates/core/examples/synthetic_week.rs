// Generate a seasonal week and render it as limit-order ticks that the
// ingestion path can read back.

use std::error::Error;

use fxseason::sampler::Calendar;
use fxseason::synth::{
    gen_seasonal_week, ticks_for_returns, BaseDist, SeasonProfile, SYNTH_START_PRICE,
};
use fxseason::tickstore::write_tick_file;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let profile = SeasonProfile {
        block_scale: vec![1.0, 1.0, 2.0, 3.0, 3.0, 2.0, 1.0, 0.5],
        base_dist: "pareto:3".parse()?,
        seed: 11,
    };
    let week = gen_seasonal_week(&profile)?;
    println!(
        "{} returns over {} blocks",
        week.values.len(),
        profile.block_scale.len()
    );

    let flat = gen_seasonal_week(&SeasonProfile::flat(BaseDist::StudentT { nu: 3.0 }, 11))?;
    let ticks = ticks_for_returns(&flat, &Calendar::default(), 20, SYNTH_START_PRICE)?;
    let mut buf = Vec::new();
    write_tick_file(&mut buf, &ticks[..4])?;
    println!(
        "{} ticks; first rows:\n{}",
        ticks.len(),
        String::from_utf8(buf)?
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
