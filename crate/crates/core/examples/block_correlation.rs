// Cross-block correlation of returns and of absolute returns. Blocks 0 and 1
// share a shock at each (day, slot), so their cell stands out.

use std::error::Error;

use fxseason::sampler::ReturnObs;
use fxseason::stats::{cross_block_correlation, SeriesKind};
use fxseason::synth::{gen_gaussian, gen_seasonal_week, BaseDist, SeasonProfile};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut week = gen_seasonal_week(&SeasonProfile::flat(
        BaseDist::Gaussian {
            mu: 0.0,
            sigma: 0.05,
        },
        2,
    ))?;
    let shocks = gen_gaussian(0.0, 0.1, 5 * 36, 3)?;
    for v in week.values.iter_mut().filter(|v| v.label.block < 2) {
        let r = v.r + shocks[(v.label.day * 36 + v.label.slot) as usize];
        *v = ReturnObs::new(r, v.label);
    }

    for kind in SeriesKind::ALL {
        let m = cross_block_correlation(&week, kind, 8);
        println!("{}:", kind.as_str());
        for a in 0..m.n_blocks() {
            let row: Vec<String> = (0..=a)
                .map(|b| m.get(a, b).map_or("   NA".into(), |r| format!("{r:5.2}")))
                .collect();
            println!("  {}", row.join(" "));
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
