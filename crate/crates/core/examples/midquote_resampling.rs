// Replay limit orders onto the 20-second midquote grid, sample 5-minute
// bars and compute percent log-returns.

use std::error::Error;
use std::fs::File;

use fxseason::sampler::{build_midquote_grid, compute_returns, to_bars, Calendar};
use fxseason::tickstore::{filter_filled, parse_tick_file, split_by_type};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/golden_ticks.csv"
    );
    let events = filter_filled(&parse_tick_file(File::open(path)?)?);
    let (limit, _) = split_by_type(&events);

    let calendar = Calendar::default();
    let grid = build_midquote_grid(&limit, &calendar, 20)?;
    let quoted = grid.points.iter().filter(|p| p.midquote.is_some()).count();
    println!(
        "{} grid points, {} with a midquote",
        grid.points.len(),
        quoted
    );

    let bars = to_bars(&grid, &calendar)?;
    let returns = compute_returns(&bars)?;
    println!("{} bars, {} returns", bars.bars.len(), returns.values.len());
    for r in returns.values.iter().filter(|r| r.r != 0.0).take(5) {
        let l = r.label;
        println!(
            "  day {} block {} slot {}: {:+.5}%",
            l.day, l.block, l.slot, r.r
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
