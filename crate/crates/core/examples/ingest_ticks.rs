// Parse a tick file, drop unfilled orders and split it into limit and
// market streams. Pass a path to use your own file.

use std::error::Error;
use std::fs::File;
use std::path::PathBuf;

use fxseason::tickstore::{filter_filled, parse_tick_file_with, split_by_type, ParseOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    run(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden_ticks.csv"))
}

fn run(path: PathBuf) -> Result<(), Box<dyn Error>> {
    let parsed = parse_tick_file_with(
        File::open(&path)?,
        ParseOptions {
            skip_bad_rows: true,
        },
    )?;
    println!(
        "{}: {} rows, {} skipped",
        path.display(),
        parsed.ticks.len(),
        parsed.skipped.len()
    );

    let events = parsed.into_events();
    let filled = filter_filled(&events);
    let (limit, market) = split_by_type(&filled);
    println!(
        "filled {} of {}: {} limit, {} market",
        filled.len(),
        events.len(),
        limit.len(),
        market.len()
    );
    for e in limit.events().iter().take(3) {
        println!(
            "  {} {} at {} cs, price {}",
            e.event_id, e.kind, e.entry_time, e.price
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    match std::env::args().nth(1) {
        Some(p) => run(p.into()),
        None => run_example(),
    }
}
