// Synthetic ticks in, every report out: the library form of `fxseason synth`
// followed by `fxseason all`. Output goes to a temporary directory unless a
// path is given.

use std::error::Error;
use std::path::PathBuf;

use fxseason::pipeline::{run_all, run_synth, RunConfig, SynthSettings};
use fxseason::tickstore::OrderType;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let tmp = tempfile::tempdir()?;
    run(tmp.path().into())
}

fn run(out: PathBuf) -> Result<(), Box<dyn Error>> {
    let synth = RunConfig {
        out_dir: out.join("synth"),
        seed: 4,
        synth: SynthSettings {
            block_scale: vec![0.02, 0.02, 0.04, 0.06, 0.06, 0.04, 0.02, 0.01],
            base_dist: "student_t:3".parse()?,
        },
        ..RunConfig::default()
    };
    run_synth(&synth)?;

    let cfg = RunConfig {
        inputs: vec![synth.out_dir.join("synth_ticks.csv")],
        order_types: vec![OrderType::Limit],
        out_dir: out.join("reports"),
        ..RunConfig::default()
    };
    let result = run_all(&cfg)?;
    for f in &result.metadata.outputs {
        println!("wrote {}", cfg.out_dir.join(f).display());
    }
    for w in &result.metadata.warnings {
        println!("warning: {w}");
    }
    if let Some(tails) = &result.tails {
        println!(
            "{} tail cells",
            tails.cells.iter().flatten().flatten().count()
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
