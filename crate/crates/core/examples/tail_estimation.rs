// Tail index of the common, lower and upper tails of a Student-t(3) sample,
// with the moment tests.

use std::error::Error;

use fxseason::evt::{estimate_sample, TailConfig, TailKind, TailOutcome, TailSample};
use fxseason::synth::gen_student_t;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let xs = gen_student_t(3.0, 4000, 7)?;
    let cfg = TailConfig::default();
    for kind in TailKind::ALL {
        let sample = TailSample::from_returns(kind, xs.iter().copied());
        match estimate_sample(&sample, &cfg)? {
            TailOutcome::Estimated(e) => println!(
                "{kind:<6} n={:<5} alpha={:.3} se={:.3} m*={:.1} t0={:.2} t2={:.2} t4={:.2} \
                 heavy={} var={} 4th={}",
                e.n,
                e.alpha,
                e.se_alpha,
                e.m_star,
                e.tests.t0,
                e.tests.t2,
                e.tests.t4,
                e.tests.heavy_tails,
                e.tests.finite_variance,
                e.tests.finite_fourth_moment
            ),
            TailOutcome::Excluded { n, min_n } => println!("{kind}: {n} < {min_n} observations"),
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
