//! Runs the bounded/unbounded split for weighted averages and the packing
//! experiment on the full 2-shift, printing each labelled assertion.

use std::io::stdout;

use weighted_birkhoff::measures::Anchor;
use weighted_birkhoff::potential::Potential;
use weighted_birkhoff::sft::Sft;
use weighted_birkhoff::verify::{run_packing_suite, run_limit_comparison_suite, PackingOptions, LimitComparisonOptions};
use weighted_birkhoff::weights::WeightSequence;

fn main() -> weighted_birkhoff::Result<()> {
    let opts = LimitComparisonOptions::default();
    for w in [WeightSequence::constant(), WeightSequence::power(-0.5)?, WeightSequence::harmonic()] {
        let report = run_limit_comparison_suite(&w, &opts)?;
        report.write_summary(stdout())?;
    }

    let s = Sft::full_shift(2);
    let phi = Potential::indicator(&s, 1)?;
    let packing = run_packing_suite(
        &s,
        &phi,
        &WeightSequence::harmonic(),
        &Anchor::periodic(vec![0, 1]),
        &PackingOptions { seeds: 10, ..Default::default() },
    )?;
    println!("blocks (n_k, m_k): {:?}", packing.blocks);
    packing.write_summary(stdout())?;
    Ok(())
}
