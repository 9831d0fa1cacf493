//! Packing measure for harmonic weights: copy the periodic anchor (01)^∞ on
//! sparse blocks and sample Parry-random words on the dense ones. Weighted
//! averages stay near the anchor's value while the local entropy at the
//! block ends approaches the topological entropy.

use weighted_birkhoff::averaging::average_trace;
use weighted_birkhoff::measures::{perturbation_bound, Anchor, PackingScheme};
use weighted_birkhoff::potential::Potential;
use weighted_birkhoff::sft::Sft;
use weighted_birkhoff::weights::{build_ubar_schedule, Index, ScheduleOptions, Thinning, WeightSequence};

fn main() -> weighted_birkhoff::Result<()> {
    let s = Sft::full_shift(2);
    let phi = Potential::indicator(&s, 1)?;
    let w = WeightSequence::harmonic();
    let opts = ScheduleOptions { thinning: Thinning::Consecutive, ..Default::default() };
    let sched = build_ubar_schedule(&w, 5, Index::Exact(1 << 40), &opts)?;
    let ps = PackingScheme::new(&s, Anchor::periodic(vec![0, 1]), &sched)?;
    println!("blocks: {:?}", ps.blocks());
    let ends: Vec<u64> = ps.blocks().iter().map(|b| b.1).collect();
    let word = ps.sample(ps.covered(), 42)?;
    let trace = average_trace(&phi.orbit(&word), &w, &ends[..ends.len() - 1])?;
    let local = ps.local_entropy_trace(&word, &ends.iter().map(|&m| m as usize).collect::<Vec<_>>())?;
    for (k, row) in trace.rows.iter().enumerate() {
        let bound = perturbation_bound(ps.blocks(), &w, &phi, 0.0, k + 1)?;
        println!(
            "m_{} = {:>7}: weighted {:.6} (|dev| <= {:.4}), local entropy {:.6}",
            k + 1,
            row.n,
            row.weighted,
            bound.total(),
            local[k].1
        );
    }
    println!("log 2 = {:.6}", 2f64.ln());
    Ok(())
}
