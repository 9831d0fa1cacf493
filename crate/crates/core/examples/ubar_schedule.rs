//! Record schedules `(n_k, m_k)` for harmonic weights. Dyadic thinning picks
//! entries whose three certificates are all at most `2^{-k}`; consecutive
//! thinning packs the records as tightly as possible.

use weighted_birkhoff::weights::{build_ubar_schedule, Index, ScheduleOptions, Thinning, WeightSequence};

fn main() -> weighted_birkhoff::Result<()> {
    let w = WeightSequence::harmonic();
    for thinning in [Thinning::Dyadic, Thinning::Consecutive] {
        let opts = ScheduleOptions { thinning, ..Default::default() };
        let sched = build_ubar_schedule(&w, 6, Index::Log(1e5), &opts)?;
        println!("{thinning:?} (certified: {})", sched.is_certified());
        for (k, e) in sched.entries.iter().enumerate() {
            let c = e.certificate;
            println!(
                "  k={} n={} m={}  k/S_n={:.3e}  (S_m-S_n)/S_m={:.3e}  n/m={:.3e}",
                k + 1,
                e.n,
                e.m,
                c.count_over_sum,
                c.block_mass,
                c.index_ratio
            );
        }
    }
    // bounded-ratio weights admit no schedule
    let refused = build_ubar_schedule(&WeightSequence::power(-0.5)?, 2, Index::Exact(1 << 20), &ScheduleOptions::default());
    println!("power(-0.5): {}", refused.unwrap_err());
    Ok(())
}
