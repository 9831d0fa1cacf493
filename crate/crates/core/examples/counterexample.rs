//! For harmonic weights, builds a ±1 block sequence whose weighted averages
//! tend to zero while the plain averages swing between +1 and -1, evaluated
//! in closed form at indices far beyond anything enumerable.

use weighted_birkhoff::averaging::make_counterexample;
use weighted_birkhoff::weights::{build_ubar_schedule, Index, ScheduleOptions, WeightSequence};

fn main() -> weighted_birkhoff::Result<()> {
    let w = WeightSequence::harmonic();
    let sched = build_ubar_schedule(&w, 6, Index::Log(1e5), &ScheduleOptions::default())?;
    let c = make_counterexample(&sched)?;
    println!("{:>2} {:>3} {:>22} {:>10} {:>10}", "k", "end", "index", "plain", "weighted");
    for e in c.endpoints() {
        let end = if e.closing { "m" } else { "n" };
        println!("{:>2} {:>3} {:>22} {:>+10.6} {:>+10.6}", e.k, end, e.index.to_string(), e.plain, e.weighted);
    }
    if let Some((n0, sup)) = c.weighted_settles(0.05) {
        println!("|weighted average| <= {sup:.4} from N0 = {n0} on");
    }
    Ok(())
}
