//! Plain versus weighted averages of bounded sequences: the summation by
//! parts identity, the tail sandwich `liminf plain ≤ liminf weighted ≤
//! limsup weighted ≤ limsup plain` (checked on `[N/2, N]` with tolerance
//! `10B/√N`), and the reverse bounds available when the asymptotic ratio is
//! bounded.

use rand::Rng;
use weighted_birkhoff::averaging::{
    average_trace, bar_reverse_bounds, sandwich_bounds, summation_by_parts_check, ExplicitSequence, FnSequence,
};
use weighted_birkhoff::numeric::seeded_rng;
use weighted_birkhoff::weights::WeightSequence;

fn main() -> weighted_birkhoff::Result<()> {
    let n = 1_000_000;
    let mut rng = seeded_rng(7, 0);
    let a = ExplicitSequence::with_bound((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(), 1.0)?;
    let w = WeightSequence::power(-0.5)?;
    println!("summation by parts residual at 10^4: {:.3e}", summation_by_parts_check(&a, &w, 10_000)?);

    for w in [WeightSequence::constant(), WeightSequence::power(-0.5)?, WeightSequence::harmonic()] {
        let s = sandwich_bounds(&a, &w, n)?;
        // harmonic averages of noise fluctuate on the scale 1/ln N, far above 10/√N
        println!(
            "{:<14} plain [{:+.5}, {:+.5}] weighted [{:+.5}, {:+.5}] violation {:+.2e} vs tolerance {:.0e}",
            w.label(),
            s.liminf_plain,
            s.limsup_plain,
            s.liminf_weighted,
            s.limsup_weighted,
            s.violation(),
            s.tolerance
        );
    }
    let rb = bar_reverse_bounds(&a, &WeightSequence::power(-0.5)?, n)?;
    println!("reverse bounds with G = {}: upper {} lower {}", rb.g, rb.upper_holds, rb.lower_holds);

    // slowly switching ±1 blocks: harmonic weights damp the plain oscillation
    let drift = FnSequence::new(1.0, |k| if ((k as f64 + 1.0).ln() / 2.0) as u64 % 2 == 0 { 1.0 } else { -1.0 });
    let trace = average_trace(&drift, &WeightSequence::harmonic(), &[10, 100, 1_000, 10_000, 100_000, n])?;
    trace.write_csv(std::io::stdout())?;
    Ok(())
}
