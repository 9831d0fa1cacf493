//! Classifies the built-in weight families by their asymptotic ratio
//! `S_{n+1} / ((n+1) s_n)`: bounded (with its limit `G`) or unbounded.

use weighted_birkhoff::weights::WeightSequence;

fn main() -> weighted_birkhoff::Result<()> {
    let families = [
        WeightSequence::constant(),
        WeightSequence::power(-0.2)?,
        WeightSequence::power(-0.5)?,
        WeightSequence::power(-0.9)?,
        WeightSequence::harmonic(),
    ];
    for w in &families {
        let diag = w.classify(1_000_000)?;
        println!("{:<16} {}", w.label(), diag.classification);
        for (n, r) in &diag.trend {
            println!("    n = {n:>8}  ratio = {r:.6}");
        }
    }
    // the harmonic ratio grows like the harmonic numbers
    let w = WeightSequence::harmonic();
    let n = 1_000_000;
    println!("harmonic ratio at 10^6: {:.6}, S_(n+1) = {:.6}", w.ratio(n)?, w.partial_sum(n + 1)?);
    Ok(())
}
