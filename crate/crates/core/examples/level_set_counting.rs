//! Exhaustive cylinder counting: the number of n-words whose average lies
//! within ε of α grows like e^{n H(α)}.

use weighted_birkhoff::potential::Potential;
use weighted_birkhoff::sft::Sft;
use weighted_birkhoff::verify::{count_level_cylinders, LevelSetQuery};
use weighted_birkhoff::weights::WeightSequence;

fn main() -> weighted_birkhoff::Result<()> {
    let s = Sft::full_shift(2);
    let phi = Potential::indicator(&s, 1)?;
    for (alpha, weights) in [(0.3, None), (0.5, None), (0.5, Some(WeightSequence::harmonic())), (1.2, None)] {
        let q = LevelSetQuery { alpha, eps: 0.05, depth_lo: 14, depth_hi: 20, weights: weights.clone() };
        let r = count_level_cylinders(&s, &phi, &q)?;
        let kind = weights.map_or("plain".to_string(), |w| w.label());
        println!(
            "α = {alpha} ({kind}): counts {:?}, slope {:.4}, H(α) = {:?}",
            r.counts, r.slope, r.spectrum
        );
    }
    let g = Sft::golden_mean();
    let q = LevelSetQuery { alpha: 0.6, eps: 0.05, depth_lo: 10, depth_hi: 20, weights: None };
    let r = count_level_cylinders(&g, &Potential::indicator(&g, 1)?, &q)?;
    println!("golden mean, α = 0.6: all counts zero: {}", r.all_zero());
    Ok(())
}
