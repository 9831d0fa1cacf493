//! Entropy spectrum `H(t)` of locally constant potentials via the Legendre
//! transform of the pressure, including the exact endpoints and the
//! depth-n approximation tower.

use weighted_birkhoff::numeric::binary_entropy;
use weighted_birkhoff::potential::{two_symbol_example, Potential};
use weighted_birkhoff::sft::Sft;
use weighted_birkhoff::thermo::{interior_grid, spectrum_curve, spectrum_endpoints, spectrum_tower};

fn main() -> weighted_birkhoff::Result<()> {
    let s = Sft::full_shift(2);
    let phi = Potential::indicator(&s, 1)?;
    let curve = spectrum_curve(&s, &phi, &interior_grid(0.0, 1.0, 9))?;
    for &(t, h) in &curve.samples {
        println!("t = {t:.2}  H = {h:.10}  binary entropy = {:.10}", binary_entropy(t));
    }

    let g = Sft::golden_mean();
    let (lo, hi) = spectrum_endpoints(&g, &Potential::indicator(&g, 1)?)?;
    println!("golden mean endpoints: [{lo}, {hi}]");

    let example = two_symbol_example(&s)?;
    let tower = spectrum_tower(&s, &example, &[1, 2], &interior_grid(0.0, 2.0, 7))?;
    for ((n, gap), ok) in tower.depths.iter().zip(tower.max_gaps()).zip(tower.bounds_hold()) {
        println!("depth {n}: max |H - H_n| = {gap:.6}, within 2 c(t) eps_n: {ok}");
    }
    tower.write_csv(std::io::stdout())?;
    Ok(())
}
