//! The golden mean shift: entropy, word counts, primitivity exponent,
//! connecting words, and samples from the measure of maximal entropy.

use weighted_birkhoff::sft::{parry_sample, Sft, SftSpec};

fn main() -> weighted_birkhoff::Result<()> {
    let spec: SftSpec = serde_json::from_str(r#"{"alphabet":["a","b"],"adjacency":[[1,1],[1,0]]}"#)?;
    let g = Sft::from_spec(spec)?;
    println!("h_top = {:.10}, lambda = {:.10}", g.topological_entropy(), g.perron_root());
    println!("A^r > 0 from r = {}", g.aperiodicity_exponent());
    let counts: Vec<u128> = (1..=12).map(|n| g.word_count_exact(n)).collect();
    println!("word counts: {counts:?}");

    let w = g.parse_word("abab")?;
    println!("{} admissible: {}", g.format_word(&w), g.is_admissible(&w));
    println!("bb admissible: {}", g.is_admissible(&[1, 1]));

    let conn = g.connectors();
    let joined = conn.concatenate(&g, &[g.parse_word("ab")?, g.parse_word("ba")?])?;
    println!("ab ++ ba via connectors: {}", g.format_word(&joined));

    let parry = g.parry();
    println!("Parry entropy = {:.10}", parry.entropy());
    for seed in 0..3 {
        println!("sample {seed}: {}", g.format_word(&parry_sample(&g, 40, seed)));
    }
    Ok(())
}
