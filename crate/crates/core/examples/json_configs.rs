//! Shifts, potentials and weights described in JSON, as used by `wbirk`.

use weighted_birkhoff::config::WeightSpec;
use weighted_birkhoff::potential::{Potential, PotentialSpec};
use weighted_birkhoff::sft::{Sft, SftSpec};
use weighted_birkhoff::thermo::spectrum_endpoints;

fn main() -> weighted_birkhoff::Result<()> {
    let sft = Sft::from_spec(serde_json::from_str::<SftSpec>(r#"{"alphabet":["0","1"],"adjacency":[[1,1],[1,0]]}"#)?)?;
    let spec: PotentialSpec = serde_json::from_str(r#"{"depth":2,"values":{"00":0.0,"01":1.0,"10":2.0}}"#)?;
    let phi = Potential::from_spec(&sft, &spec)?;
    println!("depth {} potential, sup norm {}", phi.depth(), phi.norm());
    println!("spectrum domain {:?}", spectrum_endpoints(&sft, &phi)?);

    // a table missing an admissible word is rejected
    let bad: PotentialSpec = serde_json::from_str(r#"{"depth":2,"values":{"00":0.0,"01":1.0}}"#)?;
    println!("incomplete table: {}", Potential::from_spec(&sft, &bad).unwrap_err());

    for text in [r#"{"family":"power","d":-0.5}"#, r#"{"family":"harmonic"}"#] {
        let w = serde_json::from_str::<WeightSpec>(text)?.build(None)?;
        println!("{text} -> {} ({})", w.label(), w.classify(100_000)?.classification);
    }
    Ok(())
}
