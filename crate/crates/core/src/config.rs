//! JSON loaders for shifts, potentials and weight families.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{Potential, PotentialSpec};
use crate::sft::{Sft, SftSpec};
use crate::weights::WeightSequence;

/// `{"family":"power","d":-0.5}`, `{"family":"harmonic"}`,
/// `{"family":"constant"}` or `{"family":"explicit","path":"weights.txt"}`
/// (one positive decimal per line, relative paths resolved against the spec
/// file's directory).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum WeightSpec {
    Constant,
    Harmonic,
    Power { d: f64 },
    Explicit { path: String },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn load_sft(path: impl AsRef<Path>) -> Result<Sft> {
    let path = path.as_ref();
    let spec: SftSpec = parse(path, &read(path)?)?;
    Sft::from_spec(spec)
}

pub fn load_potential(sft: &Sft, path: impl AsRef<Path>) -> Result<Potential> {
    let path = path.as_ref();
    let spec: PotentialSpec = parse(path, &read(path)?)?;
    Potential::from_spec(sft, &spec)
}

/// Parse whitespace-separated weights.
pub fn parse_weight_list(text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::Config(format!("bad weight {t:?}: {e}")))
        })
        .collect()
}

impl WeightSpec {
    /// Build the sequence; `base` resolves relative explicit-list paths.
    pub fn build(&self, base: Option<&Path>) -> Result<WeightSequence> {
        match self {
            WeightSpec::Constant => Ok(WeightSequence::constant()),
            WeightSpec::Harmonic => Ok(WeightSequence::harmonic()),
            WeightSpec::Power { d } => WeightSequence::power(*d),
            WeightSpec::Explicit { path } => {
                let p = Path::new(path);
                let full = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.to_path_buf(),
                };
                WeightSequence::explicit(parse_weight_list(&read(&full)?)?)
            }
        }
    }
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<WeightSequence> {
    let path = path.as_ref();
    let spec: WeightSpec = parse(path, &read(path)?)?;
    spec.build(path.parent())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_spec_forms() {
        let s: WeightSpec = serde_json::from_str(r#"{"family":"power","d":-0.5}"#).unwrap();
        assert_eq!(s, WeightSpec::Power { d: -0.5 });
        let s: WeightSpec = serde_json::from_str(r#"{"family":"harmonic"}"#).unwrap();
        assert_eq!(s.build(None).unwrap().label(), WeightSequence::harmonic().label());
        assert!(serde_json::from_str::<WeightSpec>(r#"{"family":"cubic"}"#).is_err());
    }

    #[test]
    fn explicit_list_relative_to_spec() {
        let dir = std::env::temp_dir().join(format!("wb-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("w.txt"), "1\n0.5\n0.25\n").unwrap();
        fs::write(dir.join("w.json"), r#"{"family":"explicit","path":"w.txt"}"#).unwrap();
        let w = load_weights(dir.join("w.json")).unwrap();
        assert_eq!(w.partial_sum(3).unwrap(), 1.75);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn missing_file_is_config_error() {
        assert!(matches!(load_sft("/nonexistent/sft.json"), Err(Error::Config(_))));
    }
}
