//! Experiment configs: one JSON document per run, unknown keys rejected.

use std::path::Path;

use limitlab::kcycles::SymbolFunction;
use limitlab::GroupSpec;
use num_complex::Complex64 as C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig<P> {
    pub experiment: String,
    #[serde(default)]
    pub group: Option<GroupSpec>,
    /// Required whenever the run samples at random.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: P,
}

/// Parsed config plus its canonical form and SHA-256.
pub struct Loaded<P> {
    pub config: ExperimentConfig<P>,
    pub canonical: Value,
    pub hash: String,
}

/// Reads and validates a config. Syntax and schema errors carry the line
/// and column from the parser.
pub fn load<P: DeserializeOwned + Default>(path: &Path) -> Result<Loaded<P>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse<P: DeserializeOwned + Default>(text: &str) -> Result<Loaded<P>, CliError> {
    let canonical: Value = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid JSON: {e}")))?;
    let config: ExperimentConfig<P> =
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
    // serde_json maps are sorted, so this is insensitive to key order and spacing.
    let bytes = serde_json::to_vec(&canonical).expect("a parsed value serializes");
    let hash = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    Ok(Loaded { config, canonical, hash })
}

impl<P> ExperimentConfig<P> {
    pub fn group(&self) -> Result<&GroupSpec, CliError> {
        self.group.as_ref().ok_or_else(|| CliError::Usage("config field `group` is required for this subcommand".into()))
    }

    pub fn require_seed(&self, why: &str) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Usage(format!("config field `seed` is required: {why}")))
    }
}

/// Symbols available from configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SymbolSpec {
    /// `[re, im]`
    Constant { value: [f64; 2] },
    FirstCoordinate,
    ExpITheta,
    /// `sum_{j=1}^{terms} 2^{-j alpha} cos(2^j theta)`
    Weierstrass { terms: u32, alpha: f64 },
}

impl SymbolSpec {
    /// The symbol on the unit sphere of `R^{dim+1}`.
    pub fn build(&self, dim: usize) -> Result<SymbolFunction, CliError> {
        let circle_only = |name: &str| {
            if dim != 1 {
                Err(CliError::Usage(format!("symbol `{name}` is defined on the circle only")))
            } else {
                Ok(())
            }
        };
        Ok(match self {
            SymbolSpec::Constant { value } => SymbolFunction::constant(dim, C64::new(value[0], value[1])),
            SymbolSpec::FirstCoordinate => SymbolFunction::first_coordinate(dim),
            SymbolSpec::ExpITheta => {
                circle_only("exp-i-theta")?;
                SymbolFunction::exp_i_theta()
            }
            SymbolSpec::Weierstrass { terms, alpha } => {
                circle_only("weierstrass")?;
                if *terms == 0 || *terms > 30 || !(*alpha > 0.0) {
                    return Err(CliError::Usage("weierstrass needs 1 <= terms <= 30 and alpha > 0".into()));
                }
                SymbolFunction::weierstrass(*terms, *alpha)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Default, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        #[serde(default)]
        depth: Option<usize>,
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let err = parse::<P>("{\"experiment\": \"x\",\n \"params\": {\"depht\": 3}}").err().unwrap();
        let msg = err.to_string();
        assert!(msg.contains("depht") && msg.contains("line 2"), "{msg}");
        assert!(parse::<P>("{\"experiment\": \"x\", \"extra\": 1}").is_err());
    }

    #[test]
    fn hash_ignores_layout() {
        let a = parse::<P>("{\"experiment\": \"x\", \"params\": {\"depth\": 3}}").unwrap();
        let b = parse::<P>("{\"params\":{\"depth\":3},\n\"experiment\":\"x\"}").unwrap();
        assert_eq!(a.hash, b.hash);
        assert_eq!(a.config.params.depth, Some(3));
        let c = parse::<P>("{\"experiment\": \"x\", \"params\": {\"depth\": 4}}").unwrap();
        assert_ne!(a.hash, c.hash);
    }

    #[test]
    fn seed_is_enforced_on_request() {
        let a = parse::<P>("{\"experiment\": \"x\"}").unwrap();
        assert!(a.config.require_seed("random elements").is_err());
    }
}
