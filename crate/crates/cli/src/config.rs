use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ghostvar_core::{BasisSpec, BasisTerm, Linkage, MlpConfig, Scenario};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ghost,
    Permutation,
    Omission,
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim() {
            "ghost" | "gh" => Ok(Method::Ghost),
            "perm" | "permutation" | "rp" => Ok(Method::Permutation),
            "omission" | "om" | "loco" => Ok(Method::Omission),
            other => Err(CliError::Config(format!("unknown method {other:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Ghost => "ghost",
            Method::Permutation => "permutation",
            Method::Omission => "omission",
        })
    }
}

/// Parses `ghost,perm,omission` or `all`; duplicates collapse, order is fixed.
pub fn parse_methods(s: &str) -> CliResult<Vec<Method>> {
    let mut out: Vec<Method> = if s.trim() == "all" {
        vec![Method::Ghost, Method::Permutation, Method::Omission]
    } else {
        s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect::<CliResult<_>>()?
    };
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        /// Separate test file; when present no splitting happens.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_path: Option<PathBuf>,
        response: String,
    },
    Scenario {
        id: Scenario,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n1: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n2: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitPolicy {
    Fraction { train: f64 },
    /// `n2 = None` takes all remaining rows.
    Sizes {
        n1: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n2: Option<usize>,
    },
}

impl Default for SplitPolicy {
    fn default() -> Self {
        SplitPolicy::Fraction { train: 0.7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Linear,
    /// `None` uses the scenario's oracle basis when there is one.
    Basis { basis: Option<BasisSpec> },
    Mlp { config: MlpConfig },
    External { command: Vec<String>, timeout_secs: f64, max_batch_rows: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub source: DataSource,
    pub model: ModelSpec,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub split: SplitPolicy,
    pub seed: u64,
    pub alpha: f64,
    pub eigen_threshold: f64,
    pub linkage: Linkage,
    /// Not part of the hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(source: DataSource, model: ModelSpec, methods: Vec<Method>, seed: u64) -> Self {
        Self {
            source,
            model,
            methods,
            split: SplitPolicy::default(),
            seed,
            alpha: 0.01,
            eigen_threshold: 0.01,
            linkage: Linkage::Average,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if let SplitPolicy::Fraction { train } = self.split {
            if !(train > 0.0 && train < 1.0) {
                return bad(format!("split fraction {train} not in (0, 1)"));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} not in (0, 1)", self.alpha));
        }
        if !(0.0..1.0).contains(&self.eigen_threshold) {
            return bad(format!("eigen threshold {} not in [0, 1)", self.eigen_threshold));
        }
        match &self.model {
            ModelSpec::External { command, timeout_secs, max_batch_rows } => {
                if command.is_empty() {
                    return bad("empty predictor command".into());
                }
                if !(*timeout_secs > 0.0) || *max_batch_rows == 0 {
                    return bad("predictor timeout and batch size must be positive".into());
                }
                if self.methods.contains(&Method::Omission) {
                    return bad("omission needs refits and is unavailable for external predictors".into());
                }
            }
            ModelSpec::Mlp { config } => {
                if config.hidden == 0 || config.epochs == 0 || !(config.learning_rate > 0.0) || config.decay < 0.0 {
                    return bad("MLP needs hidden >= 1, epochs >= 1, learning rate > 0, decay >= 0".into());
                }
            }
            ModelSpec::Basis { basis: None } => {
                if !matches!(self.source, DataSource::Scenario { id: Scenario::Ex2, .. }) {
                    return bad("a basis is required unless the data come from scenario ex2".into());
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Canonical JSON without the output directory.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.out_dir = None;
        serde_json::to_string(&c).expect("config serializes")
    }

    /// Hex SHA-256 of [`Self::canonical_json`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// Parses `cos:1,id:3,prod:2:3` (1-based column indices).
pub fn parse_basis(s: &str) -> CliResult<BasisSpec> {
    let bad = |t: &str| CliError::Config(format!("bad basis term {t:?}; use id:J, cos:J or prod:J:K"));
    let mut terms = Vec::new();
    for t in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let parts: Vec<&str> = t.split(':').collect();
        let idx = |k: usize| -> CliResult<usize> {
            let v: usize = parts.get(k).and_then(|v| v.parse().ok()).ok_or_else(|| bad(t))?;
            v.checked_sub(1).ok_or_else(|| bad(t))
        };
        let term = match (parts[0], parts.len()) {
            ("id", 2) => BasisTerm::Identity(idx(1)?),
            ("cos", 2) => BasisTerm::Cosine(idx(1)?),
            ("prod", 3) => BasisTerm::Product(idx(1)?, idx(2)?),
            _ => return Err(bad(t)),
        };
        terms.push(term);
    }
    if terms.is_empty() {
        return Err(CliError::Config("empty basis".into()));
    }
    Ok(BasisSpec::new(terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> RunConfig {
        RunConfig::new(
            DataSource::Scenario { id: Scenario::Ex1, n1: None, n2: None },
            ModelSpec::Linear,
            vec![Method::Ghost],
            7,
        )
    }

    #[test]
    fn methods_parse_and_dedup() {
        assert_eq!(
            parse_methods("perm,ghost,perm").unwrap(),
            vec![Method::Ghost, Method::Permutation]
        );
        assert_eq!(parse_methods("all").unwrap().len(), 3);
        assert!(parse_methods("ghost,bogus").is_err());
        assert!(parse_methods("").unwrap().is_empty());
    }

    #[test]
    fn basis_parse() {
        let b = parse_basis("cos:1, prod:2:3,id:4").unwrap();
        assert_eq!(
            b.terms,
            vec![BasisTerm::Cosine(0), BasisTerm::Product(1, 2), BasisTerm::Identity(3)]
        );
        assert!(parse_basis("cos:0").is_err());
        assert!(parse_basis("sin:1").is_err());
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = cfg();
        let mut b = cfg();
        b.out_dir = Some("/tmp/x".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 8;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn validation() {
        assert!(cfg().validate().is_ok());
        let mut c = cfg();
        c.methods.clear();
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.split = SplitPolicy::Fraction { train: 1.0 };
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.model = ModelSpec::External { command: vec!["cat".into()], timeout_secs: 1.0, max_batch_rows: 10 };
        c.methods.push(Method::Omission);
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = cfg();
        let back: RunConfig = serde_json::from_str(&c.canonical_json()).unwrap();
        assert_eq!(back, c);
    }
}
