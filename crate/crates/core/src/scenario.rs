//! JSON scenario files.
//!
//! ```json
//! {
//!   "n": 2,
//!   "k": 3,
//!   "edges": [[0, 1, 1.0]],
//!   "beta": 0.4,
//!   "delta": 0.1,
//!   "a_hat": [2.0, 1.0, 2.0, 1.0, 2.0, 1.0]
//! }
//! ```
//!
//! Node indices are 0-based; `intervene` lists 1-based activity labels.
//! `a_hat` is activity-major (all agents of activity 1 first).

use serde::{Deserialize, Serialize};

use crate::game::{ActivitySet, GameParams, UtilityVector};
use crate::graph::Network;
use crate::intervene::InterventionProblem;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub n: usize,
    pub k: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub beta: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub a_hat: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervene: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<Vec<f64>>,
}

impl Scenario {
    /// Parses and validates. Syntax errors carry the line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks shapes and ranges (not the regularity assumption).
    pub fn validate(&self) -> Result<()> {
        let bad =
            |field: &str, msg: String| Err(Error::Scenario(format!("field `{field}`: {msg}")));
        if self.n == 0 {
            return bad("n", "must be at least 1".into());
        }
        if self.k == 0 {
            return bad("k", "must be at least 1".into());
        }
        for (idx, &(i, j, w)) in self.edges.iter().enumerate() {
            if i >= self.n || j >= self.n {
                return bad(
                    "edges",
                    format!(
                        "entry {idx} ({i}, {j}) references a node outside 0..{}",
                        self.n
                    ),
                );
            }
            if !w.is_finite() {
                return bad("edges", format!("entry {idx} has non-finite weight"));
            }
        }
        for (name, v) in [("beta", self.beta), ("delta", self.delta)] {
            if !v.is_finite() {
                return bad(name, "must be finite".into());
            }
        }
        if let Some(g) = self.gamma {
            if !g.is_finite() {
                return bad("gamma", "must be finite".into());
            }
        }
        if self.a_hat.len() != self.k * self.n {
            return bad(
                "a_hat",
                format!(
                    "expected k·n = {} values, got {}",
                    self.k * self.n,
                    self.a_hat.len()
                ),
            );
        }
        if self.a_hat.iter().any(|v| !v.is_finite()) {
            return bad("a_hat", "values must be finite".into());
        }
        if let Some(labels) = &self.intervene {
            if let Err(e) = ActivitySet::from_labels(self.k, labels) {
                return bad("intervene", e.to_string());
            }
        }
        if let Some(c) = self.budget {
            if !(c >= 0.0 && c.is_finite()) {
                return bad("budget", format!("must be finite and nonnegative, got {c}"));
            }
        }
        if let Some(costs) = &self.costs {
            if costs.len() != self.k {
                return bad(
                    "costs",
                    format!("expected {} values, got {}", self.k, costs.len()),
                );
            }
            if costs.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
                return bad("costs", "values must be positive and finite".into());
            }
        }
        if let Err(e) = self.network() {
            return bad("edges", e.to_string());
        }
        Ok(())
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("scenario serializes");
        out.push('\n');
        out
    }

    pub fn network(&self) -> Result<Network> {
        Network::from_edges(self.n, &self.edges)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(0.0)
    }

    pub fn params(&self) -> Result<GameParams> {
        GameParams::with_gamma(self.network()?, self.k, self.beta, self.delta, self.gamma())
    }

    pub fn a_hat(&self) -> Result<UtilityVector> {
        UtilityVector::from_slice(self.k, self.n, &self.a_hat)
    }

    pub fn activity_set(&self) -> Result<ActivitySet> {
        match &self.intervene {
            Some(labels) => ActivitySet::from_labels(self.k, labels),
            None => Ok(ActivitySet::all(self.k)),
        }
    }

    /// Intervention problem at `budget`, falling back to the file's budget.
    pub fn problem(&self, budget: Option<f64>) -> Result<InterventionProblem> {
        let c = budget.or(self.budget).ok_or_else(|| {
            Error::Scenario("no budget given on the command line or in the file".into())
        })?;
        let prob =
            InterventionProblem::new(self.params()?, self.a_hat()?, self.activity_set()?, c)?;
        match &self.costs {
            Some(costs) => prob.with_costs(costs.clone()),
            None => Ok(prob),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DYAD: &str = r#"{
  "n": 2,
  "k": 3,
  "edges": [[0, 1, 1.0]],
  "beta": 0.4,
  "delta": 0.1,
  "a_hat": [2.0, 1.0, 2.0, 1.0, 2.0, 1.0]
}"#;

    #[test]
    fn parse_and_build() {
        let s = Scenario::parse(DYAD).unwrap();
        let p = s.params().unwrap();
        assert_eq!((p.n(), p.k()), (2, 3));
        assert!(s.activity_set().unwrap().is_full());
        assert!(s.problem(None).is_err());
        assert_eq!(s.problem(Some(2.0)).unwrap().budget(), 2.0);
    }

    #[test]
    fn canonical_round_trip() {
        let s = Scenario::parse(DYAD).unwrap();
        let canon = s.to_canonical_string();
        let again = Scenario::parse(&canon).unwrap();
        assert_eq!(again, s);
        assert_eq!(again.to_canonical_string(), canon);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = Scenario::parse(&DYAD.replace("\"beta\"", "\"betta\""))
            .unwrap_err()
            .to_string();
        assert!(err.contains("betta") && err.contains("line"), "{err}");
        let err = Scenario::parse(&DYAD.replace("2.0, 1.0, 2.0, 1.0, 2.0, 1.0", "1.0"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("a_hat"), "{err}");
        let err = Scenario::parse(&DYAD.replace("[0, 1, 1.0]", "[0, 2, 1.0]"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("edges"), "{err}");
        let err =
            Scenario::parse(&DYAD.replace("\"delta\": 0.1", "\"delta\": 0.1, \"intervene\": [4]"))
                .unwrap_err()
                .to_string();
        assert!(err.contains("intervene"), "{err}");
    }
}
