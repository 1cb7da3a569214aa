use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{DomainSpec, MultiIndex};
use crate::error::{DsqError, Result};
use crate::search::SearchBudget;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckId {
    ClosedForm,
    Homogeneity,
    Triangle,
    SandwichMetric,
    LempertBound,
    SublevelLimit,
    ProductLowerBound,
    Continuity,
    Exhaustion,
    PuncturedExact,
    FridmanSqueeze,
}

impl CheckId {
    pub const ALL: [CheckId; 11] = [
        CheckId::ClosedForm,
        CheckId::Homogeneity,
        CheckId::Triangle,
        CheckId::SandwichMetric,
        CheckId::LempertBound,
        CheckId::SublevelLimit,
        CheckId::ProductLowerBound,
        CheckId::Continuity,
        CheckId::Exhaustion,
        CheckId::PuncturedExact,
        CheckId::FridmanSqueeze,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::ClosedForm => "closed-form",
            CheckId::Homogeneity => "homogeneity",
            CheckId::Triangle => "triangle",
            CheckId::SandwichMetric => "sandwich-metric",
            CheckId::LempertBound => "lempert-bound",
            CheckId::SublevelLimit => "sublevel-limit",
            CheckId::ProductLowerBound => "product-lower-bound",
            CheckId::Continuity => "continuity",
            CheckId::Exhaustion => "exhaustion",
            CheckId::PuncturedExact => "punctured-exact",
            CheckId::FridmanSqueeze => "fridman-squeeze",
        }
    }

    /// The library operation a check exercises.
    pub fn operation(self) -> &'static str {
        match self {
            CheckId::ClosedForm => "minkowski::closed_form_gauge",
            CheckId::Homogeneity => "minkowski::d_minkowski",
            CheckId::Triangle => "minkowski::gauge_bracket",
            CheckId::SandwichMetric => "metrics::caratheodory_sandwich",
            CheckId::LempertBound => "metrics::lempert_lower_check",
            CheckId::SublevelLimit => "minkowski::sublevel_membership",
            CheckId::ProductLowerBound => "squeeze::product_lower_bound",
            CheckId::Continuity => "squeeze::continuity_modulus",
            CheckId::Exhaustion => "squeeze::exhaustion_sweep",
            CheckId::PuncturedExact => "squeeze::certify_lower_bound",
            CheckId::FridmanSqueeze => "fridman::sandwich_check_general",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = DsqError;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| DsqError::Contract(format!("unknown check id '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainEntry {
    pub id: String,
    pub domain: DomainSpec,
    /// Defaults to the canonical weights of the domain.
    #[serde(default)]
    pub d: Option<MultiIndex>,
}

impl DomainEntry {
    pub fn weights(&self) -> MultiIndex {
        self.d
            .clone()
            .or_else(|| self.domain.filled().canonical_dindex().cloned())
            .unwrap_or_else(|| MultiIndex::ones(self.domain.dim()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub format: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("dsqlab-out"), format: "csv".into() }
    }
}

fn default_samples() -> usize {
    1000
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub schema: Option<String>,
    pub domains: Vec<DomainEntry>,
    #[serde(default)]
    pub checks: Vec<CheckId>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub budget: SearchBudget,
    #[serde(default)]
    pub output: OutputSpec,
}

impl SuiteConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: SuiteConfig =
            serde_json::from_str(s).map_err(|e| DsqError::Contract(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DsqError::Contract(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(DsqError::Contract("tol must be positive".into()));
        }
        if self.samples == 0 {
            return Err(DsqError::Contract("samples must be positive".into()));
        }
        if self.output.format != "csv" {
            return Err(DsqError::Contract(format!("unsupported output format '{}'", self.output.format)));
        }
        let mut ids: Vec<&str> = self.domains.iter().map(|e| e.id.as_str()).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(DsqError::Contract("duplicate domain id".into()));
        }
        for e in &self.domains {
            let d = e.weights();
            if d.len() != e.domain.dim() {
                return Err(DsqError::Contract(format!("weights {d} do not fit domain '{}'", e.id)));
            }
            if !e.domain.filled().is_d_balanced(&d) {
                return Err(DsqError::Contract(format!("domain '{}' is not {d}-balanced", e.id)));
            }
        }
        Ok(())
    }
}
