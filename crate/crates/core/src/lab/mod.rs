//! Suite orchestration: runs every configured check on every configured
//! domain with independent seeds and collects results and certificates.

pub mod checks;
pub mod config;
pub mod report;
pub mod trace;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use checks::{CheckOutcome, Status};
pub use config::{CheckId, DomainEntry, SuiteConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckResult {
    pub check_id: CheckId,
    pub domain_id: String,
    pub status: Status,
    pub worst_margin: f64,
    pub samples: usize,
    pub seed_chain: String,
    pub elapsed_ms: f64,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CertificateRecord {
    pub check_id: CheckId,
    pub domain_id: String,
    pub certificate: serde_json::Value,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteOutcome {
    pub results: Vec<CheckResult>,
    pub certificates: Vec<CertificateRecord>,
}

impl SuiteOutcome {
    pub fn has_failure(&self) -> bool {
        self.results.iter().any(|r| r.status == Status::Fail)
    }

    /// 0 without failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.has_failure())
    }
}

/// Seed of one (domain, check) pair, independent of scheduling.
pub fn derive_seed(seed: u64, domain_id: &str, check: CheckId) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(domain_id.as_bytes());
    h.update([0u8]);
    h.update(check.name().as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

pub fn seed_chain(seed: u64, domain_id: &str, check: CheckId) -> String {
    format!("{seed}/{domain_id}/{check}:{:016x}", derive_seed(seed, domain_id, check))
}

pub fn run_suite(cfg: &SuiteConfig) -> SuiteOutcome {
    let pairs: Vec<(&DomainEntry, CheckId)> = cfg
        .domains
        .iter()
        .flat_map(|e| cfg.checks.iter().map(move |c| (e, *c)))
        .collect();
    let done: Vec<(CheckResult, Vec<CertificateRecord>)> = pairs
        .par_iter()
        .map(|(entry, check)| {
            let start = Instant::now();
            let input = checks::CheckInput {
                entry,
                samples: cfg.samples,
                tol: cfg.tol,
                budget: cfg.budget,
                seed: derive_seed(cfg.seed, &entry.id, *check),
            };
            let out = checks::run_check(*check, &input);
            let result = CheckResult {
                check_id: *check,
                domain_id: entry.id.clone(),
                status: out.status,
                worst_margin: out.worst_margin,
                samples: out.samples,
                seed_chain: seed_chain(cfg.seed, &entry.id, *check),
                elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
                note: out.note,
            };
            let certs = out
                .certificates
                .into_iter()
                .map(|c| CertificateRecord { check_id: *check, domain_id: entry.id.clone(), certificate: c })
                .collect();
            (result, certs)
        })
        .collect();
    let mut outcome = SuiteOutcome::default();
    for (r, c) in done {
        outcome.results.push(r);
        outcome.certificates.extend(c);
    }
    outcome
}
