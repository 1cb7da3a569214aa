//! CSV results and JSON report/certificate files.

use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::{DsqError, Result};
use crate::lab::{CheckResult, Status, SuiteConfig, SuiteOutcome};

pub const REPORT_SCHEMA: &str = "dsq-report/1";
pub const CERTIFICATES_SCHEMA: &str = "dsq-certificates/1";
pub const CSV_HEADER: [&str; 6] = ["checkId", "domainId", "status", "worstMargin", "samples", "seedChain"];

fn io_err(path: &Path, e: impl std::fmt::Display) -> DsqError {
    DsqError::Contract(format!("{}: {e}", path.display()))
}

fn margin_field(r: &CheckResult) -> String {
    if r.worst_margin.is_finite() {
        format!("{:.6e}", r.worst_margin)
    } else if r.worst_margin.is_nan() {
        String::new()
    } else {
        r.worst_margin.to_string()
    }
}

/// Result rows as CSV text; no timing data, so identical configs give
/// identical bytes.
pub fn csv_string(results: &[CheckResult]) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in results {
        w.write_record([
            r.check_id.name(),
            &r.domain_id,
            r.status.name(),
            &margin_field(r),
            &r.samples.to_string(),
            &r.seed_chain,
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportPaths {
    pub csv: PathBuf,
    pub report: PathBuf,
    pub certificates: PathBuf,
}

pub fn summary(outcome: &SuiteOutcome) -> serde_json::Value {
    let count = |s: Status| outcome.results.iter().filter(|r| r.status == s).count();
    json!({
        "pass": count(Status::Pass),
        "confirmed": count(Status::Confirmed),
        "inconclusive": count(Status::Inconclusive),
        "fail": count(Status::Fail),
        "skipped": count(Status::Skipped),
    })
}

pub fn write_reports(outcome: &SuiteOutcome, cfg: &SuiteConfig, dir: &Path) -> Result<ReportPaths> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let paths = ReportPaths {
        csv: dir.join("results.csv"),
        report: dir.join("report.json"),
        certificates: dir.join("certificates.json"),
    };
    std::fs::write(&paths.csv, csv_string(&outcome.results)).map_err(|e| io_err(&paths.csv, e))?;
    let report = json!({
        "schema": REPORT_SCHEMA,
        "config": cfg,
        "summary": summary(outcome),
        "results": outcome.results,
    });
    std::fs::write(&paths.report, serde_json::to_string_pretty(&report).expect("json"))
        .map_err(|e| io_err(&paths.report, e))?;
    let certs = json!({
        "schema": CERTIFICATES_SCHEMA,
        "items": outcome.certificates,
    });
    std::fs::write(&paths.certificates, serde_json::to_string_pretty(&certs).expect("json"))
        .map_err(|e| io_err(&paths.certificates, e))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::{CheckId, CheckResult};

    #[test]
    fn csv_has_header_and_rows() {
        let r = CheckResult {
            check_id: CheckId::Triangle,
            domain_id: "pd".into(),
            status: Status::Pass,
            worst_margin: -0.25,
            samples: 10,
            seed_chain: "1/pd/triangle:00".into(),
            elapsed_ms: 3.0,
            note: String::new(),
        };
        let s = csv_string(&[r.clone(), CheckResult { worst_margin: f64::NAN, status: Status::Skipped, ..r }]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "checkId,domainId,status,worstMargin,samples,seedChain");
        assert_eq!(lines[1], "triangle,pd,pass,-2.500000e-1,10,1/pd/triangle:00");
        assert_eq!(lines[2], "triangle,pd,skipped,,10,1/pd/triangle:00");
    }

    #[test]
    fn writes_three_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SuiteConfig::from_json(r#"{"domains":[]}"#).unwrap();
        let p = write_reports(&SuiteOutcome::default(), &cfg, dir.path()).unwrap();
        let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p.report).unwrap()).unwrap();
        assert_eq!(rep["schema"], REPORT_SCHEMA);
        let certs: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p.certificates).unwrap()).unwrap();
        assert_eq!(certs["schema"], CERTIFICATES_SCHEMA);
        assert!(std::fs::read_to_string(p.csv).unwrap().starts_with("checkId,"));
    }
}
