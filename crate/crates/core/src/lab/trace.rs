//! Claim-to-check traceability matrix.

use serde::Serialize;

use crate::lab::config::CheckId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceStatus {
    Mapped,
    /// The claim's check is not available in this build or run.
    Missing,
    OutOfScope,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceRow {
    pub claim: &'static str,
    pub statement: &'static str,
    pub check: Option<CheckId>,
    pub operation: Option<&'static str>,
    pub status: TraceStatus,
}

const CLAIMS: [(&str, &str, Option<CheckId>); 18] = [
    ("weighted gauge", "bisection gauge equals the closed forms on ball, polydisk, ellipsoid", Some(CheckId::ClosedForm)),
    ("weighted homogeneity", "h(λ^{d_1} z_1, ..., λ^{d_n} z_n) = |λ| h(z)", Some(CheckId::Homogeneity)),
    ("balanced scaling", "sublevel sets of a balanced domain are dilates r Ω", Some(CheckId::Homogeneity)),
    ("triangle-type bound", "h(αz + (1-α)w) <= h(z) + h(w) on convex weighted-balanced domains", Some(CheckId::Triangle)),
    ("metric sandwich", "atanh h^L <= c(0,z) = k(0,z) <= atanh h on convex weighted-balanced domains", Some(CheckId::SandwichMetric)),
    ("gauge versus Lempert function", "h(z) <= B_{aΩ} (tanh k_{aΩ}(0,z))^{1/L} on aΩ", Some(CheckId::LempertBound)),
    ("sublevel limit", "Ω^d(r) is covered by Ω^d(r_k) for r_k increasing to r", Some(CheckId::SublevelLimit)),
    ("product sublevel sets", "the sublevel set of a product is the product of sublevel sets", Some(CheckId::SublevelLimit)),
    ("product lower bound, balanced", "S(a) >= min_i S_i(a_i) for products of balanced pairs", Some(CheckId::ProductLowerBound)),
    ("product lower bound, weighted", "S^d(a) >= min_i S^{d^i}(a_i) for products of weighted pairs", Some(CheckId::ProductLowerBound)),
    ("continuity modulus", "|S(z_1) - S(z_2)| <= (B_{-Ω} + B_{2Ω}) (tanh k_D(z_1,z_2))^{1/L}", Some(CheckId::Continuity)),
    ("exhaustion convergence", "squeezing functions of an exhaustion converge locally uniformly", Some(CheckId::Exhaustion)),
    ("punctured balanced exactness", "S(z) = h(z) on a punctured convex balanced domain", Some(CheckId::PuncturedExact)),
    ("punctured weighted sandwich", "S(z)^L <= h(z) <= S(z)^{1/L} on a punctured convex weighted-balanced domain", Some(CheckId::PuncturedExact)),
    ("Fridman lower sandwich", "S(a)^L <= h^c_D(a)", Some(CheckId::FridmanSqueeze)),
    ("Fridman sandwich at the origin", "S(0)^L <= h^c_D(0) <= S(0)^{1/L} for balanced convex pairs", Some(CheckId::FridmanSqueeze)),
    ("existence of extremal maps", "normal-family (Montel) compactness argument; non-constructive", None),
    ("regularity of general domains", "holomorphic homogeneous regularity verdicts beyond lower-bound evidence", None),
];

/// Matrix rows; claims whose check is not in `available` are flagged missing.
pub fn traceability_matrix(available: &[CheckId]) -> Vec<TraceRow> {
    CLAIMS
        .iter()
        .map(|&(claim, statement, check)| TraceRow {
            claim,
            statement,
            check,
            operation: check.map(CheckId::operation),
            status: match check {
                None => TraceStatus::OutOfScope,
                Some(c) if available.contains(&c) => TraceStatus::Mapped,
                Some(_) => TraceStatus::Missing,
            },
        })
        .collect()
}

pub fn render_markdown(rows: &[TraceRow]) -> String {
    let mut out = String::from("| claim | statement | check | operation | status |\n|---|---|---|---|---|\n");
    for r in rows {
        let status = match r.status {
            TraceStatus::Mapped => "mapped",
            TraceStatus::Missing => "MISSING",
            TraceStatus::OutOfScope => "out of scope",
        };
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            r.claim,
            r.statement,
            r.check.map_or("-", CheckId::name),
            r.operation.unwrap_or("-"),
            status
        ));
    }
    out
}
