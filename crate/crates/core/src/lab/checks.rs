//! One function per check id. Each returns the worst observed value of the
//! checked inequality written as `lhs - rhs <= allowance`; negative values
//! are slack.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{weighted_action, DomainKind, DomainSpec, MultiIndex, Point, C64};
use crate::error::{DsqError, Result};
use crate::fridman::{fridman_lower_bound, sandwich_check_general, sandwich_check_origin, FridmanFamily, Verdict};
use crate::lab::config::{CheckId, DomainEntry};
use crate::metrics::{
    caratheodory_sandwich, invariant_distance, lempert_lower_check, model_chart, model_distance,
    scaled_origin_distance, DistanceKind, LemmaCheck,
};
use crate::minkowski::{classify, closed_form_gauge, gauge_unchecked, sup_bound, Bracket, Sublevel};
use crate::sampling::{interior_point, stream_rng, unit_disk_point, SampleRng};
use crate::search::SearchBudget;
use crate::squeeze::{
    certify_lower_bound, continuity_modulus, exhaustion_sweep, product_lower_bound, punctured_value, MapFamily,
};

/// Slack for comparisons against bisection-certified Fridman radii.
const FRIDMAN_TOL: f64 = 1e-6;
const SUP_SAMPLES: usize = 256;
const FRIDMAN_EVALS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Confirmed,
    Inconclusive,
    Fail,
    Skipped,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Confirmed => "confirmed",
            Status::Inconclusive => "inconclusive",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub status: Status,
    pub worst_margin: f64,
    pub samples: usize,
    pub note: String,
    pub certificates: Vec<serde_json::Value>,
}

impl CheckOutcome {
    fn skipped(note: impl Into<String>) -> Self {
        Self { status: Status::Skipped, worst_margin: f64::NAN, samples: 0, note: note.into(), certificates: vec![] }
    }

    fn judged(worst: f64, allowance: f64, samples: usize) -> Self {
        Self {
            status: if worst <= allowance { Status::Pass } else { Status::Fail },
            worst_margin: worst,
            samples,
            note: String::new(),
            certificates: vec![],
        }
    }
}

pub struct CheckInput<'a> {
    pub entry: &'a DomainEntry,
    pub samples: usize,
    pub tol: f64,
    pub budget: SearchBudget,
    pub seed: u64,
}

impl CheckInput<'_> {
    fn omega(&self) -> DomainSpec {
        self.entry.domain.filled()
    }

    fn rng(&self) -> SampleRng {
        stream_rng(self.seed, 0)
    }

    fn budget_for(&self, j: usize) -> SearchBudget {
        SearchBudget { seed: self.seed.wrapping_add(j as u64), ..self.budget }
    }
}

pub fn run_check(id: CheckId, input: &CheckInput) -> CheckOutcome {
    let r = match id {
        CheckId::ClosedForm => closed_form(input),
        CheckId::Homogeneity => homogeneity(input),
        CheckId::Triangle => triangle(input),
        CheckId::SandwichMetric => sandwich_metric(input),
        CheckId::LempertBound => lempert_bound(input),
        CheckId::SublevelLimit => sublevel_limit(input),
        CheckId::ProductLowerBound => product_bound(input),
        CheckId::Continuity => continuity(input),
        CheckId::Exhaustion => exhaustion(input),
        CheckId::PuncturedExact => punctured_exact(input),
        CheckId::FridmanSqueeze => fridman_squeeze(input),
    };
    match r {
        Ok(o) => o,
        Err(DsqError::Unsupported(m)) => CheckOutcome::skipped(m),
        Err(e) => CheckOutcome {
            status: Status::Fail,
            worst_margin: f64::NAN,
            samples: 0,
            note: e.to_string(),
            certificates: vec![],
        },
    }
}

fn require_model(omega: &DomainSpec) -> Result<()> {
    match model_chart(omega) {
        Some(c) if c.punctures.is_empty() => Ok(()),
        _ => Err(DsqError::Unsupported(format!("no exact distances on {}", omega.label()))),
    }
}

fn require_convex(omega: &DomainSpec) -> Result<()> {
    if omega.is_convex() {
        Ok(())
    } else {
        Err(DsqError::Unsupported(format!("{} is not convex", omega.label())))
    }
}

/// Points of `Ω`, every other one pushed out by a factor up to 3 so the
/// gauge is also exercised outside the domain.
fn mixed_point(omega: &DomainSpec, i: usize, rng: &mut SampleRng) -> Vec<C64> {
    let z = interior_point(omega, 0.25, rng);
    if i % 2 == 1 {
        let s = 3.0 * rng.random::<f64>();
        z.into_iter().map(|c| c * s).collect()
    } else {
        z
    }
}

fn closed_form(input: &CheckInput) -> Result<CheckOutcome> {
    let (om, d) = (input.omega(), input.entry.weights());
    if closed_form_gauge(&om, &d, &vec![C64::new(0.0, 0.0); om.dim()]).is_none() {
        return Err(DsqError::Unsupported(format!("no closed-form gauge on {}", om.label())));
    }
    let mut rng = input.rng();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..input.samples {
        let z = mixed_point(&om, i, &mut rng);
        let cf = closed_form_gauge(&om, &d, &z).expect("closed form available");
        let b = gauge_unchecked(&om, &d, &z, input.tol)?;
        worst = worst.max((b.mid() - cf).abs());
    }
    Ok(CheckOutcome::judged(worst, input.tol, input.samples))
}

fn homogeneity(input: &CheckInput) -> Result<CheckOutcome> {
    let (om, d) = (input.omega(), input.entry.weights());
    let ones = MultiIndex::ones(om.dim());
    let mut rng = input.rng();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..input.samples {
        let z = mixed_point(&om, i, &mut rng);
        let lam = unit_disk_point(&mut rng);
        let hz = gauge_unchecked(&om, &d, &z, input.tol)?;
        let hl = gauge_unchecked(&om, &d, &weighted_action(&z, &d, lam), input.tol)?;
        worst = worst.max(hl.separation(&hz.scaled(lam.norm())));
        if om.is_balanced() {
            let r: f64 = rng.random();
            let h1 = gauge_unchecked(&om, &ones, &z, input.tol)?;
            let zr: Vec<C64> = z.iter().map(|c| c * r).collect();
            let hr = gauge_unchecked(&om, &ones, &zr, input.tol)?;
            worst = worst.max(hr.separation(&h1.scaled(r)));
        }
    }
    Ok(CheckOutcome::judged(worst, 2.0 * input.tol, input.samples))
}

fn triangle(input: &CheckInput) -> Result<CheckOutcome> {
    let (om, d) = (input.omega(), input.entry.weights());
    require_convex(&om)?;
    let mut rng = input.rng();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..input.samples {
        let z = interior_point(&om, 0.25, &mut rng);
        let w = interior_point(&om, 0.25, &mut rng);
        let a: f64 = rng.random();
        let m: Vec<C64> = z.iter().zip(&w).map(|(x, y)| x * a + y * (1.0 - a)).collect();
        let lhs = gauge_unchecked(&om, &d, &m, input.tol)?.lo;
        let rhs = gauge_unchecked(&om, &d, &z, input.tol)?.hi + gauge_unchecked(&om, &d, &w, input.tol)?.hi;
        worst = worst.max(lhs - rhs);
    }
    Ok(CheckOutcome::judged(worst, 2.0 * input.tol, input.samples))
}

fn sandwich_metric(input: &CheckInput) -> Result<CheckOutcome> {
    let (om, d) = (input.omega(), input.entry.weights());
    require_model(&om)?;
    require_convex(&om)?;
    let origin = Point::zeros(om.dim());
    let mut rng = input.rng();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..input.samples {
        let z = Point(interior_point(&om, 0.25, &mut rng));
        let k = model_distance(&om, &origin, &z)?.tanh_distance;
        let s = caratheodory_sandwich(&om, &d, &z, input.tol)?.map_monotone(f64::tanh);
        worst = worst.max((s.lo - k).max(k - s.hi));
    }
    Ok(CheckOutcome::judged(worst, 2.0 * input.tol, input.samples))
}

fn lempert_bound(input: &CheckInput) -> Result<CheckOutcome> {
    let (om, d) = (input.omega(), input.entry.weights());
    require_model(&om)?;
    let mut rng = input.rng();
    let mut worst = f64::NEG_INFINITY;
    let per_scale = input.samples.div_ceil(2);
    for a in [1.0, 2.0] {
        let sb = sup_bound(&om, &d, a, SUP_SAMPLES, input.seed)?;
        let scaled = DomainSpec::scale(a, om.clone())?;
        for _ in 0..per_scale {
            let z = Point(interior_point(&scaled, 0.25, &mut rng));
            let k = scaled_origin_distance(&om, a, &z)?;
            match lempert_lower_check(&om, &d, &sb, &z, Some(k), input.tol)? {
                LemmaCheck::Holds { margin } | LemmaCheck::Violated { margin } => worst = worst.max(-margin),
                LemmaCheck::Skipped => {}
            }
        }
    }
    Ok(CheckOutcome::judged(worst, input.tol.max(1e-9), 2 * per_scale))
}

fn sublevel_limit(input: &CheckInput) -> Result<CheckOutcome> {
    let (om, d) = (input.omega(), input.entry.weights());
    let mut rng = input.rng();
    let mut violations = 0usize;
    let factors: Vec<(DomainSpec, MultiIndex, usize)> = match om.kind() {
        DomainKind::Product { factors } => {
            let mut off = 0;
            let mut out = vec![];
            for f in factors {
                out.push((f.clone(), d.slice(off, f.dim())?, off));
                off += f.dim();
            }
            out
        }
        _ => vec![],
    };
    for _ in 0..input.samples {
        let r = 0.2 + 0.8 * rng.random::<f64>();
        let u = interior_point(&om, 0.25, &mut rng);
        let z = weighted_action(&u, &d, C64::new(1.1 * r, 0.0));
        let h = gauge_unchecked(&om, &d, &z, input.tol)?;
        let at_r = classify(h, r);
        if at_r == Sublevel::Inside {
            let reached = (1..=50).any(|k| classify(h, r * (1.0 - 0.5f64.powi(k))) == Sublevel::Inside);
            if !reached {
                violations += 1;
            }
        }
        if !factors.is_empty() {
            let mut parts = Vec::with_capacity(factors.len());
            for (f, df, off) in &factors {
                let hf = gauge_unchecked(f, df, &z[*off..*off + f.dim()], input.tol)?;
                parts.push(classify(hf, r));
            }
            let all_in = parts.iter().all(|s| *s == Sublevel::Inside);
            let any_out = parts.iter().any(|s| *s == Sublevel::Outside);
            if (at_r == Sublevel::Inside && any_out) || (at_r == Sublevel::Outside && all_in) {
                violations += 1;
            }
        }
    }
    Ok(CheckOutcome::judged(violations as f64, 0.0, input.samples))
}

fn nonzero_point(domain: &DomainSpec, rng: &mut SampleRng) -> Point {
    loop {
        let z = interior_point(domain, 0.0, rng);
        if crate::domain::norm(&z) > 1e-6 {
            return Point(z);
        }
    }
}

fn product_bound(input: &CheckInput) -> Result<CheckOutcome> {
    let (om, d) = (input.omega(), input.entry.weights());
    let DomainKind::Product { factors } = om.kind() else {
        return Err(DsqError::Unsupported(format!("{} is not a product", om.label())));
    };
    require_convex(&om)?;
    let mut rng = input.rng();
    let anchors = input.samples.min(10);
    let mut worst = f64::NEG_INFINITY;
    let mut certificates = vec![];
    for j in 0..anchors {
        let budget = input.budget_for(j);
        let mut certs = vec![];
        let mut off = 0;
        for f in factors {
            let df = d.slice(off, f.dim())?;
            off += f.dim();
            let a = nonzero_point(f, &mut rng);
            let pf = DomainSpec::punctured(f.clone())?;
            certs.push(certify_lower_bound(&pf, f, &df, &a, MapFamily::Auto, &budget)?);
        }
        let min_r = certs.iter().map(|c| c.radius).fold(1.0, f64::min);
        let (r, pc) = product_lower_bound(&certs, budget.coverage_samples, budget.seed)?;
        let (img, cov) = pc.replay(budget.coverage_samples, budget.seed ^ 0x9e37_79b9_7f4a_7c15);
        worst = worst.max(min_r - r).max((img.failures + cov.failures) as f64);
        certificates.push(serde_json::to_value(&pc).expect("serializable"));
    }
    let mut out = CheckOutcome::judged(worst, 0.0, anchors);
    out.certificates = certificates;
    Ok(out)
}

fn continuity(input: &CheckInput) -> Result<CheckOutcome> {
    let (om, d) = (input.omega(), input.entry.weights());
    require_model(&om)?;
    require_convex(&om)?;
    let pd = DomainSpec::punctured(om.clone())?;
    let neg = sup_bound(&om, &d, -1.0, SUP_SAMPLES, input.seed)?;
    let two = sup_bound(&om, &d, 2.0, SUP_SAMPLES, input.seed)?;
    let mut rng = input.rng();
    let pairs = input.samples.min(500);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let z1 = nonzero_point(&pd, &mut rng);
        let z2 = nonzero_point(&pd, &mut rng);
        let s1 = punctured_value(&om, &d, &z1, input.tol)?;
        let s2 = punctured_value(&om, &d, &z2, input.tol)?;
        let kd = invariant_distance(&pd, DistanceKind::Kobayashi, &z1, &z2)?.distance;
        let modulus = continuity_modulus(&d, kd, &neg, &two);
        let gap = (s1.lo - s2.hi).max(s2.lo - s1.hi).max(0.0);
        worst = worst.max(gap - modulus);
    }
    Ok(CheckOutcome::judged(worst, input.tol, pairs))
}

fn exhaustion(input: &CheckInput) -> Result<CheckOutcome> {
    let (om, d) = (input.omega(), input.entry.weights());
    require_convex(&om)?;
    let radii: Vec<f64> = (2..=50).map(|k| 1.0 - 1.0 / k as f64).collect();
    let l = d.max_weight() as i32;
    let mut rng = input.rng();
    let anchors = input.samples.min(5);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..anchors {
        let u = nonzero_point(&om, &mut rng);
        let z = u.weighted(&d, C64::new(0.5, 0.0));
        let sweep = exhaustion_sweep(&om, &d, &z, &radii, input.tol)?;
        let defined: Vec<(f64, Bracket)> = radii
            .iter()
            .zip(&sweep.values)
            .filter_map(|(r, v)| v.map(|b| (*r, b)))
            .collect();
        for w in defined.windows(2) {
            let (prev, next) = (w[0].1, w[1].1);
            worst = worst.max((next.lo - prev.lo).max(next.hi - prev.hi));
        }
        let (rk, last) = *defined.last().expect("sweep has values");
        let gap = (last.lo - sweep.limit.lo).abs().max((last.hi - sweep.limit.hi).abs());
        worst = worst.max(gap - (rk.powi(-l) - 1.0));
    }
    Ok(CheckOutcome::judged(worst, 2.0 * input.tol, anchors))
}

fn punctured_exact(input: &CheckInput) -> Result<CheckOutcome> {
    let (om, d) = (input.omega(), input.entry.weights());
    require_convex(&om)?;
    let pd = DomainSpec::punctured(om.clone())?;
    let mut rng = input.rng();
    let anchors = input.samples.min(20);
    let mut worst = f64::NEG_INFINITY;
    let mut reached = true;
    let mut certificates = vec![];
    for j in 0..anchors {
        let z = nonzero_point(&pd, &mut rng);
        let v = punctured_value(&om, &d, &z, input.tol)?;
        match certify_lower_bound(&pd, &om, &d, &z, MapFamily::Auto, &input.budget_for(j)) {
            Ok(cert) => {
                worst = worst.max(cert.radius - v.hi);
                reached &= cert.radius >= v.lo - 1e-3;
                if j == 0 {
                    certificates.push(serde_json::to_value(&cert).expect("serializable"));
                }
            }
            Err(DsqError::EmptyFamily { .. }) => reached = false,
            Err(e) => return Err(e),
        }
    }
    let status = if worst > 1e-6 {
        Status::Fail
    } else if reached {
        Status::Pass
    } else {
        Status::Inconclusive
    };
    Ok(CheckOutcome { status, worst_margin: worst, samples: anchors, note: String::new(), certificates })
}

fn fridman_squeeze(input: &CheckInput) -> Result<CheckOutcome> {
    let (om, d) = (input.omega(), input.entry.weights());
    require_model(&om)?;
    require_convex(&om)?;
    let pd = DomainSpec::punctured(om.clone())?;
    let l = d.max_weight();
    let mut rng = input.rng();
    let anchors = input.samples.min(3);
    let mut reports = vec![];
    let mut certificates = vec![];
    for j in 0..anchors {
        let budget = input.budget_for(j);
        let a = nonzero_point(&pd, &mut rng);
        let s = punctured_value(&om, &d, &a, input.tol)?;
        // the chart-scale search is one-dimensional; a short budget suffices
        let fbudget = SearchBudget { max_evals: budget.max_evals.min(FRIDMAN_EVALS), ..budget };
        let mut best = fridman_lower_bound(&pd, &om, &a, &FridmanFamily::ChartScale, &fbudget).ok();
        if let Ok(sq) = certify_lower_bound(&pd, &om, &d, &a, MapFamily::Auto, &budget) {
            if let Ok(fc) = fridman_lower_bound(&pd, &om, &a, &FridmanFamily::SqueezePullback(Box::new(sq)), &fbudget) {
                if best.as_ref().is_none_or(|b| fc.tanh_radius > b.tanh_radius) {
                    best = Some(fc);
                }
            }
        }
        match best {
            Some(fc) => {
                reports.push(sandwich_check_general(&s, &fc, l, FRIDMAN_TOL));
                certificates.push(serde_json::to_value(&fc).expect("serializable"));
            }
            None => reports.push(crate::fridman::SandwichReport {
                verdict: Verdict::Inconclusive,
                required: s.lo.powi(l as i32),
                certified: 0.0,
                margin: -s.lo.powi(l as i32),
            }),
        }
    }
    // origin of the balanced pair (Ω/2, Ω)
    let half = DomainSpec::scale(0.5, om.clone())?;
    let origin = Point::zeros(om.dim());
    let sq = certify_lower_bound(&half, &om, &d, &origin, MapFamily::Affine, &input.budget)?;
    let fbudget = SearchBudget { max_evals: input.budget.max_evals.min(FRIDMAN_EVALS), ..input.budget };
    let fc = fridman_lower_bound(&half, &om, &origin, &FridmanFamily::ChartScale, &fbudget)?;
    reports.push(sandwich_check_origin(&Bracket::new(sq.radius, 1.0), &fc, &d, FRIDMAN_TOL));
    certificates.push(serde_json::to_value(&fc).expect("serializable"));

    let status = if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        Status::Fail
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        Status::Inconclusive
    } else {
        Status::Confirmed
    };
    let worst = reports.iter().map(|r| -r.margin).fold(f64::NEG_INFINITY, f64::max);
    Ok(CheckOutcome { status, worst_margin: worst, samples: reports.len(), note: String::new(), certificates })
}
