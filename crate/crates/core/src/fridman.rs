//! Lower bounds for the Fridman invariant built from Carathéodory balls, and
//! the consistency checks tying it to squeezing values.
//!
//! A certificate is an injective map `f` from a model domain `Ω` into `D`
//! with `f(0) = a`, and a tanh-radius `t` such that the Carathéodory ball of
//! `D` around `a` of that radius lies in `f(Ω)`. Balls are sampled through
//! the model chart of `D`; on punctured domains they are balls of the filled
//! domain, and a puncture inside the ball fails the check (the inverse map
//! would extend across it).

use serde::{Deserialize, Serialize};

use crate::domain::{DomainSpec, MultiIndex, Point, C64};
use crate::error::{contract, DsqError, Result};
use crate::holomap::HoloMap;
use crate::metrics::{model_chart, ModelChart};
use crate::minkowski::Bracket;
use crate::sampling::{interior_points, random_direction, stream_rng, SampleRng};
use crate::search::{maximize, SearchBudget};
use crate::squeeze::{Certificate, SampleRecord};

use rand::Rng;

pub const FRIDMAN_SCHEMA: &str = "dsq-fridman/1";

const BISECTION_TOL: f64 = 1e-10;
const INTERIOR_SAMPLES: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub enum FridmanFamily {
    /// `u -> chart_a(s u)`: the Carathéodory ball of tanh-radius `s`.
    ChartScale,
    /// `u -> f^{-1}(δ_r u)` for a squeezing certificate `(f, r)`.
    SqueezePullback(Box<Certificate>),
}

impl FridmanFamily {
    pub fn name(&self) -> &'static str {
        match self {
            FridmanFamily::ChartScale => "chart-scale",
            FridmanFamily::SqueezePullback(_) => "squeeze-pullback",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FridmanCertificate {
    pub schema: String,
    /// Model domain `Ω`, the source of the map.
    pub model: DomainSpec,
    pub domain: DomainSpec,
    pub map: HoloMap,
    pub center: Point,
    /// Hyperbolic units.
    pub radius: f64,
    pub tanh_radius: f64,
    pub ball_check: SampleRecord,
    pub image_check: SampleRecord,
    pub family: String,
    pub params: Vec<f64>,
}

impl FridmanCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    /// Ball check at the certified radius on fresh random samples.
    pub fn replay(&self, samples: usize, seed: u64) -> Result<SampleRecord> {
        let chart = domain_chart(&self.domain)?;
        let mut rng = stream_rng(seed, 7);
        let mut units = random_units(&chart, samples, &mut rng);
        units.extend(interior_units(&chart, samples, &mut rng));
        let failures = ball_failures(&self.domain, &self.model, &chart, &self.center.0, &self.map, self.tanh_radius, &units);
        Ok(SampleRecord { count: units.len(), seed, failures })
    }
}

fn domain_chart(domain: &DomainSpec) -> Result<ModelChart> {
    model_chart(domain).ok_or_else(|| {
        DsqError::Unsupported(format!("no computable Carathéodory balls on {}", domain.label()))
    })
}

fn block_vector(chart: &ModelChart, blocks: &[(Vec<C64>, f64)]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); chart.dim];
    for (f, (dir, s)) in chart.factors.iter().zip(blocks) {
        for (k, c) in dir.iter().enumerate() {
            out[f.offset + k] = c * *s;
        }
    }
    out
}

/// Unit chart vectors on the boundary of the product ball: one block at
/// norm 1, the others uniform inside.
fn random_units(chart: &ModelChart, count: usize, rng: &mut SampleRng) -> Vec<Vec<C64>> {
    let nb = chart.factors.len();
    (0..count)
        .map(|i| {
            let blocks: Vec<(Vec<C64>, f64)> = chart
                .factors
                .iter()
                .enumerate()
                .map(|(j, f)| {
                    let s = if j == i % nb { 1.0 } else { rng.random::<f64>().powf(1.0 / (2 * f.dim) as f64) };
                    (random_direction(f.dim, rng), s)
                })
                .collect();
            block_vector(chart, &blocks)
        })
        .collect()
}

fn interior_units(chart: &ModelChart, count: usize, rng: &mut SampleRng) -> Vec<Vec<C64>> {
    (0..count)
        .map(|_| {
            let blocks: Vec<(Vec<C64>, f64)> = chart
                .factors
                .iter()
                .map(|f| (random_direction(f.dim, rng), rng.random::<f64>().powf(1.0 / (2 * f.dim) as f64)))
                .collect();
            block_vector(chart, &blocks)
        })
        .collect()
}

/// Boundary and interior unit samples: an equally spaced circle in one
/// variable, random product-sphere points otherwise.
fn ball_units(chart: &ModelChart, boundary: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = stream_rng(seed, 6);
    let mut units = if chart.dim == 1 {
        let m = boundary.max(720);
        (0..m)
            .map(|k| vec![C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64)])
            .collect()
    } else {
        random_units(chart, boundary.max(2000), &mut rng)
    };
    units.extend(interior_units(chart, INTERIOR_SAMPLES, &mut rng));
    units
}

fn ball_miss(domain: &DomainSpec, model: &DomainSpec, chart: &ModelChart, a: &[C64], map: &HoloMap, t: f64, v: &[C64]) -> bool {
    let u: Vec<C64> = v.iter().map(|c| c * t).collect();
    let ok = chart
        .chart_point(a, &u)
        .is_some_and(|w| domain.contains(&w) && map.inverse(&w).is_some_and(|z| model.contains(&z)));
    !ok
}

fn holes_inside(chart: &ModelChart, a: &[C64], t: f64) -> usize {
    chart.punctures.iter().filter(|p| chart.tanh_distance(a, &p.0) < t).count()
}

/// Failed samples of the Carathéodory ball of tanh-radius `t` around `a`;
/// a puncture inside the filled ball counts as one failure.
fn ball_failures(
    domain: &DomainSpec,
    model: &DomainSpec,
    chart: &ModelChart,
    a: &[C64],
    map: &HoloMap,
    t: f64,
    units: &[Vec<C64>],
) -> usize {
    holes_inside(chart, a, t) + units.iter().filter(|v| ball_miss(domain, model, chart, a, map, t, v)).count()
}

fn ball_passes(
    domain: &DomainSpec,
    model: &DomainSpec,
    chart: &ModelChart,
    a: &[C64],
    map: &HoloMap,
    t: f64,
    units: &[Vec<C64>],
) -> bool {
    holes_inside(chart, a, t) == 0 && !units.iter().any(|v| ball_miss(domain, model, chart, a, map, t, v))
}

struct FridmanContext<'a> {
    domain: &'a DomainSpec,
    model: &'a DomainSpec,
    chart: ModelChart,
    center: &'a Point,
    units: Vec<Vec<C64>>,
    model_pts: Vec<Vec<C64>>,
    seed: u64,
}

impl FridmanContext<'_> {
    fn evaluate(&self, map: HoloMap, family: &str, params: &[f64]) -> std::result::Result<FridmanCertificate, String> {
        let a0 = map.apply(&vec![C64::new(0.0, 0.0); self.model.dim()]).ok_or("map undefined at 0")?;
        if crate::domain::norm(&a0.iter().zip(&self.center.0).map(|(x, y)| x - y).collect::<Vec<_>>()) > 1e-12 {
            return Err("map does not send 0 to the center".into());
        }
        let misses = self
            .model_pts
            .iter()
            .filter(|u| !map.apply(u).is_some_and(|w| self.domain.contains(&w)))
            .count();
        if misses > 0 {
            return Err(format!("{misses} sampled model points map outside the domain"));
        }
        // punctures must stay out of the image
        for p in &self.chart.punctures {
            if map.inverse(&p.0).is_some_and(|z| self.model.contains(&z)) {
                return Err("image contains a puncture".into());
            }
        }
        let passes = |t: f64| ball_passes(self.domain, self.model, &self.chart, &self.center.0, &map, t, &self.units);
        if !passes(1e-9) {
            return Err("no Carathéodory ball fits in the image".into());
        }
        let (mut lo, mut hi) = (1e-9f64, 1.0f64);
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if passes(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(FridmanCertificate {
            schema: FRIDMAN_SCHEMA.into(),
            model: self.model.clone(),
            domain: self.domain.clone(),
            map,
            center: self.center.clone(),
            radius: lo.atanh(),
            tanh_radius: lo,
            ball_check: SampleRecord { count: self.units.len(), seed: self.seed, failures: 0 },
            image_check: SampleRecord { count: self.model_pts.len(), seed: self.seed, failures: 0 },
            family: family.into(),
            params: params.to_vec(),
        })
    }
}

/// `u -> chart_a(s u)` when the chart blocks of `Ω` match those of `D`.
fn chart_scale_map(model: &ModelChart, chart: &ModelChart, center: &[C64], s: f64) -> Result<HoloMap> {
    let blocks = model
        .factors
        .iter()
        .zip(&chart.factors)
        .map(|(m, f)| {
            let a: Vec<C64> = center[f.offset..f.offset + f.dim].iter().map(|c| c / f.scale).collect();
            let map = HoloMap::compose(vec![
                HoloMap::diag_scale(Point(vec![C64::new(s / m.scale, 0.0); f.dim]))?,
                HoloMap::ball_moebius(Point(a))?,
                HoloMap::diag_scale(Point(vec![C64::new(f.scale, 0.0); f.dim]))?,
            ]);
            Ok((f.dim, map))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HoloMap::blocks(blocks))
}

/// Best Fridman certificate over a family: the tanh-radius per map comes
/// from bisection on the ball check.
pub fn fridman_lower_bound(
    domain: &DomainSpec,
    model: &DomainSpec,
    center: &Point,
    family: &FridmanFamily,
    budget: &SearchBudget,
) -> Result<FridmanCertificate> {
    if domain.dim() != model.dim() || center.dim() != domain.dim() {
        return Err(DsqError::DimensionMismatch { expected: domain.dim(), got: model.dim() });
    }
    let chart = domain_chart(domain)?;
    if !domain.membership(center)? {
        return contract(format!("center outside {}", domain.label()));
    }
    let ctx = FridmanContext {
        domain,
        model,
        units: ball_units(&chart, budget.boundary_samples, budget.seed),
        chart,
        center,
        model_pts: interior_points(model, budget.image_samples, 0.3, budget.seed, 8),
        seed: budget.seed,
    };
    let name = family.name();
    let best = match family {
        FridmanFamily::ChartScale => {
            let mchart = model_chart(model)
                .filter(|m| m.punctures.is_empty())
                .filter(|m| {
                    m.factors.len() == ctx.chart.factors.len()
                        && m.factors.iter().zip(&ctx.chart.factors).all(|(x, y)| x.dim == y.dim && x.offset == y.offset)
                })
                .ok_or_else(|| {
                    DsqError::Unsupported(format!("{} does not match the chart of {}", model.label(), domain.label()))
                })?;
            let hole = ctx
                .chart
                .punctures
                .iter()
                .map(|p| ctx.chart.tanh_distance(&center.0, &p.0))
                .fold(1.0, f64::min);
            maximize(&[(1e-3, 1.0)], &[vec![1.0, hole]], budget, |p| {
                let map = chart_scale_map(&mchart, &ctx.chart, &center.0, p[0]).ok()?;
                let cert = ctx.evaluate(map, name, p).ok()?;
                Some((cert.tanh_radius, cert))
            })
            .map(|b| b.payload)
        }
        FridmanFamily::SqueezePullback(cert) => {
            if cert.source != *domain || cert.target != *model || cert.anchor != *center {
                return contract("squeezing certificate is for a different pair");
            }
            let map = HoloMap::compose(vec![
                HoloMap::dpower(cert.radius, cert.d.clone())?,
                cert.map.clone().inverse_of(),
            ]);
            ctx.evaluate(map, name, &[cert.radius]).ok()
        }
    };
    best.ok_or_else(|| DsqError::EmptyFamily {
        family: name.into(),
        reason: format!("no admissible map {} -> {}", model.label(), domain.label()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Confirmed,
    Inconclusive,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SandwichReport {
    pub verdict: Verdict,
    /// Lower end the Fridman value must reach.
    pub required: f64,
    pub certified: f64,
    /// Positive when consistent.
    pub margin: f64,
}

/// `S(a)^L <= h^c_D(a)`: a certified Fridman lower bound can only confirm.
pub fn sandwich_check_general(squeeze: &Bracket, fridman: &FridmanCertificate, l: u32, tol: f64) -> SandwichReport {
    let required = squeeze.lo.max(0.0).powi(l as i32);
    let margin = fridman.tanh_radius - required;
    SandwichReport {
        verdict: if margin >= -tol { Verdict::Confirmed } else { Verdict::Inconclusive },
        required,
        certified: fridman.tanh_radius,
        margin,
    }
}

/// At the origin of balanced pairs `h^c_D(0)^L <= S(0)`; a certified
/// Fridman value above the squeezing upper end is an inconsistency.
pub fn sandwich_check_origin(squeeze: &Bracket, fridman: &FridmanCertificate, d: &MultiIndex, tol: f64) -> SandwichReport {
    let l = d.max_weight() as i32;
    let t = fridman.tanh_radius;
    let margin = squeeze.hi - t.powi(l);
    let required = squeeze.lo.max(0.0).powi(l);
    let verdict = if margin < -tol {
        Verdict::Fail
    } else if t >= required - tol {
        Verdict::Confirmed
    } else {
        Verdict::Inconclusive
    };
    SandwichReport { verdict, required, certified: t, margin }
}
