//! Certified lower bounds for the weighted squeezing function.
//!
//! A certificate is an explicit injective map `f: D -> Ω` with `f(z) = 0`
//! together with a radius `r` such that the sublevel set `Ω^d(r)` lies in
//! `f(D)`, checked on seeded samples through the exact inverse of `f`.
//!
//! The radius for a fixed map is the infimum of the gauge over `Ω \ f(D)`.
//! That set is bounded inside `Ω` by images of boundary points of `D`:
//! sampled points of the outer boundary (biased high, hence the `eps_cov`
//! margin) and punctures (isolated, taken exactly).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{weighted_action, DomainKind, DomainSpec, MultiIndex, Point, C64};
use crate::error::{contract, DsqError, Result};
use crate::holomap::HoloMap;
use crate::metrics::model_chart;
use crate::minkowski::{closed_form_gauge, d_minkowski, gauge_unchecked, Bracket, SupBound, DEFAULT_TOL};
use crate::sampling::{boundary_points, interior_points, random_direction, ray_exit, stream_rng};
use crate::search::{maximize, SearchBudget};

pub const CERTIFICATE_SCHEMA: &str = "dsq-certificate/1";

/// Fraction of sampled points placed right under the boundary.
const NEAR_FRACTION: f64 = 0.3;
const MAX_SHRINKS: usize = 40;
const ON_BOUNDARY: f64 = 1e-9;
const CONFIRM_FACTOR: usize = 8;
const SUP_SAMPLES: usize = 2048;
const SUP_STARTS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub count: usize,
    pub seed: u64,
    pub failures: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapFamily {
    Identity,
    /// `w -> φ_{c z}(c w)` coordinatewise, `c` per coordinate.
    Moebius,
    /// `w -> φ_{c z}(c w)` with the ball automorphism, scalar `c`.
    BallMoebius,
    /// `w -> c (w - z)`, `c` per coordinate.
    Affine,
    /// `w -> δ_r(w - z)`.
    Dpower,
    /// `w -> (w_j - z_j) / (2 (1 + k)^{d_j})`.
    ShiftShrink,
    /// Picked from the shape of `D`.
    Auto,
}

impl MapFamily {
    pub const ALL: [MapFamily; 7] = [
        MapFamily::Identity,
        MapFamily::Moebius,
        MapFamily::BallMoebius,
        MapFamily::Affine,
        MapFamily::Dpower,
        MapFamily::ShiftShrink,
        MapFamily::Auto,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MapFamily::Identity => "identity",
            MapFamily::Moebius => "moebius",
            MapFamily::BallMoebius => "ball-moebius",
            MapFamily::Affine => "affine",
            MapFamily::Dpower => "dpower",
            MapFamily::ShiftShrink => "shift-shrink",
            MapFamily::Auto => "auto",
        }
    }

    /// Families whose image shrinks as every parameter decreases.
    fn shrinks_safely(self) -> bool {
        matches!(self, MapFamily::Moebius | MapFamily::BallMoebius | MapFamily::Affine | MapFamily::Dpower)
    }

    /// Coordinatewise Möbius maps for products of disks, the ball
    /// automorphism for a single ball, affine maps otherwise.
    pub fn resolve(self, source: &DomainSpec) -> MapFamily {
        if self != MapFamily::Auto {
            return self;
        }
        match model_chart(&source.filled()) {
            Some(c) if c.factors.iter().all(|f| f.dim == 1) => MapFamily::Moebius,
            Some(c) if c.factors.len() == 1 => MapFamily::BallMoebius,
            _ => MapFamily::Affine,
        }
    }
}

impl fmt::Display for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapFamily {
    type Err = DsqError;

    fn from_str(s: &str) -> Result<Self> {
        MapFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| DsqError::Contract(format!("unknown map family '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub schema: String,
    pub source: DomainSpec,
    pub target: DomainSpec,
    pub d: MultiIndex,
    pub anchor: Point,
    pub map: HoloMap,
    pub radius: f64,
    /// Gauge infimum over sampled boundary images before the margin.
    pub sampled_radius: f64,
    pub eps_cov: f64,
    pub family: String,
    pub params: Vec<f64>,
    pub image_check: SampleRecord,
    pub coverage_check: SampleRecord,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| DsqError::Contract(format!("bad certificate: {e}")))
    }

    /// Re-runs the image and coverage checks on fresh samples.
    pub fn replay(&self, samples: usize, seed: u64) -> (SampleRecord, SampleRecord) {
        let image = image_failures(&self.source, &self.target, &self.map, samples, seed);
        let cover = coverage_failures(&self.source, &self.target, &self.d, &self.map, self.radius, samples, seed);
        (image, cover)
    }

    /// Anchor check plus a replay with no failures.
    pub fn verify(&self, samples: usize, seed: u64) -> bool {
        let anchored = self
            .map
            .apply(&self.anchor.0)
            .is_some_and(|w| crate::domain::norm(&w) <= 1e-12);
        let (i, c) = self.replay(samples, seed);
        anchored && i.failures == 0 && c.failures == 0 && self.radius > 0.0 && self.radius <= 1.0
    }
}

fn image_failures(source: &DomainSpec, target: &DomainSpec, map: &HoloMap, count: usize, seed: u64) -> SampleRecord {
    let pts = interior_points(source, count, NEAR_FRACTION, seed, 1);
    let failures = pts
        .iter()
        .filter(|p| !map.apply(p).is_some_and(|w| target.contains(&w)))
        .count();
    SampleRecord { count, seed, failures }
}

fn coverage_failures(
    source: &DomainSpec,
    target: &DomainSpec,
    d: &MultiIndex,
    map: &HoloMap,
    r: f64,
    count: usize,
    seed: u64,
) -> SampleRecord {
    let pts = interior_points(target, count, NEAR_FRACTION, seed, 3);
    let failures = count_uncovered(source, d, map, r, &pts);
    SampleRecord { count, seed, failures }
}

/// Points `δ_r(u)` of `Ω^d(r)` whose preimage misses `D`.
fn count_uncovered(source: &DomainSpec, d: &MultiIndex, map: &HoloMap, r: f64, pts: &[Vec<C64>]) -> usize {
    pts.iter().filter(|u| !covered(source, d, map, r, u)).count()
}

fn all_covered(source: &DomainSpec, d: &MultiIndex, map: &HoloMap, r: f64, pts: &[Vec<C64>]) -> bool {
    pts.iter().all(|u| covered(source, d, map, r, u))
}

fn covered(source: &DomainSpec, d: &MultiIndex, map: &HoloMap, r: f64, u: &[C64]) -> bool {
    let w = weighted_action(u, d, C64::new(r, 0.0));
    map.inverse(&w).is_some_and(|z| source.contains(&z))
}

/// Largest `|w_j|` over the (filled) domain, per coordinate.
pub fn coordinate_bounds(domain: &DomainSpec) -> Vec<f64> {
    match domain.kind() {
        DomainKind::Ball { n } | DomainKind::Polydisk { n } => vec![1.0; *n],
        DomainKind::Ellipsoid { p } => vec![1.0; p.len()],
        DomainKind::Product { factors } => factors.iter().flat_map(coordinate_bounds).collect(),
        DomainKind::Scaled { a, inner } => coordinate_bounds(inner).into_iter().map(|m| m * a.abs()).collect(),
        DomainKind::Punctured { inner } => coordinate_bounds(inner),
        DomainKind::Halfspaces { n, .. } => vec![domain.bound_radius(); *n],
    }
}

fn has_exact_bounds(domain: &DomainSpec) -> bool {
    match domain.kind() {
        DomainKind::Halfspaces { .. } => false,
        DomainKind::Product { factors } => factors.iter().all(has_exact_bounds),
        DomainKind::Scaled { inner, .. } | DomainKind::Punctured { inner } => has_exact_bounds(inner),
        _ => true,
    }
}

fn has_punctured_factor(domain: &DomainSpec) -> bool {
    match domain.kind() {
        DomainKind::Product { factors } => factors
            .iter()
            .any(|f| !f.punctures().is_empty() || has_punctured_factor(f)),
        DomainKind::Scaled { inner, .. } | DomainKind::Punctured { inner } => has_punctured_factor(inner),
        _ => false,
    }
}

/// Pre-drawn samples shared by every map of one search.
struct PairContext<'a> {
    source: &'a DomainSpec,
    target: &'a DomainSpec,
    d: &'a MultiIndex,
    anchor: &'a Point,
    budget: SearchBudget,
    image_pts: Vec<Vec<C64>>,
    boundary_pts: Vec<Vec<C64>>,
    cover_pts: Vec<Vec<C64>>,
    punctures: Vec<Point>,
}

impl<'a> PairContext<'a> {
    fn new(
        source: &'a DomainSpec,
        target: &'a DomainSpec,
        d: &'a MultiIndex,
        anchor: &'a Point,
        budget: SearchBudget,
    ) -> Result<Self> {
        let n = source.dim();
        if target.dim() != n || d.len() != n || anchor.dim() != n {
            return Err(DsqError::DimensionMismatch { expected: n, got: target.dim().min(d.len()).min(anchor.dim()) });
        }
        if !target.is_convex() || !target.is_d_balanced(d) {
            return contract(format!("target {} must be convex and {}-balanced", target.label(), d));
        }
        if !source.membership(anchor)? {
            return contract(format!("anchor outside {}", source.label()));
        }
        if has_punctured_factor(source) {
            return Err(DsqError::Unsupported(
                "products with punctured factors are certified factorwise".into(),
            ));
        }
        let seed = budget.seed;
        Ok(Self {
            source,
            target,
            d,
            anchor,
            budget,
            image_pts: interior_points(source, budget.image_samples, NEAR_FRACTION, seed, 1),
            boundary_pts: boundary_points(&source.filled(), budget.boundary_samples, seed, 2),
            cover_pts: interior_points(target, budget.coverage_samples, NEAR_FRACTION, seed, 3),
            punctures: source.punctures(),
        })
    }

    /// Shrinks the radius until a denser independent coverage sample passes.
    fn confirm_coverage(&self, mut cert: Certificate) -> std::result::Result<Certificate, String> {
        let inf = boundary_extreme(&self.source.filled(), self.target, self.d, &cert.map, self.budget.seed, Extreme::Inf);
        cert.radius = cert.radius.min(inf * (1.0 - self.budget.eps_cov));
        let pts = interior_points(self.target, CONFIRM_FACTOR * self.budget.coverage_samples, NEAR_FRACTION, self.budget.seed, 5);
        for k in 0..MAX_SHRINKS {
            if all_covered(self.source, self.d, &cert.map, cert.radius, &pts) {
                return Ok(cert);
            }
            cert.radius *= 1.0 - (self.budget.eps_cov * 2f64.powi(k as i32)).min(0.5);
        }
        Err("coverage confirmation keeps failing".into())
    }

    /// Certificate for one map, or the reason it is not admissible.
    fn evaluate(&self, map: HoloMap, family: MapFamily, params: &[f64]) -> std::result::Result<Certificate, String> {
        let z0 = map.apply(&self.anchor.0).ok_or("map undefined at the anchor")?;
        if crate::domain::norm(&z0) > 1e-12 {
            return Err("map does not send the anchor to 0".into());
        }
        let mut image_fail = 0;
        for p in &self.image_pts {
            if !map.apply(p).is_some_and(|w| self.target.contains(&w)) {
                image_fail += 1;
            }
        }
        if image_fail > 0 {
            return Err(format!("{image_fail} sampled points map outside the target"));
        }
        // closed forms are exact up to rounding; bisection otherwise
        let gauge = |w: &[C64]| match closed_form_gauge(self.target, self.d, w) {
            Some(h) => Ok((h * (1.0 - 1e-12)).max(0.0)),
            None => gauge_unchecked(self.target, self.d, w, DEFAULT_TOL).map(|b| b.lo),
        };
        let mut exact = 1.0f64;
        for p in &self.punctures {
            if let Some(w) = map.apply(&p.0) {
                if self.target.contains(&w) {
                    exact = exact.min(gauge(&w).map_err(|e| e.to_string())?);
                }
            }
        }
        let mut sampled = f64::INFINITY;
        for q in &self.boundary_pts {
            if let Some(w) = map.apply(q) {
                if self.target.contains(&w) {
                    let h = gauge(&w).map_err(|e| e.to_string())?;
                    // images within rounding of ∂Ω come from boundary points
                    // the map sends onto ∂Ω
                    if h < 1.0 - ON_BOUNDARY {
                        sampled = sampled.min(h);
                    }
                }
            }
        }
        let eps = self.budget.eps_cov;
        let mut r = exact.min(sampled * (1.0 - eps));
        let mut shrinks = 0;
        loop {
            if !(r > 0.0) {
                return Err("empty coverage radius".into());
            }
            if all_covered(self.source, self.d, &map, r, &self.cover_pts) {
                break;
            }
            // step eps, 2 eps, 4 eps, ... so a coarse boundary sample
            // costs few rounds
            r *= 1.0 - (eps * 2f64.powi(shrinks as i32)).min(0.5);
            shrinks += 1;
            if shrinks > MAX_SHRINKS {
                return Err("coverage check keeps failing".into());
            }
        }
        Ok(Certificate {
            schema: CERTIFICATE_SCHEMA.into(),
            source: self.source.clone(),
            target: self.target.clone(),
            d: self.d.clone(),
            anchor: self.anchor.clone(),
            map,
            radius: r,
            sampled_radius: sampled.min(1.0),
            eps_cov: eps,
            family: family.name().into(),
            params: params.to_vec(),
            image_check: SampleRecord { count: self.image_pts.len(), seed: self.budget.seed, failures: 0 },
            coverage_check: SampleRecord { count: self.cover_pts.len(), seed: self.budget.seed, failures: 0 },
        })
    }
}

/// Parameter box, natural candidates and map builder for a family.
type Builder<'a> = Box<dyn Fn(&[f64]) -> Result<HoloMap> + Sync + 'a>;

fn family_setup<'a>(
    family: MapFamily,
    source: &DomainSpec,
    target: &DomainSpec,
    d: &'a MultiIndex,
    z: &'a Point,
) -> (Vec<(f64, f64)>, Vec<Vec<f64>>, Builder<'a>) {
    let n = z.dim();
    let complex = |c: &[f64]| Point(c.iter().map(|&x| C64::new(x, 0.0)).collect());
    let natural: Vec<f64> = coordinate_bounds(target)
        .iter()
        .zip(coordinate_bounds(source))
        .map(|(mt, ms)| mt / ms)
        .collect();
    let target_bounds = coordinate_bounds(target);
    let unit_scale: Vec<f64> = coordinate_bounds(source).iter().map(|ms| 1.0 / ms).collect();
    let outer = if target_bounds.iter().all(|&t| t == 1.0) {
        None
    } else {
        Some(HoloMap::diag_scale(complex(&target_bounds)).expect("positive bounds"))
    };
    // with exact source bounds a d-balanced source projects onto disks of
    // that radius, so scales above the natural one leave the target
    let over = if has_exact_bounds(source) { 1.0 } else { 1.05 };
    let boxes = |s: &[f64]| s.iter().map(|&x| (0.02 * x, over * x)).collect::<Vec<_>>();
    let singles = |s: &[f64]| s.iter().map(|&x| vec![x]).collect::<Vec<_>>();
    match family {
        MapFamily::Identity | MapFamily::Auto => (vec![], vec![], Box::new(|_| Ok(HoloMap::Identity))),
        // Möbius families land in the unit disk or ball, then scale to the
        // coordinate bounds of the target
        MapFamily::Moebius => (
            boxes(&unit_scale),
            singles(&unit_scale),
            Box::new(move |c| {
                let cz = Point(z.0.iter().zip(c).map(|(x, s)| x * s).collect());
                let mut maps = vec![HoloMap::diag_scale(complex(c))?, HoloMap::moebius_per_coord(cz)?];
                maps.extend(outer.clone());
                Ok(HoloMap::compose(maps))
            }),
        ),
        MapFamily::BallMoebius => {
            let s = unit_scale.iter().copied().fold(f64::INFINITY, f64::min);
            (
                vec![(0.02 * s, over * s)],
                vec![vec![s]],
                Box::new(move |c| {
                    let mut maps = vec![
                        HoloMap::diag_scale(complex(&vec![c[0]; n]))?,
                        HoloMap::ball_moebius(z.scaled(c[0]))?,
                    ];
                    maps.extend(outer.clone());
                    Ok(HoloMap::compose(maps))
                }),
            )
        }
        MapFamily::Affine => (
            boxes(&natural),
            singles(&natural),
            Box::new(move |c| {
                Ok(HoloMap::compose(vec![
                    HoloMap::translate(z.scaled(-1.0)),
                    HoloMap::diag_scale(complex(c))?,
                ]))
            }),
        ),
        MapFamily::Dpower => (
            vec![(1e-3, 1.0)],
            vec![vec![1.0]],
            Box::new(move |r| {
                Ok(HoloMap::compose(vec![
                    HoloMap::translate(z.scaled(-1.0)),
                    HoloMap::dpower(r[0], d.clone())?,
                ]))
            }),
        ),
        MapFamily::ShiftShrink => (
            vec![(0.0, 20.0)],
            vec![vec![0.0]],
            Box::new(move |k| HoloMap::shift_shrink(z.clone(), k[0], d.clone())),
        ),
    }
}

/// Certificate for a single given map.
pub fn certify_with_map(
    source: &DomainSpec,
    target: &DomainSpec,
    d: &MultiIndex,
    z: &Point,
    map: HoloMap,
    budget: &SearchBudget,
) -> Result<Certificate> {
    let ctx = PairContext::new(source, target, d, z, *budget)?;
    ctx.evaluate(map, MapFamily::Identity, &[])
        .and_then(|c| ctx.confirm_coverage(c))
        .map(|mut c| {
            c.family = "given".into();
            c
        })
        .map_err(|reason| DsqError::EmptyFamily { family: "given".into(), reason })
}

/// Best certificate over a map family: grid then golden-section search on
/// the family parameters, maximizing the certified radius.
pub fn certify_lower_bound(
    source: &DomainSpec,
    target: &DomainSpec,
    d: &MultiIndex,
    z: &Point,
    family: MapFamily,
    budget: &SearchBudget,
) -> Result<Certificate> {
    let ctx = PairContext::new(source, target, d, z, *budget)?;
    let family = family.resolve(source);
    let (ranges, extra, build) = family_setup(family, source, target, d, z);
    let best = maximize(&ranges, &extra, budget, |p| {
        let map = build(p).ok()?;
        let cert = ctx.evaluate(map, family, p).ok()?;
        Some((cert.radius, cert))
    });
    let empty = || DsqError::EmptyFamily {
        family: family.name().into(),
        reason: format!("no admissible map for {} -> {}", source.label(), target.label()),
    };
    let mut cert = best.ok_or_else(empty)?.payload;
    if !family.shrinks_safely() {
        return ctx.confirm_coverage(cert).map_err(|_| empty());
    }
    // the search climbs to where the sampled image check stops failing;
    // back off until a denser independent sample agrees
    let confirm = interior_points(source, CONFIRM_FACTOR * budget.image_samples, NEAR_FRACTION, budget.seed, 4);
    let lower: Vec<f64> = ranges.iter().map(|r| r.0).collect();
    let filled = source.filled();
    for k in 0..MAX_SHRINKS {
        let escaped = confirm.iter().any(|p| !cert.map.apply(p).is_some_and(|w| target.contains(&w)))
            || boundary_extreme(&filled, target, d, &cert.map, budget.seed, Extreme::Sup) > 1.0 + ON_BOUNDARY;
        if !escaped {
            return ctx.confirm_coverage(cert).map_err(|_| empty());
        }
        let step = (1e-4 * 2f64.powi(k as i32)).min(0.5);
        let params: Vec<f64> = cert.params.iter().zip(&lower).map(|(x, lo)| (x * (1.0 - step)).max(*lo)).collect();
        let map = build(&params)?;
        cert = ctx.evaluate(map, family, &params).map_err(|_| empty())?;
    }
    Err(empty())
}

/// Extreme of `h_Ω(f(q))` over `q ∈ ∂D`: the best of a dense random
/// sample, refined by hill climbing from the most extreme directions.
/// `Sup` bounds the gauge of the whole image by the maximum principle;
/// `Inf` ignores images on `∂Ω` and estimates the coverage radius.
#[derive(Clone, Copy, PartialEq)]
enum Extreme {
    Sup,
    Inf,
}

fn boundary_extreme(
    source: &DomainSpec,
    target: &DomainSpec,
    d: &MultiIndex,
    map: &HoloMap,
    seed: u64,
    which: Extreme,
) -> f64 {
    let n = source.dim();
    // larger score is more extreme
    let score = |u: &[C64]| -> f64 {
        let (lo, _) = ray_exit(source, u);
        let q: Vec<C64> = u.iter().map(|c| c * lo).collect();
        let h = map.apply(&q).map_or(f64::INFINITY, |w| match closed_form_gauge(target, d, &w) {
            Some(h) => h,
            None => gauge_unchecked(target, d, &w, DEFAULT_TOL).map_or(f64::INFINITY, |b| b.mid()),
        });
        match which {
            Extreme::Sup => h,
            Extreme::Inf if h < 1.0 - ON_BOUNDARY => -h,
            Extreme::Inf => f64::NEG_INFINITY,
        }
    };
    let stream = if which == Extreme::Sup { 6 } else { 9 };
    let mut rng = stream_rng(seed, stream);
    let mut scored: Vec<(f64, Vec<C64>)> = (0..SUP_SAMPLES)
        .map(|_| {
            let u = random_direction(n, &mut rng);
            (score(&u), u)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = scored.first().map_or(f64::NEG_INFINITY, |s| s.0);
    for (mut v, mut u) in scored.into_iter().take(SUP_STARTS) {
        let mut sigma = 0.05;
        let mut misses = 0;
        while sigma > 1e-7 && v.is_finite() {
            let step = random_direction(n, &mut rng);
            let mut cand: Vec<C64> = u.iter().zip(&step).map(|(a, b)| a + b * sigma).collect();
            let len = crate::domain::norm(&cand);
            cand.iter_mut().for_each(|c| *c /= len);
            let cv = score(&cand);
            if cv > v {
                (v, u) = (cv, cand);
            } else {
                misses += 1;
                if misses % 8 == 0 {
                    sigma *= 0.5;
                }
            }
        }
        best = best.max(v);
    }
    match which {
        Extreme::Sup => best,
        Extreme::Inf => -best,
    }
}

/// Two-sided bracket for the squeezing function of `Ω \ {0}` at `z`:
/// exact `h(z)` for `L = 1`, otherwise `[h^L, h^{1/L}]`.
pub fn punctured_value(omega: &DomainSpec, d: &MultiIndex, z: &Point, tol: f64) -> Result<Bracket> {
    if !omega.is_convex() {
        return contract(format!("{} is not convex", omega.label()));
    }
    if z.is_origin() {
        return contract("the origin is not a point of the punctured domain");
    }
    if !omega.membership(z)? {
        return contract(format!("point outside {}", omega.label()));
    }
    let h = d_minkowski(omega, d, z, tol)?;
    let l = d.max_weight();
    if l == 1 {
        return Ok(h);
    }
    Ok(Bracket::new(h.lo.powi(l as i32), h.hi.powf(1.0 / l as f64).min(1.0)))
}

/// Product certificate `(f_1, ..., f_k)` with radius `min r_i`, re-verified
/// on samples of the product pair.
pub fn product_lower_bound(certs: &[Certificate], samples: usize, seed: u64) -> Result<(f64, Certificate)> {
    let Some(first) = certs.first() else {
        return contract("no factor certificates");
    };
    if certs.len() == 1 {
        return Ok((first.radius, first.clone()));
    }
    for c in certs {
        let n = c.source.dim();
        if c.target.dim() != n || c.d.len() != n || c.anchor.dim() != n {
            return Err(DsqError::DimensionMismatch { expected: n, got: c.target.dim() });
        }
    }
    let source = DomainSpec::product(certs.iter().map(|c| c.source.clone()).collect())?;
    let target = DomainSpec::product(certs.iter().map(|c| c.target.clone()).collect())?;
    let d = MultiIndex::concat(certs.iter().map(|c| &c.d))?;
    let anchor = Point(certs.iter().flat_map(|c| c.anchor.0.iter().copied()).collect());
    let map = HoloMap::blocks(certs.iter().map(|c| (c.source.dim(), c.map.clone())).collect());
    let radius = certs.iter().map(|c| c.radius).fold(1.0, f64::min);
    let mut cert = Certificate {
        schema: CERTIFICATE_SCHEMA.into(),
        source,
        target,
        d,
        anchor,
        map,
        radius,
        sampled_radius: certs.iter().map(|c| c.sampled_radius).fold(1.0, f64::min),
        eps_cov: certs.iter().map(|c| c.eps_cov).fold(0.0, f64::max),
        family: "product".into(),
        params: certs.iter().flat_map(|c| c.params.iter().copied()).collect(),
        image_check: SampleRecord { count: 0, seed, failures: 0 },
        coverage_check: SampleRecord { count: 0, seed, failures: 0 },
    };
    let (image, cover) = cert.replay(samples, seed);
    if image.failures > 0 || cover.failures > 0 {
        return Err(DsqError::Numeric(format!(
            "product certificate failed its checks ({} image, {} coverage)",
            image.failures, cover.failures
        )));
    }
    cert.image_check = image;
    cert.coverage_check = cover;
    Ok((radius, cert))
}

/// `A (tanh k_D)^{1/L}` with `A = B_{-Ω} + B_{2Ω}`.
pub fn continuity_modulus(d: &MultiIndex, kd: f64, neg: &SupBound, two: &SupBound) -> f64 {
    let a = neg.estimate + two.estimate;
    a * kd.tanh().powf(1.0 / d.max_weight() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionSweep {
    pub radii: Vec<f64>,
    /// `None` where `z` is not yet in `r_k Ω`.
    pub values: Vec<Option<Bracket>>,
    pub limit: Bracket,
}

/// Squeezing brackets of `z` in `D_k = r_k Ω \ {0}`, through the
/// biholomorphism `w -> w / r_k` onto `Ω \ {0}`.
pub fn exhaustion_sweep(omega: &DomainSpec, d: &MultiIndex, z: &Point, radii: &[f64], tol: f64) -> Result<ExhaustionSweep> {
    if radii.windows(2).any(|w| w[1] < w[0]) || radii.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return contract("radii must increase within (0, 1]");
    }
    let limit = punctured_value(omega, d, z, tol)?;
    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        let w = z.scaled(1.0 / r);
        values.push(if omega.membership(&w)? {
            Some(punctured_value(omega, d, &w, tol)?)
        } else {
            None
        });
    }
    if values.iter().all(Option::is_none) {
        return contract("point lies outside every domain of the exhaustion");
    }
    Ok(ExhaustionSweep { radii: radii.to_vec(), values, limit })
}
