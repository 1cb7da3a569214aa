//! Weighted Minkowski gauge `h_{d,Ω}` by bisection on the membership oracle.
//!
//! For a `d`-balanced domain the map `t -> (z_1 / t^{d_1}, ..., z_n / t^{d_n})`
//! leaves the domain for `t < h(z)` and stays inside for `t > h(z)`, so the
//! infimum is bracketed by bisection on `t`.

use serde::{Deserialize, Serialize};

use crate::domain::{is_origin, DomainKind, DomainSpec, MultiIndex, Point, C64};
use crate::error::{contract, DsqError, Result};
use crate::sampling::{random_direction, ray_exit, stream_rng};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 200;

/// A scalar known to lie in `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "bracket [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn exact(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        v >= self.lo - slack && v <= self.hi + slack
    }

    /// Gap between two brackets; zero when they overlap.
    pub fn separation(&self, other: &Bracket) -> f64 {
        (self.lo - other.hi).max(other.lo - self.hi).max(0.0)
    }

    pub fn scaled(&self, s: f64) -> Bracket {
        debug_assert!(s >= 0.0);
        Bracket::new(self.lo * s, self.hi * s)
    }

    pub fn map_monotone(&self, f: impl Fn(f64) -> f64) -> Bracket {
        Bracket::new(f(self.lo), f(self.hi))
    }
}

fn check_weighted(domain: &DomainSpec, d: &MultiIndex, z: &Point, tol: f64) -> Result<()> {
    if z.dim() != domain.dim() {
        return Err(DsqError::DimensionMismatch {
            expected: domain.dim(),
            got: z.dim(),
        });
    }
    if d.len() != domain.dim() {
        return Err(DsqError::DimensionMismatch {
            expected: domain.dim(),
            got: d.len(),
        });
    }
    if !domain.is_d_balanced(d) {
        return contract(format!("{} is not {}-balanced", domain.label(), d));
    }
    if !(tol > 0.0) {
        return contract("tolerance must be positive");
    }
    Ok(())
}

/// `h_{d,Ω}(z)` to within `tol`.
pub fn d_minkowski(domain: &DomainSpec, d: &MultiIndex, z: &Point, tol: f64) -> Result<Bracket> {
    check_weighted(domain, d, z, tol)?;
    gauge_unchecked(domain, d, &z.0, tol)
}

/// `h_Ω(z)` for a balanced domain.
pub fn minkowski(domain: &DomainSpec, z: &Point, tol: f64) -> Result<Bracket> {
    if !domain.is_balanced() {
        return contract(format!("{} is not balanced", domain.label()));
    }
    d_minkowski(domain, &MultiIndex::ones(domain.dim()), z, tol)
}

fn unweight(z: &[C64], d: &MultiIndex, t: f64, out: &mut Vec<C64>) {
    out.clear();
    out.extend(z.iter().zip(d.weights()).map(|(c, &w)| c / t.powi(w as i32)));
}

/// Bisection without flag checks; `domain` must be `d`-balanced.
pub(crate) fn gauge_unchecked(domain: &DomainSpec, d: &MultiIndex, z: &[C64], tol: f64) -> Result<Bracket> {
    if is_origin(z) {
        return Ok(Bracket::exact(0.0));
    }
    let mut buf = Vec::with_capacity(z.len());
    let inside = |t: f64, buf: &mut Vec<C64>| {
        unweight(z, d, t, buf);
        domain.contains(buf)
    };
    let mut lo = 0.0;
    let mut hi = domain.bound_radius().powf(1.0 / d.min_weight() as f64) + 1.0;
    let mut iter = 0;
    while !inside(hi, &mut buf) {
        lo = hi;
        hi *= 2.0;
        iter += 1;
        if iter >= MAX_ITERATIONS || !hi.is_finite() {
            return Err(DsqError::Numeric(format!(
                "no upper bracket for the gauge of {} after {iter} doublings",
                domain.label()
            )));
        }
    }
    while hi - lo > tol {
        if iter >= MAX_ITERATIONS {
            return Err(DsqError::Numeric(format!(
                "gauge bracket [{lo}, {hi}] wider than {tol} after {iter} iterations"
            )));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(DsqError::Numeric(format!(
                "tolerance {tol} below floating resolution at {hi}"
            )));
        }
        if inside(mid, &mut buf) {
            hi = mid;
        } else {
            lo = mid;
        }
        iter += 1;
    }
    Ok(Bracket::new(lo, hi))
}

/// Closed-form gauge where one is known; the reference against which the
/// bisection is tested.
///
/// * polydisk: `max_j |z_j|^{1/d_j}`
/// * ellipsoid with `d_j p_j = M` constant (the ball is `p = 1`):
///   `(sum_j |z_j|^{2 p_j})^{1/(2M)}`
/// * slabs with `d = (k, ..., k)`: `(max_k |l_k(z)| / b_k)^{1/k}`
/// * products: maximum over factors; scalings: gauge of `z / a`.
pub fn closed_form_gauge(domain: &DomainSpec, d: &MultiIndex, z: &[C64]) -> Option<f64> {
    if d.len() != domain.dim() || z.len() != domain.dim() {
        return None;
    }
    match domain.kind() {
        DomainKind::Polydisk { .. } => Some(
            z.iter()
                .zip(d.weights())
                .map(|(c, &w)| c.norm().powf(1.0 / w as f64))
                .fold(0.0, f64::max),
        ),
        DomainKind::Ball { .. } => {
            let p = vec![1; z.len()];
            ellipsoid_closed_form(&p, d, z)
        }
        DomainKind::Ellipsoid { p } => ellipsoid_closed_form(p, d, z),
        DomainKind::Halfspaces { constraints, .. } => {
            if !d.is_constant() {
                return None;
            }
            let g = constraints
                .iter()
                .map(|lb| {
                    let v: C64 = lb.c.0.iter().zip(z).map(|(c, x)| c * x).sum();
                    v.norm() / lb.b
                })
                .fold(0.0, f64::max);
            Some(g.powf(1.0 / d.max_weight() as f64))
        }
        DomainKind::Product { factors } => {
            let mut off = 0;
            let mut best: f64 = 0.0;
            for f in factors {
                let sub = d.slice(off, f.dim()).ok()?;
                best = best.max(closed_form_gauge(f, &sub, &z[off..off + f.dim()])?);
                off += f.dim();
            }
            Some(best)
        }
        DomainKind::Scaled { a, inner } => {
            let w: Vec<C64> = z.iter().map(|c| c / *a).collect();
            closed_form_gauge(inner, d, &w)
        }
        DomainKind::Punctured { .. } => None,
    }
}

fn ellipsoid_closed_form(p: &[u32], d: &MultiIndex, z: &[C64]) -> Option<f64> {
    let m = p[0] as u64 * d.weights()[0] as u64;
    if p.iter().zip(d.weights()).any(|(&pj, &dj)| pj as u64 * dj as u64 != m) {
        return None;
    }
    let s: f64 = z
        .iter()
        .zip(p)
        .map(|(c, &pj)| c.norm_sqr().powi(pj as i32))
        .sum();
    Some(s.powf(1.0 / (2 * m) as f64))
}

/// Three-valued answer for membership in the sublevel set `{h < r}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sublevel {
    Inside,
    Outside,
    /// `r` falls inside the gauge bracket.
    Undecided,
}

pub fn sublevel_membership(
    domain: &DomainSpec,
    d: &MultiIndex,
    r: f64,
    z: &Point,
    tol: f64,
) -> Result<Sublevel> {
    if !(r > 0.0 && r <= 1.0) {
        return contract("sublevel radius must lie in (0, 1]");
    }
    let h = d_minkowski(domain, d, z, tol)?;
    Ok(classify(h, r))
}

pub(crate) fn classify(h: Bracket, r: f64) -> Sublevel {
    if h.hi < r {
        Sublevel::Inside
    } else if h.lo >= r {
        Sublevel::Outside
    } else {
        Sublevel::Undecided
    }
}

/// Bound `B` with `h_{d,Ω} <= B` on `aΩ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupBound {
    pub domain_scale: f64,
    pub estimate: f64,
    pub sample_count: usize,
    /// `estimate` is the exact supremum.
    pub certified: bool,
    /// Largest gauge value seen on the sampled rays.
    pub sampled_max: f64,
}

/// Exact `sup_{aΩ} h_{d,Ω}` for catalog domains.
///
/// With `δ_s` the weighted dilation, `h(aw) < s` for all `w ∈ Ω` iff
/// `aΩ ⊆ δ_s Ω`. Complete Reinhardt members satisfy this iff
/// `|a| <= s^{d_j}` for all `j`, giving `max_j |a|^{1/d_j}`; the same value
/// holds for balanced slabs with constant weights, for products (gauge is the
/// factor maximum) and is unchanged by rescaling the domain.
pub fn certified_sup(domain: &DomainSpec, d: &MultiIndex, a: f64) -> Option<f64> {
    if !domain.is_d_balanced(d) {
        return None;
    }
    let abs = a.abs();
    match domain.kind() {
        DomainKind::Ball { .. }
        | DomainKind::Polydisk { .. }
        | DomainKind::Ellipsoid { .. }
        | DomainKind::Halfspaces { .. } => Some(
            d.weights()
                .iter()
                .map(|&w| abs.powf(1.0 / w as f64))
                .fold(0.0, f64::max),
        ),
        DomainKind::Product { factors } => {
            let mut off = 0;
            let mut best: f64 = 0.0;
            for f in factors {
                let sub = d.slice(off, f.dim()).ok()?;
                best = best.max(certified_sup(f, &sub, a)?);
                off += f.dim();
            }
            Some(best)
        }
        DomainKind::Scaled { inner, .. } => certified_sup(inner, d, a),
        DomainKind::Punctured { .. } => None,
    }
}

/// Ray-sampled supremum of the gauge over `aΩ`: for each random direction
/// the exit point of `aΩ` is bracketed and the gauge evaluated just inside.
pub fn sampled_sup(domain: &DomainSpec, d: &MultiIndex, a: f64, samples: usize, seed: u64) -> Result<f64> {
    let scaled = DomainSpec::scale(a, domain.clone())?;
    let mut rng = stream_rng(seed, 0x5b);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let u = random_direction(domain.dim(), &mut rng);
        let (lo, _) = ray_exit(&scaled, &u);
        let p: Vec<C64> = u.iter().map(|c| c * lo).collect();
        best = best.max(gauge_unchecked(domain, d, &p, DEFAULT_TOL)?.lo);
    }
    Ok(best)
}

pub fn sup_bound(domain: &DomainSpec, d: &MultiIndex, a: f64, samples: usize, seed: u64) -> Result<SupBound> {
    if a == 0.0 || !a.is_finite() {
        return contract("scale must be finite and nonzero");
    }
    if !domain.is_d_balanced(d) {
        return contract(format!("{} is not {}-balanced", domain.label(), d));
    }
    let sampled_max = sampled_sup(domain, d, a, samples, seed)?;
    let (estimate, certified) = match certified_sup(domain, d, a) {
        Some(b) => (b, true),
        None => (sampled_max, false),
    };
    Ok(SupBound {
        domain_scale: a,
        estimate,
        sample_count: samples,
        certified,
        sampled_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{ball_point, interior_point};

    fn close(b: Bracket, v: f64, tol: f64) -> bool {
        b.lo - tol <= v && v <= b.hi + tol
    }

    #[test]
    fn polydisk_weighted_example() {
        let dom = DomainSpec::polydisk(2).unwrap();
        let d = MultiIndex::new(vec![1, 2]).unwrap();
        let b = d_minkowski(&dom, &d, &Point::from_real(&[0.5, 0.25]), 1e-10).unwrap();
        assert!(b.width() <= 1e-10);
        assert!(close(b, 0.5, 1e-10));
    }

    #[test]
    fn origin_is_exact_zero() {
        let dom = DomainSpec::ellipsoid(vec![2, 3]).unwrap();
        let d = dom.canonical_dindex().unwrap().clone();
        assert_eq!(d_minkowski(&dom, &d, &Point::zeros(2), 1e-10).unwrap(), Bracket::exact(0.0));
        let ball = DomainSpec::ball(2).unwrap();
        assert_eq!(minkowski(&ball, &Point::zeros(2), 1e-10).unwrap(), Bracket::exact(0.0));
    }

    #[test]
    fn ellipsoid_and_norm_examples() {
        let e = DomainSpec::ellipsoid(vec![1, 2]).unwrap();
        let d = MultiIndex::new(vec![2, 1]).unwrap();
        let b = d_minkowski(&e, &d, &Point::from_real(&[0.25, 0.0]), 1e-10).unwrap();
        assert!(close(b, 0.0625f64.powf(0.25), 1e-10));
        let ball = DomainSpec::ball(2).unwrap();
        assert!(close(minkowski(&ball, &Point::from_real(&[0.3, 0.4]), 1e-10).unwrap(), 0.5, 1e-10));
        let pd = DomainSpec::polydisk(2).unwrap();
        assert!(close(minkowski(&pd, &Point::from_real(&[0.2, 0.7]), 1e-10).unwrap(), 0.7, 1e-10));
    }

    #[test]
    fn rejects_non_balanced_and_bad_tol() {
        let p = DomainSpec::punctured(DomainSpec::disk()).unwrap();
        assert!(matches!(
            d_minkowski(&p, &MultiIndex::ones(1), &Point::from_real(&[0.1]), 1e-10),
            Err(DsqError::Contract(_))
        ));
        let slabs = DomainSpec::halfspaces(
            1,
            vec![crate::domain::LinearBound { c: Point::from_real(&[1.0]), b: 1.0 }],
        )
        .unwrap();
        assert!(slabs.is_d_balanced(&MultiIndex::new(vec![3]).unwrap()));
        let dom = DomainSpec::polydisk(2).unwrap();
        assert!(d_minkowski(&dom, &MultiIndex::ones(2), &Point::zeros(2), 0.0).is_err());
        assert!(matches!(
            d_minkowski(&dom, &MultiIndex::ones(2), &Point::from_real(&[0.1, 0.1]), 1e-300),
            Err(DsqError::Numeric(_))
        ));
    }

    #[test]
    fn far_points_extend_the_bracket() {
        let dom = DomainSpec::polydisk(2).unwrap();
        let b = minkowski(&dom, &Point::from_real(&[50.0, 3.0]), 1e-9).unwrap();
        assert!(close(b, 50.0, 1e-9));
    }

    #[test]
    fn sublevel_examples() {
        let dom = DomainSpec::polydisk(2).unwrap();
        let d = MultiIndex::new(vec![1, 2]).unwrap();
        let inside = Point::from_real(&[0.9, 0.9]);
        assert_eq!(sublevel_membership(&dom, &d, 1.0, &inside, 1e-10).unwrap(), Sublevel::Inside);
        assert_eq!(
            sublevel_membership(&dom, &d, 0.5, &Point::zeros(2), 1e-10).unwrap(),
            Sublevel::Inside
        );
        assert_ne!(
            sublevel_membership(&dom, &d, 0.5, &Point::from_real(&[0.5, 0.0]), 1e-10).unwrap(),
            Sublevel::Inside
        );
        assert_eq!(
            sublevel_membership(&dom, &d, 0.5, &Point::from_real(&[0.6, 0.0]), 1e-10).unwrap(),
            Sublevel::Outside
        );
        assert!(sublevel_membership(&dom, &d, 1.5, &inside, 1e-10).is_err());
    }

    #[test]
    fn sup_bound_examples() {
        let dom = DomainSpec::polydisk(2).unwrap();
        let d = MultiIndex::new(vec![1, 2]).unwrap();
        let b2 = sup_bound(&dom, &d, 2.0, 2000, 1).unwrap();
        assert!(b2.certified);
        assert_eq!(b2.estimate, 2.0);
        assert!(b2.sampled_max <= 2.0 + 1e-9 && b2.sampled_max > 1.9);
        let bm = sup_bound(&dom, &d, -1.0, 500, 1).unwrap();
        assert_eq!(bm.estimate, 1.0);
        assert!(bm.sampled_max <= 1.0 + 1e-9 && bm.sampled_max > 0.99);
        for dom in [
            DomainSpec::ball(2).unwrap(),
            DomainSpec::ellipsoid(vec![1, 2]).unwrap(),
            DomainSpec::scale(3.0, DomainSpec::polydisk(1).unwrap()).unwrap(),
        ] {
            let d = dom.canonical_dindex().unwrap().clone();
            assert_eq!(sup_bound(&dom, &d, 1.0, 10, 0).unwrap().estimate, 1.0);
        }
        // |a| < 1 switches to the largest weight
        assert!((certified_sup(&dom, &d, 0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!(sup_bound(&dom, &d, 0.0, 10, 0).is_err());
    }

    #[test]
    fn sampled_sup_never_exceeds_certified() {
        let doms = [
            DomainSpec::ball(2).unwrap(),
            DomainSpec::ellipsoid(vec![1, 2]).unwrap(),
            DomainSpec::product(vec![DomainSpec::ellipsoid(vec![1, 2]).unwrap(), DomainSpec::disk()]).unwrap(),
        ];
        for dom in doms {
            let d = dom.canonical_dindex().unwrap().clone();
            for a in [-1.0, 0.5, 2.0, 3.0] {
                let sb = sup_bound(&dom, &d, a, 400, 7).unwrap();
                assert!(sb.sampled_max <= sb.estimate + 1e-9, "{} a={a}", dom.label());
                assert!(sb.sampled_max >= 0.9 * sb.estimate);
            }
        }
    }

    #[test]
    fn bisection_agrees_with_closed_forms() {
        let mut rng = crate::sampling::stream_rng(17, 0);
        let cases = [
            (DomainSpec::ball(3).unwrap(), MultiIndex::ones(3)),
            (DomainSpec::polydisk(3).unwrap(), MultiIndex::new(vec![1, 2, 3]).unwrap()),
            (DomainSpec::ellipsoid(vec![2, 3]).unwrap(), MultiIndex::new(vec![3, 2]).unwrap()),
            (
                DomainSpec::scale(-2.0, DomainSpec::ellipsoid(vec![1, 2]).unwrap()).unwrap(),
                MultiIndex::new(vec![2, 1]).unwrap(),
            ),
        ];
        for (dom, d) in cases {
            for _ in 0..300 {
                let z = if rand::Rng::random::<bool>(&mut rng) {
                    interior_point(&dom, 0.2, &mut rng)
                } else {
                    ball_point(dom.dim(), 2.0 * dom.bound_radius(), &mut rng)
                };
                let cf = closed_form_gauge(&dom, &d, &z).unwrap();
                let b = gauge_unchecked(&dom, &d, &z, 1e-10).unwrap();
                assert!(close(b, cf, 1e-12), "{}: {b:?} vs {cf}", dom.label());
            }
        }
    }
}
