//! Invariant distances on model domains and the gauge sandwich for
//! convex weighted-balanced domains.
//!
//! Distances are in hyperbolic units (`tanh^{-1}` scale); comparisons are
//! made after applying `tanh`, where the closed forms are well conditioned.

use serde::{Deserialize, Serialize};

use crate::domain::{DomainKind, DomainSpec, MultiIndex, Point, C64};
use crate::error::{contract, DsqError, Result};
use crate::minkowski::{d_minkowski, Bracket, SupBound};

/// `|a - b| / |1 - conj(a) b|`, the pseudo-hyperbolic distance on the disk.
pub fn pseudo_hyperbolic(a: C64, b: C64) -> f64 {
    let den = (C64::new(1.0, 0.0) - a.conj() * b).norm();
    ((a - b).norm() / den).min(1.0)
}

/// Poincaré distance `tanh^{-1} |(a - b) / (1 - conj(a) b)|`.
pub fn poincare(a: C64, b: C64) -> Result<f64> {
    if !(a.norm_sqr() < 1.0 && b.norm_sqr() < 1.0) {
        return contract("Poincaré distance needs points of the open unit disk");
    }
    Ok(pseudo_hyperbolic(a, b).atanh())
}

fn inner(z: &[C64], w: &[C64]) -> C64 {
    z.iter().zip(w).map(|(x, y)| x * y.conj()).sum()
}

/// Involutive automorphism of the unit ball exchanging `a` and `0`:
/// `(a - P_a z - s_a Q_a z) / (1 - <z, a>)`, `s_a = sqrt(1 - |a|^2)`.
pub fn ball_moebius(a: &[C64], z: &[C64]) -> Option<Vec<C64>> {
    let aa: f64 = a.iter().map(|c| c.norm_sqr()).sum();
    if aa >= 1.0 {
        return None;
    }
    let za = inner(z, a);
    let den = C64::new(1.0, 0.0) - za;
    if den.norm() < 1e-300 {
        return None;
    }
    let s = (1.0 - aa).sqrt();
    let out = if aa == 0.0 {
        z.iter().map(|c| -c).collect()
    } else {
        let k = za / aa;
        a.iter()
            .zip(z)
            .map(|(ai, zi)| {
                let p = ai * k;
                let q = zi - p;
                (ai - p - q * s) / den
            })
            .collect()
    };
    Some(out)
}

/// `tanh` of the ball distance: `|φ_z(w)|`.
pub fn ball_tanh_distance(z: &[C64], w: &[C64]) -> f64 {
    // 1 - |φ_z(w)|^2 = (1 - |z|^2)(1 - |w|^2) / |1 - <w, z>|^2
    let zz: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    let ww: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    let den = (C64::new(1.0, 0.0) - inner(w, z)).norm_sqr();
    let diff: f64 = z.iter().zip(w).map(|(a, b)| (a - b).norm_sqr()).sum();
    // |1-<w,z>|^2 - (1-|z|^2)(1-|w|^2) = |z-w|^2 - |z|^2|w|^2 + |<w,z>|^2,
    // nonnegative by Cauchy-Schwarz; this form avoids cancellation near 0.
    let num = diff - zz * ww + inner(w, z).norm_sqr();
    (num.max(0.0) / den).sqrt().min(1.0)
}

/// One factor of a model domain: `scale * B^{dim}` on coordinates
/// `offset..offset + dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallFactor {
    pub offset: usize,
    pub dim: usize,
    pub scale: f64,
}

/// A model domain written as a product of rescaled balls, with an optional
/// set of punctures. Invariant distances on such domains are the maximum of
/// the factor distances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelChart {
    pub dim: usize,
    pub factors: Vec<BallFactor>,
    pub punctures: Vec<Point>,
}

pub fn model_chart(domain: &DomainSpec) -> Option<ModelChart> {
    let n = domain.dim();
    match domain.kind() {
        DomainKind::Ball { .. } => Some(ModelChart {
            dim: n,
            factors: vec![BallFactor { offset: 0, dim: n, scale: 1.0 }],
            punctures: vec![],
        }),
        DomainKind::Ellipsoid { p } if p.iter().all(|&x| x == 1) => Some(ModelChart {
            dim: n,
            factors: vec![BallFactor { offset: 0, dim: n, scale: 1.0 }],
            punctures: vec![],
        }),
        DomainKind::Polydisk { .. } => Some(ModelChart {
            dim: n,
            factors: (0..n).map(|j| BallFactor { offset: j, dim: 1, scale: 1.0 }).collect(),
            punctures: vec![],
        }),
        DomainKind::Product { factors } => {
            let mut out = Vec::new();
            let mut off = 0;
            for f in factors {
                let c = model_chart(f)?;
                if !c.punctures.is_empty() {
                    return None;
                }
                out.extend(c.factors.into_iter().map(|mut bf| {
                    bf.offset += off;
                    bf
                }));
                off += f.dim();
            }
            Some(ModelChart { dim: n, factors: out, punctures: vec![] })
        }
        DomainKind::Scaled { a, inner } => {
            let mut c = model_chart(inner)?;
            for f in &mut c.factors {
                f.scale *= a;
            }
            c.punctures = c.punctures.into_iter().map(|p| p.scaled(*a)).collect();
            Some(c)
        }
        DomainKind::Punctured { inner } => {
            let mut c = model_chart(inner)?;
            c.punctures.push(Point::zeros(n));
            Some(c)
        }
        _ => None,
    }
}

impl ModelChart {
    fn block<'a>(&self, f: &BallFactor, z: &'a [C64]) -> Vec<C64> {
        z[f.offset..f.offset + f.dim].iter().map(|c| c / f.scale).collect()
    }

    /// `tanh` of the Carathéodory distance of the filled model.
    pub fn tanh_distance(&self, z: &[C64], w: &[C64]) -> f64 {
        self.factors
            .iter()
            .map(|f| ball_tanh_distance(&self.block(f, z), &self.block(f, w)))
            .fold(0.0, f64::max)
    }

    /// Point at normalized chart coordinates `u` (each block in the closed
    /// unit ball) around `center`: blockwise `scale * φ_{center/scale}(u)`.
    /// The filled Carathéodory ball of radius `tanh^{-1} t` around `center`
    /// is the image of the blocks `|u_i| < t`.
    pub fn chart_point(&self, center: &[C64], u: &[C64]) -> Option<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for f in &self.factors {
            let a = self.block(f, center);
            let img = ball_moebius(&a, &u[f.offset..f.offset + f.dim])?;
            for (k, v) in img.into_iter().enumerate() {
                out[f.offset + k] = v * f.scale;
            }
        }
        Some(out)
    }

    /// Inverse of [`ModelChart::chart_point`].
    pub fn chart_coords(&self, center: &[C64], w: &[C64]) -> Option<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for f in &self.factors {
            let a = self.block(f, center);
            let img = ball_moebius(&a, &self.block(f, w))?;
            out[f.offset..f.offset + f.dim].copy_from_slice(&img);
        }
        Some(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Caratheodory,
    Kobayashi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    /// Hyperbolic units.
    pub distance: f64,
    pub tanh_distance: f64,
    pub exact: bool,
    pub bracket: Option<Bracket>,
}

impl MetricValue {
    fn exact_from_tanh(t: f64) -> Self {
        Self {
            distance: t.atanh(),
            tanh_distance: t,
            exact: true,
            bracket: None,
        }
    }
}

fn check_points(domain: &DomainSpec, z: &Point, w: &Point) -> Result<()> {
    for p in [z, w] {
        if !domain.membership(p)? {
            return contract(format!("point outside {}", domain.label()));
        }
    }
    Ok(())
}

/// Exact Carathéodory (= Kobayashi = Lempert) distance on a convex model
/// domain: polydisks, balls, their rescalings and products.
pub fn model_distance(domain: &DomainSpec, z: &Point, w: &Point) -> Result<MetricValue> {
    let chart = model_chart(domain)
        .filter(|c| c.punctures.is_empty())
        .ok_or_else(|| DsqError::Unsupported(format!("no model distance on {}", domain.label())))?;
    check_points(domain, z, w)?;
    Ok(MetricValue::exact_from_tanh(chart.tanh_distance(&z.0, &w.0)))
}

/// Kobayashi distance of the punctured disk `D* = D \ {0}` through the
/// universal covering `exp` from the left half-plane: the minimum over lifts
/// is attained at the principal argument difference.
pub fn punctured_disk_tanh_kobayashi(z: C64, w: C64) -> f64 {
    let lz = z.ln();
    let mut lw = w.ln();
    let mut dy = lw.im - lz.im;
    if dy > std::f64::consts::PI {
        dy -= std::f64::consts::TAU;
    } else if dy <= -std::f64::consts::PI {
        dy += std::f64::consts::TAU;
    }
    lw.im = lz.im + dy;
    ((lz - lw).norm() / (lz + lw.conj()).norm()).min(1.0)
}

/// Invariant distance on a model domain, possibly punctured.
///
/// Bounded holomorphic functions extend across a puncture, so the
/// Carathéodory distance is that of the filled domain. The Kobayashi
/// distance is unchanged by removing a point when `n >= 2`; for the
/// punctured disk it comes from the covering map.
pub fn invariant_distance(domain: &DomainSpec, kind: DistanceKind, z: &Point, w: &Point) -> Result<MetricValue> {
    let chart = model_chart(domain)
        .ok_or_else(|| DsqError::Unsupported(format!("no model distance on {}", domain.label())))?;
    check_points(domain, z, w)?;
    if kind == DistanceKind::Kobayashi && !chart.punctures.is_empty() && domain.dim() == 1 {
        let s = chart.factors[0].scale;
        let t = punctured_disk_tanh_kobayashi(z.0[0] / s, w.0[0] / s);
        return Ok(MetricValue::exact_from_tanh(t));
    }
    Ok(MetricValue::exact_from_tanh(chart.tanh_distance(&z.0, &w.0)))
}

/// `[tanh^{-1}(h_lo^L), tanh^{-1}(h_hi)]`, which contains `c_Ω(0, z)` for a
/// bounded convex `d`-balanced `Ω`.
pub fn caratheodory_sandwich(domain: &DomainSpec, d: &MultiIndex, z: &Point, tol: f64) -> Result<Bracket> {
    if !domain.is_convex() {
        return contract(format!("{} is not convex", domain.label()));
    }
    if !domain.membership(z)? {
        return contract("point outside the domain");
    }
    let h = d_minkowski(domain, d, z, tol)?;
    let l = d.max_weight() as i32;
    Ok(Bracket::new(h.lo.powi(l).min(1.0).atanh(), h.hi.min(1.0).atanh()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LemmaCheck {
    /// `margin = B (tanh k)^{1/L} - h_lo`.
    Holds { margin: f64 },
    Violated { margin: f64 },
    /// No distance value available.
    Skipped,
}

/// Checks `h_{d,Ω}(z) <= B_{aΩ} (tanh k_{aΩ}(0, z))^{1/L}` for `z ∈ aΩ`,
/// where `kval` is an exact or upper value of the distance on `aΩ`.
pub fn lempert_lower_check(
    domain: &DomainSpec,
    d: &MultiIndex,
    bound: &SupBound,
    z: &Point,
    kval: Option<f64>,
    tol: f64,
) -> Result<LemmaCheck> {
    let scaled = DomainSpec::scale(bound.domain_scale, domain.clone())?;
    if !scaled.membership(z)? {
        return contract("point outside aΩ");
    }
    let Some(k) = kval else {
        return Ok(LemmaCheck::Skipped);
    };
    let h = d_minkowski(domain, d, z, tol)?;
    let rhs = bound.estimate * k.tanh().powf(1.0 / d.max_weight() as f64);
    let margin = rhs - h.lo;
    Ok(if margin >= -tol {
        LemmaCheck::Holds { margin }
    } else {
        LemmaCheck::Violated { margin }
    })
}

/// `k_{aΩ}(0, z)` on a scaled model domain.
pub fn scaled_origin_distance(domain: &DomainSpec, a: f64, z: &Point) -> Result<f64> {
    let scaled = DomainSpec::scale(a, domain.clone())?;
    Ok(model_distance(&scaled, &Point::zeros(domain.dim()), z)?.distance)
}
