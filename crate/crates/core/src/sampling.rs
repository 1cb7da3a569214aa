//! Seeded random sampling of points in and on the boundary of catalog domains.
//!
//! All catalog domains are star-shaped with respect to the origin (punctured
//! ones after filling), so each random direction meets the boundary exactly
//! once and the exit parameter is found by bisection on membership.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::domain::{norm, DomainSpec, C64};

pub type SampleRng = ChaCha8Rng;

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform direction on the unit sphere of C^n.
pub fn random_direction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let r = norm(&v);
        if r > 1e-12 {
            return v.into_iter().map(|c| c / r).collect();
        }
    }
}

/// Uniform point of the closed unit disk.
pub fn unit_disk_point<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let r: f64 = rng.random::<f64>().sqrt();
    let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    C64::from_polar(r, t)
}

/// Uniform point of the open ball `B(0, radius)` in C^n.
pub fn ball_point<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Vec<C64> {
    let u = random_direction(n, rng);
    let s = radius * rng.random::<f64>().powf(1.0 / (2 * n) as f64);
    u.into_iter().map(|c| c * s).collect()
}

/// Bracket `(inside, outside)` of the exit parameter of the ray `s * u`.
pub fn ray_exit(domain: &DomainSpec, u: &[C64]) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = domain.bound_radius() / norm(u).max(f64::MIN_POSITIVE);
    while domain.contains(&u.iter().map(|c| c * hi).collect::<Vec<_>>()) {
        hi *= 1.0 + 1e-9;
    }
    for _ in 0..200 {
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let p: Vec<C64> = u.iter().map(|c| c * mid).collect();
        if domain.contains(&p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// A member of the domain. With probability `near` the point is placed at
/// relative depth below `1e-9` under the boundary, otherwise its radius
/// along the ray is drawn as for the uniform ball.
pub fn interior_point<R: Rng + ?Sized>(domain: &DomainSpec, near: f64, rng: &mut R) -> Vec<C64> {
    let n = domain.dim();
    loop {
        let u = random_direction(n, rng);
        let (lo, _) = ray_exit(domain, &u);
        let s = if rng.random::<f64>() < near {
            lo * (1.0 - 1e-9 * rng.random::<f64>())
        } else {
            lo * rng.random::<f64>().powf(1.0 / (2 * n) as f64)
        };
        let p: Vec<C64> = u.iter().map(|c| c * s).collect();
        if domain.contains(&p) {
            return p;
        }
    }
}

/// A point just outside the boundary along a random ray (outer side of the
/// exit bracket). Punctures are not produced here; see
/// [`DomainSpec::punctures`].
pub fn boundary_point<R: Rng + ?Sized>(domain: &DomainSpec, rng: &mut R) -> Vec<C64> {
    let u = random_direction(domain.dim(), rng);
    let (_, hi) = ray_exit(domain, &u);
    u.into_iter().map(|c| c * hi).collect()
}

pub fn interior_points(domain: &DomainSpec, count: usize, near: f64, seed: u64, stream: u64) -> Vec<Vec<C64>> {
    let mut rng = stream_rng(seed, stream);
    (0..count).map(|_| interior_point(domain, near, &mut rng)).collect()
}

pub fn boundary_points(domain: &DomainSpec, count: usize, seed: u64, stream: u64) -> Vec<Vec<C64>> {
    let mut rng = stream_rng(seed, stream);
    (0..count).map(|_| boundary_point(domain, &mut rng)).collect()
}
