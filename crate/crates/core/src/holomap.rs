//! Composition trees of elementary injective holomorphic maps with exact
//! inverses.

use serde::{Deserialize, Serialize};

use crate::domain::{MultiIndex, Point, C64};
use crate::error::{contract, DsqError, Result};
use crate::metrics::ball_moebius;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum HoloMap {
    Identity,
    /// `z -> z + b`.
    Translate { b: Point },
    /// `z -> (c_1 z_1, ..., c_n z_n)`, all `c_j != 0`.
    DiagScale { c: Point },
    /// `z_j -> (z_j - a_j) / (1 - conj(a_j) z_j)` with `|a_j| < 1`.
    MoebiusPerCoord { centers: Point },
    /// Involutive automorphism of the unit ball exchanging `center` and 0.
    BallMoebius { center: Point },
    /// `z -> (r^{d_1} z_1, ..., r^{d_n} z_n)`, `0 < r <= 1`.
    DPower { r: f64, d: MultiIndex },
    /// `w -> ((w_j - offset_j) / (2 (1 + k)^{d_j}))_j`.
    ShiftShrink { offset: Point, k: f64, d: MultiIndex },
    /// Block-diagonal product `(f_1(z^1), ..., f_k(z^k))`.
    Blocks { dims: Vec<usize>, maps: Vec<HoloMap> },
    /// Applied first to last.
    Compose { maps: Vec<HoloMap> },
    InverseOf { map: Box<HoloMap> },
}

impl HoloMap {
    pub fn translate(b: Point) -> Self {
        HoloMap::Translate { b }
    }

    pub fn diag_scale(c: Point) -> Result<Self> {
        if c.0.iter().any(|x| x.norm() == 0.0) {
            return contract("diagonal scale factors must be nonzero");
        }
        Ok(HoloMap::DiagScale { c })
    }

    pub fn moebius_per_coord(centers: Point) -> Result<Self> {
        if centers.0.iter().any(|a| a.norm_sqr() >= 1.0) {
            return contract("Möbius centers must lie in the open unit disk");
        }
        Ok(HoloMap::MoebiusPerCoord { centers })
    }

    pub fn ball_moebius(center: Point) -> Result<Self> {
        if center.norm() >= 1.0 {
            return contract("ball automorphism center must lie in the open unit ball");
        }
        Ok(HoloMap::BallMoebius { center })
    }

    pub fn dpower(r: f64, d: MultiIndex) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return contract("d-power radius must lie in (0, 1]");
        }
        Ok(HoloMap::DPower { r, d })
    }

    pub fn shift_shrink(offset: Point, k: f64, d: MultiIndex) -> Result<Self> {
        if !(k >= 0.0 && k.is_finite()) {
            return contract("shift-shrink parameter must be finite and >= 0");
        }
        Ok(HoloMap::ShiftShrink { offset, k, d })
    }

    pub fn blocks(maps: Vec<(usize, HoloMap)>) -> Self {
        let (dims, maps) = maps.into_iter().unzip();
        HoloMap::Blocks { dims, maps }
    }

    pub fn compose(maps: Vec<HoloMap>) -> Self {
        HoloMap::Compose { maps }
    }

    pub fn inverse_of(self) -> Self {
        HoloMap::InverseOf { map: Box::new(self) }
    }

    pub fn apply(&self, z: &[C64]) -> Option<Vec<C64>> {
        let mut v = z.to_vec();
        self.apply_in_place(&mut v)?;
        finite(v)
    }

    pub fn inverse(&self, w: &[C64]) -> Option<Vec<C64>> {
        let mut v = w.to_vec();
        self.inverse_in_place(&mut v)?;
        finite(v)
    }

    /// Every node maps C^n to itself, so evaluation reuses one buffer.
    fn apply_in_place(&self, z: &mut [C64]) -> Option<()> {
        match self {
            HoloMap::Identity => {}
            HoloMap::Translate { b } => same_len(z, &b.0)?.for_each(|(x, y)| *x += y),
            HoloMap::DiagScale { c } => same_len(z, &c.0)?.for_each(|(x, y)| *x *= y),
            HoloMap::MoebiusPerCoord { centers } => {
                for (x, a) in same_len(z, &centers.0)? {
                    *x = moebius(*a, *x)?;
                }
            }
            HoloMap::BallMoebius { center } => {
                if center.dim() != z.len() {
                    return None;
                }
                let out = ball_moebius(&center.0, z)?;
                z.copy_from_slice(&out);
            }
            HoloMap::DPower { r, d } => weighted_scale(z, d, *r)?,
            HoloMap::ShiftShrink { offset, k, d } => {
                same_len(z, &offset.0)?.for_each(|(x, y)| *x -= y);
                weighted_scale(z, d, 1.0 / (2.0 * (1.0 + k)))?;
            }
            HoloMap::Blocks { dims, maps } => blockwise(z, dims, maps, |m, b| m.apply_in_place(b))?,
            HoloMap::Compose { maps } => {
                for m in maps {
                    m.apply_in_place(z)?;
                }
            }
            HoloMap::InverseOf { map } => map.inverse_in_place(z)?,
        }
        Some(())
    }

    fn inverse_in_place(&self, w: &mut [C64]) -> Option<()> {
        match self {
            HoloMap::Identity => {}
            HoloMap::Translate { b } => same_len(w, &b.0)?.for_each(|(x, y)| *x -= y),
            HoloMap::DiagScale { c } => same_len(w, &c.0)?.for_each(|(x, y)| *x /= y),
            HoloMap::MoebiusPerCoord { centers } => {
                for (x, a) in same_len(w, &centers.0)? {
                    *x = moebius(-*a, *x)?;
                }
            }
            // involution
            HoloMap::BallMoebius { .. } => self.apply_in_place(w)?,
            HoloMap::DPower { r, d } => weighted_scale(w, d, 1.0 / *r)?,
            HoloMap::ShiftShrink { offset, k, d } => {
                weighted_scale(w, d, 2.0 * (1.0 + k))?;
                same_len(w, &offset.0)?.for_each(|(x, y)| *x += y);
            }
            HoloMap::Blocks { dims, maps } => blockwise(w, dims, maps, |m, b| m.inverse_in_place(b))?,
            HoloMap::Compose { maps } => {
                for m in maps.iter().rev() {
                    m.inverse_in_place(w)?;
                }
            }
            HoloMap::InverseOf { map } => map.apply_in_place(w)?,
        }
        Some(())
    }

    pub fn apply_point(&self, z: &Point) -> Result<Point> {
        self.apply(&z.0)
            .map(Point)
            .ok_or_else(|| DsqError::Numeric("map undefined at point".into()))
    }

    pub fn inverse_point(&self, w: &Point) -> Result<Point> {
        self.inverse(&w.0)
            .map(Point)
            .ok_or_else(|| DsqError::Numeric("inverse undefined at point".into()))
    }
}

fn finite(v: Vec<C64>) -> Option<Vec<C64>> {
    v.iter().all(|c| c.re.is_finite() && c.im.is_finite()).then_some(v)
}

fn same_len<'a>(z: &'a mut [C64], p: &'a [C64]) -> Option<impl Iterator<Item = (&'a mut C64, &'a C64)>> {
    (z.len() == p.len()).then(|| z.iter_mut().zip(p))
}

/// `z_j -> s^{d_j} z_j`.
fn weighted_scale(z: &mut [C64], d: &MultiIndex, s: f64) -> Option<()> {
    if z.len() != d.len() {
        return None;
    }
    z.iter_mut().zip(d.weights()).for_each(|(x, &w)| *x *= s.powi(w as i32));
    Some(())
}

fn moebius(a: C64, z: C64) -> Option<C64> {
    let den = ONE - a.conj() * z;
    (den.norm() > 1e-300).then(|| (z - a) / den)
}

fn blockwise(
    z: &mut [C64],
    dims: &[usize],
    maps: &[HoloMap],
    f: impl Fn(&HoloMap, &mut [C64]) -> Option<()>,
) -> Option<()> {
    if dims.len() != maps.len() || dims.iter().sum::<usize>() != z.len() {
        return None;
    }
    let mut rest = z;
    for (m, &k) in maps.iter().zip(dims) {
        let (head, tail) = rest.split_at_mut(k);
        f(m, head)?;
        rest = tail;
    }
    Some(())
}
