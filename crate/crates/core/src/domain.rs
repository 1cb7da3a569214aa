//! Symbolic bounded domains in C^n and their membership oracle.
//!
//! Every domain is an open set; membership is a strict inequality on a
//! closed-form defining function. Flags (balanced, weighted-balanced, convex,
//! homogeneous) are derived at construction time from the structure of the
//! description, never supplied by the caller.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{contract, DsqError, Result};

pub type C64 = Complex64;

/// Weight vector `d = (d_1, ..., d_n)` of a weighted (quasi-)balanced action.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct MultiIndex {
    weights: Vec<u32>,
    max: u32,
    min: u32,
}

impl MultiIndex {
    pub fn new(weights: Vec<u32>) -> Result<Self> {
        if weights.is_empty() {
            return contract("multi-index must have at least one entry");
        }
        if weights.iter().any(|&w| w == 0) {
            return contract("multi-index entries must be >= 1");
        }
        let max = *weights.iter().max().unwrap();
        let min = *weights.iter().min().unwrap();
        Ok(Self { weights, max, min })
    }

    pub fn ones(n: usize) -> Self {
        Self::new(vec![1; n.max(1)]).expect("non-empty")
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `L`, the largest weight.
    pub fn max_weight(&self) -> u32 {
        self.max
    }

    pub fn min_weight(&self) -> u32 {
        self.min
    }

    pub fn is_constant(&self) -> bool {
        self.max == self.min
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a MultiIndex>) -> Result<Self> {
        Self::new(parts.into_iter().flat_map(|m| m.weights.iter().copied()).collect())
    }

    pub fn slice(&self, offset: usize, len: usize) -> Result<Self> {
        Self::new(self.weights[offset..offset + len].to_vec())
    }

    /// Parses `"1,2,3"`.
    pub fn parse_csv(s: &str) -> Result<Self> {
        let weights = s
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| DsqError::Contract(format!("bad multi-index `{s}`: {e}")))?;
        Self::new(weights)
    }
}

impl TryFrom<Vec<u32>> for MultiIndex {
    type Error = DsqError;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MultiIndex> for Vec<u32> {
    fn from(m: MultiIndex) -> Self {
        m.weights
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A point of C^n.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<C64>);

impl Point {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return contract("point coordinates must be finite");
        }
        Ok(Self(coords))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![C64::new(0.0, 0.0); n])
    }

    pub fn from_real(xs: &[f64]) -> Self {
        Self(xs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn is_origin(&self) -> bool {
        is_origin(&self.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|c| c * s).collect())
    }

    /// `(lambda^{d_1} z_1, ..., lambda^{d_n} z_n)`.
    pub fn weighted(&self, d: &MultiIndex, lambda: C64) -> Self {
        Self(weighted_action(&self.0, d, lambda))
    }
}

pub(crate) fn norm(z: &[C64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn is_origin(z: &[C64]) -> bool {
    z.iter().all(|c| c.re == 0.0 && c.im == 0.0)
}

pub(crate) fn weighted_action(z: &[C64], d: &MultiIndex, lambda: C64) -> Vec<C64> {
    z.iter()
        .zip(d.weights())
        .map(|(c, &w)| c * lambda.powu(w))
        .collect()
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CoordJson {
    Real(f64),
    Pair([f64; 2]),
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<CoordJson>::deserialize(d)?;
        let coords = raw
            .into_iter()
            .map(|c| match c {
                CoordJson::Real(x) => C64::new(x, 0.0),
                CoordJson::Pair([re, im]) => C64::new(re, im),
            })
            .collect();
        Point::new(coords).map_err(serde::de::Error::custom)
    }
}

/// `|sum_j c_j z_j| < b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearBound {
    pub c: Point,
    pub b: f64,
}

/// Structural description of a domain; this is also the JSON schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainKind {
    /// Unit ball of C^n.
    Ball { n: usize },
    /// Unit polydisk of C^n.
    Polydisk { n: usize },
    /// `sum_j |z_j|^{2 p_j} < 1`.
    Ellipsoid { p: Vec<u32> },
    Product { factors: Vec<DomainSpec> },
    /// `a * inner` for a real nonzero `a`.
    Scaled { a: f64, inner: Box<DomainSpec> },
    /// `inner \ {0}`.
    Punctured { inner: Box<DomainSpec> },
    /// Intersection of `|l_k(z)| < b_k`; balanced and convex by construction.
    Halfspaces { n: usize, constraints: Vec<LinearBound> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flags {
    pub balanced: bool,
    /// Canonical weight vector for which the domain is weighted-balanced.
    pub d_balanced_for: Option<MultiIndex>,
    pub convex: bool,
    pub homogeneous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainKind", into = "DomainKind")]
pub struct DomainSpec {
    kind: DomainKind,
    dim: usize,
    bound_radius: f64,
    flags: Flags,
}

impl TryFrom<DomainKind> for DomainSpec {
    type Error = DsqError;
    fn try_from(kind: DomainKind) -> Result<Self> {
        DomainSpec::from_kind(kind)
    }
}

impl From<DomainSpec> for DomainKind {
    fn from(d: DomainSpec) -> Self {
        d.kind
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Weights `d_j = lcm(p) / p_j` under which the complex ellipsoid with
/// exponents `p` has the gauge `(sum |z_j|^{2 p_j})^{1 / (2 lcm(p))}`.
pub fn ellipsoid_dindex(p: &[u32]) -> Result<MultiIndex> {
    if p.is_empty() || p.iter().any(|&x| x == 0) {
        return contract("ellipsoid exponents must be >= 1");
    }
    let m = p.iter().fold(1u64, |acc, &x| acc / gcd(acc, x as u64) * x as u64);
    MultiIndex::new(p.iter().map(|&x| (m / x as u64) as u32).collect())
}

fn unit_ball_flags(n: usize) -> Flags {
    Flags {
        balanced: true,
        d_balanced_for: Some(MultiIndex::ones(n)),
        convex: true,
        homogeneous: true,
    }
}

impl DomainSpec {
    pub fn from_kind(kind: DomainKind) -> Result<Self> {
        match kind {
            DomainKind::Ball { n } => Self::ball(n),
            DomainKind::Polydisk { n } => Self::polydisk(n),
            DomainKind::Ellipsoid { p } => Self::ellipsoid(p),
            DomainKind::Product { factors } => Self::product(factors),
            DomainKind::Scaled { a, inner } => Self::scale(a, *inner),
            DomainKind::Punctured { inner } => Self::punctured(*inner),
            DomainKind::Halfspaces { n, constraints } => Self::halfspaces(n, constraints),
        }
    }

    pub fn ball(n: usize) -> Result<Self> {
        if n == 0 {
            return contract("dimension must be >= 1");
        }
        Ok(Self {
            kind: DomainKind::Ball { n },
            dim: n,
            bound_radius: 1.0,
            flags: unit_ball_flags(n),
        })
    }

    pub fn disk() -> Self {
        Self::ball(1).expect("n = 1")
    }

    pub fn polydisk(n: usize) -> Result<Self> {
        if n == 0 {
            return contract("dimension must be >= 1");
        }
        Ok(Self {
            kind: DomainKind::Polydisk { n },
            dim: n,
            bound_radius: (n as f64).sqrt(),
            flags: unit_ball_flags(n),
        })
    }

    pub fn ellipsoid(p: Vec<u32>) -> Result<Self> {
        let d = ellipsoid_dindex(&p)?;
        let n = p.len();
        let homogeneous = p.iter().all(|&x| x == 1);
        Ok(Self {
            kind: DomainKind::Ellipsoid { p },
            dim: n,
            bound_radius: (n as f64).sqrt(),
            flags: Flags {
                balanced: true,
                d_balanced_for: Some(d),
                convex: true,
                homogeneous,
            },
        })
    }

    pub fn product(factors: Vec<DomainSpec>) -> Result<Self> {
        if factors.is_empty() {
            return contract("product needs at least one factor");
        }
        let dim = factors.iter().map(|f| f.dim).sum();
        let bound_radius = factors
            .iter()
            .map(|f| f.bound_radius * f.bound_radius)
            .sum::<f64>()
            .sqrt();
        let d_balanced_for = factors
            .iter()
            .map(|f| f.flags.d_balanced_for.as_ref())
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex::concat)
            .transpose()?;
        let flags = Flags {
            balanced: factors.iter().all(|f| f.flags.balanced),
            d_balanced_for,
            convex: factors.iter().all(|f| f.flags.convex),
            homogeneous: factors.iter().all(|f| f.flags.homogeneous),
        };
        Ok(Self {
            kind: DomainKind::Product { factors },
            dim,
            bound_radius,
            flags,
        })
    }

    pub fn scale(a: f64, inner: DomainSpec) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return contract("scale factor must be finite and nonzero");
        }
        Ok(Self {
            dim: inner.dim,
            bound_radius: a.abs() * inner.bound_radius,
            flags: inner.flags.clone(),
            kind: DomainKind::Scaled {
                a,
                inner: Box::new(inner),
            },
        })
    }

    pub fn punctured(inner: DomainSpec) -> Result<Self> {
        if !inner.contains(&vec![C64::new(0.0, 0.0); inner.dim]) {
            return contract("puncture point (origin) must lie in the inner domain");
        }
        Ok(Self {
            dim: inner.dim,
            bound_radius: inner.bound_radius,
            flags: Flags {
                balanced: false,
                d_balanced_for: None,
                convex: false,
                homogeneous: false,
            },
            kind: DomainKind::Punctured {
                inner: Box::new(inner),
            },
        })
    }

    /// Intersection of the slabs `|<c_k, z>| < b_k`.
    ///
    /// The functionals must span the dual of C^n, otherwise the set is
    /// unbounded. With `M` the matrix of rows `c_k / b_k`, every member
    /// satisfies `|z| <= |M z| / sigma_min(M) < sqrt(m) / sigma_min(M)`.
    pub fn halfspaces(n: usize, constraints: Vec<LinearBound>) -> Result<Self> {
        if n == 0 {
            return contract("dimension must be >= 1");
        }
        if constraints.is_empty() {
            return Err(DsqError::InvalidDomain("no constraints: unbounded".into()));
        }
        for c in &constraints {
            if c.c.dim() != n {
                return Err(DsqError::DimensionMismatch {
                    expected: n,
                    got: c.c.dim(),
                });
            }
            if !(c.b > 0.0 && c.b.is_finite()) {
                return Err(DsqError::InvalidDomain("bounds must be positive".into()));
            }
        }
        let m = constraints.len();
        let mat = DMatrix::<C64>::from_fn(m, n, |i, j| constraints[i].c.0[j] / constraints[i].b);
        let gram = mat.adjoint() * &mat;
        let eig = gram.symmetric_eigenvalues();
        let lambda_min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(lambda_min > 1e-14) {
            return Err(DsqError::InvalidDomain(
                "constraints do not bound the domain (rank deficient)".into(),
            ));
        }
        let bound_radius = (m as f64).sqrt() / lambda_min.sqrt() * (1.0 + 1e-12);
        Ok(Self {
            kind: DomainKind::Halfspaces { n, constraints },
            dim: n,
            bound_radius,
            flags: Flags {
                balanced: true,
                d_balanced_for: Some(MultiIndex::ones(n)),
                convex: true,
                homogeneous: false,
            },
        })
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Radius `R` with the domain contained in the open ball `B(0, R)`.
    pub fn bound_radius(&self) -> f64 {
        self.bound_radius
    }

    pub fn flags(&self) -> &Flags {
        &self.flags
    }

    pub fn is_convex(&self) -> bool {
        self.flags.convex
    }

    pub fn is_balanced(&self) -> bool {
        self.flags.balanced
    }

    pub fn is_homogeneous(&self) -> bool {
        self.flags.homogeneous
    }

    /// Whether the domain is closed under `z -> (l^{d_1} z_1, ..., l^{d_n} z_n)`
    /// for every `|l| <= 1`.
    ///
    /// Complete Reinhardt catalog members (ball, polydisk, ellipsoid) are
    /// closed under coordinatewise contraction, hence balanced for every
    /// weight vector. A merely balanced domain is only guaranteed to be
    /// `(k, ..., k)`-balanced.
    pub fn is_d_balanced(&self, d: &MultiIndex) -> bool {
        if d.len() != self.dim {
            return false;
        }
        match &self.kind {
            DomainKind::Ball { .. } | DomainKind::Polydisk { .. } | DomainKind::Ellipsoid { .. } => {
                true
            }
            DomainKind::Halfspaces { .. } => d.is_constant(),
            DomainKind::Scaled { inner, .. } => inner.is_d_balanced(d),
            DomainKind::Punctured { .. } => false,
            DomainKind::Product { factors } => {
                let mut off = 0;
                factors.iter().all(|f| {
                    let ok = d
                        .slice(off, f.dim)
                        .map(|s| f.is_d_balanced(&s))
                        .unwrap_or(false);
                    off += f.dim;
                    ok
                })
            }
        }
    }

    pub fn canonical_dindex(&self) -> Option<&MultiIndex> {
        self.flags.d_balanced_for.as_ref()
    }

    /// Checked membership.
    pub fn membership(&self, z: &Point) -> Result<bool> {
        if z.dim() != self.dim {
            return Err(DsqError::DimensionMismatch {
                expected: self.dim,
                got: z.dim(),
            });
        }
        Ok(self.contains(&z.0))
    }

    /// Membership on raw coordinates; the caller guarantees `z.len() == dim`.
    pub fn contains(&self, z: &[C64]) -> bool {
        debug_assert_eq!(z.len(), self.dim);
        match &self.kind {
            DomainKind::Ball { .. } => z.iter().map(|c| c.norm_sqr()).sum::<f64>() < 1.0,
            DomainKind::Polydisk { .. } => z.iter().all(|c| c.norm_sqr() < 1.0),
            DomainKind::Ellipsoid { p } => {
                z.iter()
                    .zip(p)
                    .map(|(c, &pj)| c.norm_sqr().powi(pj as i32))
                    .sum::<f64>()
                    < 1.0
            }
            DomainKind::Product { factors } => {
                let mut off = 0;
                factors.iter().all(|f| {
                    let inside = f.contains(&z[off..off + f.dim]);
                    off += f.dim;
                    inside
                })
            }
            DomainKind::Scaled { a, inner } => {
                let w: Vec<C64> = z.iter().map(|c| c / *a).collect();
                inner.contains(&w)
            }
            DomainKind::Punctured { inner } => !is_origin(z) && inner.contains(z),
            DomainKind::Halfspaces { constraints, .. } => constraints.iter().all(|lb| {
                let v: C64 = lb.c.0.iter().zip(z).map(|(c, x)| c * x).sum();
                v.norm() < lb.b
            }),
        }
    }

    /// Points that are isolated boundary points (punctures), in ambient
    /// coordinates.
    pub fn punctures(&self) -> Vec<Point> {
        match &self.kind {
            DomainKind::Punctured { inner } => {
                let mut v = vec![Point::zeros(self.dim)];
                v.extend(inner.punctures());
                v
            }
            DomainKind::Scaled { a, inner } => {
                inner.punctures().into_iter().map(|p| p.scaled(*a)).collect()
            }
            _ => Vec::new(),
        }
    }

    /// The domain with all punctures filled in.
    pub fn filled(&self) -> DomainSpec {
        match &self.kind {
            DomainKind::Punctured { inner } => inner.filled(),
            DomainKind::Scaled { a, inner } => {
                DomainSpec::scale(*a, inner.filled()).expect("valid scale")
            }
            DomainKind::Product { factors } => {
                DomainSpec::product(factors.iter().map(|f| f.filled()).collect())
                    .expect("non-empty")
            }
            _ => self.clone(),
        }
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match &self.kind {
            DomainKind::Ball { n } if *n == 1 => "disk".into(),
            DomainKind::Ball { n } => format!("ball{n}"),
            DomainKind::Polydisk { n } => format!("polydisk{n}"),
            DomainKind::Ellipsoid { p } => format!(
                "ellipsoid({})",
                p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            ),
            DomainKind::Product { factors } => factors
                .iter()
                .map(|f| f.label())
                .collect::<Vec<_>>()
                .join("x"),
            DomainKind::Scaled { a, inner } => format!("{a}*{}", inner.label()),
            DomainKind::Punctured { inner } => format!("{}\\0", inner.label()),
            DomainKind::Halfspaces { constraints, .. } => format!("slabs[{}]", constraints.len()),
        }
    }
}
