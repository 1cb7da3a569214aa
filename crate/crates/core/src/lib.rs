//! Weighted Minkowski functionals, invariant-metric bounds, and certified
//! squeezing-function and Fridman-invariant estimates on a catalog of bounded
//! domains in C^n.

pub mod domain;
pub mod error;
pub mod fridman;
pub mod holomap;
pub mod lab;
pub mod metrics;
pub mod minkowski;
pub mod sampling;
pub mod search;
pub mod squeeze;

pub use domain::{ellipsoid_dindex, DomainKind, DomainSpec, MultiIndex, Point, C64};
pub use error::{DsqError, Result};
pub use fridman::{FridmanCertificate, FridmanFamily, Verdict};
pub use holomap::HoloMap;
pub use minkowski::{Bracket, Sublevel, SupBound};
pub use search::SearchBudget;
pub use squeeze::{Certificate, MapFamily};
