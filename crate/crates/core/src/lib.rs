//! Numerical verification of semi-slant structure for Riemannian maps.
//!
//! Given a smooth map between coordinate manifolds described by closed-form
//! component expressions, this crate computes the vertical/horizontal and
//! range splittings of the differential, detects the invariant/slant
//! decomposition of the kernel, measures the slant angle, assembles the
//! structure operators and the fundamental tensors of the splitting, and
//! machine-checks the classical identities relating them (harmonicity,
//! totally geodesic and umbilical conditions, integrability, and local
//! product decompositions).
//!
//! The crate is `no_std`-compatible (with `alloc`); disable the default
//! `std` feature for embedded or sandboxed use. All computations are pure
//! functions of their inputs: sampling is driven by an explicit seed and
//! results are deterministic for a fixed plan.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analyze;
pub mod catalog;
pub mod expr;
pub mod geometry;
pub mod map;
mod num;
pub mod linalg;
pub mod report;
pub mod sample;
pub mod slant;
pub mod tensors;

pub use analyze::{analyze, AnalysisReport};
pub use expr::{Expr, ParamSet};
pub use geometry::{AlmostComplex, Christoffel, MetricField};
pub use map::{MapSpec, PointSplit, SampleBox};
pub use report::{CheckReport, Tolerances, Verdict};
pub use sample::SamplePlan;
