//! Significance and replication under distributional null hypotheses.
//!
//! A point-form null says every experiment has true mean exactly zero. A
//! distributional null instead lets the true mean vary from experiment to
//! experiment as `μ ~ N(0, qσ²)`, where `q` is the ratio of cross-experiment
//! to within-experiment variance. This crate provides:
//!
//! * [`special`]: Student-t and normal distribution functions built on the
//!   regularized incomplete beta function.
//! * [`point`]: classical point-form p-values, critical values and the
//!   power-based replication approximation.
//! * [`dist`]: p-values, critical values, the asymptotic rejection bound,
//!   the posterior for `μ` and the replication probability under a
//!   distributional null.
//! * [`joint`]: the joint significance + replication criterion `R_q`, its
//!   minimum over `q`, the `β = 0.5` rule of thumb and the interval of `q`
//!   over which a result passes both criteria.
//! * [`variance_ratio`]: estimation of `q` from multi-site data.
//!
//! The crate is `no_std` and only needs `alloc` for the multi-site data
//! structures.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
pub mod dist;
pub mod joint;
pub mod point;
pub mod solve;
pub mod special;
pub mod summary;
pub mod variance_ratio;

pub use error::{Error, Result};
pub use special::{DegreesOfFreedom, Probability};
pub use summary::{ExperimentDesign, ExperimentSummary};
