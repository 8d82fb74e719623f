//! Orlicz norms, explicit tail bounds and Monte Carlo verification of
//! concentration inequalities for α-subexponential random variables.
//!
//! The crate is organized bottom-up:
//!
//! - [`orlicz`]: Ψ_α quasi-norms (empirical, closed form, quadrature), `L^p`
//!   norms and the explicit constant chain `K_1 .. K_5`.
//! - [`distributions`]: reproducible samplers for scalar laws, simple random
//!   tensors and the truncation decomposition.
//! - [`specnorms`]: matrix norms and the two chaos norms that control
//!   quadratic-form moments.
//! - [`bounds`]: every tail and moment bound as an explicit function.
//! - [`montecarlo`]: statistics of random objects and a deterministic
//!   parallel harness producing tail estimates with exact binomial bands.
//! - [`calibrate`]: minimal dominating constants and domination verdicts.

// Checks are written as `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binomial;
pub mod bounds;
pub mod calibrate;
pub mod distributions;
pub mod error;
pub mod montecarlo;
pub mod numerics;
pub mod orlicz;
pub mod rng;
pub mod specnorms;

pub use bounds::{BoundFamily, BoundValue, CurveParams, Sidedness, TailBoundCurve, Validity};
pub use calibrate::{domination_report, min_dominating_constant, CalibrationResult, CalibrationStatus};
pub use distributions::{DistributionSpec, TensorSpec};
pub use error::{Error, Result};
pub use montecarlo::{empirical_tail, StatisticKind, StatisticSpec, TailEstimate};
pub use orlicz::{AlphaParam, OrliczValue};
pub use rng::StreamId;
pub use specnorms::{Ensemble, NormBundle, SymMatrix};
