//! Coverage probability of cellular networks under user-count
//! threshold-based BS on/off control.
//!
//! A base station that serves at most θ users is put to sleep; its users
//! hand over to the next weighted-nearest active BS. This crate computes
//! the downlink coverage probability of such networks two independent
//! ways and finds the coverage-maximizing threshold:
//!
//! - [`analytic`] — closed forms and quadrature expressions for single-tier
//!   and K-tier layouts, including the interference-limited overall
//!   coverage and the α = 4 parabolic-cylinder form
//! - [`sim`] — seeded Monte Carlo over Poisson-distributed BSs and users
//!   with deterministic, worker-count-independent results
//! - [`optimize`] — the closed-form threshold rule, an exhaustive argmax,
//!   and a derivative diagnostic
//! - [`specialfn`] — the numerical kernels the formulas need
//! - [`model`] — scenario types shared by all of the above
//! - [`cli`] — config-driven experiment driver emitting sweep tables
//!
//! The `cellcov` binary exposes the driver; see the crate README.

// Validation guards are written `!(x > 0.0)` so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Hot loops index several parallel arrays; zipping them obscures more
// than it helps.
#![allow(clippy::needless_range_loop)]

pub mod analytic;
pub mod cli;
pub mod model;
pub mod optimize;
pub mod sim;
pub mod specialfn;
