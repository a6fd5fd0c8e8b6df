//! Reconstruction of time-local master-equation generators from density
//! matrix trajectories.
//!
//! A channel on an `n`-level system is stored as its process matrix `D`,
//! whose row `(i1, i2)` holds the flattened image of `|i1⟩⟨i2|`; pairs are
//! flattened as `a * n + b`. `D` is assembled from the output states of the
//! `n²` standard inputs ([`tomography`]), differentiated on five-point
//! stencils ([`stencil`]) and turned into the generator `G = D⁻¹ Ḋ`
//! ([`liouvillian`]), so that `dρ/dt` has components `Σ_j ρ_j G[j, k]`.
//! [`models`] provides three open two-level systems with closed-form
//! answers, and [`cli`] exposes everything as a command-line tool.

// Several guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod liouvillian;
pub mod models;
pub mod quantum;
pub mod stencil;
pub mod tomography;
pub mod validation;

pub use error::{Error, Result};
