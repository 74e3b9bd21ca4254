//! Curvature-frame toolkit for Riemannian three-manifolds.
//!
//! The crate evaluates metrics on coordinate charts, builds Ricci-diagonalizing
//! frames and the curvature-ε plane fields they determine, integrates geodesics
//! and parallel transport to test the higher-rank property, and implements the
//! Christoffel identity systems and Riccati evolution laws that govern the
//! rotated frame `{E₁, E₂, E₃}`.
//!
//! Module map:
//! - [`metric`]: charts, Christoffel symbols, Riemann tensor, sectional curvature.
//! - [`frame`]: Ricci frames, point and vector classes, `V±`, frame Christoffels.
//! - [`transport`]: geodesics, parallel transport, rank tests, residual forms.
//! - [`dynamics`]: capital frame, identity systems, Riccati and decay laws.
//! - [`zoo`]: builtin charts with known curvature tables.
//! - [`expr`] and [`chartfile`]: the metric expression language and chart files.

// `!(a < b)` is the NaN-rejecting form; index loops mirror the tensor notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod chartfile;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod frame;
pub mod synthetic;
pub mod jet;
pub mod metric;
pub mod transport;
pub mod zoo;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};

/// A point in chart coordinates.
pub type Point = [f64; 3];

/// Numerical tolerances shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Acceptance band for quantities computed from exact derivatives.
    pub analytic: f64,
    /// Acceptance band for quantities computed from finite differences.
    pub numeric: f64,
    /// Band for the isotropic / extremal / generic partition.
    pub class: f64,
    /// ODE conservation tolerance.
    pub ode: f64,
    /// Minimum Ricci eigenvalue gap for differentiating the eigenframe.
    pub sep: f64,
    /// Threshold on `|x₃|` below which a velocity is not treated as generic.
    pub gen: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            analytic: 1e-8,
            numeric: 1e-4,
            class: 1e-6,
            ode: 1e-8,
            sep: 1e-6,
            gen: 1e-6,
        }
    }
}
