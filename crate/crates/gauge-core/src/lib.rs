//! Numerical machinery for epsilon-regularized gauge connections on chart
//! domains: Lie-algebra valued differential forms, curvature, parallel
//! transport, characteristic forms, and distributional limits extracted from
//! families indexed by a regularization parameter.

pub mod characteristic;
pub mod colombeau;
pub mod connection;
pub mod error;
pub mod forms;
pub mod holonomy;
pub mod liealg;
pub mod quadrature;
pub mod sample;
pub mod scenarios;

pub use error::{Error, Result};
