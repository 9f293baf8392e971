//! Finite-volume solver for the Richards equation with Brooks-Corey laws,
//! written on a non-degenerate parametrization of the saturation/Kirchhoff
//! graph and solved with Newton's method.

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod hydro;
pub mod mesh;
pub mod mmatrix;
pub mod newton;
pub mod quadrature;
pub mod scheme;
pub mod sparse;

pub use error::{Error, Result};
