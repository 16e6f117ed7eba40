//! Loewner-framework identification and reduction of linear, parametric and
//! bilinear dynamical systems from frequency- or time-domain data.

pub mod benchmarks;
pub mod bilinear;
pub mod error;
pub mod hankel;
pub mod io;
pub mod lddc;
pub mod linalg;
pub mod lti;
pub mod model;
pub mod parametric;

pub use error::{Error, ErrorFamily, Result};
