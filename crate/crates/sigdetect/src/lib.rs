//! Finite-sample distributions, p-values, critical values and power for
//! supremum-type goodness-of-fit statistics (Higher Criticism, Berk-Jones,
//! the phi-divergence family and the one-sided KS statistic).

pub mod approx;
pub mod error;
pub mod exact;
pub mod gof;
pub mod highprec;
pub mod inference;
pub mod logsum;
pub mod models;
pub mod montecarlo;
pub mod special;

pub use error::{Error, Result};
