//! Brownian signature terms, Levy area approximations and high order SDE
//! solvers built on them.
//!
//! The numerical core is generic over the scalar type through [`Real`];
//! the aliases at the crate root fix it to `f64`.

pub mod brownian;
pub mod error;
pub mod experiments;
pub mod levy_weak;
pub mod oracle;
pub mod real;
pub mod rng;
pub mod shuffle;
pub mod solvers;
pub mod sst;
pub mod stats;

pub use error::{Error, Result};
pub use real::Real;
pub use rng::{RandomStream, SeedSpec};

pub type Interval = brownian::Interval<f64>;
pub type WhkSample = brownian::WhkSample<f64>;
pub type WhSample = brownian::WhSample<f64>;
pub type SwingVector = brownian::SwingVector<f64>;
pub type GaussianSignatureTerms = brownian::GaussianSignatureTerms<f64>;
pub type MidpointAux = brownian::MidpointAux<f64>;
pub type Increment = brownian::Increment<f64>;
pub type AreaMatrix = levy_weak::AreaMatrix<f64>;
pub type SstMatrix = sst::SstMatrix<f64>;
pub type FinePath = oracle::FinePath<f64>;
pub type OracleFunctionals = oracle::OracleFunctionals<f64>;
