//! Local (one-hop) throughput of a wireless link in a Poisson field of interferers.

pub mod connectivity;
pub mod error;
pub mod model;
pub mod numerics;
pub mod scalar;
pub mod sim;
pub mod sinr;
pub mod stable;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision instantiations of the generic types.
pub type Scenario = model::Scenario<f64>;
pub type PropagationModel = model::PropagationModel<f64>;
pub type TrafficModel = model::TrafficModel<f64>;
pub type QueueEvents = model::QueueEvents<f64>;
pub type QuadratureRule = numerics::QuadratureRule<f64>;
pub type StableParams = stable::StableParams<f64>;
pub type TotallySkewedStable = stable::TotallySkewedStable<f64>;
pub type ConnectivityBreakdown = connectivity::ConnectivityBreakdown<f64>;
pub type ProbeAudibility = connectivity::ProbeAudibility<f64>;
pub type SinrBreakdown = sinr::SinrBreakdown<f64>;
pub type SuccessProb = sinr::SuccessProb<f64>;
