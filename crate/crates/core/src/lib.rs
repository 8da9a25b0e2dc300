//! Worst-case delay bounds for switched Ethernet networks and their use in
//! the analysis of delayed control loops.
//!
//! The crate is organised as a pipeline. A declarative [`net_model`] is
//! analysed by [`calculus`], which propagates leaky-bucket traffic envelopes
//! through every switch component and produces a per-stream upper-bound
//! delay (UBD). That bound feeds the [`stability`] small-gain test of the
//! closed loop and the [`smith_sim`] fixed-step simulation of a
//! Smith-predictor compensated loop. [`des_oracle`] is an independent
//! event-driven simulator of the same switch model, used to check that no
//! conforming workload ever exceeds an analytic bound.

pub mod calculus;
pub mod config;
pub mod des_oracle;
pub mod lti;
pub mod net_model;
pub mod smith_sim;
pub mod stability;
pub mod synth;

pub use calculus::{BoundResult, BurstinessSystem, NetworkAnalysis, StreamAnalysis};
pub use lti::{Polynomial, RationalTf, StateSpace, TimeUnit};
pub use net_model::{
    Link, NetworkModel, NodeId, Stream, StreamId, SwitchSpec, TrafficEnvelope, ValidationReport,
};
pub use smith_sim::{DelayProcess, LoopConfig, SetpointSpec, SimTrace};
pub use stability::{FrequencyGrid, StabilityVerdict};
