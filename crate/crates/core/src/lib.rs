//! Numerical laboratory for Aharonov-Bohm phase differences.
//!
//! The crate evaluates quasi-static electromagnetic potentials and fields for
//! ideal solenoids and Faraday cages ([`em`]), represents interferometer arms
//! as piecewise-linear worldlines ([`worldline`]), builds ruled spacetime
//! surfaces bounded by the two arms ([`surface`]), and computes phase
//! differences through every equivalent route ([`phase`]): potentials along
//! paths, field fluxes through spacetime surfaces, the three-term
//! decomposition of the electrodynamic setup and the total-electric-field
//! line integral. [`scenario`] loads declarative TOML scenarios, runs every
//! applicable formula plus the consistency audits and writes JSON/CSV output.
//!
//! Units: `q = ħ = 1` unless a different `q/ħ` ratio is configured; lengths
//! and times are dimensionless.

pub mod em;
mod error;
pub mod exec;
pub mod geometry;
pub mod phase;
pub mod quadrature;
pub mod scenario;
pub mod surface;
pub mod worldline;

pub use em::{
    ChiSpec, Event, FieldConfig, FieldSample, GaugeFunction, GaugeState, PotentialCage, Profile,
    ShieldedCage, SolenoidSource,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use phase::{PhaseReport, PhysicalConstants, QuadratureSpec};
pub use surface::{DeformationStrategy, SurfaceMesh};
pub use worldline::{Interferometer, Worldline};
