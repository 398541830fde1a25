//! Numerical laboratory for the equivariant biharmonic map heat flow.
//!
//! Profiles `ψ(r)` of maps `x ↦ (sin ψ(|x|) x/|x|, cos ψ(|x|))` into the round sphere
//! reduce the flow to a scalar fourth-order parabolic equation; its steady states in
//! the critical dimension become an autonomous ODE in `s = log r`. The modules cover
//! the radial operator calculus ([`reduction`]), the phase-space dynamics
//! ([`dynamics`]), numerical lemma certificates ([`certificates`]), map construction
//! and bi-energy ([`maps`]) and a method-of-lines solver for the flow ([`flow`]).

pub mod certificates;
pub mod dynamics;
pub mod error;
pub mod fd;
pub mod flow;
pub mod integrator;
pub mod io;
pub mod maps;
pub mod quadrature;
pub mod reduction;
pub mod types;

pub use error::{Error, Result};
pub use integrator::{
    integrate_adaptive, integrate_adaptive_with, Direction, EventRecord, EventSpec, Guards, IntegratorOptions,
    StopReason, Termination, Trajectory,
};
pub use types::{FlowParams, Parity, PhaseState, RadialGrid, RadialProfile, Spacing, Vec4};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
