//! Motion-planning engine and measurement primitives.
//!
//! The crate provides the building blocks needed to study where
//! sampling-based planners actually spend their time: compound configuration
//! spaces with exact ball-volume computation, exact nearest-neighbor indexes
//! (a linear-scan oracle and a GNAT-style metric tree), resolution-stepped
//! collision checking, and the planners sPRM*, Lazy-sPRM* and RRT* with
//! radial and k-NN connection strategies. Every planner run fills a
//! [`collision::PrimitiveLedger`] with per-primitive counts and wall times,
//! from which the NN-to-CD time ratio chi is derived.

pub mod collision;
pub mod error;
pub mod nn;
pub mod planner;
pub mod quad;
pub mod space;
pub mod volume;

pub use error::SpaceError;
pub use space::{Point, StateSpace};
