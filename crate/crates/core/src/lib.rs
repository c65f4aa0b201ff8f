//! Certified data-driven model-order reduction for linear systems.
//!
//! From two sampled trajectories of an unknown plant `ẋ = Ax + Bu` (one
//! excited, one with zero input from the same initial state) the pipeline
//! builds a reduced-order model, a quadratic simulation function with
//! constants `(α, κ, ρ)`, and an interface map that refines reduced-model
//! controllers to the plant with a guaranteed output-closeness bound.

pub mod certificate;
pub mod control;
pub mod data;
pub mod document;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod pipeline;
pub mod rom;
pub mod scenario;
pub mod sdp;
pub mod sf;
pub mod systems;

pub use certificate::{Certificate, Check, Report};
pub use data::{DataSet, DerivativeMode, Excitation};
pub use document::Document;
pub use error::{Error, ErrorClass, Result};
pub use geometry::AaBox;
pub use systems::{Benchmark, LtiPlant, SpecKind, Trajectory};
