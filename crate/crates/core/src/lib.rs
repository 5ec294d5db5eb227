//! Quantum-limited position estimation for a dark matter-wave soliton.
//!
//! The crate computes how precisely the position of a dark soliton in a
//! quasi-1D Bose-Einstein condensate can be read off a pixelated
//! atom-count image. It provides:
//!
//! * the mean-field soliton profile and pixel-integrated densities
//!   ([`physics`]),
//! * the quantized excitation spectrum on the soliton background and the
//!   resulting pixel covariance ([`bogoliubov`]),
//! * Fisher information / Cramer-Rao bounds for Poisson and Gaussian
//!   measurement models ([`fisher`]),
//! * linear estimators with gain functions and their signal-to-noise
//!   budget ([`estimator`]),
//! * deterministic Monte-Carlo verification that the bounds are
//!   attainable ([`montecarlo`]),
//! * a CLI (`soliton-metrology`) exposing sweeps and simulations
//!   ([`config`], [`sweep`]).

pub mod bogoliubov;
pub mod config;
pub mod error;
pub mod estimator;
pub mod fisher;
pub mod model;
pub mod montecarlo;
pub mod physics;
pub mod quad;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{CountModel, ModelKind};
pub use physics::{PhysicalParams, PixelGrid, Scales, SolitonModel};
