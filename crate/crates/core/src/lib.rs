//! Inertial-frame analysis and optimal control of open quantum systems.

pub mod bench;
pub mod error;
pub mod inertial;
pub mod krotov;
pub mod linops;
pub mod pulses;
pub mod systems;
pub mod tomography;

pub use error::{Error, Result};
