//! Planar chain model of a many-legged walker with passive, spring-loaded
//! yaw joints: dynamics, gait program, Floquet stability of the straight
//! walk, nonlinear bifurcation experiments and target-approach turning.

pub mod bifurcation;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod floquet;
pub mod gait;
pub mod integrate;
pub mod params;
pub mod sim;
pub mod turning;

pub use error::{Error, Result};
