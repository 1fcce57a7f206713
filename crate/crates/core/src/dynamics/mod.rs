//! Rigid-body airship model.

pub mod eom;
pub mod kinematics;
pub mod mass;
pub mod wrench;

pub use eom::{Airship, RigidState, StateDerivative, WindState};
pub use wrench::Wrench;
