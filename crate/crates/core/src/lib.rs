//! Airship flight dynamics and Extended-INDI flight control.
//!
//! The crate is organised around the closed loop:
//!
//! - [`dynamics`]: rigid-body model with added mass, external wrenches and RK4 integration.
//! - [`actuators`]: first-order, rate- and position-limited actuator models.
//! - [`estimation`]: dirty derivative and complementary filters.
//! - [`inner_loop`]: pseudo-control inversion, reference models and hedging.
//! - [`outer_loop`]: pilot command mapping and attitude generation.
//! - [`allocation`]: effectiveness matrix, explicit redistributed pseudoinverse,
//!   control-surface allocation and nullspace optimisation.
//! - [`environment`]: discrete gusts and Dryden turbulence.
//! - [`harness`]: scenario files, closed-loop runs, logs and metrics.

pub mod actuators;
pub mod allocation;
pub mod controller;
pub mod dynamics;
pub mod environment;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod inner_loop;
pub mod math;
pub mod outer_loop;
pub mod params;
pub mod trim;

pub use error::{Error, Result};
pub use params::AirshipParams;
