//! Design and analysis toolkit for passive phase-gradient reflecting surfaces.
//!
//! The pipeline runs from a unit-cell reflection model ([`unit_cell`]) through
//! supercell synthesis ([`gradient`]) to far-field prediction
//! ([`far_field`]), indoor link budgets ([`coverage`]) and printable masks
//! ([`mask`]).

pub mod coverage;
pub mod em;
pub mod error;
pub mod far_field;
pub mod gradient;
pub mod mask;
pub mod unit_cell;

pub use em::{Angle, Frequency, Polarization, Wavevector};
pub use error::{Error, Result};
