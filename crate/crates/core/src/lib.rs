//! Relational learning over information-equivalent schemas.
//!
//! The crate is split into six layers:
//! - [`relmodel`]: schemas, dependencies, instances, clauses and evaluation.
//! - [`chase`]: chase with equality INDs, θ-subsumption, reduction and minimization.
//! - [`transform`]: vertical (de)composition of schemas, instances and definitions.
//! - [`saturation`]: bottom clauses and inclusion-class ordering.
//! - [`learners`]: FOIL, modified FOIL, Golem and ProGolem.
//! - [`harness`]: experiments, independence checks and random definitions.

pub mod chase;
pub mod error;
pub mod harness;
pub mod learners;
pub mod relmodel;
pub mod saturation;
pub mod transform;

pub use error::{Error, Result};
