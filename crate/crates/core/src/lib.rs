//! Executable abstraction/representation models of physical computing.
//!
//! Simulated devices ([`dynamics::PhysicalDynamics`]) are linked to abstract
//! programs ([`dynamics::AbstractDynamics`]) through declared representation
//! relations ([`relations::RepresentationRelation`]). The [`verification`]
//! module checks the resulting ε-commuting diagrams, validates device
//! theories and runs compute cycles; [`refinement`] grounds layered
//! specifications in a device; [`composition`] classifies joint systems as
//! hybrid or heterotic.

pub mod builtin;
pub mod bundle;
pub mod composition;
pub mod document;
pub mod dynamics;
pub mod error;
pub mod metric;
pub mod refinement;
pub mod relations;
pub mod runner;
pub mod scenarios;
pub mod spaces;
pub mod table;
pub mod value;
pub mod verification;

pub use error::{Error, Result};
