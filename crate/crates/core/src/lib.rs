//! Fair division of indivisible goods under additive valuations.
//!
//! Property checkers (EQ/EF families, PROP, PROP1), exhaustive and LP
//! oracles for small instances, a Fisher-market algorithm for EQ1 + PO under
//! positive valuations, flow-based algorithms for binary valuations, and
//! max-min audits.

pub mod binary;
pub mod checks;
pub mod error;
pub mod experiment;
pub mod instio;
pub mod market;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod santa;

pub use checks::{check_property, utilities, utility_profile, Property, PropertyReport};
pub use error::{Error, Result};
pub use model::{Allocation, FractionalAllocation, Instance};
pub use oracle::ComboQuery;
pub use rational::Rational;
