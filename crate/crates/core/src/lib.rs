//! Numerical laboratory for sine-Gordon 2-solitons: closed-form profiles, conserved
//! quantities, Backlund transformations, the permutability composition, time evolution
//! and modulation.

pub mod error;
pub mod evolution;
pub mod modulation;
pub mod numerics;
pub mod permutability;
pub mod backlund;
pub mod conservation;
pub mod profiles;

pub use error::{Error, Result};
pub use numerics::{Field, FieldPair, Grid, C64};
pub use profiles::{ProfileKind, SolitonParams};
