//! Linear network coding over finite fields: networks, scalar and vector
//! codes, solvability deciders, explicit constructions and the exhaustive
//! searches over general linear groups.

pub mod code;
pub mod config;
pub mod constructions;
pub mod error;
pub mod field;
pub mod matrix;
pub mod network;
pub mod numtheory;
pub mod poly;
pub mod report;
pub mod search;
pub mod solvability;

pub use config::Budget;
pub use error::{Error, Result};
pub use field::{make_field, Felt, Field, FieldSpec};
pub use matrix::{Gf2Mat, GroupMat, MatF};
