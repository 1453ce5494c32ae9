//! Lattice Schwinger model: sector enumeration and exact diagonalization,
//! interface encodings on spin and Rydberg arrays, free-fermion bounds on
//! electric-field truncation, and Krylov real-time evolution.

pub mod bounds;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod interface;
pub mod lattice;
pub mod linalg;
pub mod rydberg;

pub use error::{Error, Result};
