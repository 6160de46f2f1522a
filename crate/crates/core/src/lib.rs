//! Spectral laboratory for magnetic Schrödinger operators whose field depends
//! on one coordinate: band functions of the fiber operators, anti-Wick
//! effective Hamiltonians, brute-force 2D reference counts, and the
//! asymptotic predictors for eigenvalue counting in spectral gaps.

pub mod error;
pub mod asympt;
pub mod config;
pub mod effective;
pub mod fiber;
pub mod field;
pub mod hermite;
pub mod oracle2d;
pub mod pipeline;
pub mod potential;
pub mod quad;
pub mod region;
pub mod tridiag;

pub use error::{Error, Result};
