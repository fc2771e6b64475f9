//! Numerical laboratory for truncated singular Radon transforms.
//!
//! The crate provides the constructive objects behind uniform oscillation
//! estimates for truncated singular integrals of Radon type: lattice and grid
//! containers with anisotropic dilations, Calderón–Zygmund kernels with
//! checkable axioms, discrete and continuous truncated Radon operators,
//! oscillation/variation seminorms, circle-method multiplier machinery
//! (exponential sums, Gauss sums, Ionescu–Wainger fraction sets, projection
//! multipliers) and Christ dyadic-cube martingales.
//!
//! Everything is desk-scale and deterministic: operations are pure, summation
//! orders are fixed, and randomized probes take explicit seeds.

pub mod circle;
pub mod error;
pub mod kernels;
pub mod lattice;
pub mod martingale;
pub mod radon;
pub mod seminorms;

pub use error::{Error, Result};
