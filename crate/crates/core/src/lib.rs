//! Charged ideal Bose gas in a rectangular cavity: spectra, lattice counts,
//! effective action, charge partition and critical temperatures.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charge;
pub mod critical;
pub mod effective_action;
pub mod error;
pub mod lattice_count;
pub mod special;
pub mod spectral;
