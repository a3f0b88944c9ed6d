//! Objective discrimination of electromagnetically induced transparency (EIT)
//! from Autler-Townes splitting (ATS).
//!
//! A measured or simulated absorption profile is fitted with two competing
//! lineshapes, a signed Lorentzian pair at the origin (EIT, Fano interference)
//! and two equal-width Lorentzians at `±δ₀` (ATS). The fits are scored with the
//! least-squares Akaike information criterion; Akaike weights and per-point
//! weights decide which mechanism the data support, or that they cannot tell.
//!
//! ```no_run
//! use eit_ats::{lineshape, fitter::FitConfig, selection};
//!
//! let atom = lineshape::TlaParams::resonant(0.2, 1.0, 0.1);
//! let data = lineshape::absorption_profile(&atom, &lineshape::default_grid()).unwrap();
//! let report = selection::discriminate(&data, &FitConfig::default(), selection::DEFAULT_MARGIN).unwrap();
//! println!("{:?}", report.verdict);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fitter;
pub mod lineshape;
pub mod models;
mod par;
pub mod selection;
pub mod simulation;

pub use error::{Error, Result};
