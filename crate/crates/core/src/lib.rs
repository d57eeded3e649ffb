//! Hyperfine quantum-beat polarization model and coupling-constant fitter.
//!
//! The rank-2 alignment of a hyperfine-coupled level evolves as
//! `g2(t) = c0 + Σ a_FF' cos(2π ν_FF' t)`, with weights from 6-j symbols and
//! frequencies from the dipole (A) and quadrupole (B) constants. A probe
//! reads the alignment out as a linear polarization degree `P_L(t)`; fitting
//! measured `P_L` against delay recovers A and B.
//!
//! - [`angular`]: exact 6-j symbols.
//! - [`hyperfine`]: level shifts and beat spectra.
//! - [`beat_model`]: g2(t), pulse smearing, P_L(t), synthetic data.
//! - [`fitting`]: multi-start least squares, uncertainties, residuals.
//! - [`dataset`]: measurement records and their CSV form.
//! - [`report`]: JSON fit reports and plot-data CSVs.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod beat_model;
pub mod dataset;
pub mod error;
pub mod fitting;
pub mod hyperfine;
pub mod report;

pub use angular::{sixj, sixj_exact_square, triangle_ok, HalfInt, SixJArgs};
pub use beat_model::{
    g2, polarization_cs, polarization_general, simulate, smear_factor, BeatModel, DetectionGeometry, PulseModel,
    SimulatedPoint,
};
pub use dataset::{load_dataset, BeatDataset, DataPoint};
pub use error::{Error, Result};
pub use fitting::{chi2, fit, residual_report, FitConfig, FitParams, FitResult, GridAxis, UncertaintyMethod};
pub use hyperfine::{beat_spectrum, energy_shift, f_values, BeatComponent, BeatSpectrum, HyperfineSystem};
