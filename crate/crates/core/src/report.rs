//! Machine-readable fit reports and plot-data files.
//!
//! JSON keys carry their units (`A_MHz`, `dt_ns`, ...); numbers are written
//! by serde_json and never locale-formatted.

use std::fmt::Write as _;

use serde::Serialize;

use crate::beat_model::BeatModel;
use crate::fitting::{residual_report, FitParams, FitResult, ParamInterval, UncertaintyMethod, PARAM_NAMES};
use crate::hyperfine::HyperfineSystem;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualSummary {
    pub mean: f64,
    pub fraction_within_1sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedInterval {
    pub parameter: &'static str,
    #[serde(flatten)]
    pub interval: ParamInterval,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemSummary {
    #[serde(rename = "I")]
    pub nuclear_spin: String,
    #[serde(rename = "J")]
    pub electronic_j: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub system: SystemSummary,
    pub params: FitParams,
    /// 2σ half-widths, same units as `params`.
    pub two_sigma: FitParams,
    /// 1σ distances below/above each parameter.
    pub intervals_1sigma: Vec<NamedInterval>,
    pub uncertainty_method: UncertaintyMethod,
    pub red_chi2: f64,
    pub chi2: f64,
    pub n_points: usize,
    pub n_dof: usize,
    pub residual_summary: ResidualSummary,
    pub starts: usize,
    pub converged_starts: usize,
}

impl FitReport {
    pub fn new(result: &FitResult, sys: &HyperfineSystem) -> Self {
        let residuals = residual_report(result);
        FitReport {
            system: SystemSummary {
                nuclear_spin: sys.nuclear_spin.to_string(),
                electronic_j: sys.electronic_j.to_string(),
            },
            params: result.params,
            two_sigma: result.two_sigma,
            intervals_1sigma: PARAM_NAMES
                .iter()
                .zip(result.intervals)
                .map(|(&parameter, interval)| NamedInterval { parameter, interval })
                .collect(),
            uncertainty_method: result.uncertainty_method,
            red_chi2: result.red_chi2,
            chi2: result.chi2,
            n_points: result.n_points,
            n_dof: result.n_dof,
            residual_summary: ResidualSummary {
                mean: residuals.mean,
                fraction_within_1sigma: residuals.fraction_within_1sigma,
            },
            starts: result.starts,
            converged_starts: result.converged_starts,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `t_ns,PL_percent` sampled on `[t_min, t_max]` every `step` ns.
pub fn fit_curve_csv(model: &BeatModel, params: &FitParams, t_min: f64, t_max: f64, step: f64) -> String {
    let p = params.to_array();
    let mut out = String::from("t_ns,PL_percent\n");
    let n = if step > 0.0 && t_max > t_min {
        ((t_max - t_min) / step + 1e-9).floor() as usize
    } else {
        0
    };
    for k in 0..=n {
        let t = t_min + k as f64 * step;
        let _ = writeln!(out, "{:.4},{:.6}", t, 100.0 * model.polarization(&p, t));
    }
    out
}

/// `index,t_ns,normalized_residual`, one row per point in file order.
pub fn residuals_csv(result: &FitResult) -> String {
    let mut out = String::from("index,t_ns,normalized_residual\n");
    for r in &result.residuals {
        let _ = writeln!(out, "{},{},{:.6}", r.index, r.t_ns, r.normalized_residual);
    }
    out
}
