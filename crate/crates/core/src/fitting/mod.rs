//! Weighted least-squares estimation of (A, B, δt, W) from polarization data.
//!
//! The objective is the reduced chi-squared
//! `Σ_i [P_fit(t_i) - P_i]² / (η σ_i²)` with `η = n - 4`. The fitter refines
//! every node of a four-dimensional start grid with Levenberg-Marquardt and
//! keeps the lowest minimum; the beat phases make the landscape strongly
//! multimodal in A.

mod lm;
mod residuals;
mod uncertainty;

use rayon::prelude::*;
use serde::Serialize;

pub use lm::{Bounds, LeastSquares, LmOutcome, LmSettings, Termination, N_PARAMS};
pub use residuals::{residual_report, ResidualReport};
pub use uncertainty::{covariance_uncertainties, profile_uncertainties, ParamInterval};

use crate::beat_model::{BeatModel, DetectionGeometry};
use crate::dataset::{BeatDataset, DataPoint};
use crate::error::{Error, Result};
use crate::hyperfine::{BeatTemplate, HyperfineSystem};

pub const PARAM_NAMES: [&str; N_PARAMS] = ["A", "B", "dt", "W"];

/// Number of fitted parameters, subtracted from the point count for η.
pub const N_FITTED: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitParams {
    /// Magnetic dipole constant, MHz.
    #[serde(rename = "A_MHz")]
    pub a: f64,
    /// Electric quadrupole constant, MHz.
    #[serde(rename = "B_MHz")]
    pub b: f64,
    /// Time offset added to the nominal delays, ns.
    #[serde(rename = "dt_ns")]
    pub dt_offset: f64,
    /// Rectangular pulse width, ns.
    #[serde(rename = "W_ns")]
    pub width: f64,
}

impl FitParams {
    pub fn new(a: f64, b: f64, dt_offset: f64, width: f64) -> Self {
        FitParams {
            a,
            b,
            dt_offset,
            width,
        }
    }

    pub fn to_array(&self) -> [f64; N_PARAMS] {
        [self.a, self.b, self.dt_offset, self.width]
    }

    pub fn from_array(p: [f64; N_PARAMS]) -> Self {
        FitParams::new(p[0], p[1], p[2], p[3])
    }
}

/// Inclusive start-grid axis `lo, lo+step, ..., hi`. `lo == hi` pins the
/// axis to a single value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridAxis {
    pub const fn new(lo: f64, hi: f64, step: f64) -> Self {
        GridAxis { lo, hi, step }
    }

    pub const fn pinned(value: f64) -> Self {
        GridAxis {
            lo: value,
            hi: value,
            step: 0.0,
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() || !self.step.is_finite() {
            return Err(Error::InvalidArgument(format!("grid axis {name} has non-finite bounds")));
        }
        if self.hi < self.lo {
            return Err(Error::InvalidArgument(format!(
                "grid axis {name}: hi {} is below lo {}",
                self.hi, self.lo
            )));
        }
        if self.hi > self.lo && !(self.step > 0.0) {
            return Err(Error::InvalidArgument(format!("grid axis {name} needs a positive step")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.hi <= self.lo || self.step <= 0.0 {
            return vec![self.lo];
        }
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.lo + k as f64 * self.step).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyMethod {
    /// Profile of the unreduced chi-squared, Δχ² = 1 with the other
    /// parameters re-optimized.
    Profile,
    /// Square roots of the diagonal of (JᵀJ)⁻¹ at the minimum.
    Covariance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub a_grid: GridAxis,
    pub b_grid: GridAxis,
    pub dt_grid: GridAxis,
    pub w_grid: GridAxis,
    /// δt is confined to [-dt_bound, dt_bound] ns.
    pub dt_bound: f64,
    pub lm: LmSettings,
    pub uncertainty: UncertaintyMethod,
    /// Farthest distance from the optimum a profile scan may go, per parameter.
    pub profile_span: [f64; N_PARAMS],
    /// Refine only the this many lowest-cost grid nodes; `None` refines all.
    pub max_refinements: Option<usize>,
    pub parallel: bool,
    pub geometry: DetectionGeometry,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            a_grid: GridAxis::new(5.0, 10.0, 0.25),
            b_grid: GridAxis::new(-2.0, 2.0, 0.5),
            dt_grid: GridAxis::new(-1.0, 1.0, 0.5),
            w_grid: GridAxis::new(0.0, 5.0, 1.0),
            dt_bound: 5.0,
            lm: LmSettings::default(),
            uncertainty: UncertaintyMethod::Profile,
            profile_span: [5.0, 20.0, 10.0, 50.0],
            max_refinements: None,
            parallel: true,
            geometry: DetectionGeometry::default(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        for (axis, name) in self.axes().iter().zip(PARAM_NAMES) {
            axis.validate(name)?;
        }
        if !(self.dt_bound > 0.0) || !self.dt_bound.is_finite() {
            return Err(Error::InvalidArgument("dt_bound must be positive and finite".into()));
        }
        if self.w_grid.lo < 0.0 {
            return Err(Error::InvalidArgument("W grid must start at or above 0".into()));
        }
        if self.dt_grid.lo < -self.dt_bound || self.dt_grid.hi > self.dt_bound {
            return Err(Error::InvalidArgument(format!(
                "dt grid must lie within ±{} ns",
                self.dt_bound
            )));
        }
        if self.profile_span.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidArgument("profile spans must be positive".into()));
        }
        if self.max_refinements == Some(0) {
            return Err(Error::InvalidArgument("max_refinements must be at least 1".into()));
        }
        if self.lm.max_iterations == 0 {
            return Err(Error::InvalidArgument("LM needs at least one iteration".into()));
        }
        Ok(())
    }

    fn axes(&self) -> [GridAxis; N_PARAMS] {
        [self.a_grid, self.b_grid, self.dt_grid, self.w_grid]
    }

    pub fn bounds(&self) -> Bounds {
        Bounds {
            lower: [f64::NEG_INFINITY, f64::NEG_INFINITY, -self.dt_bound, 0.0],
            upper: [f64::INFINITY, f64::INFINITY, self.dt_bound, f64::INFINITY],
        }
    }

    /// Grid nodes in lexicographic (A, B, δt, W) order.
    pub fn grid(&self) -> Vec<[f64; N_PARAMS]> {
        let [a, b, dt, w] = self.axes().map(|ax| ax.values());
        let mut out = Vec::with_capacity(a.len() * b.len() * dt.len() * w.len());
        for &a in &a {
            for &b in &b {
                for &dt in &dt {
                    for &w in &w {
                        out.push([a, b, dt, w]);
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointResidual {
    pub index: i64,
    pub t_ns: f64,
    /// `(model - measured) / sigma`.
    pub normalized_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub params: FitParams,
    /// 2σ half-widths.
    pub two_sigma: FitParams,
    /// Asymmetric 1σ intervals behind `two_sigma`.
    pub intervals: [ParamInterval; N_PARAMS],
    pub uncertainty_method: UncertaintyMethod,
    pub red_chi2: f64,
    /// Unreduced Σ r².
    pub chi2: f64,
    /// In dataset file order.
    pub residuals: Vec<PointResidual>,
    pub n_points: usize,
    pub n_dof: usize,
    pub starts: usize,
    pub converged_starts: usize,
}

/// Data and model bundled as a least-squares problem. Points are held sorted
/// by index so that every sum runs in the same order whatever the file order.
#[derive(Clone, Debug)]
pub struct Objective {
    model: BeatModel,
    points: Vec<DataPoint>,
}

impl Objective {
    pub fn new(model: BeatModel, data: &BeatDataset) -> Self {
        let mut points = data.points.clone();
        points.sort_by_key(|p| p.index);
        Objective { model, points }
    }

    pub fn model(&self) -> &BeatModel {
        &self.model
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn residual(&self, params: &[f64; N_PARAMS], p: &DataPoint) -> f64 {
        (self.model.polarization(params, p.t) - p.pl) / p.sigma
    }

    /// Gradient of the unreduced Σ r².
    pub fn cost_gradient(&self, params: &[f64; N_PARAMS]) -> [f64; N_PARAMS] {
        let mut grad = [0.0; N_PARAMS];
        for p in &self.points {
            let m = self.model.polarization_with_gradient(params, p.t);
            let r = (m.value - p.pl) / p.sigma;
            for (g, dm) in grad.iter_mut().zip(m.gradient) {
                *g += 2.0 * r * dm / p.sigma;
            }
        }
        grad
    }
}

impl LeastSquares for Objective {
    fn n_residuals(&self) -> usize {
        self.points.len()
    }

    fn cost(&self, params: &[f64; N_PARAMS]) -> f64 {
        self.points
            .iter()
            .map(|p| {
                let r = self.residual(params, p);
                r * r
            })
            .sum()
    }

    fn residuals_and_jacobian(
        &self,
        params: &[f64; N_PARAMS],
        residuals: &mut [f64],
        jacobian: &mut [[f64; N_PARAMS]],
    ) {
        for ((p, r), row) in self.points.iter().zip(residuals).zip(jacobian) {
            let m = self.model.polarization_with_gradient(params, p.t);
            *r = (m.value - p.pl) / p.sigma;
            *row = m.gradient.map(|g| g / p.sigma);
        }
    }
}

fn degrees_of_freedom(data: &BeatDataset) -> Result<usize> {
    if data.len() <= N_FITTED {
        return Err(Error::InvalidArgument(format!(
            "need more than {N_FITTED} points for a reduced chi-squared, got {}",
            data.len()
        )));
    }
    Ok(data.len() - N_FITTED)
}

fn objective(sys_template: &HyperfineSystem, geometry: DetectionGeometry, data: &BeatDataset) -> Objective {
    let model = BeatModel::new(BeatTemplate::for_system(sys_template), geometry);
    Objective::new(model, data)
}

/// Reduced chi-squared of `data` under `params`, default detection geometry.
pub fn chi2(params: &FitParams, sys_template: &HyperfineSystem, data: &BeatDataset) -> Result<f64> {
    chi2_with_geometry(params, sys_template, &DetectionGeometry::default(), data)
}

pub fn chi2_with_geometry(
    params: &FitParams,
    sys_template: &HyperfineSystem,
    geometry: &DetectionGeometry,
    data: &BeatDataset,
) -> Result<f64> {
    let dof = degrees_of_freedom(data)?;
    let obj = objective(sys_template, *geometry, data);
    Ok(obj.cost(&params.to_array()) / dof as f64)
}

/// Analytic gradient of [`chi2`] with respect to (A, B, δt, W).
pub fn chi2_gradient(params: &FitParams, sys_template: &HyperfineSystem, data: &BeatDataset) -> Result<[f64; N_PARAMS]> {
    let dof = degrees_of_freedom(data)?;
    let obj = objective(sys_template, DetectionGeometry::default(), data);
    Ok(obj.cost_gradient(&params.to_array()).map(|g| g / dof as f64))
}

fn better(a: &LmOutcome, b: &LmOutcome) -> bool {
    match a.cost.total_cmp(&b.cost) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a
            .params
            .iter()
            .zip(&b.params)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .is_some_and(|o| o.is_lt()),
    }
}

/// Multi-start fit of (A, B, δt, W). The (I, J) of `sys_template` fix the
/// beat structure; its A and B are ignored.
pub fn fit(data: &BeatDataset, sys_template: &HyperfineSystem, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let n_dof = degrees_of_freedom(data)?;
    if !sys_template.has_quadrupole() {
        return Err(Error::InvalidArgument(format!(
            "B cannot be fitted for I = {}, J = {}: the level has no quadrupole shift",
            sys_template.nuclear_spin, sys_template.electronic_j
        )));
    }

    let obj = objective(sys_template, config.geometry, data);
    let bounds = config.bounds();
    let mut starts = config.grid();
    if let Some(keep) = config.max_refinements {
        if keep < starts.len() {
            let mut scored: Vec<(f64, usize)> = starts.iter().enumerate().map(|(i, s)| (obj.cost(s), i)).collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut keep_idx: Vec<usize> = scored[..keep].iter().map(|&(_, i)| i).collect();
            keep_idx.sort_unstable();
            starts = keep_idx.into_iter().map(|i| starts[i]).collect();
        }
    }

    let refine = |s: &[f64; N_PARAMS]| lm::minimize(&obj, *s, [true; N_PARAMS], &bounds, &config.lm);
    let outcomes: Vec<LmOutcome> = if config.parallel {
        starts.par_iter().map(refine).collect()
    } else {
        starts.iter().map(refine).collect()
    };

    let converged_starts = outcomes.iter().filter(|o| o.termination.converged()).count();
    let best = outcomes
        .iter()
        .filter(|o| o.termination.converged() && o.cost.is_finite())
        .fold(None::<&LmOutcome>, |acc, o| match acc {
            Some(b) if !better(o, b) => Some(b),
            _ => Some(o),
        })
        .copied()
        .ok_or_else(|| {
            Error::Convergence(format!(
                "none of {} starts reached a convergence criterion within {} iterations",
                starts.len(),
                config.lm.max_iterations
            ))
        })?;

    let intervals = match config.uncertainty {
        UncertaintyMethod::Profile => {
            profile_uncertainties(&obj, &best, &bounds, &config.lm, &config.profile_span)?
        }
        UncertaintyMethod::Covariance => covariance_uncertainties(&obj, &best.params)?,
    };
    let two_sigma = FitParams::from_array(intervals.map(|iv| iv.two_sigma_half_width()));

    let residuals = data
        .points
        .iter()
        .map(|p| PointResidual {
            index: p.index,
            t_ns: p.t,
            normalized_residual: obj.residual(&best.params, p),
        })
        .collect();

    Ok(FitResult {
        params: FitParams::from_array(best.params),
        two_sigma,
        intervals,
        uncertainty_method: config.uncertainty,
        red_chi2: best.cost / n_dof as f64,
        chi2: best.cost,
        residuals,
        n_points: data.len(),
        n_dof,
        starts: starts.len(),
        converged_starts,
    })
}
