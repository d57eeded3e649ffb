//! Parameter uncertainties at a chi-squared minimum.

use nalgebra::Matrix4;
use serde::Serialize;

use super::lm::{self, Bounds, LeastSquares, LmOutcome, LmSettings, N_PARAMS};
use super::PARAM_NAMES;
use crate::error::{Error, Result};

/// One-sigma distances below and above the optimum. A side marked clipped
/// ran into a hard parameter bound before Δχ² reached 1; its distance is the
/// distance to that bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ParamInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_clipped: bool,
    pub upper_clipped: bool,
}

impl ParamInterval {
    pub fn symmetric(sigma: f64) -> Self {
        ParamInterval {
            lower: sigma,
            upper: sigma,
            ..Default::default()
        }
    }

    /// Half-width of the 2σ interval, i.e. twice the mean 1σ distance.
    pub fn two_sigma_half_width(&self) -> f64 {
        self.lower + self.upper
    }
}

fn jtj_inverse<P: LeastSquares>(obj: &P, params: &[f64; N_PARAMS]) -> Option<Matrix4<f64>> {
    let n = obj.n_residuals();
    let mut r = vec![0.0; n];
    let mut jac = vec![[0.0; N_PARAMS]; n];
    obj.residuals_and_jacobian(params, &mut r, &mut jac);
    let mut jtj = Matrix4::<f64>::zeros();
    for row in &jac {
        for i in 0..N_PARAMS {
            for k in 0..N_PARAMS {
                jtj[(i, k)] += row[i] * row[k];
            }
        }
    }
    jtj.try_inverse()
}

/// Δχ² = 1 from the curvature matrix JᵀJ (unreduced χ² = Σ r²).
pub fn covariance_uncertainties<P: LeastSquares>(obj: &P, params: &[f64; N_PARAMS]) -> Result<[ParamInterval; N_PARAMS]> {
    let cov = jtj_inverse(obj, params).ok_or(Error::Profile {
        parameter: "all",
        reason: "curvature matrix is singular".into(),
    })?;
    let mut out = [ParamInterval::default(); N_PARAMS];
    for i in 0..N_PARAMS {
        let var = cov[(i, i)];
        if !(var > 0.0) || !var.is_finite() {
            return Err(Error::Profile {
                parameter: PARAM_NAMES[i],
                reason: format!("covariance diagonal is {var}"),
            });
        }
        out[i] = ParamInterval::symmetric(var.sqrt());
    }
    Ok(out)
}

struct Profiler<'a, P> {
    obj: &'a P,
    best: &'a LmOutcome,
    bounds: &'a Bounds,
    settings: &'a LmSettings,
    span: &'a [f64; N_PARAMS],
}

impl<P: LeastSquares> Profiler<'_, P> {
    /// Minimum of Σ r² with parameter `k` held at `value`, starting from the
    /// optimum and from `warm` and keeping the lower result.
    fn cost_at(&self, k: usize, value: f64, warm: &[f64; N_PARAMS]) -> ([f64; N_PARAMS], f64) {
        let mut free = [true; N_PARAMS];
        free[k] = false;
        let mut best: Option<([f64; N_PARAMS], f64)> = None;
        for seed in [&self.best.params, warm] {
            let mut start = *seed;
            start[k] = value;
            let out = lm::minimize(self.obj, start, free, self.bounds, self.settings);
            if best.is_none_or(|(_, c)| out.cost < c) {
                best = Some((out.params, out.cost));
            }
        }
        best.expect("two starts")
    }

    /// One-sigma distance on one side (`dir` = ±1) of parameter `k`.
    fn side(&self, k: usize, dir: f64, initial_step: f64) -> Result<(f64, bool)> {
        let center = self.best.params[k];
        let target = self.best.cost + 1.0;
        let to_bound = if dir < 0.0 {
            center - self.bounds.lower[k]
        } else {
            self.bounds.upper[k] - center
        };
        let span = self.span[k];
        let max_d = span.min(to_bound);
        if max_d <= 0.0 {
            return Ok((0.0, true));
        }

        let mut lo = 0.0;
        let mut lo_excess = -1.0;
        let mut warm = self.best.params;
        let mut step = initial_step.min(max_d);
        let (hi, hi_excess) = loop {
            let d = step.min(max_d);
            let (params, cost) = self.cost_at(k, center + dir * d, &warm);
            let excess = cost - target;
            if excess >= 0.0 {
                break (d, excess);
            }
            if d >= max_d {
                if to_bound <= span {
                    return Ok((to_bound, true));
                }
                return Err(Error::Profile {
                    parameter: PARAM_NAMES[k],
                    reason: format!(
                        "Δχ² is still {:.4} at {span} from the optimum",
                        cost - self.best.cost
                    ),
                });
            }
            lo = d;
            lo_excess = excess;
            warm = params;
            step = d * 2.0;
        };

        // Illinois false position on excess(d) = χ²_profile(d) - (χ²_min + 1)
        let (mut a, mut fa, mut b, mut fb) = (lo, lo_excess, hi, hi_excess);
        let mut last_side = 0i8;
        for _ in 0..100 {
            if (b - a).abs() <= 1e-10 * b.abs().max(1e-6) {
                break;
            }
            let mut d = b - fb * (b - a) / (fb - fa);
            if !(d > a && d < b) {
                d = 0.5 * (a + b);
            }
            let (params, cost) = self.cost_at(k, center + dir * d, &warm);
            let fd = cost - target;
            if fd.abs() < 1e-12 {
                return Ok((d, false));
            }
            if fd < 0.0 {
                a = d;
                fa = fd;
                warm = params;
                if last_side == -1 {
                    fb *= 0.5;
                }
                last_side = -1;
            } else {
                b = d;
                fb = fd;
                if last_side == 1 {
                    fa *= 0.5;
                }
                last_side = 1;
            }
        }
        Ok((0.5 * (a + b), false))
    }
}

/// Profile-likelihood 1σ intervals: for each parameter, the distance at which
/// the unreduced χ², minimized over the other three parameters, rises by 1.
///
/// `span` caps how far from the optimum each scan may go; a scan that ends
/// there without crossing is a [`Error::Profile`].
pub fn profile_uncertainties<P: LeastSquares>(
    obj: &P,
    best: &LmOutcome,
    bounds: &Bounds,
    settings: &LmSettings,
    span: &[f64; N_PARAMS],
) -> Result<[ParamInterval; N_PARAMS]> {
    let profiler = Profiler {
        obj,
        best,
        bounds,
        settings,
        span,
    };
    let curvature = jtj_inverse(obj, &best.params);
    let mut out = [ParamInterval::default(); N_PARAMS];
    for k in 0..N_PARAMS {
        let guess = curvature
            .map(|c| c[(k, k)])
            .filter(|v| *v > 0.0 && v.is_finite())
            .map(f64::sqrt)
            .unwrap_or(1e-2 * (best.params[k].abs() + 1.0));
        // start a little inside the quadratic estimate so the first probe
        // usually lands below the target
        let step = 0.5 * guess;
        let (lower, lower_clipped) = profiler.side(k, -1.0, step)?;
        let (upper, upper_clipped) = profiler.side(k, 1.0, step)?;
        out[k] = ParamInterval {
            lower,
            upper,
            lower_clipped,
            upper_clipped,
        };
    }
    Ok(out)
}
