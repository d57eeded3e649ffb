//! Bound-constrained Levenberg-Marquardt over four parameters.
//!
//! Parameters can be held fixed through a mask, which is how the profile
//! scan re-optimizes the nuisance parameters. Bounds are handled by an active
//! set: a coordinate sitting on a bound whose gradient points outward is
//! frozen for that iteration, and every trial point is clamped.

use nalgebra::{Matrix4, Vector4};

pub const N_PARAMS: usize = 4;

/// Anything that can produce normalized residuals and their Jacobian.
pub trait LeastSquares {
    fn n_residuals(&self) -> usize;

    /// Sum of squared residuals.
    fn cost(&self, params: &[f64; N_PARAMS]) -> f64;

    /// Fills `residuals` and `jacobian` (one row per residual).
    fn residuals_and_jacobian(
        &self,
        params: &[f64; N_PARAMS],
        residuals: &mut [f64],
        jacobian: &mut [[f64; N_PARAMS]],
    );
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmSettings {
    pub max_iterations: usize,
    /// Relative decrease of the cost below which an accepted step ends the run.
    pub ftol: f64,
    /// Relative step size below which the run ends.
    pub xtol: f64,
    /// Projected gradient (max norm) below which the run ends.
    pub gtol: f64,
    pub initial_lambda: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        LmSettings {
            max_iterations: 300,
            ftol: 1e-13,
            xtol: 1e-11,
            gtol: 1e-12,
            initial_lambda: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    CostTolerance,
    StepTolerance,
    GradientTolerance,
    /// Damping grew without finding a lower cost: no descent is left at
    /// working precision.
    NoImprovement,
    MaxIterations,
    NonFinite,
}

impl Termination {
    pub fn converged(self) -> bool {
        !matches!(self, Termination::MaxIterations | Termination::NonFinite)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOutcome {
    pub params: [f64; N_PARAMS],
    pub cost: f64,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub lower: [f64; N_PARAMS],
    pub upper: [f64; N_PARAMS],
}

impl Bounds {
    pub fn clamp(&self, p: &mut [f64; N_PARAMS]) {
        for ((x, lo), hi) in p.iter_mut().zip(self.lower).zip(self.upper) {
            *x = x.clamp(lo, hi);
        }
    }
}

const MAX_LAMBDA: f64 = 1e16;

pub fn minimize<P: LeastSquares>(
    problem: &P,
    start: [f64; N_PARAMS],
    free: [bool; N_PARAMS],
    bounds: &Bounds,
    settings: &LmSettings,
) -> LmOutcome {
    let n = problem.n_residuals();
    let mut residuals = vec![0.0; n];
    let mut jacobian = vec![[0.0; N_PARAMS]; n];

    let mut params = start;
    bounds.clamp(&mut params);
    let mut lambda = settings.initial_lambda;
    let mut iterations = 0;

    problem.residuals_and_jacobian(&params, &mut residuals, &mut jacobian);
    let mut cost: f64 = residuals.iter().map(|r| r * r).sum();
    if !cost.is_finite() {
        return LmOutcome {
            params,
            cost,
            iterations,
            termination: Termination::NonFinite,
        };
    }

    let termination = 'outer: loop {
        if iterations >= settings.max_iterations {
            break Termination::MaxIterations;
        }
        iterations += 1;

        let mut jtj = Matrix4::<f64>::zeros();
        let mut grad = Vector4::<f64>::zeros();
        for (r, row) in residuals.iter().zip(&jacobian) {
            for i in 0..N_PARAMS {
                grad[i] += row[i] * r;
                for k in i..N_PARAMS {
                    jtj[(i, k)] += row[i] * row[k];
                }
            }
        }
        for i in 0..N_PARAMS {
            for k in 0..i {
                jtj[(i, k)] = jtj[(k, i)];
            }
        }

        let mut active = free;
        for i in 0..N_PARAMS {
            let at_lower = params[i] <= bounds.lower[i] && grad[i] > 0.0;
            let at_upper = params[i] >= bounds.upper[i] && grad[i] < 0.0;
            if at_lower || at_upper {
                active[i] = false;
            }
        }
        let projected = (0..N_PARAMS)
            .filter(|&i| active[i])
            .map(|i| grad[i].abs())
            .fold(0.0, f64::max);
        if projected <= settings.gtol {
            break Termination::GradientTolerance;
        }

        loop {
            let mut system = jtj;
            let mut rhs = -grad;
            for i in 0..N_PARAMS {
                if active[i] {
                    system[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
                } else {
                    for k in 0..N_PARAMS {
                        system[(i, k)] = 0.0;
                        system[(k, i)] = 0.0;
                    }
                    system[(i, i)] = 1.0;
                    rhs[i] = 0.0;
                }
            }
            let step = match system.cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => {
                    lambda *= 10.0;
                    if lambda > MAX_LAMBDA {
                        break 'outer Termination::NoImprovement;
                    }
                    continue;
                }
            };

            let mut trial = params;
            for i in 0..N_PARAMS {
                trial[i] += step[i];
            }
            bounds.clamp(&mut trial);
            let taken = Vector4::from_fn(|i, _| trial[i] - params[i]);

            let trial_cost = problem.cost(&trial);
            // predicted decrease of the Gauss-Newton model along the taken step
            let predicted = -(2.0 * grad.dot(&taken) + taken.dot(&(jtj * taken)));

            if trial_cost.is_finite() && trial_cost < cost {
                let rho = if predicted > 0.0 { (cost - trial_cost) / predicted } else { 1.0 };
                lambda *= (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
                let decrease = cost - trial_cost;
                let step_norm = taken.norm();
                let param_norm = params.iter().map(|x| x * x).sum::<f64>().sqrt();

                params = trial;
                cost = trial_cost;
                problem.residuals_and_jacobian(&params, &mut residuals, &mut jacobian);

                if decrease <= settings.ftol * cost.max(f64::MIN_POSITIVE) {
                    break 'outer Termination::CostTolerance;
                }
                if step_norm <= settings.xtol * (param_norm + settings.xtol) {
                    break 'outer Termination::StepTolerance;
                }
                break;
            }

            let step_norm = taken.norm();
            let param_norm = params.iter().map(|x| x * x).sum::<f64>().sqrt();
            if step_norm <= settings.xtol * (param_norm + settings.xtol) {
                break 'outer Termination::StepTolerance;
            }
            lambda *= 4.0;
            if lambda > MAX_LAMBDA {
                break 'outer Termination::NoImprovement;
            }
        }
    };

    LmOutcome {
        params,
        cost,
        iterations,
        termination,
    }
}
