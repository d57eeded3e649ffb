use serde::Serialize;

use super::{FitResult, PointResidual};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub mean: f64,
    /// Fraction of points with |normalized residual| <= 1.
    pub fraction_within_1sigma: f64,
    pub per_point: Vec<PointResidual>,
}

impl ResidualReport {
    pub fn from_residuals(per_point: Vec<PointResidual>) -> Self {
        let n = per_point.len();
        if n == 0 {
            return ResidualReport {
                mean: 0.0,
                fraction_within_1sigma: 0.0,
                per_point,
            };
        }
        let mean = per_point.iter().map(|r| r.normalized_residual).sum::<f64>() / n as f64;
        let within = per_point.iter().filter(|r| r.normalized_residual.abs() <= 1.0).count();
        ResidualReport {
            mean,
            fraction_within_1sigma: within as f64 / n as f64,
            per_point,
        }
    }
}

pub fn residual_report(result: &FitResult) -> ResidualReport {
    ResidualReport::from_residuals(result.residuals.clone())
}
