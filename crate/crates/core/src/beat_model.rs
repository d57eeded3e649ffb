//! Time-domain forward model of the probed alignment.
//!
//! Units: frequencies in MHz, times in ns, so a beat phase is `2π ν t 1e-3`.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::hyperfine::{BeatSpectrum, BeatTemplate, HyperfineSystem};

/// rad/ns per MHz.
pub const RAD_PER_NS_PER_MHZ: f64 = TAU * 1e-3;

/// Below this value of ωW the smear factor is taken as exactly 1.
const SMEAR_SERIES_LIMIT: f64 = 1e-6;

/// How alignment is converted into a linear polarization degree on the
/// probed transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionGeometry {
    /// Alignment detection coefficient h2(J_i, J_f).
    pub h2: f64,
    /// Alignment at the end of excitation.
    pub a0: f64,
}

impl DetectionGeometry {
    /// S1/2 -> P3/2 excitation followed by stimulated emission P3/2 -> D5/2.
    pub const STIMULATED_P32_D52: DetectionGeometry = DetectionGeometry { h2: -0.25, a0: -0.8 };

    pub fn new(h2: f64, a0: f64) -> Result<Self> {
        if !(h2 * a0).is_finite() || (h2 * a0).abs() >= 4.0 {
            return Err(Error::Domain(format!(
                "|h2 * a0| must be below 4 (h2 = {h2}, a0 = {a0})"
            )));
        }
        Ok(DetectionGeometry { h2, a0 })
    }
}

impl Default for DetectionGeometry {
    fn default() -> Self {
        DetectionGeometry::STIMULATED_P32_D52
    }
}

/// Rectangular pump/probe pulses of common width and their relative offset.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PulseModel {
    /// Temporal width W, ns.
    pub width: f64,
    /// Offset δt added to every nominal delay, ns.
    pub dt_offset: f64,
}

impl PulseModel {
    pub fn new(width: f64, dt_offset: f64) -> Result<Self> {
        if !(width >= 0.0) || !width.is_finite() {
            return Err(Error::Domain(format!("pulse width must be >= 0, got {width}")));
        }
        if !dt_offset.is_finite() {
            return Err(Error::Domain("time offset must be finite".into()));
        }
        Ok(PulseModel { width, dt_offset })
    }
}

/// Contrast retained by a beat at frequency `nu` (MHz) under rectangular
/// pulses of width `width` (ns): `2[1 - cos ωW] / (ωW)²`.
pub fn smear_factor(nu: f64, width: f64) -> f64 {
    smear_of_phase(RAD_PER_NS_PER_MHZ * nu * width)
}

/// The smear factor as a function of x = ωW. Evaluated as `sinc²(x/2)`,
/// which is the same quantity without the cancellation in `1 - cos x`.
pub fn smear_of_phase(x: f64) -> f64 {
    let x = x.abs();
    if x < SMEAR_SERIES_LIMIT {
        return 1.0;
    }
    let half = 0.5 * x;
    let sinc = half.sin() / half;
    sinc * sinc
}

/// d/dx of [`smear_of_phase`].
pub fn smear_of_phase_derivative(x: f64) -> f64 {
    let sign = x.signum();
    let x = x.abs();
    let d = if x < 1e-2 {
        let x2 = x * x;
        x * (-1.0 / 6.0 + x2 * (1.0 / 90.0 - x2 / 3360.0))
    } else {
        let half = 0.5 * x;
        let (s, c) = half.sin_cos();
        // d/dx sinc²(x/2) = sinc(x/2) * sinc'(x/2)
        (s / half) * (half * c - s) / (half * half)
    };
    sign * d
}

/// Depolarization coefficient g2 at nominal delay `t` (ns).
pub fn g2(spectrum: &BeatSpectrum, pulse: &PulseModel, t: f64) -> f64 {
    let tau = t + pulse.dt_offset;
    spectrum.constant
        + spectrum
            .components
            .iter()
            .map(|c| {
                let omega = RAD_PER_NS_PER_MHZ * c.nu;
                c.amplitude * smear_of_phase(omega * pulse.width) * (omega * tau).cos()
            })
            .sum::<f64>()
}

/// Linear polarization degree `3 h2 a / (4 + h2 a)` for an alignment `a`.
pub fn polarization_general(geom: &DetectionGeometry, alignment: f64) -> Result<f64> {
    let x = geom.h2 * alignment;
    let den = 4.0 + x;
    if !(den > 0.0) {
        return Err(Error::Domain(format!(
            "polarization denominator 4 + h2*a = {den} is not positive"
        )));
    }
    Ok(3.0 * x / den)
}

/// Polarization for the stimulated P3/2 -> D5/2 probe: `3g / (20 + g)`.
pub fn polarization_cs(spectrum: &BeatSpectrum, pulse: &PulseModel, t: f64) -> f64 {
    polarization_from_g2(g2(spectrum, pulse, t))
}

pub fn polarization_from_g2(g: f64) -> f64 {
    3.0 * g / (20.0 + g)
}

/// Forward model over a fixed (I, J) with free (A, B, δt, W), including the
/// analytic gradient used by the least-squares fitter.
#[derive(Clone, Debug)]
pub struct BeatModel {
    pub template: BeatTemplate,
    pub geometry: DetectionGeometry,
}

/// Model value and its partial derivatives with respect to (A, B, δt, W).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelPoint {
    pub value: f64,
    pub gradient: [f64; 4],
}

impl BeatModel {
    pub fn new(template: BeatTemplate, geometry: DetectionGeometry) -> Self {
        BeatModel { template, geometry }
    }

    fn coupling(&self) -> f64 {
        self.geometry.h2 * self.geometry.a0
    }

    /// `params` is (A MHz, B MHz, δt ns, W ns).
    pub fn g2(&self, params: &[f64; 4], t: f64) -> f64 {
        let [a, b, dt, w] = *params;
        let tau = t + dt;
        self.template.constant
            + self
                .template
                .terms
                .iter()
                .map(|term| {
                    let omega = RAD_PER_NS_PER_MHZ * term.signed_frequency(a, b).abs();
                    term.amplitude * smear_of_phase(omega * w) * (omega * tau).cos()
                })
                .sum::<f64>()
    }

    pub fn polarization(&self, params: &[f64; 4], t: f64) -> f64 {
        let x = self.coupling() * self.g2(params, t);
        3.0 * x / (4.0 + x)
    }

    pub fn polarization_with_gradient(&self, params: &[f64; 4], t: f64) -> ModelPoint {
        let [a, b, dt, w] = *params;
        let tau = t + dt;
        let mut g = self.template.constant;
        let mut dg = [0.0; 4];
        for term in &self.template.terms {
            let signed = term.signed_frequency(a, b);
            let sign = if signed < 0.0 { -1.0 } else { 1.0 };
            let omega = RAD_PER_NS_PER_MHZ * signed.abs();
            let x = omega * w;
            let smear = smear_of_phase(x);
            let dsmear = smear_of_phase_derivative(x);
            let (sin, cos) = (omega * tau).sin_cos();
            let amp = term.amplitude;

            g += amp * smear * cos;
            // ∂g/∂ω through both the smear factor and the phase
            let dg_domega = amp * (dsmear * w * cos - smear * tau * sin);
            let domega = RAD_PER_NS_PER_MHZ * sign;
            dg[0] += dg_domega * domega * term.dnu_da;
            dg[1] += dg_domega * domega * term.dnu_db;
            dg[2] -= amp * smear * omega * sin;
            dg[3] += amp * dsmear * omega * cos;
        }
        let k = self.coupling();
        let x = k * g;
        let den = 4.0 + x;
        let dp_dg = 12.0 * k / (den * den);
        ModelPoint {
            value: 3.0 * x / den,
            gradient: dg.map(|d| dp_dg * d),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulatedPoint {
    pub t: f64,
    pub pl: f64,
    /// Standard deviation of the added noise, when noise was requested.
    pub sigma: Option<f64>,
}

/// Sample P_L(t) for the default stimulated-emission geometry, optionally
/// with Gaussian noise. A fixed seed reproduces the same noise draw.
pub fn simulate(
    sys: &HyperfineSystem,
    pulse: &PulseModel,
    times: &[f64],
    noise_sigma: Option<f64>,
    seed: Option<u64>,
) -> Result<Vec<SimulatedPoint>> {
    simulate_with_geometry(&DetectionGeometry::default(), sys, pulse, times, noise_sigma, seed)
}

pub fn simulate_with_geometry(
    geom: &DetectionGeometry,
    sys: &HyperfineSystem,
    pulse: &PulseModel,
    times: &[f64],
    noise_sigma: Option<f64>,
    seed: Option<u64>,
) -> Result<Vec<SimulatedPoint>> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("no sample times given".into()));
    }
    if let Some(s) = noise_sigma {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise sigma must be finite and >= 0, got {s}"
            )));
        }
    }
    let model = BeatModel::new(BeatTemplate::for_system(sys), *geom);
    let params = [sys.a, sys.b, pulse.dt_offset, pulse.width];

    let noise = match noise_sigma {
        Some(s) if s > 0.0 => {
            let rng = match seed {
                Some(seed) => ChaCha8Rng::seed_from_u64(seed),
                None => rand::make_rng(),
            };
            Some((Normal::new(0.0, s).expect("valid normal"), rng))
        }
        _ => None,
    };

    let mut noise = noise;
    Ok(times
        .iter()
        .map(|&t| {
            let mut pl = model.polarization(&params, t);
            if let Some((dist, rng)) = noise.as_mut() {
                pl += dist.sample(rng);
            }
            SimulatedPoint {
                t,
                pl,
                sigma: noise_sigma,
            }
        })
        .collect())
}
