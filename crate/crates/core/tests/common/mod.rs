//! Reference implementations used only by the tests. Nothing here calls into
//! the library, so agreement with it is a genuine cross-check.
#![allow(dead_code)]

use std::f64::consts::TAU;

use hfbeat::{BeatDataset, DataPoint};

/// Plain f64 Racah formula over twice-valued arguments.
pub fn racah_sixj(tw: [i32; 6]) -> f64 {
    fn tri(a: i32, b: i32, c: i32) -> bool {
        (a + b + c) % 2 == 0 && (a - b).abs() <= c && c <= a + b
    }
    fn fact(n: i32) -> f64 {
        (1..=n).map(f64::from).product()
    }
    fn delta(a: i32, b: i32, c: i32) -> f64 {
        (fact((a + b - c) / 2) * fact((a - b + c) / 2) * fact((b + c - a) / 2) / fact((a + b + c) / 2 + 1)).sqrt()
    }
    let [a, b, c, d, e, f] = tw;
    if tw.iter().any(|&x| x < 0) || !(tri(a, b, c) && tri(a, e, f) && tri(d, b, f) && tri(d, e, c)) {
        return 0.0;
    }
    let alphas = [(a + b + c) / 2, (a + e + f) / 2, (d + b + f) / 2, (d + e + c) / 2];
    let betas = [(a + b + d + e) / 2, (b + c + e + f) / 2, (c + a + f + d) / 2];
    let lo = *alphas.iter().max().unwrap();
    let hi = *betas.iter().min().unwrap();
    let mut sum = 0.0;
    for t in lo..=hi {
        let den: f64 = alphas.iter().map(|&x| fact(t - x)).product::<f64>() * betas.iter().map(|&x| fact(x - t)).product::<f64>();
        let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * fact(t + 1) / den;
    }
    delta(a, b, c) * delta(a, e, f) * delta(d, b, f) * delta(d, e, c) * sum
}

/// Independently computed 6-j values: (twice args, squared numerator,
/// squared denominator, sign).
pub const FROZEN_SIXJ: &[([i32; 6], u64, u64, i32)] = &[
    ([4, 10, 4, 3, 3, 7], 0, 1, 0),
    ([6, 8, 4, 3, 3, 7], 1, 420, 1),
    ([8, 10, 4, 3, 3, 7], 7, 600, -1),
    ([4, 6, 4, 3, 3, 7], 3, 280, 1),
    ([4, 8, 4, 3, 3, 7], 1, 56, -1),
    ([6, 10, 4, 3, 3, 7], 1, 120, 1),
    ([2, 2, 2, 0, 2, 2], 1, 9, -1),
    ([9, 8, 3, 4, 7, 8], 117, 15400, 1),
    ([4, 2, 6, 4, 6, 2], 2, 175, 1),
    ([4, 5, 5, 8, 5, 3], 1, 98, -1),
    ([8, 1, 7, 1, 8, 0], 1, 18, 1),
    ([5, 1, 6, 9, 7, 8], 4, 315, -1),
    ([4, 8, 4, 4, 2, 6], 1, 63, -1),
    ([9, 4, 9, 6, 3, 6], 11, 1008, -1),
    ([3, 5, 6, 9, 5, 6], 1, 1764, -1),
    ([5, 2, 3, 5, 8, 5], 1, 63, -1),
    ([6, 3, 7, 4, 5, 3], 1, 280, -1),
    ([5, 8, 3, 6, 9, 8], 5, 10584, -1),
    ([9, 7, 8, 4, 6, 9], 361, 77616, -1),
    ([9, 4, 9, 9, 6, 5], 13, 11088, 1),
    ([5, 8, 9, 6, 5, 8], 125, 38808, 1),
];

/// Coefficients as printed for the Cs 8p 3/2 alignment, in the order
/// (2,3), (2,4), (3,4), (3,5), (4,5).
pub const PRINTED_CONSTANT: f64 = 0.2187;
pub const PRINTED_AMPLITUDES: [f64; 5] = [0.09375, 0.2009, 0.0375, 0.16042, 0.28875];

/// Exact amplitudes as rationals (num, den), same order.
pub const EXACT_AMPLITUDES: [(i64, i64); 5] = [(3, 32), (45, 224), (3, 80), (77, 480), (231, 800)];

/// Beat frequencies in MHz for the Cs pairs, same order.
pub fn cs_frequencies(a: f64, b: f64) -> [f64; 5] {
    [
        3.0 * a - 5.0 * b / 7.0,
        7.0 * a - b,
        4.0 * a - 2.0 * b / 7.0,
        9.0 * a + 3.0 * b / 7.0,
        5.0 * a + 5.0 * b / 7.0,
    ]
}

/// The printed alignment, no pulse smearing; `t` in ns.
pub fn printed_g2(a: f64, b: f64, t: f64) -> f64 {
    let nu = cs_frequencies(a, b);
    PRINTED_CONSTANT
        + PRINTED_AMPLITUDES
            .iter()
            .zip(nu)
            .map(|(amp, nu)| amp * (TAU * nu * 1e-3 * t).cos())
            .sum::<f64>()
}

fn rect_smear(omega_w: f64) -> f64 {
    let x2 = omega_w * omega_w;
    if omega_w.abs() < 1e-2 {
        1.0 - x2 / 12.0 + x2 * x2 / 360.0
    } else {
        2.0 * (1.0 - omega_w.cos()) / (omega_w * omega_w)
    }
}

/// Alignment with exact amplitudes and rectangular-pulse smearing.
pub fn exact_g2(a: f64, b: f64, dt: f64, w: f64, t: f64) -> f64 {
    let amps = EXACT_AMPLITUDES.map(|(n, d)| n as f64 / d as f64);
    let constant = 1.0 - amps.iter().sum::<f64>();
    let nu = cs_frequencies(a, b);
    constant
        + amps
            .iter()
            .zip(nu)
            .map(|(amp, nu)| {
                let omega = TAU * nu * 1e-3;
                amp * rect_smear(omega * w) * (omega * (t + dt)).cos()
            })
            .sum::<f64>()
}

pub fn cs_polarization(g: f64) -> f64 {
    3.0 * g / (20.0 + g)
}

/// Reduced chi-squared written out term by term.
pub fn direct_chi2(a: f64, b: f64, dt: f64, w: f64, data: &BeatDataset) -> f64 {
    let eta = (data.points.len() - 4) as f64;
    data.points
        .iter()
        .map(|p| {
            let fit = cs_polarization(exact_g2(a, b, dt, w, p.t));
            (fit - p.pl).powi(2) / (eta * p.sigma * p.sigma)
        })
        .sum()
}

/// Noiseless Cs data on the given delays.
pub fn synthetic(a: f64, b: f64, dt: f64, w: f64, times: &[f64], sigma: f64) -> BeatDataset {
    let points = times
        .iter()
        .enumerate()
        .map(|(i, &t)| DataPoint {
            index: i as i64 + 1,
            t,
            pl: cs_polarization(exact_g2(a, b, dt, w, t)),
            sigma,
        })
        .collect();
    BeatDataset::new(points, 0.0).unwrap()
}

pub fn table1_times() -> Vec<f64> {
    BeatDataset::cs8p_table1().times()
}
