//! Hyperfine level shifts and the rank-2 beat spectrum of an (I, J) level.

use num_rational::{BigRational, Rational64};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::angular::{sixj_exact_square, triangle_ok, HalfInt, SixJArgs};
use crate::error::{Error, Result};

/// Rank of the alignment multipole carried by the beats.
const ALIGNMENT_RANK: HalfInt = HalfInt::integer(2);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperfineSystem {
    pub nuclear_spin: HalfInt,
    pub electronic_j: HalfInt,
    /// Magnetic dipole constant, MHz.
    pub a: f64,
    /// Electric quadrupole constant, MHz.
    pub b: f64,
}

impl HyperfineSystem {
    pub fn new(nuclear_spin: HalfInt, electronic_j: HalfInt, a: f64, b: f64) -> Result<Self> {
        if nuclear_spin.twice() < 0 || electronic_j.twice() < 0 {
            return Err(Error::Domain(format!(
                "angular momenta must be nonnegative (I = {nuclear_spin}, J = {electronic_j})"
            )));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain("coupling constants must be finite".into()));
        }
        if b != 0.0 && !has_quadrupole(nuclear_spin, electronic_j) {
            return Err(Error::Domain(format!(
                "B = {b} MHz but no quadrupole interaction exists for I = {nuclear_spin}, J = {electronic_j}"
            )));
        }
        Ok(HyperfineSystem {
            nuclear_spin,
            electronic_j,
            a,
            b,
        })
    }

    /// 133Cs (I = 7/2) in a J = 3/2 level with the given constants.
    pub fn cesium_p32(a: f64, b: f64) -> Self {
        HyperfineSystem {
            nuclear_spin: HalfInt::from_twice(7),
            electronic_j: HalfInt::from_twice(3),
            a,
            b,
        }
    }

    pub fn with_constants(self, a: f64, b: f64) -> Result<Self> {
        HyperfineSystem::new(self.nuclear_spin, self.electronic_j, a, b)
    }

    pub fn has_quadrupole(&self) -> bool {
        has_quadrupole(self.nuclear_spin, self.electronic_j)
    }
}

/// A quadrupole term needs I >= 1 and J >= 1.
pub fn has_quadrupole(nuclear_spin: HalfInt, electronic_j: HalfInt) -> bool {
    nuclear_spin.twice() >= 2 && electronic_j.twice() >= 2
}

/// Whether a level of angular momentum J can hold a rank-2 alignment.
pub fn supports_alignment(electronic_j: HalfInt) -> bool {
    triangle_ok(electronic_j, electronic_j, ALIGNMENT_RANK)
}

/// F = |I-J| ..= I+J in unit steps.
pub fn f_values(nuclear_spin: HalfInt, electronic_j: HalfInt) -> Vec<HalfInt> {
    let lo = nuclear_spin.abs_diff(electronic_j).twice();
    let hi = (nuclear_spin + electronic_j).twice();
    (lo..=hi).step_by(2).map(HalfInt::from_twice).collect()
}

/// Exact coefficients of A and B in the energy of one hyperfine level:
/// `E_F = dipole * A + quadrupole * B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnergyCoefficients {
    pub dipole: Rational64,
    pub quadrupole: Rational64,
}

impl EnergyCoefficients {
    pub fn evaluate(&self, a: f64, b: f64) -> f64 {
        ratio_to_f64(self.dipole) * a + ratio_to_f64(self.quadrupole) * b
    }
}

impl std::ops::Sub for EnergyCoefficients {
    type Output = EnergyCoefficients;
    fn sub(self, rhs: Self) -> Self {
        EnergyCoefficients {
            dipole: self.dipole - rhs.dipole,
            quadrupole: self.quadrupole - rhs.quadrupole,
        }
    }
}

fn ratio_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `j(j+1)` as an exact rational.
fn casimir(j: HalfInt) -> Rational64 {
    let tw = i64::from(j.twice());
    Rational64::new(tw * (tw + 2), 4)
}

/// Casimir-formula coefficients for level F.
///
/// With `K = F(F+1) - I(I+1) - J(J+1)` the dipole part is `K/2` and the
/// quadrupole part is `[3/2 K(K+1) - 2 I(I+1) J(J+1)] / [2I(2I-1) 2J(2J-1)]`,
/// taken as zero when the level cannot carry a quadrupole shift.
pub fn energy_coefficients(nuclear_spin: HalfInt, electronic_j: HalfInt, f: HalfInt) -> EnergyCoefficients {
    let ii = casimir(nuclear_spin);
    let jj = casimir(electronic_j);
    let k = casimir(f) - ii - jj;
    let dipole = k / 2;
    let quadrupole = if has_quadrupole(nuclear_spin, electronic_j) {
        let two_i = i64::from(nuclear_spin.twice());
        let two_j = i64::from(electronic_j.twice());
        let num = Rational64::new(3, 2) * k * (k + 1) - ii * jj * 2;
        num / (two_i * (two_i - 1) * two_j * (two_j - 1))
    } else {
        Rational64::zero()
    };
    EnergyCoefficients { dipole, quadrupole }
}

/// Hyperfine energy shift of level F, MHz.
pub fn energy_shift(sys: &HyperfineSystem, f: HalfInt) -> Result<f64> {
    if sys.b != 0.0 && !sys.has_quadrupole() {
        return Err(Error::Domain(format!(
            "quadrupole constant B = {} MHz is undefined for I = {}, J = {}",
            sys.b, sys.nuclear_spin, sys.electronic_j
        )));
    }
    if !f_values(sys.nuclear_spin, sys.electronic_j).contains(&f) {
        return Err(Error::Domain(format!(
            "F = {f} is not a level of I = {}, J = {}",
            sys.nuclear_spin, sys.electronic_j
        )));
    }
    Ok(energy_coefficients(sys.nuclear_spin, sys.electronic_j, f).evaluate(sys.a, sys.b))
}

/// One oscillating term of g2(t): levels F < F', beat frequency and weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BeatComponent {
    #[serde(rename = "F", serialize_with = "serialize_halfint")]
    pub f: HalfInt,
    #[serde(rename = "F_prime", serialize_with = "serialize_halfint")]
    pub f_prime: HalfInt,
    /// Beat frequency, MHz.
    #[serde(rename = "nu_MHz")]
    pub nu: f64,
    pub amplitude: f64,
}

fn serialize_halfint<S: serde::Serializer>(h: &HalfInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&h.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BeatSpectrum {
    pub constant: f64,
    pub components: Vec<BeatComponent>,
}

/// Frequency-independent part of a beat spectrum: the 6-j weights plus the
/// exact A/B coefficients of each beat frequency. Evaluating it at given
/// (A, B) is cheap, which is what the fitter does on every iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct BeatTemplate {
    pub nuclear_spin: HalfInt,
    pub electronic_j: HalfInt,
    pub constant: f64,
    pub terms: Vec<BeatTerm>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeatTerm {
    pub f: HalfInt,
    pub f_prime: HalfInt,
    pub amplitude: f64,
    /// `E(F') - E(F)` as exact coefficients of A and B.
    pub splitting: EnergyCoefficients,
    pub dnu_da: f64,
    pub dnu_db: f64,
}

impl BeatTerm {
    /// Signed splitting `E(F') - E(F)`, MHz.
    pub fn signed_frequency(&self, a: f64, b: f64) -> f64 {
        self.dnu_da * a + self.dnu_db * b
    }
}

/// Exact rank-2 weights: the constant `Σ_F (2F+1)²/(2I+1) {F F 2; J J I}²` and
/// `2 (2F+1)(2F'+1)/(2I+1) {F F' 2; J J I}²` for every F < F' pair with a
/// nonzero symbol.
///
/// A level with J < 1 carries no alignment at all; its depolarization
/// coefficient is taken as identically 1 (constant 1, no beats).
pub fn exact_weights(
    nuclear_spin: HalfInt,
    electronic_j: HalfInt,
) -> (BigRational, Vec<(HalfInt, HalfInt, BigRational)>) {
    if !supports_alignment(electronic_j) {
        return (BigRational::from_integer(1.into()), Vec::new());
    }
    let fs = f_values(nuclear_spin, electronic_j);
    let norm = nuclear_spin.multiplicity();
    let weight = |f: HalfInt, fp: HalfInt| {
        let sq = sixj_exact_square(SixJArgs::new(
            f,
            fp,
            ALIGNMENT_RANK,
            electronic_j,
            electronic_j,
            nuclear_spin,
        ));
        sq * BigRational::new((f.multiplicity() * fp.multiplicity()).into(), norm.into())
    };

    let mut constant = BigRational::zero();
    let mut pairs = Vec::new();
    for (idx, &f) in fs.iter().enumerate() {
        constant += weight(f, f);
        for &fp in &fs[idx + 1..] {
            let w = weight(f, fp);
            if !w.is_zero() {
                pairs.push((f, fp, w * BigRational::from_integer(2.into())));
            }
        }
    }
    (constant, pairs)
}

impl BeatTemplate {
    pub fn new(nuclear_spin: HalfInt, electronic_j: HalfInt) -> Self {
        let (constant, pairs) = exact_weights(nuclear_spin, electronic_j);
        let terms = pairs
            .into_iter()
            .map(|(f, fp, w)| {
                let splitting = energy_coefficients(nuclear_spin, electronic_j, fp)
                    - energy_coefficients(nuclear_spin, electronic_j, f);
                BeatTerm {
                    f,
                    f_prime: fp,
                    amplitude: w.to_f64().expect("finite weight"),
                    splitting,
                    dnu_da: ratio_to_f64(splitting.dipole),
                    dnu_db: ratio_to_f64(splitting.quadrupole),
                }
            })
            .collect();
        BeatTemplate {
            nuclear_spin,
            electronic_j,
            constant: constant.to_f64().expect("finite weight"),
            terms,
        }
    }

    pub fn for_system(sys: &HyperfineSystem) -> Self {
        BeatTemplate::new(sys.nuclear_spin, sys.electronic_j)
    }

    pub fn has_quadrupole(&self) -> bool {
        has_quadrupole(self.nuclear_spin, self.electronic_j)
    }

    pub fn spectrum(&self, a: f64, b: f64) -> BeatSpectrum {
        BeatSpectrum {
            constant: self.constant,
            components: self
                .terms
                .iter()
                .map(|t| BeatComponent {
                    f: t.f,
                    f_prime: t.f_prime,
                    nu: t.signed_frequency(a, b).abs(),
                    amplitude: t.amplitude,
                })
                .collect(),
        }
    }
}

/// Beat spectrum of the rank-2 alignment for a hyperfine system.
pub fn beat_spectrum(sys: &HyperfineSystem) -> BeatSpectrum {
    BeatTemplate::for_system(sys).spectrum(sys.a, sys.b)
}
