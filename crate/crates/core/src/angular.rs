//! Wigner 6-j symbols over half-integer arguments.
//!
//! Quantum numbers are carried as twice their value so that every triangle
//! and parity test is integer arithmetic. The Racah single sum is evaluated
//! exactly: each term `(t+1)! / (Π (t-α)! Π (β-t)!)` is an integer, so the
//! sum is a [`BigInt`] and only the triangle prefactor needs a square root.

use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Angular momentum quantum number stored as twice its value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn integer(n: i32) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// `2j + 1`, the multiplicity of the level.
    pub fn multiplicity(self) -> i64 {
        i64::from(self.0) + 1
    }

    pub fn abs_diff(self, other: HalfInt) -> HalfInt {
        HalfInt((self.0 - other.0).abs())
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Accepts `"3"`, `"7/2"` and decimal halves such as `"1.5"`.
impl FromStr for HalfInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("not a half-integer: {s:?}"));
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| bad())?;
            match den.trim() {
                "1" => Ok(HalfInt(2 * num)),
                "2" => Ok(HalfInt(num)),
                _ => Err(bad()),
            }
        } else if let Ok(n) = s.parse::<i32>() {
            Ok(HalfInt(2 * n))
        } else {
            let x: f64 = s.parse().map_err(|_| bad())?;
            let twice = 2.0 * x;
            if twice.fract() != 0.0 || twice.abs() > f64::from(i32::MAX) {
                return Err(bad());
            }
            Ok(HalfInt(twice as i32))
        }
    }
}

/// The six arguments of `{j1 j2 j3; j4 j5 j6}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SixJArgs(pub [HalfInt; 6]);

impl SixJArgs {
    pub fn new(j1: HalfInt, j2: HalfInt, j3: HalfInt, j4: HalfInt, j5: HalfInt, j6: HalfInt) -> Self {
        SixJArgs([j1, j2, j3, j4, j5, j6])
    }

    pub fn from_twice(twice: [i32; 6]) -> Self {
        SixJArgs(twice.map(HalfInt::from_twice))
    }

    fn twice(&self) -> [i32; 6] {
        self.0.map(HalfInt::twice)
    }

    /// The four triads that must each close for a nonzero symbol.
    pub fn triads(&self) -> [[HalfInt; 3]; 4] {
        let [j1, j2, j3, j4, j5, j6] = self.0;
        [[j1, j2, j3], [j1, j5, j6], [j4, j2, j6], [j4, j5, j3]]
    }
}

impl fmt::Display for SixJArgs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [j1, j2, j3, j4, j5, j6] = self.0;
        write!(f, "{{{j1} {j2} {j3}; {j4} {j5} {j6}}}")
    }
}

/// `|a-b| <= c <= a+b` with `a+b+c` integral, all arguments nonnegative.
pub fn triangle_ok(a: HalfInt, b: HalfInt, c: HalfInt) -> bool {
    let (a, b, c) = (a.twice(), b.twice(), c.twice());
    a >= 0 && b >= 0 && c >= 0 && (a + b + c) % 2 == 0 && (a - b).abs() <= c && c <= a + b
}

fn all_triads_ok(args: &SixJArgs) -> bool {
    args.triads().iter().all(|&[a, b, c]| triangle_ok(a, b, c))
}

const FACTORIAL_TABLE_LEN: usize = 160;

fn factorial_table() -> &'static [BigUint] {
    static TABLE: OnceLock<Vec<BigUint>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(FACTORIAL_TABLE_LEN);
        let mut acc = BigUint::one();
        table.push(acc.clone());
        for n in 1..FACTORIAL_TABLE_LEN {
            acc *= n;
            table.push(acc.clone());
        }
        table
    })
}

fn factorial(n: i32) -> BigUint {
    debug_assert!(n >= 0);
    let n = n as usize;
    let table = factorial_table();
    if n < table.len() {
        return table[n].clone();
    }
    let mut acc = table[table.len() - 1].clone();
    for k in table.len()..=n {
        acc *= k;
    }
    acc
}

/// Squared triangle coefficient `(a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!`, twice-valued inputs.
fn delta_squared(a: i32, b: i32, c: i32) -> BigRational {
    let num = factorial((a + b - c) / 2) * factorial((a - b + c) / 2) * factorial((-a + b + c) / 2);
    let den = factorial((a + b + c) / 2 + 1);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Product of the four squared triangle coefficients.
fn prefactor_squared(tw: &[i32; 6]) -> BigRational {
    let [j1, j2, j3, j4, j5, j6] = *tw;
    delta_squared(j1, j2, j3) * delta_squared(j1, j5, j6) * delta_squared(j4, j2, j6) * delta_squared(j4, j5, j3)
}

/// The integer Racah sum `Σ_t (-1)^t (t+1)! / (Π (t-α_i)! Π (β_k-t)!)`.
fn racah_sum(tw: &[i32; 6]) -> BigInt {
    let [j1, j2, j3, j4, j5, j6] = *tw;
    let alpha = [
        (j1 + j2 + j3) / 2,
        (j1 + j5 + j6) / 2,
        (j4 + j2 + j6) / 2,
        (j4 + j5 + j3) / 2,
    ];
    let beta = [(j1 + j2 + j4 + j5) / 2, (j2 + j3 + j5 + j6) / 2, (j3 + j1 + j6 + j4) / 2];
    let t_min = *alpha.iter().max().expect("four alphas");
    let t_max = *beta.iter().min().expect("three betas");

    let mut sum = BigInt::zero();
    for t in t_min..=t_max {
        let mut den = BigUint::one();
        for a in alpha {
            den *= factorial(t - a);
        }
        for b in beta {
            den *= factorial(b - t);
        }
        // the denominators' arguments add up to t, so this division is exact
        let term = BigInt::from(factorial(t + 1) / den);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

/// Wigner 6-j symbol `{j1 j2 j3; j4 j5 j6}`. Exactly zero when any triad fails
/// [`triangle_ok`].
pub fn sixj(args: SixJArgs) -> f64 {
    if !all_triads_ok(&args) {
        return 0.0;
    }
    let tw = args.twice();
    let sum = racah_sum(&tw);
    if sum.is_zero() {
        return 0.0;
    }
    let pre = prefactor_squared(&tw);
    // Scale the integer sum into the prefactor before converting, so that
    // neither factor has to be representable as an f64 on its own.
    let magnitude = (pre * BigRational::from_integer(&sum * &sum))
        .to_f64()
        .expect("finite rational")
        .sqrt();
    if sum.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// Exact square of the 6-j symbol, which is always rational.
pub fn sixj_exact_square(args: SixJArgs) -> BigRational {
    if !all_triads_ok(&args) {
        return BigRational::zero();
    }
    let tw = args.twice();
    let sum = racah_sum(&tw);
    prefactor_squared(&tw) * BigRational::from_integer(&sum * &sum)
}

/// Sign of the 6-j symbol (-1, 0 or +1), obtained from the exact Racah sum.
pub fn sixj_sign(args: SixJArgs) -> i32 {
    if !all_triads_ok(&args) {
        return 0;
    }
    let sum = racah_sum(&args.twice());
    if sum.is_zero() {
        0
    } else if sum.is_negative() {
        -1
    } else {
        1
    }
}
