//! Closed-form transition kernel of the chain `X ← U·X + U(1 − U)`.
//!
//! For a state `x ∈ [0, 1]` the next value has density
//!
//! ```text
//! φ_x(t) = ((1+x)² − 4t)^(−1/2) · (1[0,x)(t) + 2·1[x,b_x)(t)),   b_x = ((1+x)/2)²
//! ```
//!
//! which is bounded below by `r(t) = ½·1[0,¼)(t)` uniformly in `x`. Splitting
//! `φ_x = r + g_x` gives the multigamma update: with probability `‖r‖₁ = 1/8`
//! every chain moves to the same `U/4`, otherwise it moves by the quantile
//! function of the normalized remainder `g_x / (7/8)`. That quantile function
//! is piecewise elementary and lives in [`QuantileCoefficients`].

use std::fmt;

use thiserror::Error;

/// Mass of the dominating function `r`, i.e. the per-step coupling probability.
pub const COUPLING_PROBABILITY: f64 = 0.125;

/// Right end of the support of `r`.
pub const DOMINATING_SUPPORT: f64 = 0.25;

/// Height of `r` on its support.
pub const DOMINATING_HEIGHT: f64 = 0.5;

/// Negative square-root arguments above this magnitude are rejected rather
/// than clamped to zero.
pub const RADICAND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DomainError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfUnitInterval { name: &'static str, value: f64 },
    #[error("uniform variate {0} is outside [0, 1)")]
    NotUniform(f64),
    #[error("square root of negative value {0}")]
    NegativeRadicand(f64),
}

fn check_unit(name: &'static str, value: f64) -> Result<f64, DomainError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(DomainError::OutOfUnitInterval { name, value })
    }
}

/// Square root that absorbs rounding noise just below zero.
fn guarded_sqrt(v: f64) -> Result<f64, DomainError> {
    if v >= 0.0 {
        Ok(v.sqrt())
    } else if v >= -RADICAND_SLACK {
        Ok(0.0)
    } else {
        Err(DomainError::NegativeRadicand(v))
    }
}

/// A chain state, or the value conditioned on by the kernel. Always in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct StateX(f64);

impl StateX {
    pub fn new(x: f64) -> Result<Self, DomainError> {
        check_unit("x", x).map(Self)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for StateX {
    type Error = DomainError;

    fn try_from(x: f64) -> Result<Self, Self::Error> {
        Self::new(x)
    }
}

impl From<StateX> for f64 {
    fn from(x: StateX) -> f64 {
        x.0
    }
}

impl fmt::Display for StateX {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A uniform variate in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct UnitUniform(f64);

impl UnitUniform {
    pub fn new(u: f64) -> Result<Self, DomainError> {
        if (0.0..1.0).contains(&u) {
            Ok(Self(u))
        } else {
            Err(DomainError::NotUniform(u))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Which closed form of the quantile function applies to a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `x ≤ ¼`: the point `x` comes before the end of the dominating support.
    Low,
    /// `x > ¼`.
    High,
}

impl Regime {
    pub fn of(x: f64) -> Self {
        if x <= DOMINATING_SUPPORT {
            Regime::Low
        } else {
            Regime::High
        }
    }
}

/// Quantile levels at which the inverse switches closed form.
///
/// In the low regime `cut1 = 4x/7 = G_x(x)` and `cut2 = 1 − (8/7)√(x(x+2)) = G_x(¼)`.
/// In the high regime `cut1 = (3 + 4x − 4√(x(x+2)))/7 = G_x(¼)` and
/// `cut2 = (8x − 1)/7 = G_x(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoints {
    pub regime: Regime,
    pub cut1: f64,
    pub cut2: f64,
}

/// `b_x = ((1+x)/2)²`, the right end of the support of the transition from `x`.
pub fn upper_endpoint(x: f64) -> Result<f64, DomainError> {
    check_unit("x", x)?;
    Ok(upper_endpoint_unchecked(x))
}

#[inline]
fn upper_endpoint_unchecked(x: f64) -> f64 {
    let h = 0.5 * (1.0 + x);
    h * h
}

/// Transition density `φ_x(t)`. Zero for `t ≥ b_x`, including at `b_x` itself.
pub fn density_phi(x: f64, t: f64) -> Result<f64, DomainError> {
    check_unit("x", x)?;
    check_unit("t", t)?;
    let coefficient = if t < x {
        1.0
    } else if t < upper_endpoint_unchecked(x) {
        2.0
    } else {
        return Ok(0.0);
    };
    let root = guarded_sqrt((1.0 + x) * (1.0 + x) - 4.0 * t)?;
    Ok(coefficient / root)
}

/// Distribution function `F_x(y)` of `U·x + U(1 − U)`.
pub fn cdf_f(x: f64, y: f64) -> Result<f64, DomainError> {
    check_unit("x", x)?;
    check_unit("y", y)?;
    cdf_f_unchecked(x, y)
}

fn cdf_f_unchecked(x: f64, y: f64) -> Result<f64, DomainError> {
    if y >= upper_endpoint_unchecked(x) {
        return Ok(1.0);
    }
    let root = guarded_sqrt((1.0 + x) * (1.0 + x) - 4.0 * y)?;
    let value = if y < x {
        // ½(1 + x − root), rationalized to avoid cancellation for small y.
        2.0 * y / (1.0 + x + root)
    } else {
        1.0 - root
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Dominating function `r(t) = ½·1[0,¼)(t)`.
pub fn dominating_r(t: f64) -> Result<f64, DomainError> {
    check_unit("t", t)?;
    Ok(if t < DOMINATING_SUPPORT {
        DOMINATING_HEIGHT
    } else {
        0.0
    })
}

/// Distribution function of the normalized remainder `(φ_x − r)/(7/8)`:
/// `G_x(y) = (8/7)(F_x(y) − ½·min(y, ¼))`.
pub fn cdf_g(x: f64, y: f64) -> Result<f64, DomainError> {
    check_unit("x", x)?;
    check_unit("y", y)?;
    let f = cdf_f_unchecked(x, y)?;
    let g = (f - DOMINATING_HEIGHT * y.min(DOMINATING_SUPPORT)) / (1.0 - COUPLING_PROBABILITY);
    Ok(g.clamp(0.0, 1.0))
}

pub fn breakpoints(x: f64) -> Result<Breakpoints, DomainError> {
    check_unit("x", x)?;
    Ok(breakpoints_unchecked(x))
}

#[inline]
fn breakpoints_unchecked(x: f64) -> Breakpoints {
    let root = (x * (x + 2.0)).sqrt();
    match Regime::of(x) {
        Regime::Low => Breakpoints {
            regime: Regime::Low,
            cut1: 4.0 * x / 7.0,
            cut2: 1.0 - 8.0 / 7.0 * root,
        },
        Regime::High => Breakpoints {
            regime: Regime::High,
            cut1: (3.0 + 4.0 * x - 4.0 * root) / 7.0,
            cut2: (8.0 * x - 1.0) / 7.0,
        },
    }
}

/// Quantile function `G_x⁻¹(z)` with the exact closed-form coefficients.
pub fn inverse_g(x: f64, z: f64) -> Result<f64, DomainError> {
    QuantileCoefficients::CLOSED_FORM.inverse(x, z)
}

/// Coefficients of the six closed-form pieces of `G_x⁻¹`.
///
/// Each piece carries its own copy of every numeric constant so that a single
/// literal can be perturbed in isolation; [`Self::CLOSED_FORM`] holds the exact
/// values. The piece shapes are
///
/// ```text
/// low  1, z ∈ [0, cut1]:  a0·z + √(a1·z + (a2 − x)²) + a3·x + a4
/// low  2, z ∈ (cut1,cut2]: b0·z + b1·√(b2·z + b3 + x(x + b4)) + b5
/// low  3, z ∈ (cut2, 1]:  c0·(c1 + c2·x + c3·z)(c4 + c5·x + c6·z)
/// high 1, z ∈ [0, cut1]:  same shape as low 1
/// high 2, z ∈ (cut1,cut2]: d0·(d1 + d2·x + d3·z)(d4 + d5·z)
/// high 3, z ∈ (cut2, 1]:  same shape as low 3
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileCoefficients {
    pub low_root: [f64; 5],
    pub low_middle: [f64; 6],
    pub low_upper: [f64; 7],
    pub high_root: [f64; 5],
    pub high_middle: [f64; 6],
    pub high_upper: [f64; 7],
}

const ROOT_PIECE: [f64; 5] = [-1.75, 7.0, 1.0, 1.0, -1.0];
const UPPER_PIECE: [f64; 7] = [1.0 / 256.0, 15.0, 8.0, -7.0, 1.0, 8.0, 7.0];

impl QuantileCoefficients {
    /// Total number of individual coefficients.
    pub const LEN: usize = 36;

    pub const CLOSED_FORM: Self = Self {
        low_root: ROOT_PIECE,
        low_middle: [-1.75, 2.0, 7.0, 9.0, 2.0, -6.0],
        low_upper: UPPER_PIECE,
        high_root: ROOT_PIECE,
        high_middle: [1.0 / 64.0, 7.0, 8.0, -7.0, 1.0, 7.0],
        high_upper: UPPER_PIECE,
    };

    /// Flattened view, in field order.
    pub fn to_vec(&self) -> Vec<f64> {
        [
            &self.low_root[..],
            &self.low_middle[..],
            &self.low_upper[..],
            &self.high_root[..],
            &self.high_middle[..],
            &self.high_upper[..],
        ]
        .concat()
    }

    /// Returns a copy with the `index`-th flattened coefficient shifted by `delta`.
    ///
    /// Panics if `index >= Self::LEN`.
    pub fn perturbed(&self, index: usize, delta: f64) -> Self {
        assert!(index < Self::LEN, "coefficient index {index} out of range");
        let mut out = *self;
        let slots: [&mut [f64]; 6] = [
            &mut out.low_root,
            &mut out.low_middle,
            &mut out.low_upper,
            &mut out.high_root,
            &mut out.high_middle,
            &mut out.high_upper,
        ];
        let mut rest = index;
        for slot in slots {
            if rest < slot.len() {
                slot[rest] += delta;
                break;
            }
            rest -= slot.len();
        }
        out
    }

    /// `G_x⁻¹(z)`, validated and clamped into `[0, b_x]`.
    pub fn inverse(&self, x: f64, z: f64) -> Result<f64, DomainError> {
        check_unit("x", x)?;
        check_unit("z", z)?;
        self.inverse_unchecked(x, z)
    }

    /// As [`Self::inverse`] without checking that `x` and `z` lie in `[0, 1]`.
    #[inline]
    pub fn inverse_unchecked(&self, x: f64, z: f64) -> Result<f64, DomainError> {
        let cuts = breakpoints_unchecked(x);
        let y = match cuts.regime {
            Regime::Low if z <= cuts.cut1 => root_piece(&self.low_root, x, z)?,
            Regime::Low if z <= cuts.cut2 => {
                let [k0, k1, k2, k3, k4, k5] = self.low_middle;
                k0 * z + k1 * guarded_sqrt(k2 * z + k3 + x * (x + k4))? + k5
            }
            Regime::Low => upper_piece(&self.low_upper, x, z),
            Regime::High if z <= cuts.cut1 => root_piece(&self.high_root, x, z)?,
            Regime::High if z <= cuts.cut2 => {
                let [k0, k1, k2, k3, k4, k5] = self.high_middle;
                k0 * (k1 + k2 * x + k3 * z) * (k4 + k5 * z)
            }
            Regime::High => upper_piece(&self.high_upper, x, z),
        };
        Ok(y.clamp(0.0, upper_endpoint_unchecked(x)))
    }
}

impl Default for QuantileCoefficients {
    fn default() -> Self {
        Self::CLOSED_FORM
    }
}

#[inline]
fn root_piece(k: &[f64; 5], x: f64, z: f64) -> Result<f64, DomainError> {
    let shift = k[2] - x;
    Ok(k[0] * z + guarded_sqrt(k[1] * z + shift * shift)? + k[3] * x + k[4])
}

#[inline]
fn upper_piece(k: &[f64; 7], x: f64, z: f64) -> f64 {
    k[0] * (k[1] + k[2] * x + k[3] * z) * (k[4] + k[5] * x + k[6] * z)
}
