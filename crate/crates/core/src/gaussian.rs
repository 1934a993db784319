//! Univariate Gaussian beliefs and truncated-normal moment corrections.
//!
//! Beliefs are stored in natural parameters (precision and precision-adjusted
//! mean) so that products and quotients of densities are plain additions and
//! subtractions. The `(mean, variance)` form is only materialised at the API
//! boundary.
//!
//! The moment functions follow the usual TrueSkill naming: `v` is the additive
//! mean correction and `w` the multiplicative variance reduction of a unit
//! variance Gaussian after conditioning on a truncation event, so that the
//! conditioned variable has mean `t + v` and variance `1 - w`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use thiserror::Error;

/// Below this normal-scale argument the lower-tail ratio `Φ(x)/φ(x)` is taken
/// from its asymptotic series instead of `erfc`.
const TAIL_SWITCH: f64 = -37.0;

/// Probability mass under which a two-sided truncation is treated as a point.
const MIN_MASS: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussianError {
    #[error("variance must be positive or +inf, got {0}")]
    InvalidVariance(f64),
    #[error("mean must be finite, got {0}")]
    InvalidMean(f64),
    #[error("division produced negative precision {0}")]
    NegativePrecision(f64),
}

/// A univariate Gaussian belief over a single skill.
///
/// A variance of `+inf` (zero precision) is the uninformative message and is
/// the identity for [`Gaussian1D::multiply`].
#[derive(Clone, Copy, PartialEq)]
pub struct Gaussian1D {
    precision: f64,
    precision_mean: f64,
}

impl Gaussian1D {
    /// Builds a belief from mean and variance.
    ///
    /// Panics on a non-positive or NaN variance; use [`Gaussian1D::try_new`]
    /// for unchecked input.
    pub fn new(mean: f64, variance: f64) -> Self {
        match Self::try_new(mean, variance) {
            Ok(g) => g,
            Err(e) => panic!("{e}"),
        }
    }

    pub fn try_new(mean: f64, variance: f64) -> Result<Self, GaussianError> {
        if !mean.is_finite() {
            return Err(GaussianError::InvalidMean(mean));
        }
        if variance.is_nan() || variance <= 0.0 {
            return Err(GaussianError::InvalidVariance(variance));
        }
        if variance.is_infinite() {
            return Ok(Self::uninformative());
        }
        let precision = 1.0 / variance;
        Ok(Self {
            precision,
            precision_mean: mean * precision,
        })
    }

    pub fn uninformative() -> Self {
        Self {
            precision: 0.0,
            precision_mean: 0.0,
        }
    }

    pub fn from_natural(precision: f64, precision_mean: f64) -> Result<Self, GaussianError> {
        if precision.is_nan() || precision < 0.0 {
            return Err(GaussianError::NegativePrecision(precision));
        }
        if !precision_mean.is_finite() {
            return Err(GaussianError::InvalidMean(precision_mean));
        }
        Ok(Self {
            precision,
            precision_mean,
        })
    }

    /// Mean of the belief; `0` for the uninformative message.
    pub fn mean(&self) -> f64 {
        if self.precision == 0.0 {
            0.0
        } else {
            self.precision_mean / self.precision
        }
    }

    pub fn variance(&self) -> f64 {
        if self.precision == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.precision
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    pub fn precision_mean(&self) -> f64 {
        self.precision_mean
    }

    pub fn is_proper(&self) -> bool {
        self.precision > 0.0
    }

    /// Product of two densities (renormalised): natural parameters add.
    pub fn multiply(self, other: Self) -> Self {
        Self {
            precision: self.precision + other.precision,
            precision_mean: self.precision_mean + other.precision_mean,
        }
    }

    /// Quotient of two densities: natural parameters subtract.
    ///
    /// Fails when the divisor carries more precision than the dividend, which
    /// only happens with a corrupted message state.
    pub fn divide(self, other: Self) -> Result<Self, GaussianError> {
        let precision = self.precision - other.precision;
        if precision < 0.0 {
            return Err(GaussianError::NegativePrecision(precision));
        }
        let precision_mean = if precision == 0.0 {
            0.0
        } else {
            self.precision_mean - other.precision_mean
        };
        Ok(Self {
            precision,
            precision_mean,
        })
    }
}

impl std::ops::Mul for Gaussian1D {
    type Output = Gaussian1D;

    fn mul(self, rhs: Self) -> Self {
        self.multiply(rhs)
    }
}

impl fmt::Debug for Gaussian1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N({}, {})", self.mean(), self.variance())
    }
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF, accurate in relative terms deep into the lower tail.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Probability that a standard normal variable falls in `[lo, hi]`.
///
/// Chooses between upper-tail, lower-tail and central evaluation so the
/// difference does not cancel when both bounds sit in the same tail.
pub fn norm_interval(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo >= 0.0 {
        0.5 * (libm::erfc(lo * FRAC_1_SQRT_2) - libm::erfc(hi * FRAC_1_SQRT_2))
    } else if hi <= 0.0 {
        0.5 * (libm::erfc(-hi * FRAC_1_SQRT_2) - libm::erfc(-lo * FRAC_1_SQRT_2))
    } else {
        0.5 * (libm::erf(hi * FRAC_1_SQRT_2) - libm::erf(lo * FRAC_1_SQRT_2))
    }
}

/// Asymptotic series for the lower tail: returns `(S, 1 - S)` with
/// `Φ(x)/φ(x) = S / |x|`, for `x` well below zero.
fn lower_tail_series(x: f64) -> (f64, f64) {
    let inv_x2 = 1.0 / (x * x);
    // 1 - S = 1/x² - 3/x⁴ + 15/x⁶ - ...
    let mut term = 1.0;
    let mut one_minus_s = 0.0;
    for k in 1..=10 {
        term *= (2 * k - 1) as f64 * inv_x2;
        if k % 2 == 1 {
            one_minus_s += term;
        } else {
            one_minus_s -= term;
        }
    }
    (1.0 - one_minus_s, one_minus_s)
}

/// `Φ(x)/φ(x)`, finite for every `x ≤ 0` including the far tail.
fn lower_tail_ratio(x: f64) -> f64 {
    if x < TAIL_SWITCH {
        let (s, _) = lower_tail_series(x);
        s / x.abs()
    } else {
        norm_cdf(x) / norm_pdf(x)
    }
}

/// Moment corrections for conditioning `X ~ N(t, 1)` on `|X| ≤ eps`.
///
/// Returns `(v, w)`: the conditioned variable has mean `t + v` and variance
/// `1 - w`. `eps = +inf` means no truncation and yields `(0, 0)`.
///
/// When the window carries less than `1e-300` probability (or `eps` is not
/// positive) the truncation is treated as a point mass at zero: `v = -t`,
/// `w = 1`.
pub fn truncated_moments_within(t: f64, eps: f64) -> (f64, f64) {
    if eps == f64::INFINITY {
        return (0.0, 0.0);
    }
    if eps.is_nan() || eps <= 0.0 || !t.is_finite() {
        return (-t, 1.0);
    }
    let t_abs = t.abs();
    let lo = -eps - t_abs;
    let hi = eps - t_abs;

    let (v, w) = if hi >= 0.0 {
        let mass = norm_interval(lo, hi);
        if mass < MIN_MASS {
            return (-t, 1.0);
        }
        let (pdf_lo, pdf_hi) = (norm_pdf(lo), norm_pdf(hi));
        let v = (pdf_lo - pdf_hi) / mass;
        let w = v * v + (hi * pdf_hi - lo * pdf_lo) / mass;
        (v, w)
    } else {
        // Both bounds in the lower tail: factor out φ(hi).
        let ratio = (-2.0 * eps * t_abs).exp();
        let scaled_mass = lower_tail_ratio(hi) - ratio * lower_tail_ratio(lo);
        if !scaled_mass.is_finite() || scaled_mass <= 0.0 {
            return (-t, 1.0);
        }
        let v = (ratio - 1.0) / scaled_mass;
        let w = v * v + (hi - lo * ratio) / scaled_mass;
        (v, w)
    };

    let v = if t < 0.0 { -v } else { v };
    (v, w.clamp(0.0, 1.0))
}

/// Moment corrections for conditioning `X ~ N(t, 1)` on `X > eps`.
///
/// Same `(v, w)` convention as [`truncated_moments_within`]. Finite for all
/// finite inputs; the far tail uses the asymptotic lower-tail series.
pub fn truncated_moments_above(t: f64, eps: f64) -> (f64, f64) {
    let x = t - eps;
    if x.is_nan() {
        return (0.0, 0.0);
    }
    if x < TAIL_SWITCH {
        let (s, one_minus_s) = lower_tail_series(x);
        let v = x.abs() / s;
        // v + x = |x|(1 - S)/S, kept free of cancellation.
        let w = v * x.abs() * one_minus_s / s;
        return (v, w.clamp(0.0, 1.0));
    }
    let v = if x <= 0.0 {
        1.0 / lower_tail_ratio(x)
    } else {
        norm_pdf(x) / norm_cdf(x)
    };
    let w = v * (v + x);
    (v, w.clamp(0.0, 1.0))
}
