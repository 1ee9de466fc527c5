//! Two-parameter deformed scalar arithmetic.
//!
//! Every coefficient in the construction is a rational expression (with square
//! roots) in the deformed brackets
//!
//! ```text
//!     [x] = (q^x - p^(-x)) / (q - p^(-1)),
//! ```
//!
//! deformed factorials `[n]! = [1][2]…[n]`, and powers of the parameter ratio
//! `(q/p)^a`. This module evaluates those expressions at one concrete,
//! *generic* parameter point `(p, q)` — positive reals with `q − p⁻¹ ≠ 0` —
//! and hands the values to the rest of the crate as [`PqScalar`]s. Nothing
//! outside this module touches `p` or `q` directly.
//!
//! For positive integer `n` the bracket expands into the positive sum
//! `Σ_{k=0}^{n-1} q^(n-1-k) p^(-k)`, so `[n] > 0` for every valid parameter
//! pair; this keeps all square-root arguments used by the basis formulas
//! nonnegative.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Default generic parameter point: avoids `p = q`, `q = p⁻¹`, and roots of
/// unity while keeping bracket magnitudes tame.
pub const DEFAULT_P: f64 = 1.3;
/// See [`DEFAULT_P`].
pub const DEFAULT_Q: f64 = 1.7;
/// Default relative verification tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Integer range over which genericity (`[n] ≠ 0` for `n ≠ 0`) is asserted at
/// construction time. Desk-scale weights produce bracket arguments well inside
/// this range.
const GENERIC_CHECK_RANGE: i64 = 16;

/// A deformed-scalar value: the evaluation of a pq-rational expression at one
/// fixed parameter point.
///
/// Thin wrapper over `f64` so that coefficient plumbing stays explicit about
/// which numbers are deformation-dependent. Closed under ring operations;
/// division and square root have checked variants for the paths where a
/// vanishing denominator or negative radicand would indicate a logic error.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PqScalar(pub f64);

impl PqScalar {
    /// The additive identity.
    pub const ZERO: PqScalar = PqScalar(0.0);
    /// The multiplicative identity.
    pub const ONE: PqScalar = PqScalar(1.0);

    /// Raw value.
    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Absolute value.
    #[inline]
    pub fn abs(self) -> f64 {
        self.0.abs()
    }

    /// Square root; errors on a negative radicand (beyond a tiny rounding
    /// allowance) since every radicand produced by the basis formulas is a
    /// product of positive brackets.
    pub fn sqrt(self) -> Result<PqScalar> {
        if self.0 < -1e-12 {
            return Err(Error::SingularBasis {
                context: format!("square root of negative value {}", self.0),
                residual: self.0,
            });
        }
        Ok(PqScalar(self.0.max(0.0).sqrt()))
    }

    /// Division with an explicit guard against vanishing denominators.
    pub fn checked_div(self, denom: PqScalar, tol: f64) -> Result<PqScalar> {
        if denom.abs() <= tol {
            return Err(Error::SingularBasis {
                context: format!("division by near-zero scalar {}", denom.0),
                residual: denom.0,
            });
        }
        Ok(PqScalar(self.0 / denom.0))
    }

    /// Raise to an integer power.
    #[inline]
    pub fn powi(self, n: i32) -> PqScalar {
        PqScalar(self.0.powi(n))
    }
}

impl fmt::Display for PqScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<f64> for PqScalar {
    fn from(v: f64) -> Self {
        PqScalar(v)
    }
}

impl From<PqScalar> for f64 {
    fn from(v: PqScalar) -> Self {
        v.0
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for PqScalar {
            type Output = PqScalar;
            #[inline]
            fn $method(self, rhs: PqScalar) -> PqScalar {
                PqScalar(self.0 $op rhs.0)
            }
        }
        impl $trait<f64> for PqScalar {
            type Output = PqScalar;
            #[inline]
            fn $method(self, rhs: f64) -> PqScalar {
                PqScalar(self.0 $op rhs)
            }
        }
        impl $trait<PqScalar> for f64 {
            type Output = PqScalar;
            #[inline]
            fn $method(self, rhs: PqScalar) -> PqScalar {
                PqScalar(self $op rhs.0)
            }
        }
    };
}

impl_binop!(Add, add, +);
impl_binop!(Sub, sub, -);
impl_binop!(Mul, mul, *);

impl Div for PqScalar {
    type Output = PqScalar;
    /// Unchecked division for pre-validated paths; construction code divides
    /// only by brackets the typicality predicate has certified nonzero.
    #[inline]
    fn div(self, rhs: PqScalar) -> PqScalar {
        debug_assert!(rhs.0.abs() > 1e-300, "division by zero PqScalar");
        PqScalar(self.0 / rhs.0)
    }
}

impl Div<f64> for PqScalar {
    type Output = PqScalar;
    #[inline]
    fn div(self, rhs: f64) -> PqScalar {
        debug_assert!(rhs.abs() > 1e-300, "division by zero scalar");
        PqScalar(self.0 / rhs)
    }
}

impl Neg for PqScalar {
    type Output = PqScalar;
    #[inline]
    fn neg(self) -> PqScalar {
        PqScalar(-self.0)
    }
}

impl AddAssign for PqScalar {
    #[inline]
    fn add_assign(&mut self, rhs: PqScalar) {
        self.0 += rhs.0;
    }
}

impl SubAssign for PqScalar {
    #[inline]
    fn sub_assign(&mut self, rhs: PqScalar) {
        self.0 -= rhs.0;
    }
}

impl MulAssign for PqScalar {
    #[inline]
    fn mul_assign(&mut self, rhs: PqScalar) {
        self.0 *= rhs.0;
    }
}

/// The deformation parameter point `(p, q)` plus the verification tolerance.
///
/// Validated at construction: both parameters positive, the bracket
/// denominator `q − p⁻¹` bounded away from zero, and `[n] ≠ 0` for
/// `0 < |n| ≤ 16` (genericity over the desk-scale working range). All scalar
/// evaluation routes through this type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformParams {
    p: f64,
    q: f64,
    tol: f64,
}

impl DeformParams {
    /// Validated constructor with the default tolerance.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        Self::with_tol(p, q, DEFAULT_TOL)
    }

    /// Validated constructor with an explicit relative tolerance.
    pub fn with_tol(p: f64, q: f64, tol: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && p > 0.0 && q > 0.0) {
            return Err(Error::InvalidParams {
                p,
                q,
                reason: "parameters must be finite and positive".into(),
            });
        }
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::InvalidParams {
                p,
                q,
                reason: format!("tolerance {tol} must be finite and nonnegative"),
            });
        }
        let denom = q - p.recip();
        if denom.abs() <= tol.max(1e-12) {
            return Err(Error::InvalidParams {
                p,
                q,
                reason: format!(
                    "bracket denominator q - 1/p = {denom:.3e} is too close to zero (p·q = 1 is degenerate)"
                ),
            });
        }
        let params = DeformParams { p, q, tol };
        for n in 1..=GENERIC_CHECK_RANGE {
            for sign in [1, -1] {
                let b = params.bracket_int(sign * n);
                if b.abs() <= tol {
                    return Err(Error::InvalidParams {
                        p,
                        q,
                        reason: format!(
                            "parameters are not generic over the working range: [{}] = {:.3e}",
                            sign * n,
                            b.value()
                        ),
                    });
                }
            }
        }
        Ok(params)
    }

    /// First deformation parameter.
    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Second deformation parameter.
    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Relative verification tolerance.
    #[inline]
    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// The deformed bracket `[x] = (q^x − p^(−x)) / (q − p^(−1))` for real
    /// (in practice integer or half-integer) argument.
    pub fn bracket(&self, x: f64) -> PqScalar {
        if x == 0.0 {
            return PqScalar::ZERO;
        }
        let num = if x.fract() == 0.0 && x.abs() <= i32::MAX as f64 {
            self.q.powi(x as i32) - self.p.powi(-(x as i32))
        } else {
            self.q.powf(x) - self.p.powf(-x)
        };
        PqScalar(num / (self.q - self.p.recip()))
    }

    /// Integer-argument bracket (the overwhelmingly common case).
    #[inline]
    pub fn bracket_int(&self, n: i64) -> PqScalar {
        self.bracket(n as f64)
    }

    /// Deformed factorial `[n]! = [1][2]…[n]` with `[0]! = 1`.
    pub fn bracket_factorial(&self, n: u32) -> PqScalar {
        let mut acc = PqScalar::ONE;
        for k in 1..=n as i64 {
            acc *= self.bracket_int(k);
        }
        acc
    }

    /// `(q/p)^a` for real (integer or half-integer) exponent.
    pub fn ratio_pow(&self, a: f64) -> PqScalar {
        let r = self.q / self.p;
        if a.fract() == 0.0 && a.abs() <= i32::MAX as f64 {
            PqScalar(r.powi(a as i32))
        } else {
            PqScalar(r.powf(a))
        }
    }

    /// `p^a` for real exponent (appears in the closed-form basis transforms).
    pub fn p_pow(&self, a: f64) -> PqScalar {
        if a.fract() == 0.0 && a.abs() <= i32::MAX as f64 {
            PqScalar(self.p.powi(a as i32))
        } else {
            PqScalar(self.p.powf(a))
        }
    }

    /// `q^a` for real exponent.
    pub fn q_pow(&self, a: f64) -> PqScalar {
        if a.fract() == 0.0 && a.abs() <= i32::MAX as f64 {
            PqScalar(self.q.powi(a as i32))
        } else {
            PqScalar(self.q.powf(a))
        }
    }
}

impl Default for DeformParams {
    /// The default generic sample point `(1.3, 1.7)` with tolerance `1e−9`.
    fn default() -> Self {
        DeformParams {
            p: DEFAULT_P,
            q: DEFAULT_Q,
            tol: DEFAULT_TOL,
        }
    }
}
