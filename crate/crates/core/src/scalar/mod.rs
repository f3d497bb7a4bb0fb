//! Number backends shared by the geometry code.
//!
//! Geometry is written once against [`Scalar`] and runs either on exact
//! rationals ([`Exact`]) or on multiprecision balls ([`Ball`]). Anything that
//! needs a transcendental function goes through [`Scalar::to_ball`].

mod ball;
mod enclosure;
pub mod rational;

use std::cmp::Ordering;
use std::fmt::{self, Debug};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub use ball::{bigfloat_to_rational, Ball, Mag};
pub use enclosure::{nth_root, rational_pow, Enclosure};
pub use rational::{format_rational, parse_rational, ParseRationalError};

/// Exact rational backend.
pub type Exact = BigRational;

/// Default multiprecision working precision in bits.
pub const DEFAULT_BITS: usize = 256;

/// Numeric field used by the geometry routines.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(q: &BigRational, bits: usize) -> Self;

    fn from_i64(v: i64, bits: usize) -> Self {
        Self::from_rational(&BigRational::from_integer(v.into()), bits)
    }

    /// Working precision; exact values report [`DEFAULT_BITS`].
    fn bits(&self) -> usize;

    /// Same backend and precision as `self`.
    fn lift(&self, q: &BigRational) -> Self {
        Self::from_rational(q, self.bits())
    }

    fn lift_i64(&self, v: i64) -> Self {
        Self::from_i64(v, self.bits())
    }

    /// Sign when it is decided; `None` for balls that straddle zero.
    fn sign(&self) -> Option<Ordering>;

    fn is_exact(&self) -> bool;

    fn abs(&self) -> Self;

    /// Rational interval certainly containing the value.
    fn enclosure(&self) -> Enclosure;

    /// Representative rational (the value itself, or the ball midpoint).
    fn midpoint(&self) -> BigRational;

    fn to_ball(&self, bits: usize) -> Ball;

    fn to_f64(&self) -> f64;

    /// Encloses `self^alpha` for a non-negative value.
    fn pow_enclosure(&self, alpha: &BigRational, bits: usize) -> Enclosure;

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn is_positive_certain(&self) -> bool {
        self.sign() == Some(Ordering::Greater)
    }
}

impl Scalar for BigRational {
    fn from_rational(q: &BigRational, _bits: usize) -> Self {
        q.clone()
    }

    fn bits(&self) -> usize {
        DEFAULT_BITS
    }

    fn sign(&self) -> Option<Ordering> {
        Some(self.cmp(&BigRational::zero()))
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn enclosure(&self) -> Enclosure {
        Enclosure::point(self.clone())
    }

    fn midpoint(&self) -> BigRational {
        self.clone()
    }

    fn to_ball(&self, bits: usize) -> Ball {
        Ball::from_rational(self, bits)
    }

    fn to_f64(&self) -> f64 {
        rational::rational_to_f64(self)
    }

    fn pow_enclosure(&self, alpha: &BigRational, bits: usize) -> Enclosure {
        rational_pow(self, alpha, bits as u32)
    }
}

impl Scalar for Ball {
    fn from_rational(q: &BigRational, bits: usize) -> Self {
        Ball::from_rational(q, bits)
    }

    fn bits(&self) -> usize {
        self.precision()
    }

    fn sign(&self) -> Option<Ordering> {
        Ball::sign(self)
    }

    fn is_exact(&self) -> bool {
        self.rad().is_zero()
    }

    fn abs(&self) -> Self {
        Ball::abs(self)
    }

    fn enclosure(&self) -> Enclosure {
        Enclosure::new(self.lower(), self.upper())
    }

    fn midpoint(&self) -> BigRational {
        self.mid_rational()
    }

    fn to_ball(&self, _bits: usize) -> Ball {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        Ball::to_f64(self)
    }

    fn pow_enclosure(&self, alpha: &BigRational, bits: usize) -> Enclosure {
        if alpha.is_zero() {
            return Enclosure::point(BigRational::from_integer(1.into()));
        }
        if self.sign() == Some(Ordering::Equal) {
            return Enclosure::zero();
        }
        let lo = self.lower();
        if lo.is_positive() {
            return self.powr(alpha).enclosure();
        }
        let hi = self.upper();
        assert!(!hi.is_negative(), "power of negative ball");
        Enclosure::new(BigRational::zero(), rational_pow(&hi, alpha, bits as u32).hi().clone())
    }
}

/// Arithmetic backend selected at run time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Exact,
    HiPrec { bits: usize },
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Exact
    }
}

impl Backend {
    /// Precision used for transcendental steps.
    pub fn bits(&self) -> usize {
        match self {
            Backend::Exact => DEFAULT_BITS,
            Backend::HiPrec { bits } => *bits,
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Exact => f.write_str("exact"),
            Backend::HiPrec { bits } => write!(f, "hiprec:{bits}"),
        }
    }
}

/// Minimum accepted multiprecision width.
pub const MIN_BITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendParseError {
    #[error("unknown backend {0:?}; expected `exact` or `hiprec:<bits>`")]
    Unknown(String),
    #[error("precision must be at least {MIN_BITS} bits, got {0}")]
    TooNarrow(usize),
}

impl FromStr for Backend {
    type Err = BackendParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "exact" {
            return Ok(Backend::Exact);
        }
        if s == "hiprec" {
            return Ok(Backend::HiPrec { bits: DEFAULT_BITS });
        }
        let bits = s
            .strip_prefix("hiprec:")
            .and_then(|b| b.parse::<usize>().ok())
            .ok_or_else(|| BackendParseError::Unknown(s.to_string()))?;
        if bits < MIN_BITS {
            return Err(BackendParseError::TooNarrow(bits));
        }
        Ok(Backend::HiPrec { bits })
    }
}
