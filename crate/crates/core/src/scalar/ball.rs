//! Midpoint-radius arithmetic on top of `astro-float`.
//!
//! A [`Ball`] stores a multiprecision midpoint and an error radius. The
//! radius is a [`Mag`], an upper bound kept in machine precision with a wide
//! exponent; every operation on magnitudes rounds toward `+inf` through
//! `next_up`. Midpoint operations round to nearest, so each inexact result
//! adds `2^(1-p) |mid|` to the radius. Elementary functions are correctly
//! rounded in `astro-float`; their radius uses a Lipschitz bound plus a
//! rounding term with a 16x margin.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::rational::{approx_log2, mul_pow2, scale_f64};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Non-negative upper bound `man * 2^exp` with `man` in `[1/2, 1)` or zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mag {
    man: f64,
    exp: i64,
}

fn frexp(x: f64) -> (f64, i64) {
    debug_assert!(x.is_finite() && x > 0.0);
    if x < f64::MIN_POSITIVE {
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let bits = x.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i64 - 1022;
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, e)
}

impl Mag {
    pub const ZERO: Mag = Mag { man: 0.0, exp: 0 };

    fn norm(man: f64, exp: i64) -> Mag {
        if man == 0.0 {
            return Mag::ZERO;
        }
        let (m, e) = frexp(man);
        Mag { man: m, exp: exp + e }
    }

    pub fn is_zero(self) -> bool {
        self.man == 0.0
    }

    /// Upper bound for `|x|`.
    pub fn from_f64(x: f64) -> Mag {
        assert!(x.is_finite());
        Mag::norm(x.abs(), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Mag {
        Mag { man: 0.5, exp: e + 1 }
    }

    pub fn mul_2exp(self, e: i64) -> Mag {
        if self.is_zero() {
            self
        } else {
            Mag { man: self.man, exp: self.exp + e }
        }
    }

    pub fn add(self, o: Mag) -> Mag {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (big, small) = if self.exp >= o.exp { (self, o) } else { (o, self) };
        let d = big.exp - small.exp;
        if d > 60 {
            return Mag::norm(big.man.next_up(), big.exp);
        }
        let s = small.man * 2f64.powi(-(d as i32));
        Mag::norm((big.man + s).next_up(), big.exp)
    }

    pub fn mul(self, o: Mag) -> Mag {
        if self.is_zero() || o.is_zero() {
            return Mag::ZERO;
        }
        Mag::norm((self.man * o.man).next_up(), self.exp + o.exp)
    }

    /// Lower bound for the product of two lower bounds.
    pub fn mul_down(self, o: Mag) -> Mag {
        if self.is_zero() || o.is_zero() {
            return Mag::ZERO;
        }
        Mag::norm((self.man * o.man).next_down(), self.exp + o.exp)
    }

    /// Upper bound for `self / lower` where `lower` is a lower bound of a
    /// positive quantity.
    pub fn div_by_lower(self, lower: Mag) -> Mag {
        assert!(!lower.is_zero(), "division by zero magnitude");
        if self.is_zero() {
            return self;
        }
        Mag::norm((self.man / lower.man).next_up(), self.exp - lower.exp)
    }

    fn sqrt_with(self, up: bool) -> Mag {
        if self.is_zero() {
            return self;
        }
        let (m, e) = if self.exp % 2 != 0 { (self.man * 2.0, self.exp - 1) } else { (self.man, self.exp) };
        let r = m.sqrt();
        let r = if up { r.next_up() } else { r.next_down() };
        Mag::norm(r, e / 2)
    }

    /// Upper bound of the square root of the bounded quantity.
    pub fn sqrt_up(self) -> Mag {
        self.sqrt_with(true)
    }

    /// Lower bound of the square root when `self` is a lower bound.
    pub fn sqrt_down(self) -> Mag {
        self.sqrt_with(false)
    }

    pub fn max(self, o: Mag) -> Mag {
        if self.le(o) {
            o
        } else {
            self
        }
    }

    pub fn le(self, o: Mag) -> bool {
        if self.is_zero() {
            return true;
        }
        if o.is_zero() {
            return false;
        }
        (self.exp, self.man) <= (o.exp, o.man)
    }

    pub fn to_rational(self) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        let m = BigRational::from_float(self.man).expect("finite mantissa");
        mul_pow2(&m, self.exp)
    }

    pub fn to_f64(self) -> f64 {
        scale_f64(self.man, self.exp)
    }

    fn from_biguint(n: &BigUint, shift: i64, up: bool) -> Mag {
        let len = n.bits() as i64;
        if len == 0 {
            return Mag::ZERO;
        }
        if len <= 53 {
            let v = u64::try_from(n).unwrap() as f64;
            return Mag::norm(v, shift);
        }
        let drop = len - 53;
        let mut t = u64::try_from(&(n >> drop as usize)).unwrap();
        if up && n.trailing_zeros().unwrap_or(0) < drop as u64 {
            t += 1;
        }
        Mag::norm(t as f64, shift + drop)
    }

    fn from_rational(q: &BigRational, up: bool) -> Mag {
        if q.is_zero() {
            return Mag::ZERO;
        }
        let shift = 64 - approx_log2(q);
        let num = q.numer().magnitude();
        let den = q.denom().magnitude();
        let (quot, rem) = if shift >= 0 {
            num_integer::Integer::div_rem(&(num << shift as usize), den)
        } else {
            num_integer::Integer::div_rem(num, &(den << (-shift) as usize))
        };
        if up && !rem.is_zero() {
            Mag::from_biguint(&(quot + 1u32), -shift, true)
        } else {
            Mag::from_biguint(&quot, -shift, up)
        }
    }

    /// Upper bound of `|q|`.
    pub fn from_rational_up(q: &BigRational) -> Mag {
        Mag::from_rational(q, true)
    }

    /// Lower bound of `|q|`.
    pub fn from_rational_down(q: &BigRational) -> Mag {
        Mag::from_rational(q, false)
    }

    fn from_bigfloat(x: &BigFloat, up: bool) -> Mag {
        if x.is_zero() {
            return Mag::ZERO;
        }
        let (words, _, _, e, _) = x.as_raw_parts().expect("finite multiprecision value");
        let top = *words.last().expect("non-empty mantissa");
        let t = if up { (top >> 11) + 1 } else { top >> 11 };
        Mag::norm(t as f64 * 2f64.powi(-53), e as i64)
    }
}

impl fmt::Display for Mag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

/// Exact value of a finite multiprecision float.
pub fn bigfloat_to_rational(x: &BigFloat) -> BigRational {
    if x.is_zero() {
        return BigRational::zero();
    }
    let (words, _, sign, e, _) = x.as_raw_parts().expect("finite multiprecision value");
    let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
    let mag = BigUint::from_bytes_le(&bytes);
    let mut q = mul_pow2(&BigRational::from_integer(BigInt::from(mag)), e as i64 - 64 * words.len() as i64);
    if sign == Sign::Neg {
        q = -q;
    }
    q
}

fn bigint_to_bigfloat(n: &BigInt) -> BigFloat {
    if n.is_zero() {
        return BigFloat::from_word(0, 64);
    }
    let words = n.magnitude().to_u64_digits();
    let sign = if n.is_negative() { Sign::Neg } else { Sign::Pos };
    let mut x = BigFloat::from_words(&words, sign, 64 * words.len() as i32);
    x.set_inexact(false);
    x
}

/// Multiprecision ball `[mid - rad, mid + rad]`.
#[derive(Clone)]
pub struct Ball {
    mid: BigFloat,
    rad: Mag,
    prec: usize,
}

impl fmt::Debug for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ball({:e} +/- {}, {} bits)", self.mid_f64(), self.rad, self.prec)
    }
}

fn round_err(m: &BigFloat, p: usize) -> Mag {
    Mag::from_bigfloat(m, true).mul_2exp(1 - p as i64)
}

fn func_err(m: &BigFloat, p: usize) -> Mag {
    Mag::from_bigfloat(m, true).mul_2exp(4 - p as i64)
}

fn settle(mut m: BigFloat, p: usize, exact_op: bool) -> (BigFloat, Mag) {
    assert!(!m.is_nan() && !m.is_inf(), "multiprecision overflow or invalid operation");
    let err = if exact_op && !m.inexact() { Mag::ZERO } else { round_err(&m, p) };
    m.set_inexact(false);
    (m, err)
}

impl Ball {
    /// Working precision is rounded up to whole 64-bit words.
    pub fn normalize_precision(bits: usize) -> usize {
        bits.max(64).div_ceil(64) * 64
    }

    fn from_parts(mid: BigFloat, rad: Mag, prec: usize) -> Ball {
        Ball { mid, rad, prec }
    }

    pub fn from_rational(q: &BigRational, bits: usize) -> Ball {
        let p = Ball::normalize_precision(bits);
        let n = bigint_to_bigfloat(q.numer());
        let d = bigint_to_bigfloat(q.denom());
        let (m, err) = settle(n.div(&d, p, RM), p, true);
        Ball::from_parts(m, err, p)
    }

    pub fn from_i64(v: i64, bits: usize) -> Ball {
        Ball::from_rational(&BigRational::from_integer(v.into()), bits)
    }

    pub fn from_f64(x: f64, bits: usize) -> Ball {
        Ball::from_rational(&BigRational::from_float(x).expect("finite input"), bits)
    }

    pub fn zero(bits: usize) -> Ball {
        Ball::from_i64(0, bits)
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn mid(&self) -> &BigFloat {
        &self.mid
    }

    pub fn rad(&self) -> Mag {
        self.rad
    }

    pub fn mid_rational(&self) -> BigRational {
        bigfloat_to_rational(&self.mid)
    }

    pub fn mid_f64(&self) -> f64 {
        if self.mid.is_zero() {
            return 0.0;
        }
        let (words, _, sign, e, _) = self.mid.as_raw_parts().expect("finite");
        let top = *words.last().unwrap() as f64 * 2f64.powi(-64);
        let v = scale_f64(top, e as i64);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    pub fn lower(&self) -> BigRational {
        self.mid_rational() - self.rad.to_rational()
    }

    pub fn upper(&self) -> BigRational {
        self.mid_rational() + self.rad.to_rational()
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        (q - self.mid_rational()).abs() <= self.rad.to_rational()
    }

    /// Adds `extra` to the radius.
    pub fn inflate(&self, extra: Mag) -> Ball {
        Ball::from_parts(self.mid.clone(), self.rad.add(extra), self.prec)
    }

    /// Whether `|mid| > rad`, decided exactly.
    fn excludes_zero(&self) -> bool {
        if self.mid.is_zero() {
            return false;
        }
        let lower = Mag::from_bigfloat(&self.mid, false);
        if self.rad.is_zero() || (self.rad.exp + 2 < lower.exp) {
            return true;
        }
        self.mid_rational().abs() > self.rad.to_rational()
    }

    pub fn sign(&self) -> Option<Ordering> {
        if self.rad.is_zero() {
            return Some(if self.mid.is_zero() {
                Ordering::Equal
            } else if self.mid.is_negative() {
                Ordering::Less
            } else {
                Ordering::Greater
            });
        }
        if !self.excludes_zero() {
            return None;
        }
        Some(if self.mid.is_negative() { Ordering::Less } else { Ordering::Greater })
    }

    pub fn abs(&self) -> Ball {
        Ball::from_parts(self.mid.abs(), self.rad, self.prec)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid_f64()
    }

    /// Lower bound of `|x|` over the ball.
    fn abs_lower(&self) -> Option<BigRational> {
        let l = self.mid_rational().abs() - self.rad.to_rational();
        (l.is_positive()).then_some(l)
    }

    fn lipschitz(&self, value: BigFloat, lip: Mag) -> Ball {
        assert!(!value.is_nan() && !value.is_inf(), "elementary function overflow");
        let p = self.prec;
        let err = func_err(&value, p);
        let mut mid = value;
        mid.set_inexact(false);
        Ball::from_parts(mid, lip.mul(self.rad).add(err), p)
    }

    /// Natural logarithm. Panics unless the ball is strictly positive.
    pub fn ln(&self) -> Ball {
        assert!(!self.mid.is_negative(), "ln of negative ball");
        let lo = self.abs_lower().expect("ln of ball containing zero");
        let lip = Mag::from_rational_up(&lo.recip());
        let v = with_consts(|cc| self.mid.ln(self.prec, RM, cc));
        self.lipschitz(v, lip)
    }

    /// Exponential.
    pub fn exp(&self) -> Ball {
        if !self.rad.le(Mag::pow2(-1)) {
            // Wide balls: exp(x) = exp(x/2)^2.
            let half = Ball::from_parts(self.mid.clone(), self.rad, self.prec) * Ball::from_rational(&BigRational::new(1.into(), 2.into()), self.prec);
            let h = half.exp();
            return h.clone() * h;
        }
        let v = with_consts(|cc| self.mid.exp(self.prec, RM, cc));
        // sup of exp over the ball <= exp(mid) e^rad <= |v| (1 + 2^(4-p)) (1 + 2 rad)
        let one = Mag::from_f64(1.0);
        let lip = Mag::from_bigfloat(&v, true)
            .mul(one.add(Mag::pow2(4 - self.prec as i64)))
            .mul(one.add(self.rad.mul_2exp(1)));
        self.lipschitz(v, lip)
    }

    /// Square root. Panics if the ball lies entirely below zero.
    pub fn sqrt(&self) -> Ball {
        match self.abs_lower() {
            Some(lo) if !self.mid.is_negative() => {
                let v = self.mid.sqrt(self.prec, RM);
                let lip = Mag::from_f64(0.5).div_by_lower(Mag::from_rational_down(&lo).sqrt_down());
                let alt = self.rad.sqrt_up();
                let mut b = self.lipschitz(v.clone(), lip);
                let c = self.lipschitz(v, Mag::ZERO).inflate(alt);
                if c.rad.le(b.rad) {
                    b = c;
                }
                b
            }
            _ => {
                let hi = self.upper();
                assert!(!hi.is_negative(), "sqrt of negative ball");
                let half = Mag::from_rational_up(&hi).sqrt_up().mul_2exp(-1);
                Ball::from_rational(&half.to_rational(), self.prec).inflate(half)
            }
        }
    }

    /// Inverse hyperbolic cosine on `[1, inf)`; parts of the ball below one
    /// are treated as outside the domain.
    pub fn acosh(&self) -> Ball {
        let p = self.prec;
        let one = BigRational::from_integer(1.into());
        let lo = self.lower();
        let mid_q = self.mid_rational();
        if mid_q < one {
            let hi = self.upper();
            assert!(hi >= one, "acosh of ball below one");
            let bound = Mag::from_rational_up(&((hi - one) * BigRational::from_integer(2.into()))).sqrt_up();
            return Ball::from_parts(BigFloat::from_word(0, 64), bound, p);
        }
        let v = with_consts(|cc| self.mid.acosh(p, RM, cc));
        // |acosh x - acosh m| <= sqrt(2 |x - m|) by subadditivity of acosh(1 + u).
        let mut lip_rad = self.rad.mul_2exp(1).sqrt_up();
        if lo > one {
            let prod = (&lo - &one) * (&lo + &one);
            let l = Mag::from_f64(1.0).div_by_lower(Mag::from_rational_down(&prod).sqrt_down());
            let r = l.mul(self.rad);
            if r.le(lip_rad) {
                lip_rad = r;
            }
        }
        let err = func_err(&v, p);
        let mut mid = v;
        mid.set_inexact(false);
        Ball::from_parts(mid, lip_rad.add(err), p)
    }

    pub fn sin(&self) -> Ball {
        let v = with_consts(|cc| self.mid.sin(self.prec, RM, cc));
        self.lipschitz(v, Mag::from_f64(1.0))
    }

    pub fn cos(&self) -> Ball {
        let v = with_consts(|cc| self.mid.cos(self.prec, RM, cc));
        self.lipschitz(v, Mag::from_f64(1.0))
    }

    pub fn atan(&self) -> Ball {
        let v = with_consts(|cc| self.mid.atan(self.prec, RM, cc));
        self.lipschitz(v, Mag::from_f64(1.0))
    }

    pub fn pi(bits: usize) -> Ball {
        let p = Ball::normalize_precision(bits);
        let v = with_consts(|cc| cc.pi(p, RM));
        let err = func_err(&v, p);
        let mut mid = v;
        mid.set_inexact(false);
        Ball::from_parts(mid, err, p)
    }

    /// Argument of `x + iy` in `(-pi, pi]`. Panics when the sign of `x`
    /// and `y` cannot both be settled enough to pick a branch.
    pub fn atan2(y: &Ball, x: &Ball) -> Ball {
        let p = y.prec.max(x.prec);
        match x.sign() {
            Some(Ordering::Greater) => (y.clone() / x.clone()).atan(),
            _ => {
                // Rotate by a quarter turn when |y| dominates to stay away
                // from the branch cut and from division by small numbers.
                match y.sign() {
                    Some(Ordering::Greater) => Ball::pi(p) * Ball::from_f64(0.5, p) - (x.clone() / y.clone()).atan(),
                    Some(Ordering::Less) => -(Ball::pi(p) * Ball::from_f64(0.5, p)) - (x.clone() / y.clone()).atan(),
                    _ => {
                        assert_eq!(x.sign(), Some(Ordering::Less), "atan2 at the origin");
                        // Arguments near the negative real axis are reported
                        // on the +pi side of the cut.
                        (y.clone() / x.clone()).atan() + Ball::pi(p)
                    }
                }
            }
        }
    }

    /// `x^alpha` for a strictly positive ball.
    pub fn powr(&self, alpha: &BigRational) -> Ball {
        (self.ln() * Ball::from_rational(alpha, self.prec)).exp()
    }
}

fn binary(a: &Ball, b: &Ball, f: impl FnOnce(&BigFloat, &BigFloat, usize) -> BigFloat) -> (BigFloat, Mag, usize) {
    let p = a.prec.max(b.prec);
    let (m, err) = settle(f(&a.mid, &b.mid, p), p, true);
    (m, err, p)
}

impl Add for Ball {
    type Output = Ball;
    fn add(self, o: Ball) -> Ball {
        let (m, err, p) = binary(&self, &o, |x, y, p| x.add(y, p, RM));
        Ball::from_parts(m, self.rad.add(o.rad).add(err), p)
    }
}

impl Sub for Ball {
    type Output = Ball;
    fn sub(self, o: Ball) -> Ball {
        let (m, err, p) = binary(&self, &o, |x, y, p| x.sub(y, p, RM));
        Ball::from_parts(m, self.rad.add(o.rad).add(err), p)
    }
}

impl Mul for Ball {
    type Output = Ball;
    fn mul(self, o: Ball) -> Ball {
        let (m, err, p) = binary(&self, &o, |x, y, p| x.mul(y, p, RM));
        let ma = Mag::from_bigfloat(&self.mid, true);
        let mb = Mag::from_bigfloat(&o.mid, true);
        let rad = ma.mul(o.rad).add(mb.mul(self.rad)).add(self.rad.mul(o.rad)).add(err);
        Ball::from_parts(m, rad, p)
    }
}

impl Div for Ball {
    type Output = Ball;
    /// Panics when the divisor ball contains zero.
    fn div(self, o: Ball) -> Ball {
        let lower = o.abs_lower().expect("division by a ball containing zero");
        let (m, err, p) = binary(&self, &o, |x, y, p| x.div(y, p, RM));
        // |x/y - X/Y| <= (|X| rb + |Y| ra) / (|Y| (|Y| - rb))
        let ma = Mag::from_bigfloat(&self.mid, true);
        let mb_up = Mag::from_bigfloat(&o.mid, true);
        let mb_down = Mag::from_bigfloat(&o.mid, false);
        let num = ma.mul(o.rad).add(mb_up.mul(self.rad));
        let den = mb_down.mul_down(Mag::from_rational_down(&lower));
        let rad = if num.is_zero() { Mag::ZERO } else { num.div_by_lower(den) };
        Ball::from_parts(m, rad.add(err), p)
    }
}

impl Neg for Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        Ball::from_parts(self.mid.neg(), self.rad, self.prec)
    }
}
