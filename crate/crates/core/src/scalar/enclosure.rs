//! Closed rational intervals used for certified comparisons.
//!
//! Fractional powers are enclosed with integer `n`-th roots, so every
//! endpoint is an exact rational and a comparison `hi <= bound` is decided
//! without any floating-point step.

use std::iter::Sum;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::rational::{approx_log2, mul_pow2, round_down_dyadic, round_up_dyadic};

/// Closed interval `[lo, hi]` with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    lo: BigRational,
    hi: BigRational,
}

impl Enclosure {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "enclosure endpoints out of order");
        Enclosure { lo, hi }
    }

    pub fn point(q: BigRational) -> Self {
        Enclosure { lo: q.clone(), hi: q }
    }

    pub fn zero() -> Self {
        Self::point(BigRational::zero())
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn midpoint_f64(&self) -> f64 {
        super::rational::rational_to_f64(&((&self.lo + &self.hi) / BigRational::from_integer(2.into())))
    }

    /// Product of two enclosures of non-negative quantities.
    pub fn mul_nonneg(&self, other: &Enclosure) -> Enclosure {
        debug_assert!(!self.lo.is_negative() && !other.lo.is_negative());
        Enclosure::new(&self.lo * &other.lo, &self.hi * &other.hi)
    }

    /// Multiplies by a non-negative exact factor.
    pub fn scale(&self, factor: &BigRational) -> Enclosure {
        assert!(!factor.is_negative());
        Enclosure::new(&self.lo * factor, &self.hi * factor)
    }

    /// Widens to dyadic endpoints with `bits` significant bits, keeping
    /// denominators small in long sums.
    pub fn rounded_outward(&self, bits: u32) -> Enclosure {
        Enclosure::new(round_down_dyadic(&self.lo, bits), round_up_dyadic(&self.hi, bits))
    }
}

impl Add for Enclosure {
    type Output = Enclosure;
    fn add(self, rhs: Enclosure) -> Enclosure {
        Enclosure { lo: self.lo + rhs.lo, hi: self.hi + rhs.hi }
    }
}

impl<'a> Add<&'a Enclosure> for &'a Enclosure {
    type Output = Enclosure;
    fn add(self, rhs: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo + &rhs.lo, hi: &self.hi + &rhs.hi }
    }
}

impl Sum for Enclosure {
    fn sum<I: Iterator<Item = Enclosure>>(iter: I) -> Enclosure {
        iter.fold(Enclosure::zero(), |a, b| a + b)
    }
}

/// Encloses `x^(1/n)` for `x >= 0` with roughly `bits` relative bits.
pub fn nth_root(x: &BigRational, n: u32, bits: u32) -> Enclosure {
    assert!(!x.is_negative(), "root of negative rational");
    assert!(n >= 1);
    if x.is_zero() || n == 1 {
        return Enclosure::point(x.clone());
    }
    // x^(1/n) = (x * 2^(n s))^(1/n) / 2^s with s chosen so the scaled
    // radicand has about n * bits bits.
    let s = Integer::div_ceil(&(bits as i64 * n as i64 - approx_log2(x)), &(n as i64)) + 1;
    let scaled = mul_pow2(x, s * n as i64);
    let (num, den) = (scaled.numer(), scaled.denom());
    let (q, r) = num.div_rem(den);
    let floor = q.to_biguint().expect("non-negative");
    let root_lo = floor.nth_root(n);
    let exact_integer = r.is_zero() && num_traits::pow(root_lo.clone(), n as usize) == floor;
    let lo = mul_pow2(&BigRational::from_integer(BigInt::from(root_lo.clone())), -s);
    if exact_integer {
        return Enclosure::point(lo);
    }
    let ceil = if r.is_zero() { floor } else { floor + 1u32 };
    let mut root_hi = ceil.nth_root(n);
    if num_traits::pow(root_hi.clone(), n as usize) < ceil {
        root_hi += 1u32;
    }
    let hi = mul_pow2(&BigRational::from_integer(BigInt::from(root_hi)), -s);
    Enclosure::new(lo, hi)
}

/// Encloses `x^alpha` for `x >= 0` and rational `alpha`.
///
/// Panics on `0^alpha` with negative `alpha`.
pub fn rational_pow(x: &BigRational, alpha: &BigRational, bits: u32) -> Enclosure {
    assert!(!x.is_negative(), "power of negative rational");
    if alpha.is_zero() {
        return Enclosure::point(BigRational::one());
    }
    if x.is_zero() {
        assert!(alpha.is_positive(), "zero to a negative power");
        return Enclosure::zero();
    }
    if alpha.is_negative() {
        let inv = rational_pow(x, &-alpha, bits + 2);
        return Enclosure::new(inv.hi.recip(), inv.lo.recip()).rounded_outward(bits + 2);
    }
    let p = alpha.numer().magnitude().clone();
    let q: u32 = u32::try_from(alpha.denom().magnitude()).expect("root index fits in u32");
    let small_power = p.bits() <= 3;
    if small_power {
        let e = u32::try_from(&p).unwrap() as i32;
        let y = x.pow(e);
        return nth_root(&y, q, bits);
    }
    // Large numerators: take the root first, then the power, with guard bits
    // for the p-fold error growth.
    let guard = p.bits() as u32 + 4;
    let root = nth_root(x, q, bits + guard);
    let e = i32::try_from(&p).expect("exponent numerator fits in i32");
    let lo = round_down_dyadic(&root.lo.pow(e), bits + 2);
    let hi = round_up_dyadic(&root.hi.pow(e), bits + 2);
    Enclosure::new(lo, hi)
}
