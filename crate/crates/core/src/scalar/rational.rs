//! Helpers for exact rationals: parsing, formatting, dyadic rounding and
//! conversion to machine floats without overflow on huge exponents.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Failure to read a rational literal.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {literal:?}: {reason}")]
pub struct ParseRationalError {
    pub literal: String,
    pub reason: &'static str,
}

fn parse_err(s: &str, reason: &'static str) -> ParseRationalError {
    ParseRationalError { literal: s.to_string(), reason }
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"-0.125"` or `"3e-4"`.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseRationalError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(parse_err(s, "empty"));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| parse_err(s, "bad numerator"))?;
        let q: BigInt = q.trim().parse().map_err(|_| parse_err(s, "bad denominator"))?;
        if q.is_zero() {
            return Err(parse_err(s, "zero denominator"));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = t[pos + 1..].parse().map_err(|_| parse_err(s, "bad exponent"))?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(parse_err(s, "no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(parse_err(s, "unexpected character"));
    }
    if exp.unsigned_abs() > 100_000 {
        return Err(parse_err(s, "exponent out of range"));
    }
    let all: BigInt = format!("0{int_part}{frac_part}").parse().expect("digits only");
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let mut q = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Display adapter so rationals can be written with `{}` in canonical form.
pub struct RationalDisplay<'a>(pub &'a BigRational);

impl fmt::Display for RationalDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self.0))
    }
}

/// `2^e` for any integer exponent.
pub fn pow2(e: i64) -> BigRational {
    let p = BigInt::one() << e.unsigned_abs() as usize;
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// Multiplies by `2^e` exactly.
pub fn mul_pow2(q: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        BigRational::new(q.numer() << e as usize, q.denom().clone())
    } else {
        BigRational::new(q.numer().clone(), q.denom() << (-e) as usize)
    }
}

/// Approximate base-2 exponent: `floor(log2 |q|)` up to an error of one.
pub fn approx_log2(q: &BigRational) -> i64 {
    if q.is_zero() {
        return i64::MIN / 4;
    }
    q.numer().bits() as i64 - q.denom().bits() as i64
}

fn scaled_floor(q: &BigRational, shift: i64) -> BigInt {
    // floor(q * 2^shift)
    let (n, d) = (q.numer(), q.denom());
    if shift >= 0 {
        (n << shift as usize).div_floor(d)
    } else {
        n.div_floor(&(d << (-shift) as usize))
    }
}

/// Largest dyadic with at most `bits` significant bits that is `<= q`.
pub fn round_down_dyadic(q: &BigRational, bits: u32) -> BigRational {
    if q.is_zero() || q.denom().is_one() && q.numer().bits() <= bits as u64 {
        return q.clone();
    }
    let shift = bits as i64 - approx_log2(q);
    let m = scaled_floor(q, shift);
    mul_pow2(&BigRational::from_integer(m), -shift)
}

/// Smallest dyadic with at most `bits` significant bits that is `>= q`.
pub fn round_up_dyadic(q: &BigRational, bits: u32) -> BigRational {
    -round_down_dyadic(&-q, bits)
}

/// Nearest `f64`, saturating to infinity and flushing to zero outside range.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let shift = 64 - approx_log2(q);
    let m = scaled_floor(&q.abs(), shift);
    let mf = m.to_f64().unwrap_or(f64::INFINITY);
    let v = scale_f64(mf, -shift);
    if q.is_negative() {
        -v
    } else {
        v
    }
}

/// `x * 2^e` without intermediate overflow for moderate `x`.
pub fn scale_f64(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

/// Natural logarithm of a positive rational as `f64`, valid for exponents far
/// outside the `f64` range.
pub fn ln_f64(q: &BigRational) -> f64 {
    assert!(q.is_positive(), "ln of non-positive rational");
    let e = approx_log2(q);
    let scaled = mul_pow2(q, -e);
    rational_to_f64(&scaled).ln() + e as f64 * std::f64::consts::LN_2
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}
