//! Arbitrary-precision integer helpers shared by the exact routines.

use dashu_int::ops::{Abs, BitTest, DivRemEuclid, ExtendedGcd, Gcd, UnsignedAbs};
pub use dashu_int::IBig as Int;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn is_unit(a: &Int) -> bool {
    a.is_one() || (-a).is_one()
}

pub fn abs(a: &Int) -> Int {
    a.clone().abs()
}

pub fn gcd(a: &Int, b: &Int) -> Int {
    if a.is_zero() {
        return abs(b);
    }
    if b.is_zero() {
        return abs(a);
    }
    Int::from(a.gcd(b))
}

/// Returns `(g, s, t)` with `g = gcd(a, b) >= 0` and `s*a + t*b = g`.
pub fn ext_gcd(a: &Int, b: &Int) -> (Int, Int, Int) {
    if a.is_zero() && b.is_zero() {
        return (Int::ZERO, Int::ONE, Int::ZERO);
    }
    if b.is_zero() {
        let s = if a.sign() == dashu_int::Sign::Negative { int(-1) } else { int(1) };
        return (abs(a), s, Int::ZERO);
    }
    if a.is_zero() {
        let t = if b.sign() == dashu_int::Sign::Negative { int(-1) } else { int(1) };
        return (abs(b), Int::ZERO, t);
    }
    let (g, s, t) = a.gcd_ext(b);
    (Int::from(g), s, t)
}

/// Euclidean division: `a = q*b + r` with `0 <= r < |b|`.
pub fn div_rem_euclid(a: &Int, b: &Int) -> (Int, Int) {
    let (q, r) = a.div_rem_euclid(b);
    (q, Int::from(r))
}

pub fn rem_euclid(a: &Int, m: &Int) -> Int {
    div_rem_euclid(a, m).1
}

/// Quotient rounded to the nearest integer; keeps remainders in `(-|b|/2, |b|/2]`.
pub fn div_nearest(a: &Int, b: &Int) -> Int {
    let (mut q, r) = div_rem_euclid(a, b);
    let twice = &r + &r;
    if twice > abs(b) {
        if b.sign() == dashu_int::Sign::Negative {
            q -= 1;
        } else {
            q += 1;
        }
    }
    q
}

pub fn to_i64(a: &Int) -> Option<i64> {
    i64::try_from(a).ok()
}

pub fn bit_len(a: &Int) -> usize {
    a.unsigned_abs().bit_len()
}

pub fn lcm(a: &Int, b: &Int) -> Int {
    if a.is_zero() || b.is_zero() {
        return Int::ZERO;
    }
    abs(&(a / gcd(a, b) * b))
}
