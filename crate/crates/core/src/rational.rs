//! Thin helpers around `num`'s arbitrary-precision integers and rationals.

use num::{BigInt, BigRational, Integer, One, Signed, Zero};

pub type Int = BigInt;
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn ri(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

pub fn from_int(n: &Int) -> Rat {
    Rat::from_integer(n.clone())
}

pub fn floor(r: &Rat) -> Int {
    r.floor().to_integer()
}

pub fn ceil(r: &Rat) -> Int {
    r.ceil().to_integer()
}

/// Nearest integer, ties rounded up.
pub fn round_half_up(r: &Rat) -> Int {
    floor(&(r + rat(1, 2)))
}

/// `floor(sqrt(r))` for `r >= 0`.
pub fn sqrt_floor(r: &Rat) -> Int {
    debug_assert!(!r.is_negative());
    floor(r).sqrt()
}

pub fn to_i64(n: &Int) -> i64 {
    i64::try_from(n).expect("integer does not fit in i64")
}

pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

/// Exact `p/q` rendering; integers render without a denominator.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q` or a terminating decimal such as `-1.25`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: Int = n.trim().parse().ok()?;
        let d: Int = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let neg = ip.starts_with('-');
        let whole: Int = if ip.is_empty() || ip == "-" || ip == "+" {
            Int::zero()
        } else {
            ip.parse().ok()?
        };
        let frac: Int = fp.parse().ok()?;
        let scale = num::pow(Int::from(10), fp.len());
        let mut r = from_int(&whole.abs()) + Rat::new(frac, scale);
        if neg {
            r = -r;
        }
        return Some(r);
    }
    s.parse::<Int>().ok().map(Rat::from_integer)
}

pub fn binomial(n: u64, k: u64) -> Int {
    if k > n {
        return Int::zero();
    }
    let k = k.min(n - k);
    let mut acc = Int::one();
    for i in 0..k {
        acc = acc * Int::from(n - i) / Int::from(i + 1);
    }
    acc
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Fractional part in `[0, 1)`.
pub fn frac(r: &Rat) -> Rat {
    r - from_int(&floor(r))
}
