//! Exact rational seconds.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

pub type Rational = Ratio<i128>;

pub fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

pub fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

/// Parses `12`, `-0.25`, `1e-3`, `3/4` without going through floating point.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: i128 = n.trim().parse().ok()?;
        let d: i128 = d.trim().parse().ok()?;
        let bound = 10i128.pow(36);
        if d == 0 || n.checked_abs()? > bound || d.checked_abs()? > bound {
            return None;
        }
        return Some(rat(n, d));
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    if whole.len() + frac.len() > 36 || exp.abs() > 30 {
        return None;
    }
    let combined: i128 = format!("{whole}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let value = if scale >= 0 {
        Rational::from_integer(combined.checked_mul(10i128.checked_pow(scale as u32)?)?)
    } else {
        rat(combined, 10i128.checked_pow((-scale) as u32)?)
    };
    Some(if neg { -value } else { value })
}

/// Decimal if the expansion terminates, `n/d` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut d = *r.denom();
    for p in [2, 5] {
        while d % p == 0 {
            d /= p;
        }
    }
    if d != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let sign = if r.is_negative() { "-" } else { "" };
    let a = r.abs();
    let whole = a.trunc().to_integer();
    let mut frac = a.fract();
    let mut digits = String::new();
    while !frac.is_zero() {
        frac *= Rational::from_integer(10);
        let digit = frac.trunc().to_integer();
        digits.push(char::from(b'0' + digit as u8));
        frac = frac.fract();
    }
    format!("{sign}{whole}.{digits}")
}

/// Largest numerator or denominator accepted for a period, keeping lcm and
/// deadline arithmetic far away from i128 overflow.
pub const MAX_PERIOD_PART: i128 = 1_000_000_000_000;

/// Period in seconds denoted by a duration (`10s`, `200ms`) or a frequency
/// (`1Hz`, inverted). `None` for unknown units and non-positive values.
pub fn period_of(value: &str, unit: &str) -> Option<Rational> {
    let v = parse_decimal(value)?;
    let bound = 10i128.pow(24);
    if !v.is_positive() || *v.numer() > bound || *v.denom() > bound {
        return None;
    }
    let p = match unit {
        "Hz" => v.recip(),
        "kHz" => (v * int(1000)).recip(),
        "ns" => v / int(1_000_000_000),
        "us" => v / int(1_000_000),
        "ms" => v / int(1000),
        "s" => v,
        "min" => v * int(60),
        "h" => v * int(3600),
        _ => return None,
    };
    (p.numer().abs() <= MAX_PERIOD_PART && *p.denom() <= MAX_PERIOD_PART).then_some(p)
}

/// True if `unit` denotes a frequency rather than a duration.
pub fn is_frequency_unit(unit: &str) -> bool {
    matches!(unit, "Hz" | "kHz")
}

/// True iff `a` is an integer multiple of `p` (p > 0).
pub fn is_multiple(a: &Rational, p: &Rational) -> bool {
    (a / p).is_integer()
}

/// Smallest multiple of `p` strictly greater than `t`.
pub fn next_multiple_after(t: &Rational, p: &Rational) -> Rational {
    ((t / p).floor() + Rational::from_integer(1)) * p
}

/// Least common multiple of two positive rationals: lcm of numerators over
/// gcd of denominators (both in lowest terms).
pub fn rational_lcm(a: &Rational, b: &Rational) -> Rational {
    rat(a.numer().lcm(b.numer()), a.denom().gcd(b.denom()))
}
