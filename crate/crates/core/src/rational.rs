//! Exact rational scalar used for chunk endpoints and cost coefficients.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

pub type Q = Ratio<i128>;

pub fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i128) -> Q {
    Q::from_integer(n)
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Renders as `p/q`, or `p` when the denominator is one.
pub fn format_q(x: &Q) -> String {
    if *x.denom() == 1 {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().ok()?;
            let d: i128 = d.trim().parse().ok()?;
            if d == 0 {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => Some(qi(s.parse().ok()?)),
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued-fraction convergents and semiconvergents).
pub fn snap(x: f64, max_den: i128) -> Q {
    if !x.is_finite() {
        return Q::zero();
    }
    let target = x.abs();
    let mut v = target;
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let ai = a as i128;
        let q2 = ai * q1 + q0;
        if q2 > max_den {
            let k = (max_den - q0) / q1;
            let semi = Q::new(k * p1 + p0, k * q1 + q0);
            let conv = Q::new(p1, q1);
            let best = if (to_f64(&semi) - target).abs() < (to_f64(&conv) - target).abs() {
                semi
            } else {
                conv
            };
            return if x < 0.0 { -best } else { best };
        }
        let p2 = ai * p1 + p0;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    let r = Q::new(p1, q1);
    if x < 0.0 {
        -r
    } else {
        r
    }
}

/// Rounds to `digits` decimals, half away from zero, from the exact value.
pub fn round_decimal(x: &Q, digits: u32) -> String {
    let scale = 10i128.pow(digits);
    let scaled = *x * qi(scale);
    let twice = scaled * qi(2);
    let r = if scaled >= Q::zero() {
        ((twice + qi(1)) / qi(2)).floor()
    } else {
        -(((-twice) + qi(1)) / qi(2)).floor()
    };
    let n = r.to_integer();
    let sign = if n < 0 { "-" } else { "" };
    let n = n.abs();
    if digits == 0 {
        return format!("{sign}{n}");
    }
    format!("{sign}{}.{:0width$}", n / scale, n % scale, width = digits as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snap_recovers_small_fractions() {
        assert_eq!(snap(0.5, 1_000_000), q(1, 2));
        assert_eq!(snap(2.0 / 3.0, 1_000_000), q(2, 3));
        assert_eq!(snap(341.0 / 256.0, 1_000_000), q(341, 256));
        assert_eq!(snap(-0.25, 100), q(-1, 4));
        assert_eq!(snap(3.0, 10), qi(3));
    }

    #[test]
    fn snap_respects_denominator_cap() {
        let r = snap(std::f64::consts::PI, 100);
        assert!(*r.denom() <= 100);
        assert_eq!(r, q(311, 99));
    }

    #[test]
    fn parse_and_format_roundtrip() {
        for s in ["0", "1", "3/4", "-7/9"] {
            assert_eq!(format_q(&parse_q(s).unwrap()), s);
        }
        assert!(parse_q("1/0").is_none());
        assert!(parse_q("x").is_none());
    }

    #[test]
    fn decimal_rounding() {
        assert_eq!(round_decimal(&q(1023, 1024), 3), "0.999");
        assert_eq!(round_decimal(&q(341, 256), 3), "1.332");
        assert_eq!(round_decimal(&q(1, 2), 0), "1");
        assert_eq!(round_decimal(&q(1, 1000), 3), "0.001");
        assert_eq!(round_decimal(&q(-3, 2), 0), "-2");
    }
}
