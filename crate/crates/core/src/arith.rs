//! Rational detection of `k / pi` and the small-denominator margins
//! `|1 - e^{2 i m k}|`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::gcd;

/// Default distance below which `k` is taken to be `pi p / q`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Range `1 <= m <= FIT_RANGE` used for the diophantine fit.
pub const FIT_RANGE: u32 = 1000;

/// Exponential rates tried when fitting `c`.
pub const XI_GRID: [f64; 6] = [0.0, 0.001, 0.005, 0.01, 0.05, 0.1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KClassification {
    Rational { p: u32, q: u32 },
    /// Largest `c` with `|1 - e^{2imk}| >= c e^{-xi |m|}` for `|m| <= FIT_RANGE`,
    /// for each `xi` of [`XI_GRID`], as `(xi, c)` pairs.
    Generic { dio_constants: Vec<(f64, f64)> },
}

impl KClassification {
    pub fn rational(&self) -> Option<(u32, u32)> {
        match *self {
            KClassification::Rational { p, q } => Some((p, q)),
            KClassification::Generic { .. } => None,
        }
    }
}

/// Continued-fraction convergents `p_n / q_n` of `x >= 0`, stopping once
/// `q_n > q_max` or the expansion terminates.
pub fn convergents(x: f64, q_max: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if !(a >= 0.0) || a > 1e15 {
            break;
        }
        let a = a as u64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > q_max {
            break;
        }
        out.push((p2, q2));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a as f64;
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

/// `|1 - e^{2 i m k}| = 2 |sin(m k)|` for `m = 1..=m_max`.
pub fn dio_margin(k: f64, m_max: u32) -> Vec<(u32, f64)> {
    (1..=m_max).map(|m| (m, 2.0 * (m as f64 * k).sin().abs())).collect()
}

/// Margins at `k = pi p / q`, exactly zero whenever `q | m`.
pub fn dio_margin_rational(p: u32, q: u32, m_max: u32) -> Vec<(u32, f64)> {
    (1..=m_max)
        .map(|m| {
            let r = (m as u64 * p as u64) % q as u64;
            let value = if r == 0 {
                0.0
            } else {
                2.0 * (PI * r as f64 / q as f64).sin().abs()
            };
            (m, value)
        })
        .collect()
}

pub fn classify_k(k: f64, q_max: u32, tol: f64) -> Result<KClassification> {
    if !(k > 0.0 && k < PI) {
        return Err(Error::Domain(format!("k = {k} must lie in (0, pi)")));
    }
    if q_max < 2 || !(tol >= 0.0) {
        return Err(Error::Config("classify_k needs q_max >= 2 and tol >= 0".into()));
    }
    let x = k / PI;
    for (p, q) in convergents(x, q_max as u64) {
        if p > 0 && p < q && (x - p as f64 / q as f64).abs() <= tol / PI {
            let g = gcd(p, q);
            return Ok(KClassification::Rational {
                p: (p / g) as u32,
                q: (q / g) as u32,
            });
        }
    }
    let margins = dio_margin(k, FIT_RANGE);
    let dio_constants = XI_GRID
        .iter()
        .map(|&xi| {
            let c = margins
                .iter()
                .map(|&(m, d)| d * (xi * m as f64).exp())
                .fold(f64::INFINITY, f64::min);
            (xi, c)
        })
        .collect();
    Ok(KClassification::Generic { dio_constants })
}

/// Parses `"p/q"` with `0 < p < q`, reduced to lowest terms.
pub fn parse_k_rational(text: &str) -> Result<(u32, u32)> {
    let (p, q) = text
        .trim()
        .split_once('/')
        .ok_or_else(|| Error::Parse(format!("{text:?} is not of the form p/q")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| Error::Parse(format!("{s:?} in {text:?} is not a positive integer")))
    };
    let (p, q) = (parse(p)?, parse(q)?);
    if p == 0 || q == 0 || p >= q {
        return Err(Error::Domain(format!("k = pi {p}/{q} needs 0 < p < q")));
    }
    let g = gcd(p as u64, q as u64) as u32;
    Ok((p / g, q / g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        assert_eq!(classify_k(PI / 2.0, 10, DEFAULT_TOL).unwrap().rational(), Some((1, 2)));
        assert_eq!(classify_k(PI * 2.0 / 3.0, 10, DEFAULT_TOL).unwrap().rational(), Some((2, 3)));
        let golden = PI * (5f64.sqrt() - 1.0) / 2.0;
        match classify_k(golden, 1_000_000, 1e-12).unwrap() {
            KClassification::Generic { dio_constants } => {
                assert_eq!(dio_constants[0].0, 0.0);
                assert!(dio_constants[0].1 > 0.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(classify_k(0.0, 10, 1e-9).is_err());
    }

    #[test]
    fn exact_rationals_are_recovered() {
        for q in 2..=40u32 {
            for p in 1..q {
                if gcd(p as u64, q as u64) != 1 {
                    continue;
                }
                let k = PI * p as f64 / q as f64;
                assert_eq!(classify_k(k, q, 1e-12).unwrap().rational(), Some((p, q)));
                assert_eq!(classify_k(k, 1000, 1e-12).unwrap().rational(), Some((p, q)));
            }
        }
    }

    #[test]
    fn golden_mean_quotients_are_ones() {
        let x = (5f64.sqrt() - 1.0) / 2.0;
        let cs = convergents(x, 100_000);
        // Fibonacci ratios.
        for w in cs.windows(3).skip(1) {
            assert_eq!(w[2].1, w[1].1 + w[0].1);
        }
        assert!(cs.len() > 20);
        assert_eq!(convergents(0.375, 1000).last(), Some(&(3, 8)));
    }

    #[test]
    fn margin_examples() {
        let m = dio_margin(PI / 2.0, 3);
        assert!((m[0].1 - 2.0).abs() < 1e-15);
        assert!(m[1].1 < 1e-15);
        let r = dio_margin_rational(1, 3, 9);
        for (m, v) in r {
            assert_eq!(v == 0.0, m % 3 == 0);
        }
    }

    #[test]
    fn parse_rational_literals() {
        assert_eq!(parse_k_rational("1/2").unwrap(), (1, 2));
        assert_eq!(parse_k_rational(" 2/4 ").unwrap(), (1, 2));
        assert!(parse_k_rational("3/2").is_err());
        assert!(parse_k_rational("0/5").is_err());
        assert!(parse_k_rational("1:2").is_err());
        assert!(parse_k_rational("-1/2").is_err());
    }
}
