//! Model parameters and phase boundaries.
//!
//! The external field is `V(z) = c log(z^2 + a^2)`. The mother body is a single
//! interval for `0 < t < t*`, where `t*` is the positive root of a quintic in
//! `t`; the droplet stays simply connected up to `t_c = a^2 + 2a sqrt(c) - c`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Relative slack used when testing `a^2 >= 2c`, so that `a = sqrt(2c)` given
/// in floating point is accepted.
const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub c: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseConstants {
    pub t_star: f64,
    pub t_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NonPositiveA,
    NonPositiveC,
    ASquaredBelowTwoC,
    NonPositiveT,
    BeyondTStar { t_star: f64 },
    NotFinite,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NonPositiveA => write!(f, "a <= 0"),
            Violation::NonPositiveC => write!(f, "c <= 0"),
            Violation::ASquaredBelowTwoC => write!(f, "a^2 < 2c"),
            Violation::NonPositiveT => write!(f, "t <= 0"),
            Violation::BeyondTStar { t_star } => write!(f, "t >= t* = {t_star}"),
            Violation::NotFinite => write!(f, "non-finite parameter"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
    pub phase: Option<PhaseConstants>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<PhaseConstants> {
        match (self.violations.is_empty(), self.phase) {
            (true, Some(p)) => Ok(p),
            _ => {
                let msg: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
                let beyond = self
                    .violations
                    .iter()
                    .all(|v| matches!(v, Violation::BeyondTStar { .. }));
                if beyond && !self.violations.is_empty() {
                    Err(Error::PhaseViolation(msg.join("; ")))
                } else {
                    Err(Error::InvalidParams(msg.join("; ")))
                }
            }
        }
    }
}

impl ModelParams {
    pub fn new(a: f64, c: f64, t: f64) -> Self {
        ModelParams { a, c, t }
    }

    /// Checks `a, c > 0`, `a^2 >= 2c`, `0 < t < t*`.
    pub fn validate(&self) -> ValidityReport {
        let mut violations = shape_violations(self.a, self.c);
        if !self.t.is_finite() {
            violations.push(Violation::NotFinite);
        } else if self.t <= 0.0 {
            violations.push(Violation::NonPositiveT);
        }
        let phase = if shape_violations(self.a, self.c).is_empty() {
            phase_constants(self.a, self.c).ok()
        } else {
            None
        };
        if let Some(p) = phase {
            if self.t.is_finite() && self.t >= p.t_star {
                violations.push(Violation::BeyondTStar { t_star: p.t_star });
            }
        }
        ValidityReport { violations, phase }
    }

    /// Rescaling `(a, c, t) -> (la, l^2 c, l^2 t)` leaves the model invariant up to `z -> lz`.
    pub fn scaled(&self, l: f64) -> Self {
        ModelParams::new(l * self.a, l * l * self.c, l * l * self.t)
    }
}

fn shape_violations(a: f64, c: f64) -> Vec<Violation> {
    let mut v = Vec::new();
    if !a.is_finite() || !c.is_finite() {
        v.push(Violation::NotFinite);
        return v;
    }
    if a <= 0.0 {
        v.push(Violation::NonPositiveA);
    }
    if c <= 0.0 {
        v.push(Violation::NonPositiveC);
    }
    if a > 0.0 && c > 0.0 && a * a < 2.0 * c * (1.0 - BOUNDARY_SLACK) {
        v.push(Violation::ASquaredBelowTwoC);
    }
    v
}

/// `t_c = a^2 + 2a sqrt(c) - c`.
pub fn t_c(a: f64, c: f64) -> f64 {
    a * a + 2.0 * a * c.sqrt() - c
}

/// Coefficients of the quintic defining `t*`, constant term first.
pub fn quintic_coeffs(a: f64, c: f64) -> [f64; 6] {
    let a4 = a.powi(4);
    let a8 = a4 * a4;
    let c2 = c * c;
    let c4 = c2 * c2;
    [
        -c * (a8 + 30.0 * a4 * c2 - 63.0 * c4),
        4.0 * a8 + 108.0 * a4 * c2 + 288.0 * c4,
        c * (114.0 * a4 + 522.0 * c2),
        24.0 * a4 + 468.0 * c2,
        207.0 * c,
        36.0,
    ]
}

fn quintic(q: &[f64; 6], t: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &k in q.iter().rev() {
        dp = dp * t + p;
        p = p * t + k;
    }
    (p, dp)
}

/// Upper bound `(a + sqrt(2c))^2` for `t*`.
pub fn t_star_bound(a: f64, c: f64) -> f64 {
    (a + (2.0 * c).sqrt()).powi(2)
}

/// Positive root of the quintic, located by a geometric scan of
/// `(0, (a+sqrt(2c))^2]`, bisection, and a final Newton polish.
pub fn t_star(a: f64, c: f64, tol: f64) -> Result<f64> {
    if !shape_violations(a, c).is_empty() {
        return Err(Error::InvalidParams(format!("a = {a}, c = {c}")));
    }
    let q = quintic_coeffs(a, c);
    let hi_bound = t_star_bound(a, c);
    let lo_bound = hi_bound * 1e-12;
    let steps = 400;
    let ratio = (hi_bound / lo_bound).powf(1.0 / steps as f64);
    let mut lo = lo_bound;
    let mut plo = quintic(&q, lo).0;
    let mut bracket = None;
    for k in 1..=steps {
        let hi = lo_bound * ratio.powi(k);
        let phi = quintic(&q, hi).0;
        if plo == 0.0 {
            return Ok(lo);
        }
        if plo.signum() != phi.signum() {
            bracket = Some((lo, hi));
            break;
        }
        lo = hi;
        plo = phi;
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::NoRootInBracket {
        lo: lo_bound,
        hi: hi_bound,
    })?;
    let slo = quintic(&q, lo).0.signum();
    while hi - lo > tol.max(1e-15) * hi {
        let mid = 0.5 * (lo + hi);
        if quintic(&q, mid).0.signum() == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..3 {
        let (p, dp) = quintic(&q, t);
        let next = t - p / dp;
        if next > lo - (hi - lo) && next < hi + (hi - lo) {
            t = next;
        }
    }
    Ok(t)
}

pub fn phase_constants(a: f64, c: f64) -> Result<PhaseConstants> {
    Ok(PhaseConstants {
        t_star: t_star(a, c, 1e-15)?,
        t_c: t_c(a, c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn critical_time_closed_form() {
        assert_eq!(t_c(2.0, 1.0), 7.0);
    }

    #[test]
    fn quintic_constant_term() {
        assert_eq!(quintic_coeffs(2.0, 1.0)[0], -673.0);
    }

    #[test]
    fn t_star_regression() {
        // Root of the quintic at (2, 1); the same value is obtained from the
        // merging of the critical points of the conformal map.
        let ts = t_star(2.0, 1.0, 1e-15).unwrap();
        assert!((ts - 0.191_137_347_024_299_1).abs() < 1e-14, "{ts}");
        assert!(ts < t_c(2.0, 1.0));
        assert!(ts < t_star_bound(2.0, 1.0));
    }

    #[test]
    fn validation_reports() {
        assert!(ModelParams::new(2.0, 1.0, 0.1).validate().is_valid());
        let r = ModelParams::new(1.0, 1.0, 0.1).validate();
        assert!(r.violations.contains(&Violation::ASquaredBelowTwoC));
        let r = ModelParams::new(2.0, 1.0, -0.1).validate();
        assert!(r.violations.contains(&Violation::NonPositiveT));
        let r = ModelParams::new(2.0, 1.0, 0.5).validate();
        assert!(matches!(r.violations[0], Violation::BeyondTStar { .. }));
        assert!(matches!(r.into_result(), Err(Error::PhaseViolation(_))));
        // a^2 = 2c exactly is admissible.
        let r = ModelParams::new(2f64.sqrt(), 1.0, 0.05).validate();
        assert!(r.is_valid(), "{:?}", r);
    }

    proptest! {
        #[test]
        fn t_star_below_t_c(a in 0.5f64..5.0, s in 0.05f64..1.0) {
            let c = s * a * a / 2.0;
            let ts = t_star(a, c, 1e-14).unwrap();
            prop_assert!(ts > 0.0 && ts < t_c(a, c));
        }

        #[test]
        fn t_star_scaling(a in 0.8f64..4.0, s in 0.05f64..1.0, l in prop::sample::select(vec![0.5, 2.0])) {
            let c = s * a * a / 2.0;
            let base = t_star(a, c, 1e-15).unwrap();
            let scaled = t_star(l * a, l * l * c, 1e-15).unwrap();
            prop_assert!((scaled - l * l * base).abs() < 1e-10 * scaled);
        }
    }
}
