//! Dense polynomials with `f64` or complex coefficients, lowest degree first.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

/// Real polynomial, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn new(mut c: Vec<f64>) -> Self {
        while c.len() > 1 && c.last() == Some(&0.0) {
            c.pop();
        }
        if c.is_empty() {
            c.push(0.0);
        }
        Poly(c)
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_c(&self, z: C64) -> C64 {
        self.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn deriv(&self) -> Poly {
        if self.0.len() == 1 {
            return Poly(vec![0.0]);
        }
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new(
            (0..n)
                .map(|k| self.0.get(k).unwrap_or(&0.0) + o.0.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly(vec![1.0]), |acc, _| acc.mul(self))
    }

    /// Coefficients of `q(u)` where `self(z) = q(z^2)`; requires an even polynomial.
    pub fn even_part_in_square(&self) -> Poly {
        Poly::new(self.0.iter().step_by(2).copied().collect())
    }

    pub fn to_complex(&self) -> Vec<C64> {
        self.0.iter().map(|&c| C64::new(c, 0.0)).collect()
    }

    /// All complex roots by Aberth iteration.
    pub fn roots(&self, tol: f64) -> Result<Vec<C64>> {
        roots(&self.to_complex(), tol)
    }
}

/// Value and derivative of a complex polynomial (ascending coefficients).
pub fn horner(c: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

/// Aberth-Ehrlich refinement of all roots starting from `seeds`.
///
/// `ratio(z)` must return `p(z)/p'(z)`; this lets callers supply exact or
/// extended-precision evaluation while the iteration itself runs in `f64`.
pub fn aberth_with<F>(mut z: Vec<C64>, ratio: F, tol: f64, max_iter: usize) -> Result<Vec<C64>>
where
    F: Fn(C64) -> C64,
{
    let n = z.len();
    let mut done = vec![false; n];
    let mut last = f64::INFINITY;
    for _ in 0..max_iter {
        last = 0.0;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let r = ratio(z[i]);
            if !r.re.is_finite() || !r.im.is_finite() {
                return Err(Error::NoConvergence("non-finite Newton ratio".into()));
            }
            let s: C64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let step = r / (C64::new(1.0, 0.0) - r * s);
            z[i] -= step;
            if step.norm() <= tol * z[i].norm() || step.norm() < 1e-300 {
                done[i] = true;
            }
            last = last.max(step.norm() / z[i].norm().max(1e-300));
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    // Clustered roots stall at the rounding floor; accept that.
    if last < 1e-7 {
        return Ok(z);
    }
    Err(Error::NoConvergence(format!(
        "Aberth iteration did not settle after {max_iter} sweeps"
    )))
}

/// Roots of a complex polynomial given in ascending order.
pub fn roots(c: &[C64], tol: f64) -> Result<Vec<C64>> {
    let mut c = c.to_vec();
    while c.len() > 1 && c.last().map(|x| x.norm()) == Some(0.0) {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Ok(vec![]);
    }
    let lead = c[n];
    // Cauchy-type radius from the coefficient ratios.
    let radius = (0..n)
        .map(|k| (c[k] / lead).norm().powf(1.0 / (n - k) as f64))
        .fold(0.0f64, f64::max)
        .max(1e-3);
    let seeds = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            C64::from_polar(radius, th)
        })
        .collect();
    let dc: Vec<C64> = (1..=n).map(|k| c[k] * k as f64).collect();
    aberth_with(
        seeds,
        |z| {
            let (p, _) = horner(&c, z);
            let (dp, _) = horner(&dc, z);
            p / dp
        },
        tol,
        500,
    )
}

/// Newton polish of a single root of `c`.
pub fn polish(c: &[C64], mut z: C64, steps: usize) -> C64 {
    for _ in 0..steps {
        let (p, dp) = horner(c, z);
        if dp.norm() == 0.0 {
            break;
        }
        let dz = p / dp;
        if !dz.re.is_finite() || !dz.im.is_finite() {
            break;
        }
        z -= dz;
        if dz.norm() <= 1e-17 * z.norm() {
            break;
        }
    }
    z
}
