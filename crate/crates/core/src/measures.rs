//! Mother-body measure `mu1`, constrained measure `mu2`, their potentials and
//! the diagnostics built on them.
//!
//! Densities are read off the jumps of the spectral branches on the real axis.
//! Cauchy transforms are exact combinations of branches,
//!
//! * `t C[mu1](z) = S1(z) - 2cz/(z^2+a^2)`
//! * `t C[mu2](z) = -S3(z) + (t+2c)/z - ia` for `Im z >= 0`,
//!
//! and complex potentials `g_j(z) = ∫ log(z-s) dmu_j(s)` are obtained by
//! integrating them along a ray from infinity, so no quadrature over the
//! unbounded support of `mu2` is needed.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::quad::{self, Rule};
use crate::solve1d::bisect;
use crate::spectral::{Sheet, SpectralCurve};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Sampled density with a quadrature rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityGrid {
    /// Closed intervals carrying the measure; `f64::INFINITY` marks a tail.
    pub support: Vec<(f64, f64)>,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    pub tail: Option<Tail>,
}

/// Fitted decay `coeff / x^2 + next / x^4` beyond `cutoff`, on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub cutoff: f64,
    pub coeff: f64,
    pub next: f64,
}

impl Tail {
    /// Mass of both tails beyond `±cutoff`.
    pub fn mass(&self) -> f64 {
        2.0 * (self.coeff / self.cutoff + self.next / (3.0 * self.cutoff.powi(3)))
    }
}

impl DensityGrid {
    pub fn mass(&self) -> f64 {
        let body: f64 = self.weights.iter().zip(&self.values).map(|(w, v)| w * v).sum();
        body + self.tail.map_or(0.0, |t| t.mass())
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `∫_p^q` by Gauss-Legendre in `theta` after `s = p + (q-p)(1 - cos theta)/2`,
/// which absorbs square-root behaviour at both ends.
fn cos_rule(p: f64, q: f64, order: usize) -> Rule {
    let base = quad::panels(&[0.0, 0.5 * PI, PI], order);
    let h = 0.5 * (q - p);
    let mut r = Rule::default();
    for (th, w) in base.iter() {
        r.nodes.push(p + h * (1.0 - th.cos()));
        r.weights.push(w * h * th.sin());
    }
    r
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in pts {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Density of the `t -> 0` limit measure: `a/pi` on `[-c/a, c/a]` and
/// `a/pi - sqrt(a^2 x^2 - c^2)/(pi |x|)` outside.
pub fn rho_limit_density(a: f64, c: f64, x: f64) -> f64 {
    let x = x.abs();
    if a * x <= c {
        a / PI
    } else {
        a / PI - (a * a * x * x - c * c).sqrt() / (PI * x)
    }
}

/// Mass of the limit measure on `[-x, x]`, in closed form.
pub fn rho_limit_mass_within(a: f64, c: f64, x: f64) -> f64 {
    let x = x.abs();
    let b = c / a;
    if x <= b {
        return 2.0 * a * x / PI;
    }
    let r = (a * a * x * x - c * c).sqrt();
    2.0 * c / PI + 2.0 / PI * (a * x - c - r + c * (c / (a * x)).acos())
}

/// Logarithmic potential of the limit measure for `|x| >= c/a`.
pub fn rho_limit_potential(a: f64, c: f64, x: f64) -> Option<f64> {
    (a * x.abs() >= c).then(|| -c * x.abs().ln())
}

/// Distribution function of `mu1` via a cosine series of
/// `theta -> x1 sin(theta) density(x1 cos theta)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mu1Cdf {
    pub x1: f64,
    pub coeffs: Vec<f64>,
}

impl Mu1Cdf {
    /// `mu1([x, x1])`.
    pub fn upper(&self, x: f64) -> f64 {
        if x >= self.x1 {
            return 0.0;
        }
        let th = (x / self.x1).clamp(-1.0, 1.0).acos();
        self.coeffs[0] * th
            + self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a * (k as f64 * th).sin() / k as f64)
                .sum::<f64>()
    }

    /// `mu1((-inf, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        (1.0 - self.upper(x)).clamp(0.0, 1.0)
    }
}

/// Result of the variational checks on the real line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariationalReport {
    pub ell: f64,
    /// Standard deviation of `2U1 - U2 - Re V1` on the support of `mu1`.
    pub ell_stddev: f64,
    /// Standard deviation of `2U2 - U1 + Re V2` on samples of `Δ2`.
    pub delta2_stddev: f64,
    pub delta2_mean: f64,
    /// `min (2U1 - U2 - Re V1 - ell)` over samples in `(x1, x2]`.
    pub gap_margin: f64,
    /// `max (2U2 - U1 + Re V2)` over samples in `(-x2, x2)`.
    pub saturated_max: f64,
    pub strict_samples: usize,
}

/// The constant `ell`, the crossing `x3` and a contour `gamma`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumData {
    pub ell: f64,
    pub x3: f64,
    pub x_gamma: f64,
    pub y_gamma: f64,
    /// Closed contour, counter-clockwise from `x_gamma`.
    pub gamma: Vec<C64>,
    /// `min (u - ell)` over the contour samples.
    pub margin: f64,
}

/// Sign diagnostics for the phi-functions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhiReport {
    pub min_re_phi3_gamma: f64,
    pub min_re_phi2_saturated: f64,
    pub max_abs_re_phi1_cut: f64,
    pub min_re_phi1_gap: f64,
}

/// Agreement between the area measure of the droplet and `t mu1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DropletReport {
    pub cells: usize,
    pub exterior_max_error: f64,
    pub interior_stddev: f64,
    pub far_field_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurePair {
    pub sc: SpectralCurve,
    pub mu1: DensityGrid,
    pub mu2: DensityGrid,
    pub cdf: Mu1Cdf,
}

impl MeasurePair {
    pub fn new(sc: &SpectralCurve) -> Result<Self> {
        let mut mp = MeasurePair {
            sc: sc.clone(),
            mu1: DensityGrid {
                support: vec![],
                nodes: vec![],
                values: vec![],
                weights: vec![],
                tail: None,
            },
            mu2: DensityGrid {
                support: vec![],
                nodes: vec![],
                values: vec![],
                weights: vec![],
                tail: None,
            },
            cdf: Mu1Cdf {
                x1: sc.cd.x1,
                coeffs: vec![],
            },
        };
        mp.mu1 = mp.build_mu1()?;
        mp.mu2 = mp.build_mu2()?;
        mp.cdf = mp.build_cdf(64)?;
        Ok(mp)
    }

    fn a(&self) -> f64 {
        self.sc.cd.params.a
    }

    fn c(&self) -> f64 {
        self.sc.cd.params.c
    }

    fn t(&self) -> f64 {
        self.sc.cd.params.t
    }

    /// Density of `mu1` at real `x`; zero off `(-x1, x1)`.
    pub fn density_mu1(&self, x: f64) -> Result<f64> {
        if x.abs() >= self.sc.cd.x1 {
            return Ok(0.0);
        }
        let s1 = self.sc.eval_s(C64::new(x, 0.0), Sheet::One)?;
        Ok(-s1.im / (PI * self.t()))
    }

    /// Density of `mu2` at real `x`.
    pub fn density_mu2(&self, x: f64) -> Result<f64> {
        let sigma = self.a() / (PI * self.t());
        if x.abs() <= self.sc.cd.x2 {
            return Ok(sigma);
        }
        let s3 = self.sc.eval_s(C64::new(x, 0.0), Sheet::Three)?;
        Ok(sigma + s3.im / (PI * self.t()))
    }

    fn build_mu1(&self) -> Result<DensityGrid> {
        let x1 = self.sc.cd.x1;
        let rule = cos_rule(-x1, x1, 48);
        let values = rule
            .nodes
            .iter()
            .map(|&x| self.density_mu1(x))
            .collect::<Result<Vec<_>>>()?;
        if let Some(v) = values.iter().find(|v| **v <= 0.0) {
            return Err(Error::BranchAmbiguity { re: *v, im: 0.0 });
        }
        Ok(DensityGrid {
            support: vec![(-x1, x1)],
            nodes: rule.nodes,
            values,
            weights: rule.weights,
            tail: None,
        })
    }

    /// `mu2` on `[-X, X]` with `X = 1e3 * scale`, plus a fitted tail.
    fn build_mu2(&self) -> Result<DensityGrid> {
        let x2 = self.sc.cd.x2;
        let cutoff = 1e3 * self.sc.cd.scale();
        let sigma = self.a() / (PI * self.t());
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut values = Vec::new();
        let mid = quad::legendre(-x2, x2, 32);
        for (x, w) in mid.iter() {
            nodes.push(x);
            weights.push(w);
            values.push(sigma);
        }
        let mut right = cos_rule(x2, 2.0 * x2, 32);
        let mut edge = 2.0 * x2;
        while edge < cutoff {
            let next = (2.0 * edge).min(cutoff);
            let r = quad::legendre(edge, next, 16);
            right.nodes.extend(r.nodes);
            right.weights.extend(r.weights);
            edge = next;
        }
        for (x, w) in right.iter() {
            let d = self.density_mu2(x)?;
            for s in [-1.0, 1.0] {
                nodes.push(s * x);
                weights.push(w);
                values.push(d);
            }
        }
        let tail = self.fit_tail(cutoff)?;
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&i, &j| nodes[i].total_cmp(&nodes[j]));
        Ok(DensityGrid {
            support: vec![(f64::NEG_INFINITY, f64::INFINITY)],
            nodes: order.iter().map(|&i| nodes[i]).collect(),
            values: order.iter().map(|&i| values[i]).collect(),
            weights: order.iter().map(|&i| weights[i]).collect(),
            tail: Some(tail),
        })
    }

    /// Least-squares fit of `k / x^2 + m / x^4` over the last decade below `cutoff`.
    fn fit_tail(&self, cutoff: f64) -> Result<Tail> {
        let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for j in 0..=20 {
            let x = cutoff * 10f64.powf(-(j as f64) / 20.0);
            let d = self.density_mu2(x)?;
            let (u, v) = (x.powi(-2), x.powi(-4));
            s11 += u * u;
            s12 += u * v;
            s22 += v * v;
            b1 += u * d;
            b2 += v * d;
        }
        let det = s11 * s22 - s12 * s12;
        Ok(Tail {
            cutoff,
            coeff: (b1 * s22 - b2 * s12) / det,
            next: (s11 * b2 - s12 * b1) / det,
        })
    }

    fn build_cdf(&self, m: usize) -> Result<Mu1Cdf> {
        let x1 = self.sc.cd.x1;
        // Samples of the even, smooth, 2pi-periodic g(theta) at midpoints.
        let g: Vec<f64> = (0..m)
            .map(|j| {
                let th = PI * (j as f64 + 0.5) / m as f64;
                Ok(x1 * th.sin() * self.density_mu1(x1 * th.cos())?)
            })
            .collect::<Result<_>>()?;
        let coeffs = (0..m)
            .map(|k| {
                let s: f64 = g
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (k as f64 * PI * (j as f64 + 0.5) / m as f64).cos())
                    .sum();
                if k == 0 {
                    s / m as f64
                } else {
                    2.0 * s / m as f64
                }
            })
            .collect();
        Ok(Mu1Cdf { x1, coeffs })
    }

    /// Exponents of the square-root vanishing of `mu1` at `x1` and of
    /// `sigma - mu2` at `x2`, by log-log regression over the innermost 10%.
    pub fn endpoint_exponents(&self) -> Result<(f64, f64)> {
        let (x1, x2) = (self.sc.cd.x1, self.sc.cd.x2);
        let sigma = self.a() / (PI * self.t());
        let ds: Vec<f64> = (4..=16).map(|k| 10f64.powf(-(k as f64) / 4.0)).collect();
        let p1 = ds
            .iter()
            .map(|&d| Ok((d * x1, self.density_mu1(x1 - d * x1)?)))
            .collect::<Result<Vec<_>>>()?;
        let p2 = ds
            .iter()
            .map(|&d| Ok((d * x2, sigma - self.density_mu2(x2 + d * x2)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((loglog_slope(&p1), loglog_slope(&p2)))
    }

    /// Cauchy transforms `(C[mu1](z), C[mu2](z))`; boundary values from above
    /// on the real axis.
    pub fn cauchy_transforms(&self, z: C64) -> Result<(C64, C64)> {
        if z.im < 0.0 {
            let (c1, c2) = self.cauchy_transforms(z.conj())?;
            return Ok((c1.conj(), c2.conj()));
        }
        let s = self.sc.eval_all(z)?;
        Ok(self.transforms_from(z, &s))
    }

    fn transforms_from(&self, z: C64, s: &[C64; 3]) -> (C64, C64) {
        let (a, c, t) = (self.a(), self.c(), self.t());
        let c1 = (s[0] - 2.0 * c * z / (z * z + a * a)) / t;
        let c2 = (-s[2] + (t + 2.0 * c) / z - I * a) / t;
        (c1, c2)
    }

    /// Second route for `C[mu2]` through the sum rule `S1 + S2 + S3 = e1`.
    pub fn cauchy_mu2_via_s2(&self, z: C64) -> Result<C64> {
        if z.im < 0.0 {
            return Ok(self.cauchy_mu2_via_s2(z.conj())?.conj());
        }
        let (a, c, t) = (self.a(), self.c(), self.t());
        let s = self.sc.eval_all(z)?;
        let e1 = ((t + 4.0 * c) * z * z + (t + 2.0 * c) * a * a) / (z * (z * z + a * a));
        let s3 = e1 - s[0] - s[1];
        Ok((-s3 + (t + 2.0 * c) / z - I * a) / t)
    }

    /// Complex potentials `(g1(z), g2(z))` with principal logarithms,
    /// boundary values from above on the real axis.
    pub fn g_functions(&self, z: C64) -> Result<(C64, C64)> {
        if z.im < 0.0 {
            let (g1, g2) = self.g_functions(z.conj())?;
            return Ok((g1.conj(), g2.conj()));
        }
        let t = self.t();
        let m2 = (t + self.c()) / t;
        let sgn = if z.re >= 0.0 { 1.0 } else { -1.0 };
        let d = C64::new(0.5 * sgn, 1.0) / 1.25f64.sqrt();
        let l0 = 2.0 * self.sc.cd.scale();
        let far = quad::panels(&[0.0, 0.25, 1.0], 20);
        let near_edges: Vec<f64> = quad::graded_edges(1e-9, 4.0).iter().map(|e| e * l0).collect();
        let near = quad::panels(&near_edges, 10);
        // Points from far to near so one tracker walks the whole ray.
        let mut ys: Vec<(f64, f64, bool)> = far
            .iter()
            .map(|(s, w)| (l0 / s, w * l0 / (s * s), true))
            .collect();
        ys.extend(near.iter().collect::<Vec<_>>().into_iter().rev().map(|(y, w)| (y, w, false)));
        let pts: Vec<C64> = ys.iter().map(|&(y, _, _)| z + d * y).collect();
        let vals = self.sc.track(&pts)?;
        let mut acc1 = C64::new(0.0, 0.0);
        let mut acc2 = C64::new(0.0, 0.0);
        for ((&(_, w, is_far), &p), s) in ys.iter().zip(&pts).zip(&vals) {
            let (c1, c2) = self.transforms_from(p, s);
            if is_far {
                acc1 += w * (c1 - 1.0 / p);
                acc2 += w * (c2 - m2 / p);
            } else {
                acc1 += w * c1;
                acc2 += w * c2;
            }
        }
        let base = (z + d * l0).ln();
        Ok((base - d * acc1, m2 * base - d * acc2))
    }

    /// Logarithmic potentials `(U^{mu1}(z), U^{mu2}(z))`.
    pub fn potentials(&self, z: C64) -> Result<(f64, f64)> {
        let (g1, g2) = self.g_functions(z)?;
        Ok((-g1.re, -g2.re))
    }

    /// `U^{mu1}` by direct quadrature against the density, valid off the support.
    pub fn potential_mu1_direct(&self, z: C64) -> f64 {
        -self
            .mu1
            .nodes
            .iter()
            .zip(&self.mu1.weights)
            .zip(&self.mu1.values)
            .map(|((&s, &w), &v)| w * v * (z - s).norm().ln())
            .sum::<f64>()
    }

    fn re_v1(&self, z: C64) -> f64 {
        let a = self.a();
        self.c() / self.t() * (z * z + a * a).norm().ln()
    }

    fn re_v2(&self, z: C64) -> f64 {
        let t = self.t();
        (t + 2.0 * self.c()) / t * z.norm().ln()
    }

    /// `2U1 - U2 - Re V1` and `2U2 - U1 + Re V2` at `z`.
    pub fn variational_functionals(&self, z: C64) -> Result<(f64, f64)> {
        let (u1, u2) = self.potentials(z)?;
        Ok((2.0 * u1 - u2 - self.re_v1(z), 2.0 * u2 - u1 + self.re_v2(z)))
    }

    /// Contour-existence function `u = U1 + U2 - Re V1 + Re V2 + (a/t)|Im z|`.
    pub fn u(&self, z: C64) -> Result<f64> {
        let (u1, u2) = self.potentials(z)?;
        Ok(u1 + u2 - self.re_v1(z) + self.re_v2(z) + self.a() / self.t() * z.im.abs())
    }

    /// Evaluates the Euler-Lagrange conditions at `samples` points per set.
    pub fn variational_check(&self, samples: usize, exec: Exec) -> Result<VariationalReport> {
        let (x1, x2) = (self.sc.cd.x1, self.sc.cd.x2);
        let n = samples.max(3);
        let on_support: Vec<f64> = (0..n)
            .map(|k| x1 * (PI * (k as f64 + 0.5) / n as f64).cos())
            .collect();
        let on_delta2: Vec<f64> = (1..=n)
            .map(|k| {
                let x = x2 * (1.0 + 3.0 * k as f64 / n as f64);
                if k % 2 == 0 {
                    x
                } else {
                    -x
                }
            })
            .collect();
        let gap: Vec<f64> = (1..=n).map(|k| x1 + (x2 - x1) * k as f64 / n as f64).collect();
        let saturated: Vec<f64> = (0..n)
            .map(|k| {
                let x = x2 * (k as f64 + 0.5) / n as f64;
                if k % 2 == 0 {
                    x
                } else {
                    -x
                }
            })
            .collect();
        let eval = |xs: &[f64]| -> Result<Vec<(f64, f64)>> {
            exec.map(xs, |&x| self.variational_functionals(C64::new(x, 0.0)))
                .into_iter()
                .collect()
        };
        let stats = |v: &[f64]| -> (f64, f64) {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64;
            (m, var.sqrt())
        };
        let e_sup: Vec<f64> = eval(&on_support)?.iter().map(|p| p.0).collect();
        let (ell, ell_stddev) = stats(&e_sup);
        let e_d2: Vec<f64> = eval(&on_delta2)?.iter().map(|p| p.1).collect();
        let (delta2_mean, delta2_stddev) = stats(&e_d2);
        let gap_margin = eval(&gap)?
            .iter()
            .map(|p| p.0 - ell)
            .fold(f64::INFINITY, f64::min);
        let saturated_max = eval(&saturated)?
            .iter()
            .map(|p| p.1)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(VariationalReport {
            ell,
            ell_stddev,
            delta2_stddev,
            delta2_mean,
            gap_margin,
            saturated_max,
            strict_samples: gap.len() + saturated.len(),
        })
    }

    /// The point `x3` in `(x1, x2)` where `u = ell`.
    pub fn x3(&self, ell: f64) -> Result<f64> {
        let (x1, x2) = (self.sc.cd.x1, self.sc.cd.x2);
        bisect(|x| Ok(self.u(C64::new(x, 0.0))? - ell), x1, x2, 1e-12 * x2)
    }

    /// Builds a symmetric contour in `{u > ell}` through a point of `(x3, x2)`
    /// and a point above `ia`, from a family of ellipses.
    pub fn contour(&self, ell: f64, quarter_samples: usize) -> Result<EquilibriumData> {
        let a = self.a();
        let x3 = self.x3(ell)?;
        let x2 = self.sc.cd.x2;
        let mut y0 = a;
        for k in 1..=1000 {
            y0 = a * (1.0 + 0.01 * k as f64);
            if self.u(C64::new(0.0, y0))? > ell {
                break;
            }
        }
        let m = quarter_samples.max(8);
        for frac in [0.5, 0.3, 0.7, 0.15, 0.85] {
            for yf in [1.1, 1.25, 1.5, 2.0] {
                let xg = x3 + frac * (x2 - x3);
                let yg = yf * y0;
                let quarter: Vec<C64> = (0..=m)
                    .map(|k| {
                        let th = 0.5 * PI * k as f64 / m as f64;
                        C64::new(xg * th.cos(), yg * th.sin())
                    })
                    .collect();
                let mut margin = f64::INFINITY;
                for &z in &quarter {
                    margin = margin.min(self.u(z)? - ell);
                    if margin <= 0.0 {
                        break;
                    }
                }
                if margin > 0.0 {
                    let mut gamma: Vec<C64> = quarter.clone();
                    gamma.extend(quarter.iter().rev().skip(1).map(|z| -z.conj()));
                    gamma.extend(quarter.iter().skip(1).map(|z| -z));
                    gamma.extend(quarter.iter().rev().skip(1).take(m - 1).map(|z| z.conj()));
                    return Ok(EquilibriumData {
                        ell,
                        x3,
                        x_gamma: xg,
                        y_gamma: yg,
                        gamma,
                        margin,
                    });
                }
            }
        }
        Err(Error::ContourNotFound(format!(
            "no ellipse through (x3, x2) x (y > {y0}) stays in u > ell"
        )))
    }

    /// Residue at `0` of each branch.
    fn pole_at_zero(&self, sheet: usize) -> f64 {
        if sheet == 2 {
            self.t() + 2.0 * self.c()
        } else {
            0.0
        }
    }

    /// `∫_p^q (S_i - S_j) ds` along the real axis using boundary values from
    /// above. Breaks at branch points and at `0`; the pole of `S3` at `0` is
    /// integrated in closed form along a small arc above it.
    pub fn real_axis_integral(&self, i: Sheet, j: Sheet, p: f64, q: f64) -> Result<C64> {
        let (x1, x2) = (self.sc.cd.x1, self.sc.cd.x2);
        let r = self.pole_at_zero(i.index()) - self.pole_at_zero(j.index());
        let (lo, hi) = (p.min(q), p.max(q));
        let mut cuts: Vec<f64> = vec![lo, hi];
        cuts.extend([-x2, -x1, 0.0, x1, x2].into_iter().filter(|b| lo < *b && *b < hi));
        cuts.sort_by(f64::total_cmp);
        let mut sum = C64::new(0.0, 0.0);
        for w in cuts.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let rule = cos_rule(w[0], w[1], 24);
            for (s, wt) in rule.iter() {
                let v = self.sc.eval_all(C64::new(s, 0.0))?;
                sum += wt * (v[i.index()] - v[j.index()] - r / s);
            }
        }
        if q < p {
            sum = -sum;
        }
        // log along the upper half-plane: arg(x) = pi for x < 0.
        let log_up = |x: f64| C64::new(x.abs().ln(), if x < 0.0 { PI } else { 0.0 });
        Ok(sum + r * (log_up(q) - log_up(p)))
    }

    /// `phi1(x) = (1/2t) ∫_{x1}^x (S2 - S1)`, boundary value from above.
    pub fn phi1_real(&self, x: f64) -> Result<C64> {
        let v = self.real_axis_integral(Sheet::Two, Sheet::One, self.sc.cd.x1, x)?;
        Ok(v / (2.0 * self.t()))
    }

    /// `phi2(x) = (1/2t) ∫_{x2}^x (S2 - S3)`, boundary value from above.
    pub fn phi2_real(&self, x: f64) -> Result<C64> {
        let v = self.real_axis_integral(Sheet::Two, Sheet::Three, self.sc.cd.x2, x)?;
        Ok(v / (2.0 * self.t()))
    }

    /// `phi3 = (1/2t) ∫_{x3}^z (S3 - S1)` at the upper half of the contour
    /// samples of `eq` (indices `0..=2m`), integrated along the contour.
    pub fn phi3_on_contour(&self, eq: &EquilibriumData) -> Result<Vec<(C64, C64)>> {
        let t = self.t();
        let base = self.real_axis_integral(Sheet::Three, Sheet::One, eq.x3, eq.x_gamma)?;
        let m = (eq.gamma.len() / 2).max(4);
        let (xg, yg) = (eq.x_gamma, eq.y_gamma);
        let z_of = |th: f64| C64::new(xg * th.cos(), yg * th.sin());
        let dz_of = |th: f64| C64::new(-xg * th.sin(), yg * th.cos());
        let gl = quad::legendre(0.0, 1.0, 8);
        let a = self.a();
        let sing = [
            C64::new(self.sc.cd.x1, 0.0),
            C64::new(self.sc.cd.x2, 0.0),
            C64::new(-self.sc.cd.x1, 0.0),
            C64::new(-self.sc.cd.x2, 0.0),
            C64::new(0.0, a),
        ];
        let dist = |z: C64| sing.iter().map(|s| (z - s).norm()).fold(f64::INFINITY, f64::min);
        let mut pts = vec![z_of(0.0)];
        let mut wts = vec![C64::new(0.0, 0.0)];
        let mut marks = vec![true];
        let h = PI / m as f64;
        for k in 0..m {
            // Split each step into panels no longer than a quarter of the
            // distance to the nearest singularity of the integrand.
            let mut lo = h * k as f64;
            let hi = h * (k + 1) as f64;
            while lo < hi {
                let mut step = hi - lo;
                while step * dz_of(lo).norm() > 0.25 * dist(z_of(lo)) && step > 1e-9 * h {
                    step *= 0.5;
                }
                let up = (lo + step).min(hi);
                for (u, w) in gl.iter() {
                    let th = lo + (up - lo) * u;
                    pts.push(z_of(th));
                    wts.push(w * (up - lo) * dz_of(th));
                    marks.push(false);
                }
                lo = up;
            }
            pts.push(z_of(hi));
            wts.push(C64::new(0.0, 0.0));
            marks.push(true);
        }
        let vals = self.sc.track(&pts)?;
        let mut acc = base;
        let mut out = vec![(pts[0], acc / (2.0 * t))];
        for (((p, w), s), &mark) in pts.iter().zip(&wts).zip(&vals).zip(&marks).skip(1) {
            acc += w * (s[2] - s[0]);
            if mark {
                out.push((*p, acc / (2.0 * t)));
            }
        }
        Ok(out)
    }

    /// Sign conditions on the phi-functions at `samples` points per set.
    pub fn phi_diagnostics(&self, eq: &EquilibriumData, samples: usize) -> Result<PhiReport> {
        let (x1, x2) = (self.sc.cd.x1, self.sc.cd.x2);
        let n = samples.max(3);
        let min_re_phi3_gamma = self
            .phi3_on_contour(eq)?
            .iter()
            .map(|(_, v)| v.re)
            .fold(f64::INFINITY, f64::min);
        let mut min_re_phi2_saturated = f64::INFINITY;
        for k in 0..n {
            let x = -x2 + 2.0 * x2 * (k as f64 + 0.5) / n as f64;
            min_re_phi2_saturated = min_re_phi2_saturated.min(self.phi2_real(x)?.re);
        }
        let mut max_abs_re_phi1_cut = 0.0f64;
        for k in 0..=n {
            let x = x1 * (PI * k as f64 / n as f64).cos();
            max_abs_re_phi1_cut = max_abs_re_phi1_cut.max(self.phi1_real(x)?.re.abs());
        }
        let mut min_re_phi1_gap = f64::INFINITY;
        for k in 1..=n {
            let x = x1 + (x2 - x1) * k as f64 / n as f64;
            min_re_phi1_gap = min_re_phi1_gap.min(self.phi1_real(x)?.re);
        }
        Ok(PhiReport {
            min_re_phi3_gamma,
            min_re_phi2_saturated,
            max_abs_re_phi1_cut,
            min_re_phi1_gap,
        })
    }

    /// `C1 = a^4 + 4c^2 + 2ct ∫ s^2/(s^2+a^2) dmu1`.
    pub fn c1_from_measure(&self) -> f64 {
        let (a, c, t) = (self.a(), self.c(), self.t());
        let a2 = a * a;
        let integral: f64 = self
            .mu1
            .nodes
            .iter()
            .zip(&self.mu1.weights)
            .zip(&self.mu1.values)
            .map(|((&s, &w), &v)| w * v * s * s / (s * s + a2))
            .sum();
        a2 * a2 + 4.0 * c * c + 2.0 * c * t * integral
    }

    /// `max |t * density(mu2) - density(rho_limit)|` on `xs`.
    pub fn limit_measure_error(&self, xs: &[f64]) -> Result<f64> {
        let (a, c, t) = (self.a(), self.c(), self.t());
        let mut worst = 0.0f64;
        for &x in xs {
            let d = t * self.density_mu2(x)?;
            worst = worst.max((d - rho_limit_density(a, c, x)).abs());
        }
        Ok(worst)
    }

    /// Compares the potential of `(1/pi) dA` on the droplet with `t U^{mu1}`
    /// outside, and checks constancy of `2U + |z|^2 - 2c log|z^2+a^2|` inside,
    /// using an `n_r x n_phi` polar midpoint rule.
    pub fn droplet_potential_check(
        &self,
        n_r: usize,
        n_phi: usize,
        exterior: &[C64],
        interior: &[C64],
        exec: Exec,
    ) -> Result<DropletReport> {
        let cd = &self.sc.cd;
        let (a, c, t) = (self.a(), self.c(), self.t());
        // Radial boundary function R(phi) on the first quadrant; the droplet is
        // star-shaped when arg f(e^{i theta}) increases with theta.
        let arg_at = |th: f64| cd.f(C64::from_polar(1.0, th)).arg();
        let probe = 2048;
        for k in 1..probe {
            let (u, v) = (
                0.5 * PI * (k - 1) as f64 / probe as f64,
                0.5 * PI * k as f64 / probe as f64,
            );
            if arg_at(v) <= arg_at(u) {
                return Err(Error::QuadratureNotConverged(
                    "droplet is not star-shaped about 0".into(),
                ));
            }
        }
        let dphi = 2.0 * PI / n_phi as f64;
        let radius = |phi: f64| -> Result<f64> {
            // Reduce to the first quadrant by symmetry.
            let p = phi.rem_euclid(PI);
            let p = if p > 0.5 * PI { PI - p } else { p };
            let th = bisect(|th| Ok(arg_at(th) - p), 0.0, 0.5 * PI, 1e-15)?;
            Ok(cd.f(C64::from_polar(1.0, th)).norm())
        };
        let radii: Vec<f64> = (0..n_phi)
            .map(|j| radius(dphi * (j as f64 + 0.5)))
            .collect::<Result<_>>()?;
        let area_potential = |z: C64| -> f64 {
            exec.sum_range(n_phi, |j| {
                let phi = dphi * (j as f64 + 0.5);
                let (sp, cp) = phi.sin_cos();
                let dr = radii[j] / n_r as f64;
                let mut s = 0.0;
                for i in 0..n_r {
                    let r = dr * (i as f64 + 0.5);
                    let w = C64::new(r * cp, r * sp);
                    s -= (z - w).norm().ln() * r;
                }
                s * dr * dphi / PI
            })
        };
        let mut exterior_max_error = 0.0f64;
        for &z in exterior {
            let (u1, _) = self.potentials(z)?;
            exterior_max_error = exterior_max_error.max((area_potential(z) - t * u1).abs());
        }
        let vals: Vec<f64> = interior
            .iter()
            .map(|&z| {
                2.0 * area_potential(z) + z.norm_sqr() - 2.0 * c * (z * z + a * a).norm().ln()
            })
            .collect();
        let m = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
        let interior_stddev =
            (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len().max(1) as f64).sqrt();
        let far = C64::new(3.0 * cd.x2, 0.0);
        let far_field_error = (area_potential(far) - t * self.potential_mu1_direct(far)).abs();
        Ok(DropletReport {
            cells: n_r * n_phi,
            exterior_max_error,
            interior_stddev,
            far_field_error,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::solve_conformal;
    use crate::model::ModelParams;
    use std::sync::OnceLock;

    fn pair() -> &'static MeasurePair {
        static MP: OnceLock<MeasurePair> = OnceLock::new();
        MP.get_or_init(|| {
            let cd = solve_conformal(&ModelParams::new(2.0, 1.0, 0.1), 1e-13).unwrap();
            MeasurePair::new(&SpectralCurve::new(&cd).unwrap()).unwrap()
        })
    }

    #[test]
    fn masses_and_constraint() {
        let mp = pair();
        assert!((mp.mu1.mass() - 1.0).abs() < 1e-10, "{}", mp.mu1.mass());
        assert!((mp.mu2.mass() - 11.0).abs() < 1e-7, "{}", mp.mu2.mass());
        assert!(mp.mu2.max_value() <= 2.0 / (PI * 0.1) + 1e-10);
        assert!(mp.density_mu1(0.0).unwrap() > 0.0);
        for x in [0.1, 0.3, 0.45] {
            let (p, m) = (mp.density_mu1(x).unwrap(), mp.density_mu1(-x).unwrap());
            assert!((p - m).abs() < 1e-10);
        }
    }

    #[test]
    fn exponents() {
        let (e1, e2) = pair().endpoint_exponents().unwrap();
        assert!((e1 - 0.5).abs() < 0.05, "{e1}");
        assert!((e2 - 0.5).abs() < 0.05, "{e2}");
    }

    #[test]
    fn cdf_matches_quadrature() {
        let mp = pair();
        assert!((mp.cdf.cdf(0.0) - 0.5).abs() < 1e-12);
        assert!(mp.cdf.cdf(-mp.sc.cd.x1).abs() < 1e-12);
        let x = 0.2;
        let direct: f64 = mp
            .mu1
            .nodes
            .iter()
            .zip(&mp.mu1.weights)
            .zip(&mp.mu1.values)
            .filter(|((s, _), _)| **s >= x)
            .map(|((_, w), v)| w * v)
            .sum();
        // Coarse: the node sum is a step function of x.
        assert!((mp.cdf.upper(x) - direct).abs() < 0.02);
        let fine = cos_rule(x, mp.sc.cd.x1, 24).integrate(|s| mp.density_mu1(s).unwrap());
        assert!((mp.cdf.upper(x) - fine).abs() < 1e-10);
    }

    #[test]
    fn transforms_and_potentials() {
        let mp = pair();
        let z = C64::new(0.7, 0.4);
        let (_, c2) = mp.cauchy_transforms(z).unwrap();
        assert!((c2 - mp.cauchy_mu2_via_s2(z).unwrap()).norm() < 1e-10);
        for z in [C64::new(1.3, 0.0), C64::new(0.2, 0.9), C64::new(-0.5, -0.3)] {
            let direct = mp.potential_mu1_direct(z);
            let (u1, _) = mp.potentials(z).unwrap();
            assert!((u1 - direct).abs() < 1e-9, "{z}: {u1} vs {direct}");
        }
        let z = C64::new(0.6, 0.35);
        let h = 1e-5;
        let (gp, _) = mp.g_functions(z + h).unwrap();
        let (gm, _) = mp.g_functions(z - h).unwrap();
        let (c1, _) = mp.cauchy_transforms(z).unwrap();
        assert!(((gp - gm) / (2.0 * h) - c1).norm() < 1e-6 * c1.norm());
        let big = C64::new(1e4 * mp.sc.cd.x1, 0.0);
        let (g1, _) = mp.g_functions(big).unwrap();
        assert!((g1 - big.ln()).norm() < 1e-6);
    }

    #[test]
    fn constants_routes_agree() {
        let mp = pair();
        let c1 = mp.c1_from_measure();
        assert!((c1 - mp.sc.c1).abs() < 1e-6 * mp.sc.c1, "{c1} vs {}", mp.sc.c1);
    }

    #[test]
    fn variational_conditions() {
        let mp = pair();
        let r = mp.variational_check(12, Exec::Sequential).unwrap();
        assert!(r.ell_stddev < 1e-7, "{r:?}");
        assert!(r.delta2_stddev < 1e-7 && r.delta2_mean.abs() < 1e-7, "{r:?}");
        assert!(r.gap_margin > 0.0 && r.saturated_max < 0.0, "{r:?}");
    }

    #[test]
    fn contour_and_phi() {
        let mp = pair();
        let r = mp.variational_check(8, Exec::Sequential).unwrap();
        let eq = mp.contour(r.ell, 24).unwrap();
        assert!(mp.sc.cd.x1 < eq.x3 && eq.x3 < mp.sc.cd.x2);
        assert!(eq.margin > 0.0);
        let phi3 = mp.phi3_on_contour(&eq).unwrap();
        for &(z, v) in phi3.iter() {
            let u = mp.u(z).unwrap();
            assert!((v.re - 0.5 * (u - eq.ell)).abs() < 1e-8, "{z}: {} vs {}", v.re, u);
        }
        // Im phi1+ = -pi mu1([x, x1]); 2 Re phi1 = E1 - ell on the gap.
        let x = 0.1;
        let p1 = mp.phi1_real(x).unwrap();
        assert!((p1.im + PI * mp.cdf.upper(x)).abs() < 1e-9);
        let xg = 0.5 * (mp.sc.cd.x1 + mp.sc.cd.x2);
        let (e1, _) = mp.variational_functionals(C64::new(xg, 0.0)).unwrap();
        assert!((2.0 * mp.phi1_real(xg).unwrap().re - (e1 - r.ell)).abs() < 1e-8);
        for x in [0.2, -0.3, 0.52] {
            let (_, e2) = mp.variational_functionals(C64::new(x, 0.0)).unwrap();
            assert!((-2.0 * mp.phi2_real(x).unwrap().re - e2).abs() < 1e-8, "x={x}");
        }
        let d = mp.phi_diagnostics(&eq, 10).unwrap();
        assert!(d.min_re_phi3_gamma > 0.0 && d.min_re_phi2_saturated > 0.0, "{d:?}");
        assert!(d.max_abs_re_phi1_cut < 1e-10 && d.min_re_phi1_gap > 0.0, "{d:?}");
    }

    #[test]
    fn limit_measure() {
        let (a, c) = (2.0, 1.0);
        assert!((rho_limit_density(a, c, 0.0) - 2.0 / PI).abs() < 1e-15);
        assert!((rho_limit_mass_within(a, c, 1e12) - c).abs() < 1e-8);
        let numeric = 2.0
            * (quad::legendre(0.0, 0.5, 4).integrate(|x| rho_limit_density(a, c, x))
                + cos_rule(0.5, 5.0, 40).integrate(|x| rho_limit_density(a, c, x)));
        assert!((numeric - rho_limit_mass_within(a, c, 5.0)).abs() < 1e-6);
        assert_eq!(rho_limit_potential(a, c, 1.0), Some(0.0));
    }

    #[test]
    fn droplet_area_potential() {
        let mp = pair();
        let cd = &mp.sc.cd;
        let ext: Vec<C64> = [0.3, 1.2, 2.5]
            .iter()
            .map(|&th| cd.f(C64::from_polar(1.4, th)))
            .collect();
        let int: Vec<C64> = [0.2, 1.0, 2.0, 3.5]
            .iter()
            .map(|&th| 0.6 * cd.f(C64::from_polar(1.0, th + 0.0123)))
            .collect();
        let r = mp
            .droplet_potential_check(300, 400, &ext, &int, Exec::Sequential)
            .unwrap();
        assert!(r.exterior_max_error < 1e-5, "{r:?}");
        assert!(r.far_field_error < 1e-5, "{r:?}");
        assert!(r.interior_stddev < 1e-4, "{r:?}");
    }

    #[test]
    fn cos_rule_sqrt() {
        let r = cos_rule(1.0, 3.0, 16);
        let exact = PI / 2.0;
        assert!((r.integrate(|x| ((x - 1.0) * (3.0 - x)).sqrt()) - exact).abs() < 1e-13);
    }
}
