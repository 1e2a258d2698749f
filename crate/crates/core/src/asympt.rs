//! Strong asymptotics `P_{n,N}(z) ~ (rho F1'(z))^{1/2} e^{n g1(z)}` and
//! their comparison with exact polynomials.
//!
//! All quantities are handled as complex logarithms; imaginary parts of
//! differences are reduced to `(-pi, pi]`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::measures::MeasurePair;
use crate::oracle::{max_distance_to_segment, zero_counting_measure, ExactPolynomial};
use crate::{Error, Exec, Result, C64};

/// Predicted `log P_{n,N}(z)` split into its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticPrediction {
    pub z: C64,
    pub n: usize,
    /// `n g1(z)`.
    pub n_g1: C64,
    /// `(rho F1'(z))^{1/2}`.
    pub prefactor: C64,
    pub log_modulus: f64,
    pub phase: f64,
}

impl AsymptoticPrediction {
    pub fn log_value(&self) -> C64 {
        C64::new(self.log_modulus, self.phase)
    }
}

fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// `(rho F1'(z))^{1/2}` written through the exterior preimage `w = F1(z)`:
/// `(1 + alpha^2/w^2) / sqrt((1 - w1^2/w^2)(1 - w2^2/w^2))`, analytic off
/// `[-w1, w1]`, real positive for real `w > w1` and tending to 1 at infinity.
pub fn prefactor(mp: &MeasurePair, z: C64) -> Result<C64> {
    let cd = &mp.sc.cd;
    if z.im == 0.0 && z.re.abs() <= cd.x1 {
        return Err(Error::BranchCutHit { re: z.re, im: z.im });
    }
    Ok(prefactor_at_preimage(mp, exterior_preimage(mp, z)?))
}

/// `F1(z)`. At the branch points of the other two sheets (`+-x2`) the
/// three-root tracker cannot separate them, so the exterior root is taken
/// from a nearby point and polished alone.
fn exterior_preimage(mp: &MeasurePair, z: C64) -> Result<C64> {
    let cd = &mp.sc.cd;
    match cd.f_inv_exterior(z) {
        Ok(w) => Ok(w),
        Err(Error::BranchAmbiguity { .. }) => {
            let mut w = cd.f_inv_exterior(z + C64::new(0.0, 1e-6 * cd.scale()))?;
            for _ in 0..50 {
                let dw = (cd.f(w) - z) / cd.df(w);
                w -= dw;
                if dw.norm() < 1e-16 * w.norm() {
                    break;
                }
            }
            Ok(w)
        }
        Err(e) => Err(e),
    }
}

fn prefactor_at_preimage(mp: &MeasurePair, w: C64) -> C64 {
    let cd = &mp.sc.cd;
    let iw2 = 1.0 / (w * w);
    let one = C64::new(1.0, 0.0);
    let num = one + cd.alpha * cd.alpha * iw2;
    num / ((one - cd.w1 * cd.w1 * iw2).sqrt() * (one - cd.w2 * cd.w2 * iw2).sqrt())
}

/// Leading-order prediction for `log P_{n,N}(z)` at the time of `mp`.
pub fn predict(mp: &MeasurePair, n: usize, z: C64) -> Result<AsymptoticPrediction> {
    let pf = prefactor(mp, z)?;
    let (g1, _) = mp.g_functions(z)?;
    let n_g1 = g1 * n as f64;
    let lv = n_g1 + pf.ln();
    Ok(AsymptoticPrediction {
        z,
        n,
        n_g1,
        prefactor: pf,
        log_modulus: lv.re,
        phase: wrap_phase(lv.im),
    })
}

/// One row of an error table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRow {
    pub n: usize,
    pub big_n: u32,
    pub z: C64,
    /// `log P(z) - predicted`, imaginary part reduced to `(-pi, pi]`.
    pub log_err: C64,
}

impl ErrorRow {
    pub fn magnitude(&self) -> f64 {
        self.log_err.norm()
    }
}

/// Log-space errors of the prediction against an exact polynomial.
pub fn compare(
    poly: &ExactPolynomial,
    mp: &MeasurePair,
    points: &[C64],
    exec: Exec,
) -> Result<Vec<ErrorRow>> {
    let n = poly.degree();
    exec.map(points, |&z| {
        let pred = predict(mp, n, z)?;
        let lp = poly.log_eval(z)?;
        let d = lp - pred.log_value();
        Ok(ErrorRow {
            n,
            big_n: poly.params.big_n,
            z,
            log_err: C64::new(d.re, wrap_phase(d.im)),
        })
    })
    .into_iter()
    .collect()
}

/// Test points off the cut: two exterior points, one point inside the
/// droplet but off the axis, one boundary point and the gap midpoint.
pub fn test_panel(mp: &MeasurePair) -> Vec<C64> {
    let cd = &mp.sc.cd;
    let a = cd.params.a;
    vec![
        C64::new(2.0 * cd.x2, 0.0),
        C64::from_polar(cd.x2, PI / 4.0),
        C64::new(0.0, 0.5 * (a + cd.x2)),
        cd.f(C64::from_polar(1.0, PI / 3.0)),
        C64::new(0.5 * (cd.x1 + cd.x2), 0.0),
    ]
}

/// Least-squares slope of `ln y` against `ln x` over the last three points.
pub fn fitted_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::LadderTooShort(points.len()));
    }
    let tail = &points[points.len() - 3..];
    let xs: Vec<f64> = tail.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 3.0;
    let my = ys.iter().sum::<f64>() / 3.0;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Maximum error per ladder instance and the fitted decay exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderFit {
    pub ns: Vec<usize>,
    pub max_err: Vec<f64>,
    pub decreasing: bool,
    pub slope: f64,
}

pub fn ladder_fit(tables: &[Vec<ErrorRow>]) -> Result<LadderFit> {
    let mut ns = Vec::new();
    let mut max_err = Vec::new();
    for t in tables {
        let Some(first) = t.first() else { continue };
        ns.push(first.n);
        max_err.push(t.iter().map(ErrorRow::magnitude).fold(0.0, f64::max));
    }
    let pts: Vec<(f64, f64)> = ns.iter().zip(&max_err).map(|(&n, &e)| (n as f64, e)).collect();
    let slope = fitted_slope(&pts)?;
    let decreasing = max_err.windows(2).all(|w| w[1] < w[0]);
    Ok(LadderFit { ns, max_err, decreasing, slope })
}

/// One ladder instance of the zero-distribution study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroRow {
    pub n: usize,
    pub ks: f64,
    /// Largest distance from a zero to `[-x1, x1]`.
    pub delta: f64,
    pub max_abs_im: f64,
    /// `x1` minus the largest real part of a zero.
    pub edge_gap: f64,
    pub mean: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroReport {
    pub rows: Vec<ZeroRow>,
    pub ks_decreasing: bool,
    pub delta_decreasing: bool,
}

/// KS distances to `mu1` and support excess along a ladder of zero sets.
pub fn zero_report(mp: &MeasurePair, ladder: &[(usize, Vec<C64>)]) -> Result<ZeroReport> {
    if ladder.len() < 3 {
        return Err(Error::LadderTooShort(ladder.len()));
    }
    let x1 = mp.sc.cd.x1;
    let rows: Vec<ZeroRow> = ladder
        .iter()
        .map(|(n, zs)| {
            let m = zero_counting_measure(zs, |x| mp.cdf.cdf(x));
            let mean = zs.iter().sum::<C64>() / zs.len().max(1) as f64;
            ZeroRow {
                n: *n,
                ks: m.ks,
                delta: max_distance_to_segment(zs, x1),
                max_abs_im: m.max_abs_im,
                edge_gap: x1 - zs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
                mean,
            }
        })
        .collect();
    let ks_decreasing = rows.windows(2).all(|w| w[1].ks < w[0].ks);
    // Zeros inside the segment give delta = 0, so ties count as decrease.
    let delta_decreasing = rows.windows(2).all(|w| w[1].delta <= w[0].delta);
    Ok(ZeroReport { rows, ks_decreasing, delta_decreasing })
}
