//! Rational conformal map of the exterior disk onto the droplet complement.
//!
//! `f(w) = rho w + 2 kappa w / (w^2 + alpha^2)` maps `|w| > 1` onto the
//! exterior of the droplet. The same map, read as a three-sheeted cover, is a
//! rational parametrization of the spectral curve: if `w` is any preimage of
//! `z` then `(S, z) = (f(1/w), z)` lies on the curve. Preimages are labelled by
//! sheet via continuation from infinity, see [`ConformalData::preimages`].

use crate::error::{Error, Result};
use crate::model::{t_c, ModelParams};
use crate::poly::{aberth_with, horner};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Coefficients `(rho, kappa, alpha)` of the map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub rho: f64,
    pub kappa: f64,
    pub alpha: f64,
}

/// Map coefficients together with the Phase-1 critical data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalData {
    pub params: ModelParams,
    pub rho: f64,
    pub kappa: f64,
    pub alpha: f64,
    /// Critical points of `f` on the positive axis, `0 < w2 < w1`.
    pub w1: f64,
    pub w2: f64,
    /// Critical values `x1 = f(w1) < x2 = f(w2)`.
    pub x1: f64,
    pub x2: f64,
    /// Max-norm residual of the three defining equations.
    pub residual: f64,
}

/// Residuals of the three equations tying `(rho, kappa, alpha)` to `(a, c, t)`.
pub fn residuals(p: &ModelParams, m: &MapParams) -> [f64; 3] {
    let MapParams { rho, kappa, alpha } = *m;
    let a2 = alpha * alpha;
    let a4 = a2 * a2;
    [
        rho / alpha - 2.0 * kappa * alpha / (1.0 - a4) - p.a,
        rho * kappa / a2 + 2.0 * kappa * kappa * (1.0 + a4) / (1.0 - a4).powi(2) - p.c,
        rho * rho + 2.0 * rho * kappa / a2 - p.t - 2.0 * p.c,
    ]
}

fn max_abs(r: &[f64]) -> f64 {
    r.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `kappa` eliminated through the area equation.
fn kappa_of(p: &ModelParams, rho: f64, alpha: f64) -> f64 {
    alpha * alpha * (p.t + 2.0 * p.c - rho * rho) / (2.0 * rho)
}

fn reduced(p: &ModelParams, x: [f64; 2]) -> [f64; 2] {
    let m = MapParams {
        rho: x[0],
        kappa: kappa_of(p, x[0], x[1]),
        alpha: x[1],
    };
    let r = residuals(p, &m);
    [r[0], r[1]]
}

fn admissible(x: [f64; 2]) -> bool {
    x[0] > 0.0 && x[1] > 0.0 && x[1] < 1.0 && x[0].is_finite() && x[1].is_finite()
}

/// Damped Newton on `(rho, alpha)` with a finite-difference Jacobian.
fn newton(p: &ModelParams, mut x: [f64; 2], tol: f64) -> Option<[f64; 2]> {
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut r = reduced(p, x);
    for _ in 0..60 {
        if norm(r) < tol {
            return Some(x);
        }
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let h = 1e-7 * x[k].abs().max(1e-6);
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let (rp, rm) = (reduced(p, xp), reduced(p, xm));
            jac[0][k] = (rp[0] - rm[0]) / (2.0 * h);
            jac[1][k] = (rp[1] - rm[1]) / (2.0 * h);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = [
            (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            (-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
        ];
        let mut lam = 1.0;
        loop {
            let trial = [x[0] - lam * dx[0], x[1] - lam * dx[1]];
            if admissible(trial) {
                let rt = reduced(p, trial);
                if norm(rt) < norm(r) || (lam < 1e-3 && norm(rt) <= norm(r)) {
                    x = trial;
                    r = rt;
                    break;
                }
            }
            lam *= 0.5;
            if lam < 1e-10 {
                return if norm(r) < tol { Some(x) } else { None };
            }
        }
    }
    (norm(r) < tol).then_some(x)
}

/// Solves the map equations for any `0 < t < t_c` by continuation in `t`
/// from the small-`t` asymptotics `(sqrt t, sqrt t / a)`.
///
/// This does not certify Phase 1; see [`solve_conformal`].
pub fn solve_map(p: &ModelParams, tol: f64) -> Result<MapParams> {
    let report = p.validate();
    let shape_ok = report.violations.iter().all(|v| {
        matches!(v, crate::model::Violation::BeyondTStar { .. })
    });
    if !shape_ok {
        return Err(Error::InvalidParams(format!("{:?}", report.violations)));
    }
    let tc = t_c(p.a, p.c);
    if p.t >= tc {
        return Err(Error::InvalidParams(format!("t = {} >= t_c = {}", p.t, tc)));
    }
    let at = |t: f64| ModelParams::new(p.a, p.c, t);
    let inner_tol = tol.min(1e-13) * 0.1;

    let mut t0 = p.t.min(0.01 * tc);
    let mut x = loop {
        let seed = [t0.sqrt(), t0.sqrt() / p.a];
        if let Some(x) = newton(&at(t0), seed, inner_tol) {
            break x;
        }
        t0 *= 0.1;
        if t0 < 1e-12 * tc {
            return Err(Error::NoConvergence("no solution near the small-t seed".into()));
        }
    };

    let mut t = t0;
    let mut prev: Option<(f64, [f64; 2])> = None;
    let mut dt = (p.t - t0) / 16.0;
    let mut guard = 0;
    while t < p.t {
        guard += 1;
        if guard > 10_000 || dt < 1e-14 * tc {
            return Err(Error::NoConvergence(format!("continuation stalled at t = {t}")));
        }
        let next_t = (t + dt).min(p.t);
        let guess = match prev {
            Some((tp, xp)) => {
                let s = (next_t - t) / (t - tp);
                [x[0] + s * (x[0] - xp[0]), x[1] + s * (x[1] - xp[1])]
            }
            None => x,
        };
        let guess = if admissible(guess) { guess } else { x };
        match newton(&at(next_t), guess, inner_tol) {
            Some(nx) => {
                prev = Some((t, x));
                x = nx;
                t = next_t;
                dt *= 1.5;
            }
            None => dt *= 0.5,
        }
    }
    let m = MapParams {
        rho: x[0],
        kappa: kappa_of(p, x[0], x[1]),
        alpha: x[1],
    };
    let res = max_abs(&residuals(p, &m));
    if res >= tol {
        return Err(Error::NoConvergence(format!("residual {res:e} above {tol:e}")));
    }
    Ok(m)
}

/// Critical points `w^2` of `f` on the positive axis, larger first.
pub fn critical_squares(m: &MapParams) -> Result<(f64, f64)> {
    let MapParams { rho, kappa, alpha } = *m;
    let a2 = alpha * alpha;
    let qa = rho;
    let qb = 2.0 * rho * a2 - 2.0 * kappa;
    let qc = rho * a2 * a2 + 2.0 * kappa * a2;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Err(Error::PhaseViolation(format!(
            "critical points of f are not real (discriminant {disc:e})"
        )));
    }
    let s = disc.sqrt();
    let big = if qb <= 0.0 { (-qb + s) / (2.0 * qa) } else { (-qb - s) / (2.0 * qa) };
    if big == 0.0 {
        return Err(Error::PhaseViolation("degenerate critical points".into()));
    }
    let small = qc / (qa * big);
    let (u1, u2) = if big >= small { (big, small) } else { (small, big) };
    if u2 <= 0.0 {
        return Err(Error::PhaseViolation(format!(
            "critical points w^2 = {u1}, {u2} not both positive"
        )));
    }
    Ok((u1, u2))
}

/// Signed discriminant of the critical-point quadratic in `w^2`; it changes
/// sign where the two real critical points merge.
pub fn critical_discriminant(m: &MapParams) -> f64 {
    let MapParams { rho, kappa, alpha } = *m;
    let a2 = alpha * alpha;
    let qb = 2.0 * rho * a2 - 2.0 * kappa;
    let qc = rho * a2 * a2 + 2.0 * kappa * a2;
    (qb * qb - 4.0 * rho * qc) / (rho * rho)
}

/// Gap `x2 - x1` at `t`, or `None` once the real critical points are gone.
pub fn critical_gap(a: f64, c: f64, t: f64) -> Result<Option<f64>> {
    let p = ModelParams::new(a, c, t);
    let m = solve_map(&p, 1e-12)?;
    match critical_squares(&m) {
        Ok((u1, u2)) => {
            let fm = |w: f64| m.rho * w + 2.0 * m.kappa * w / (w * w + m.alpha * m.alpha);
            Ok(Some(fm(u2.sqrt()) - fm(u1.sqrt())))
        }
        Err(Error::PhaseViolation(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Estimate of `t*` from the closing of the gap between the critical values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergingEstimate {
    /// Last `t` with a gap and first `t` without, after bisection.
    pub bracket: (f64, f64),
    /// `(t, x2 - x1)` used for the extrapolation.
    pub samples: Vec<(f64, f64)>,
    /// Zero of the gap, extrapolated from `gap^{2/3}` by inverse quadratic
    /// interpolation.
    pub extrapolated: f64,
}

/// Locates where `x2(t) - x1(t)` closes, by a geometric scan in `t`,
/// bisection, and extrapolation from three samples just below the bracket.
pub fn merging_time(a: f64, c: f64) -> Result<MergingEstimate> {
    let tc = t_c(a, c);
    let mut lo = 1e-3 * tc;
    if critical_gap(a, c, lo)?.is_none() {
        return Err(Error::PhaseViolation(format!("no gap at t = {lo}")));
    }
    let mut hi = lo;
    loop {
        hi *= 1.1;
        if hi >= tc {
            return Err(Error::NoConvergence("gap does not close below t_c".into()));
        }
        if critical_gap(a, c, hi)?.is_none() {
            break;
        }
        lo = hi;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if critical_gap(a, c, mid)?.is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut samples = Vec::with_capacity(3);
    for j in 1..=3 {
        let t = lo * (1.0 - 2e-3 * j as f64);
        let g = critical_gap(a, c, t)?
            .ok_or_else(|| Error::NoConvergence(format!("gap vanished below bracket at {t}")))?;
        samples.push((t, g));
    }
    // t as a quadratic in s = gap^{2/3}, evaluated at s = 0.
    let s: Vec<f64> = samples.iter().map(|&(_, g)| g.powf(2.0 / 3.0)).collect();
    let t: Vec<f64> = samples.iter().map(|&(t, _)| t).collect();
    let mut extrapolated = 0.0;
    for i in 0..3 {
        let mut l = 1.0;
        for j in 0..3 {
            if j != i {
                l *= (0.0 - s[j]) / (s[i] - s[j]);
            }
        }
        extrapolated += t[i] * l;
    }
    Ok(MergingEstimate { bracket: (lo, hi), samples, extrapolated })
}

/// Phase-1 solve: validates `0 < t < t*`, solves the map and certifies
/// real critical points.
pub fn solve_conformal(p: &ModelParams, tol: f64) -> Result<ConformalData> {
    p.validate().into_result()?;
    let m = solve_map(p, tol)?;
    from_map(p, &m)
}

/// Attaches the critical data to a solved map.
pub fn from_map(p: &ModelParams, m: &MapParams) -> Result<ConformalData> {
    let (u1, u2) = critical_squares(m)?;
    let (w1, w2) = (u1.sqrt(), u2.sqrt());
    let fm = |w: f64| m.rho * w + 2.0 * m.kappa * w / (w * w + m.alpha * m.alpha);
    let (x1, x2) = (fm(w1), fm(w2));
    if x1 >= x2 {
        return Err(Error::PhaseViolation(format!("critical values out of order: {x1} >= {x2}")));
    }
    Ok(ConformalData {
        params: *p,
        rho: m.rho,
        kappa: m.kappa,
        alpha: m.alpha,
        w1,
        w2,
        x1,
        x2,
        residual: max_abs(&residuals(p, m)),
    })
}

/// Tracks the three labelled preimages of a moving point under `f`.
///
/// Index 0 follows the exterior sheet (`w ~ z/rho` at infinity), index 1 the
/// sheet where `S -> +ia` in the upper half-plane (`w -> -i alpha`), index 2
/// the sheet where `S -> -ia` (`w -> i alpha`).
#[derive(Debug, Clone)]
pub struct Tracker {
    map: MapParams,
    z: C64,
    w: [C64; 3],
}

impl Tracker {
    fn coeffs(&self, z: C64) -> [C64; 4] {
        let MapParams { rho, kappa, alpha } = self.map;
        let a2 = alpha * alpha;
        [-z * a2, C64::new(rho * a2 + 2.0 * kappa, 0.0), -z, C64::new(rho, 0.0)]
    }

    fn solve_from(&self, z: C64, seeds: [C64; 3]) -> Option<[C64; 3]> {
        let c = self.coeffs(z);
        let dc = [c[1], c[2] * 2.0, c[3] * 3.0];
        let ratio = |w: C64| {
            let (p, _) = horner(&c, w);
            let (dp, _) = horner(&dc, w);
            p / dp
        };
        let r = aberth_with(seeds.to_vec(), ratio, 1e-15, 80).ok()?;
        let mut out = [r[0], r[1], r[2]];
        for w in out.iter_mut() {
            *w = crate::poly::polish(&c, *w, 2);
        }
        Some(out)
    }

    /// Starts at a point high above the real axis where labels follow from
    /// the asymptotics.
    pub fn anchor(map: MapParams, z: C64) -> Result<Self> {
        let mut tr = Tracker {
            map,
            z,
            w: [C64::new(0.0, 0.0); 3],
        };
        let seeds = [z / map.rho, -I * map.alpha, I * map.alpha];
        let w = tr
            .solve_from(z, seeds)
            .ok_or(Error::BranchAmbiguity { re: z.re, im: z.im })?;
        for i in 0..3 {
            for j in 0..3 {
                if i != j && (w[i] - seeds[i]).norm() >= (w[i] - seeds[j]).norm() {
                    return Err(Error::BranchAmbiguity { re: z.re, im: z.im });
                }
            }
        }
        tr.w = w;
        Ok(tr)
    }

    pub fn z(&self) -> C64 {
        self.z
    }

    pub fn roots(&self) -> [C64; 3] {
        self.w
    }

    fn min_sep(w: &[C64; 3], i: usize) -> f64 {
        (0..3)
            .filter(|&j| j != i)
            .map(|j| (w[i] - w[j]).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Moves along the straight segment to `target`, subdividing until each
    /// root moves much less than its distance to the other two.
    pub fn advance(&mut self, target: C64) -> Result<()> {
        let start = self.z;
        let mut s = 0.0;
        let mut ds = 1.0f64;
        let mut count = 0;
        while s < 1.0 {
            count += 1;
            if count > 4000 || ds < 1e-13 {
                return Err(Error::BranchAmbiguity {
                    re: target.re,
                    im: target.im,
                });
            }
            let s_next = (s + ds).min(1.0);
            let z_next = start + (target - start) * s_next;
            let ok = self.solve_from(z_next, self.w).filter(|nw| {
                (0..3).all(|i| {
                    let mv = (nw[i] - self.w[i]).norm();
                    mv < 0.3 * Self::min_sep(&self.w, i) && mv < 0.3 * Self::min_sep(nw, i)
                })
            });
            match ok {
                Some(nw) => {
                    self.w = nw;
                    self.z = z_next;
                    s = s_next;
                    ds *= 2.0;
                }
                None => ds *= 0.25,
            }
        }
        self.z = target;
        Ok(())
    }
}

impl ConformalData {
    pub fn map(&self) -> MapParams {
        MapParams {
            rho: self.rho,
            kappa: self.kappa,
            alpha: self.alpha,
        }
    }

    pub fn f(&self, w: C64) -> C64 {
        self.rho * w + 2.0 * self.kappa * w / (w * w + self.alpha * self.alpha)
    }

    pub fn df(&self, w: C64) -> C64 {
        let a2 = self.alpha * self.alpha;
        let d = w * w + a2;
        self.rho + 2.0 * self.kappa * (a2 - w * w) / (d * d)
    }

    /// Length scale used for anchoring continuation paths.
    pub fn scale(&self) -> f64 {
        self.x2.max(self.params.a).max(1.0)
    }

    /// Tracker started far above `z`; callers then `advance` it.
    pub fn tracker_above(&self, z: C64) -> Result<Tracker> {
        let h = 1e3 * (self.scale() + z.norm());
        Tracker::anchor(self.map(), C64::new(z.re, z.im.max(0.0) + h))
    }

    /// Labelled preimages `[F1(z), F2(z), F3(z)]`. On the real axis the
    /// boundary values from the upper half-plane are returned.
    pub fn preimages(&self, z: C64) -> Result<[C64; 3]> {
        if z.im < 0.0 {
            let w = self.preimages(z.conj())?;
            return Ok([w[0].conj(), w[1].conj(), w[2].conj()]);
        }
        let mut tr = self.tracker_above(z)?;
        tr.advance(z)?;
        Ok(tr.roots())
    }

    /// Inverse on the exterior sheet, undefined on `[-x1, x1]`.
    pub fn f_inv_exterior(&self, z: C64) -> Result<C64> {
        if z.im == 0.0 && z.re.abs() <= self.x1 {
            return Err(Error::InvalidParams(format!(
                "exterior inverse is undefined on [-x1, x1], got {}",
                z.re
            )));
        }
        Ok(self.preimages(z)?[0])
    }

    /// Droplet boundary `f(e^{i theta})` at `samples` equally spaced angles.
    pub fn boundary(&self, samples: usize) -> Vec<(f64, C64)> {
        (0..samples)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / samples as f64;
                (th, self.f(C64::from_polar(1.0, th)))
            })
            .collect()
    }

    /// `(1/2) Im ∮ conj(z) dz` by the trapezoid rule, which is spectrally
    /// accurate for the analytic periodic integrand.
    pub fn area(&self, samples: usize) -> f64 {
        let h = 2.0 * PI / samples as f64;
        (0..samples)
            .map(|k| {
                let u = C64::from_polar(1.0, k as f64 * h);
                let dz = self.df(u) * I * u;
                0.5 * (self.f(u).conj() * dz).im
            })
            .sum::<f64>()
            * h
    }

    /// Harmonic moment `(1/2 pi i) ∮ conj(z) z^{-k} dz` over the droplet boundary.
    pub fn harmonic_moment(&self, k: u32, samples: usize) -> f64 {
        let h = 2.0 * PI / samples as f64;
        let s: C64 = (0..samples)
            .map(|j| {
                let u = C64::from_polar(1.0, j as f64 * h);
                let z = self.f(u);
                z.conj() * z.powi(-(k as i32)) * self.df(u) * I * u
            })
            .sum();
        (s * h / (2.0 * PI * I)).re
    }
}

/// Closed-form harmonic moments of `V(z) = c log(z^2 + a^2)`.
pub fn harmonic_moment_exact(a: f64, c: f64, k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let sign = if (k / 2) % 2 == 1 { 1.0 } else { -1.0 };
    sign * 2.0 * c / a.powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cd(a: f64, c: f64, t: f64) -> ConformalData {
        solve_conformal(&ModelParams::new(a, c, t), 1e-13).unwrap()
    }

    #[test]
    fn residuals_and_ranges() {
        let d = cd(2.0, 1.0, 0.1);
        assert!(d.residual < 1e-13);
        assert!(d.alpha > 0.0 && d.alpha < 1.0);
        assert!(d.rho >= d.params.t.sqrt());
        assert!(d.w2 < d.w1 && d.x1 < d.x2);
    }

    #[test]
    fn critical_points_vanish_derivative() {
        let d = cd(2.0, 1.0, 0.1);
        for w in [d.w1, d.w2] {
            assert!(d.df(C64::new(w, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn pole_maps_to_insertion_point() {
        let d = cd(2.0, 1.0, 0.1);
        let z = d.f(I / d.alpha);
        assert!((z - I * 2.0).norm() < 1e-12, "{z}");
    }

    #[test]
    fn small_t_seed_residual_is_order_t() {
        for t in [1e-2, 1e-3, 1e-4] {
            let p = ModelParams::new(2.0, 1.0, t);
            let s = t.sqrt();
            let seed = MapParams { rho: s, alpha: s / 2.0, kappa: s / 4.0 };
            assert!(max_abs(&residuals(&p, &seed)) < 2.0 * t);
            let d = solve_conformal(&p, 1e-13).unwrap();
            assert!(d.rho >= s);
            // The solution itself is not the seed: rho/sqrt(t) tends to 2/sqrt(3) here.
            assert!((d.rho / s - 2.0 / 3f64.sqrt()).abs() < 0.01);
        }
    }

    #[test]
    fn gap_closes_at_quintic_root() {
        let ts = crate::model::t_star(2.0, 1.0, 1e-15).unwrap();
        let est = merging_time(2.0, 1.0).unwrap();
        assert!((est.bracket.0 - ts).abs() < 1e-9 * ts, "{est:?}");
        assert!((est.extrapolated - ts).abs() < 1e-6 * ts, "{est:?}");
        assert!(est.samples.windows(2).all(|w| w[1].1 > w[0].1));
    }

    #[test]
    fn phase_two_map_solves_but_is_not_certified() {
        let p = ModelParams::new(2.0, 1.0, 2.0);
        let m = solve_map(&p, 1e-12).unwrap();
        assert!(max_abs(&residuals(&p, &m)) < 1e-12);
        assert!(matches!(solve_conformal(&p, 1e-12), Err(Error::PhaseViolation(_))));
        assert!(matches!(critical_squares(&m), Err(Error::PhaseViolation(_))));
    }

    #[test]
    fn exterior_inverse_round_trip() {
        let d = cd(2.0, 1.0, 0.1);
        for z in [
            C64::new(1.0, 0.0),
            C64::new(-0.6, 0.0),
            C64::new(0.1, 0.3),
            C64::new(0.0, -2.5),
            C64::new(3.0, 4.0),
        ] {
            let w = d.f_inv_exterior(z).unwrap();
            assert!((d.f(w) - z).norm() < 1e-12 * z.norm().max(1.0));
        }
        assert!(d.f_inv_exterior(C64::new(0.2, 0.0)).is_err());
    }

    #[test]
    fn exterior_sheet_far_field() {
        let d = cd(2.0, 1.0, 0.1);
        let z = C64::new(300.0, 400.0);
        let w = d.f_inv_exterior(z).unwrap();
        assert!((w * d.rho / z - 1.0).norm() < 1e-4);
    }

    #[test]
    fn area_and_moments() {
        let d = cd(2.0, 1.0, 0.1);
        assert!((d.area(256) - PI * 0.1).abs() < 1e-12);
        for k in 1..=8 {
            let m = d.harmonic_moment(k, 256);
            assert!((m - harmonic_moment_exact(2.0, 1.0, k)).abs() < 1e-10, "k={k}: {m}");
        }
        assert_eq!(harmonic_moment_exact(2.0, 1.0, 2), 0.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn solutions_satisfy_equations(a in 1.0f64..4.0, s in 0.1f64..1.0, frac in 0.02f64..0.95) {
            let c = s * a * a / 2.0;
            let ts = crate::model::t_star(a, c, 1e-14).unwrap();
            let p = ModelParams::new(a, c, frac * ts);
            let d = solve_conformal(&p, 1e-12).unwrap();
            prop_assert!(d.residual < 1e-12);
            prop_assert!(d.alpha > 0.0 && d.alpha < 1.0);
            prop_assert!(d.rho >= p.t.sqrt() * (1.0 - 1e-12));
            prop_assert!((d.area(256) - PI * p.t).abs() < 1e-10 * p.t.max(1.0));
        }

        #[test]
        fn scaling_covariance(frac in 0.05f64..0.9, l in prop::sample::select(vec![0.5, 2.0])) {
            let ts = crate::model::t_star(2.0, 1.0, 1e-15).unwrap();
            let p = ModelParams::new(2.0, 1.0, frac * ts);
            let d = solve_conformal(&p, 1e-13).unwrap();
            let e = solve_conformal(&p.scaled(l), 1e-13).unwrap();
            prop_assert!((e.x1 - l * d.x1).abs() < 1e-9 * e.x1);
            prop_assert!((e.x2 - l * d.x2).abs() < 1e-9 * e.x2);
            prop_assert!((e.rho - l * d.rho).abs() < 1e-9 * e.rho);
        }
    }
}
