//! The cubic spectral curve
//!
//! `P(S,z) = z^3 S^3 - (t+4c) z^2 S^2 + a^2 (z S^3 + z^3 S) - a^2 (t+2c)(S^2 + z^2) + C1 z S - C2`
//!
//! and its three sheets. Branch values are produced from the labelled
//! preimages of the conformal map, `S_j(z) = f(1/F_j(z))`; an independent
//! route solves the cubic in `S` directly and matches roots to labels.

use crate::conformal::ConformalData;
use crate::error::{Error, Result};
use crate::poly::{self, Poly};
use crate::solve1d::{bisect, golden_max};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sheet {
    One,
    Two,
    Three,
}

impl Sheet {
    pub const ALL: [Sheet; 3] = [Sheet::One, Sheet::Two, Sheet::Three];

    pub fn index(self) -> usize {
        match self {
            Sheet::One => 0,
            Sheet::Two => 1,
            Sheet::Three => 2,
        }
    }
}

/// Points on the positive imaginary axis where the curve has nodes or `S1`
/// vanishes: `S1(i b0) = 0`, `S1(i b1) = S2(i b1) = i b1`,
/// `S1(i b2) = S3(i b2) = -i b2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nodes {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscRoot {
    pub re: f64,
    pub im: f64,
    pub multiplicity: u8,
}

impl DiscRoot {
    pub fn z(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// Number of solutions of `z S_j(z) = v` on the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZsCount {
    pub per_sheet: [usize; 3],
    pub total: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralCurve {
    pub cd: ConformalData,
    pub c1: f64,
    pub c2: f64,
    pub nodes: Nodes,
    /// Spread of `C1, C2` across the sample points used to extract them.
    pub constants_spread: f64,
}

/// Symmetric functions `(e1, e2, e3)` of the three branches in closed form.
pub fn symmetric_closed_form(a: f64, c: f64, t: f64, c1: f64, c2: f64, z: C64) -> [C64; 3] {
    let a2 = a * a;
    let d = z * z + a2;
    [
        ((t + 4.0 * c) * z * z + (t + 2.0 * c) * a2) / (z * d),
        (a2 * z * z + c1) / d,
        ((t + 2.0 * c) * a2 * z * z + c2) / (z * d),
    ]
}

/// Elementary symmetric functions of three values.
pub fn symmetric_of(s: &[C64; 3]) -> [C64; 3] {
    [
        s[0] + s[1] + s[2],
        s[0] * s[1] + s[0] * s[2] + s[1] * s[2],
        s[0] * s[1] * s[2],
    ]
}

impl SpectralCurve {
    pub fn new(cd: &ConformalData) -> Result<Self> {
        let mut sc = SpectralCurve {
            cd: *cd,
            c1: f64::NAN,
            c2: f64::NAN,
            nodes: Nodes {
                b0: f64::NAN,
                b1: f64::NAN,
                b2: f64::NAN,
            },
            constants_spread: 0.0,
        };
        let (c1, c2, spread) = sc.constants_from_parametrization()?;
        sc.c1 = c1;
        sc.c2 = c2;
        sc.constants_spread = spread;
        sc.nodes = sc.locate_nodes()?;
        Ok(sc)
    }

    fn a(&self) -> f64 {
        self.cd.params.a
    }

    fn c(&self) -> f64 {
        self.cd.params.c
    }

    fn t(&self) -> f64 {
        self.cd.params.t
    }

    /// `C1`, `C2` from the symmetric functions of parametrized branch values
    /// at a few generic points.
    fn constants_from_parametrization(&self) -> Result<(f64, f64, f64)> {
        let (a, t, c) = (self.a(), self.t(), self.c());
        let a2 = a * a;
        let pts = [
            C64::new(0.5, 0.7) * a,
            C64::new(1.3, 0.4) * a,
            C64::new(0.2, 1.6) * a,
            C64::new(-0.9, 0.3) * a,
        ];
        let mut c1s = Vec::new();
        let mut c2s = Vec::new();
        for z in pts {
            let e = symmetric_of(&self.eval_all(z)?);
            let d = z * z + a2;
            let c1 = e[1] * d - a2 * z * z;
            let c2 = e[2] * z * d - (t + 2.0 * c) * a2 * z * z;
            c1s.push(c1);
            c2s.push(c2);
        }
        let mean = |v: &[C64]| v.iter().sum::<C64>() / v.len() as f64;
        let (m1, m2) = (mean(&c1s), mean(&c2s));
        let spread = c1s
            .iter()
            .map(|x| (x - m1).norm())
            .chain(c2s.iter().map(|x| (x - m2).norm()))
            .chain([m1.im.abs(), m2.im.abs()])
            .fold(0.0f64, f64::max);
        let scale = a2 * a2 + c * c + 1.0;
        if spread > 1e-9 * scale {
            return Err(Error::InconsistentConstants(format!(
                "C1/C2 vary by {spread:e} across sample points"
            )));
        }
        Ok((m1.re, m2.re, spread))
    }

    /// Coefficients of `P(., z)` as a cubic in `S`, constant term first.
    pub fn cubic_in_s(&self, z: C64) -> [C64; 4] {
        let (a, t, c) = (self.a(), self.t(), self.c());
        let a2 = a * a;
        [
            -a2 * (t + 2.0 * c) * z * z - self.c2,
            a2 * z * z * z + self.c1 * z,
            -(t + 4.0 * c) * z * z - a2 * (t + 2.0 * c),
            z * z * z + a2 * z,
        ]
    }

    pub fn p(&self, s: C64, z: C64) -> C64 {
        poly::horner(&self.cubic_in_s(z), s).0
    }

    /// Residual of `P(S, z)` normalized by the size of its terms.
    pub fn relative_residual(&self, s: C64, z: C64) -> f64 {
        let c = self.cubic_in_s(z);
        let size: f64 = c
            .iter()
            .enumerate()
            .map(|(k, ck)| ck.norm() * s.norm().powi(k as i32))
            .sum();
        self.p(s, z).norm() / size.max(f64::MIN_POSITIVE)
    }

    fn s_of(&self, w: [C64; 3]) -> [C64; 3] {
        w.map(|w| self.cd.f(1.0 / w))
    }

    /// All three branch values `[S1, S2, S3]` at `z`; boundary values from
    /// the upper half-plane on the real axis.
    pub fn eval_all(&self, z: C64) -> Result<[C64; 3]> {
        Ok(self.s_of(self.cd.preimages(z)?))
    }

    pub fn eval_s(&self, z: C64, sheet: Sheet) -> Result<C64> {
        Ok(self.eval_all(z)?[sheet.index()])
    }

    /// Branch values along a path in the closed upper half-plane, continuing
    /// labels from point to point. The path must not pass through `±x1, ±x2`.
    pub fn track(&self, pts: &[C64]) -> Result<Vec<[C64; 3]>> {
        let Some(first) = pts.first() else {
            return Ok(vec![]);
        };
        let mut tr = self.cd.tracker_above(*first)?;
        let mut out = Vec::with_capacity(pts.len());
        for &p in pts {
            tr.advance(p)?;
            out.push(self.s_of(tr.roots()));
        }
        Ok(out)
    }

    /// Second route: roots of the cubic in `S`, matched to sheet labels.
    pub fn eval_all_cubic(&self, z: C64) -> Result<[C64; 3]> {
        let labels = self.eval_all(z)?;
        let roots = poly::roots(&self.cubic_in_s(z), 1e-15)?;
        let mut out = [C64::new(0.0, 0.0); 3];
        let mut used = [false; 3];
        for (j, l) in labels.iter().enumerate() {
            let (k, d) = roots
                .iter()
                .enumerate()
                .map(|(k, r)| (k, (r - l).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("three roots");
            let sep = roots
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != k)
                .map(|(_, r)| (r - roots[k]).norm())
                .fold(f64::INFINITY, f64::min);
            if used[k] || d > 0.25 * sep {
                return Err(Error::BranchAmbiguity { re: z.re, im: z.im });
            }
            used[k] = true;
            out[j] = roots[k];
        }
        Ok(out)
    }

    fn locate_nodes(&self) -> Result<Nodes> {
        let a = self.a();
        let eps = 1e-9 * a;
        let tol = 1e-15 * a;
        let im_s = |y: f64| -> Result<[f64; 3]> {
            let s = self.eval_all(C64::new(0.0, y))?;
            Ok([s[0].im, s[1].im, s[2].im])
        };
        let b0 = bisect(|y| Ok(im_s(y)?[0]), eps, a - eps, tol)?;
        let b1 = bisect(|y| im_s(y).map(|s| s[0] - s[1]), eps, a - eps, tol)?;
        let far = 1e3 * self.cd.scale();
        let b2 = bisect(|y| im_s(y).map(|s| s[0] - s[2]), a + eps, far, tol)?;
        Ok(Nodes { b0, b1, b2 })
    }

    /// The discriminant of `P(., z)` with respect to `S`, a polynomial of
    /// degree 12 in `z`.
    pub fn discriminant(&self) -> Poly {
        let (a, t, c) = (self.a(), self.t(), self.c());
        let a2 = a * a;
        let pa = Poly(vec![0.0, a2, 0.0, 1.0]);
        let pb = Poly(vec![-a2 * (t + 2.0 * c), 0.0, -(t + 4.0 * c)]);
        let pc = Poly(vec![0.0, self.c1, 0.0, a2]);
        let pd = Poly(vec![-self.c2, 0.0, -a2 * (t + 2.0 * c)]);
        let t1 = pa.mul(&pb).mul(&pc).mul(&pd).scale(18.0);
        let t2 = pb.pow(3).mul(&pd).scale(-4.0);
        let t3 = pb.pow(2).mul(&pc.pow(2));
        let t4 = pa.mul(&pc.pow(3)).scale(-4.0);
        let t5 = pa.pow(2).mul(&pd.pow(2)).scale(-27.0);
        t1.add(&t2).add(&t3).add(&t4).add(&t5)
    }

    /// Roots of the discriminant with multiplicities. In Phase 1 these are
    /// `±x1, ±x2` (simple) and `±i b1, ±i b2` (double).
    pub fn disc_roots(&self) -> Result<Vec<DiscRoot>> {
        let d = self.discriminant();
        if d.degree() != 12 {
            return Err(Error::UnexpectedRootPattern(format!("degree {}", d.degree())));
        }
        // Even in z: work with q(u), u = z^2.
        let q = d.even_part_in_square();
        let dq = q.deriv();
        let mut us = q.roots(1e-15)?;
        us.sort_by(|x, y| x.re.total_cmp(&y.re));
        let mut clusters: Vec<(f64, u8)> = Vec::new();
        let mut i = 0;
        while i < us.len() {
            let u = us[i];
            let scale = u.norm().max(1e-300);
            if let Some(v) = us.get(i + 1) {
                if (u - v).norm() < 1e-6 * scale {
                    clusters.push((0.5 * (u.re + v.re), 2));
                    i += 2;
                    continue;
                }
            }
            if u.im.abs() > 1e-7 * scale {
                return Err(Error::UnexpectedRootPattern(format!("non-real root u = {u}")));
            }
            clusters.push((u.re, 1));
            i += 1;
        }
        let mut out = Vec::new();
        for (mut u, m) in clusters {
            let target = if m == 1 { &q } else { &dq };
            let dt = target.deriv();
            for _ in 0..3 {
                let den = dt.eval(u);
                if den != 0.0 {
                    let nu = u - target.eval(u) / den;
                    if (nu - u).abs() < 1e-6 * u.abs() {
                        u = nu;
                    }
                }
            }
            let r = u.abs().sqrt();
            let (z1, z2) = if u >= 0.0 {
                (C64::new(r, 0.0), C64::new(-r, 0.0))
            } else {
                (C64::new(0.0, r), C64::new(0.0, -r))
            };
            for z in [z1, z2] {
                out.push(DiscRoot {
                    re: z.re,
                    im: z.im,
                    multiplicity: m,
                });
            }
        }
        self.check_pattern(&out)?;
        Ok(out)
    }

    fn check_pattern(&self, roots: &[DiscRoot]) -> Result<()> {
        let total: u32 = roots.iter().map(|r| r.multiplicity as u32).sum();
        let expect = [
            (self.cd.x1, 0.0, 1u8),
            (self.cd.x2, 0.0, 1),
            (0.0, self.nodes.b1, 2),
            (0.0, self.nodes.b2, 2),
        ];
        let found_all = expect.iter().all(|&(re, im, m)| {
            let z = C64::new(re, im);
            [z, -z].iter().all(|zz| {
                roots
                    .iter()
                    .any(|r| r.multiplicity == m && (r.z() - zz).norm() < 1e-6 * zz.norm())
            })
        });
        if total != 12 || roots.len() != 8 || !found_all {
            return Err(Error::UnexpectedRootPattern(format!("{roots:?}")));
        }
        Ok(())
    }

    /// Heights on the positive imaginary axis used for sign-change scans,
    /// sorted from top to bottom and refined near `a`.
    fn imaginary_scan_grid(&self, per_decade: usize) -> Vec<f64> {
        let a = self.a();
        let top = 1e4 * self.cd.scale();
        let bottom = 1e-6 * a;
        let decades = (top / bottom).log10();
        let n = (decades * per_decade as f64) as usize;
        let mut ys: Vec<f64> = (0..=n)
            .map(|k| bottom * 10f64.powf(decades * k as f64 / n as f64))
            .collect();
        for k in 1..=(9 * per_decade) {
            let d = a * 10f64.powf(-(k as f64) / per_decade as f64);
            ys.push(a + d);
            if d < a {
                ys.push(a - d);
            }
        }
        ys.retain(|y| (y - a).abs() > 1e-12 * a);
        ys.sort_by(|x, y| y.total_cmp(x));
        ys.dedup();
        ys
    }

    /// Counts solutions of `z S_j(z) = v` on the whole imaginary axis, per
    /// sheet. Both half-axes give the same values, so counts are even.
    pub fn zs_value_count(&self, v: f64) -> Result<ZsCount> {
        let a = self.a();
        let ys = self.imaginary_scan_grid(40);
        let pts: Vec<C64> = ys.iter().map(|&y| C64::new(0.0, y)).collect();
        let vals = self.track(&pts)?;
        let mut per_sheet = [0usize; 3];
        for j in 0..3 {
            let g: Vec<f64> = ys
                .iter()
                .zip(&vals)
                .map(|(&y, s)| (I * y * s[j]).re - v)
                .collect();
            for k in 1..g.len() {
                let straddles_pole = j == 0 && (ys[k - 1] - a) * (ys[k] - a) < 0.0;
                if !straddles_pole && g[k - 1].signum() != g[k].signum() {
                    per_sheet[j] += 2;
                }
            }
        }
        Ok(ZsCount {
            per_sheet,
            total: per_sheet.iter().sum(),
        })
    }

    /// Maximum `s2` of `z S1(z)` on `(0, i b0)` and its location `p2`.
    pub fn first_sheet_peak(&self) -> Result<(f64, f64)> {
        let b0 = self.nodes.b0;
        golden_max(
            |y| Ok((I * y * self.eval_s(C64::new(0.0, y), Sheet::One)?).re),
            1e-6 * b0,
            b0,
            1e-10 * b0,
        )
    }

    /// `max |S1(z) - conj(z)|` over droplet boundary samples.
    pub fn schwarz_error(&self, samples: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for (_, z) in self.cd.boundary(samples) {
            let s1 = self.eval_s(z, Sheet::One)?;
            worst = worst.max((s1 - z.conj()).norm());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::solve_conformal;
    use crate::model::ModelParams;
    use proptest::prelude::*;

    fn curve(t: f64) -> SpectralCurve {
        let cd = solve_conformal(&ModelParams::new(2.0, 1.0, t), 1e-13).unwrap();
        SpectralCurve::new(&cd).unwrap()
    }

    /// Nodes from the parametrization: `f(w) = ±f(1/w)` has non-trivial
    /// solutions on a quadratic in `w^2`.
    fn node_oracle(cd: &ConformalData, sign: f64) -> f64 {
        let (r, k, al) = (cd.rho, cd.kappa, cd.alpha);
        let a2 = al * al;
        let qa = r * a2;
        let qb = r * (1.0 + a2 * a2) - sign * 2.0 * k * (1.0 - sign * a2);
        let disc = qb * qb - 4.0 * qa * qa;
        let u = (-qb + disc.sqrt()) / (2.0 * qa);
        assert!(u < 0.0);
        cd.f(C64::new(0.0, (-u).sqrt())).im.abs()
    }

    #[test]
    fn nodes_match_parametrization() {
        let sc = curve(0.1);
        let cd = &sc.cd;
        let n = sc.nodes;
        assert!((n.b1 - node_oracle(cd, 1.0)).abs() < 1e-10, "{n:?}");
        assert!((n.b2 - node_oracle(cd, -1.0)).abs() < 1e-10, "{n:?}");
        let beta = (cd.alpha.powi(2) + 2.0 * cd.kappa / cd.rho).sqrt();
        let b0 = cd.f(C64::new(0.0, 1.0 / beta)).im.abs();
        assert!((n.b0 - b0).abs() < 1e-10, "{} vs {}", n.b0, b0);
        assert!(0.0 < n.b0 && n.b0 < n.b1 && n.b1 < 2.0 && 2.0 < n.b2);
        let s1 = sc.eval_s(C64::new(0.0, n.b1), Sheet::One).unwrap();
        assert!((s1 - I * n.b1).norm() < 1e-9);
        let s1 = sc.eval_s(C64::new(0.0, n.b2), Sheet::One).unwrap();
        assert!((s1 + I * n.b2).norm() < 1e-9);
    }

    #[test]
    fn constants_obey_bounds() {
        let sc = curve(0.1);
        assert!(sc.c1 > 20.0);
        let b0 = sc.nodes.b0;
        assert!((sc.c2 - 4.0 * 2.1 * b0 * b0).abs() < 1e-9);
        let s2 = sc.eval_s(C64::new(0.0, 0.0), Sheet::Two).unwrap();
        assert!((s2 - I * b0).norm() < 1e-9);
    }

    #[test]
    fn far_field() {
        let sc = curve(0.1);
        let z = C64::new(300.0, 500.0);
        let s = sc.eval_all(z).unwrap();
        let zz = z * z;
        assert!(((s[0] - 2.1 / z) * zz).norm() < 10.0);
        assert!(((s[1] - 2.0 * I - 1.0 / z) * zz).norm() < 10.0);
        assert!(((s[2] + 2.0 * I - 1.0 / z) * zz).norm() < 10.0);
        let s = sc.eval_all(z.conj()).unwrap();
        assert!(((s[1] + 2.0 * I - 1.0 / z.conj()) * zz).norm() < 10.0);
    }

    #[test]
    fn gluing_across_cuts() {
        let sc = curve(0.1);
        let (x1, x2) = (sc.cd.x1, sc.cd.x2);
        for x in [-0.9 * x1, -0.3 * x1, 0.0, 0.5 * x1, 0.99 * x1] {
            let s = sc.eval_all(C64::new(x, 0.0)).unwrap();
            assert!((s[0] - s[1].conj()).norm() < 1e-10, "x={x}");
        }
        for x in [1.01 * x2, 2.0 * x2, -5.0 * x2] {
            let s = sc.eval_all(C64::new(x, 0.0)).unwrap();
            assert!((s[1] - s[2].conj()).norm() < 1e-10, "x={x}");
        }
        for x in [0.5 * (x1 + x2), -0.5 * (x1 + x2)] {
            let s = sc.eval_all(C64::new(x, 0.0)).unwrap();
            assert!(s.iter().all(|v| v.im.abs() < 1e-10), "x={x} {s:?}");
        }
    }

    #[test]
    fn cubic_route_agrees() {
        let sc = curve(0.1);
        for z in [C64::new(0.3, 0.2), C64::new(-1.0, 0.7), C64::new(0.1, -2.5)] {
            let a = sc.eval_all(z).unwrap();
            let b = sc.eval_all_cubic(z).unwrap();
            for j in 0..3 {
                assert!((a[j] - b[j]).norm() < 1e-9 * a[j].norm().max(1.0));
            }
        }
    }

    #[test]
    fn discriminant_pattern() {
        let sc = curve(0.1);
        let d = sc.discriminant();
        assert_eq!(d.degree(), 12);
        let roots = sc.disc_roots().unwrap();
        let simple: Vec<_> = roots.iter().filter(|r| r.multiplicity == 1).collect();
        for x in [sc.cd.x1, sc.cd.x2] {
            assert!(simple.iter().any(|r| (r.re - x).abs() < 1e-8 && r.im == 0.0));
            assert!(simple.iter().any(|r| (r.re + x).abs() < 1e-8 && r.im == 0.0));
        }
    }

    #[test]
    fn zs_counts() {
        let sc = curve(0.1);
        let (_, s2) = sc.first_sheet_peak().unwrap();
        let n = sc.zs_value_count(0.5 * s2).unwrap();
        assert_eq!(n.per_sheet[0], 4, "{n:?}");
        assert_eq!(n.total, 4, "{n:?}");
        for v in [-3.0, -0.5, 2.5, 10.0] {
            assert_eq!(sc.zs_value_count(v).unwrap().total, 4, "v={v}");
        }
    }

    #[test]
    fn schwarz_function_on_boundary() {
        let sc = curve(0.1);
        assert!(sc.schwarz_error(256).unwrap() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn branches_lie_on_curve(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let sc = curve(0.1);
            let z = C64::new(re, im);
            prop_assume!(z.norm() > 1e-3 && (z - 2.0 * I).norm() > 1e-3 && (z + 2.0 * I).norm() > 1e-3);
            prop_assume!(im.abs() > 1e-6 || (re.abs() - sc.cd.x1).abs() > 1e-3 && (re.abs() - sc.cd.x2).abs() > 1e-3);
            let s = sc.eval_all(z).unwrap();
            // C1, C2 are extracted numerically, to about 1e-11.
            for v in s {
                prop_assert!(sc.relative_residual(v, z) < 1e-10);
            }
            let e = symmetric_of(&s);
            let cf = symmetric_closed_form(2.0, 1.0, 0.1, sc.c1, sc.c2, z);
            for k in 0..3 {
                prop_assert!((e[k] - cf[k]).norm() < 1e-10 * cf[k].norm().max(1.0));
            }
            // Odd symmetry and conjugation symmetry.
            let sm = sc.eval_all(-z).unwrap();
            let sc_ = sc.eval_all(z.conj()).unwrap();
            for j in 0..3 {
                prop_assert!((sm[j] + s[j]).norm() < 1e-9 * s[j].norm().max(1.0));
                prop_assert!((sc_[j] - s[j].conj()).norm() < 1e-9 * s[j].norm().max(1.0));
            }
            // P(S, z) = P(z, S)
            prop_assert!((sc.p(s[0], z) - sc.p(z, s[0])).norm() < 1e-9 * (1.0 + sc.p(s[0], z).norm() + z.norm().powi(6)));
        }
    }
}
