//! One function per subcommand. Each returns a JSON summary and the
//! plot-ready tables that go to the output directory.

use serde_json::{json, Value};

use motherbody::conformal::solve_conformal;
use motherbody::export::Table;
use motherbody::measures::MeasurePair;
use motherbody::model::{quintic_coeffs, t_c, t_star, t_star_bound, ModelParams};
use motherbody::oracle::{
    default_frac_bits, solve_kernel_route, solve_moment_route, zeros, OracleParams,
};
use motherbody::spectral::SpectralCurve;
use motherbody::verify::{run_suite, SuiteConfig};
use motherbody::Exec;

use crate::config::{RouteArg, Settings};
use crate::CliError;

pub const DEFAULT_TOL: f64 = 1e-13;
pub const DEFAULT_SAMPLES: usize = 256;
pub const DEFAULT_GRID: usize = 400;
pub const HARMONIC_MOMENTS: u32 = 8;
/// Minimum trapezoid nodes for area and moments.
pub const QUADRATURE_SAMPLES: usize = 2048;

#[derive(Debug, Clone)]
pub struct Output {
    pub summary: Value,
    pub tables: Vec<(&'static str, Table)>,
}

impl Output {
    fn summary(summary: Value) -> Self {
        Self { summary, tables: Vec::new() }
    }
}

fn params(s: &Settings) -> Result<ModelParams, CliError> {
    Ok(ModelParams::new(s.require_a()?, s.require_c()?, s.require_t()?))
}

fn tol(s: &Settings) -> f64 {
    s.tol.unwrap_or(DEFAULT_TOL)
}

/// Midpoints of `count` equal cells of `[lo, hi]`.
fn midpoints(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let h = (hi - lo) / count as f64;
    (0..count).map(|k| lo + (k as f64 + 0.5) * h).collect()
}

pub fn phase(s: &Settings) -> Result<Output, CliError> {
    let (a, c) = (s.require_a()?, s.require_c()?);
    let mut summary = json!({
        "a": a,
        "c": c,
        "t_c": t_c(a, c),
        "t_star": t_star(a, c, 1e-15)?,
        "t_star_upper_bound": t_star_bound(a, c),
        "quintic": quintic_coeffs(a, c),
    });
    if let Some(t) = s.t {
        let report = ModelParams::new(a, c, t).validate();
        summary["t"] = json!(t);
        summary["phase_one"] = json!(report.is_valid());
        summary["violations"] =
            json!(report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>());
    }
    Ok(Output::summary(summary))
}

pub fn droplet(s: &Settings) -> Result<Output, CliError> {
    let p = params(s)?;
    let samples = s.samples.unwrap_or(DEFAULT_SAMPLES);
    if samples < 8 {
        return Err(CliError::Invalid("--samples must be at least 8".into()));
    }
    let cd = solve_conformal(&p, tol(s))?;
    let quad = samples.max(QUADRATURE_SAMPLES);
    let moments: Vec<f64> = (1..=HARMONIC_MOMENTS).map(|k| cd.harmonic_moment(k, quad)).collect();
    let mut boundary = Table::new(["theta", "re_z", "im_z"]);
    for (th, z) in cd.boundary(samples) {
        boundary.push(vec![th, z.re, z.im]);
    }
    let summary = json!({
        "a": p.a, "c": p.c, "t": p.t,
        "rho": cd.rho, "kappa": cd.kappa, "alpha": cd.alpha,
        "w1": cd.w1, "w2": cd.w2, "x1": cd.x1, "x2": cd.x2,
        "residual": cd.residual,
        "samples": samples,
        "area": cd.area(quad),
        "moments": moments,
    });
    Ok(Output { summary, tables: vec![("boundary", boundary)] })
}

pub fn measures(s: &Settings, exec: Exec) -> Result<Output, CliError> {
    let p = params(s)?;
    let grid = s.grid.unwrap_or(DEFAULT_GRID);
    if grid < 2 {
        return Err(CliError::Invalid("--grid must be at least 2".into()));
    }
    let cd = solve_conformal(&p, tol(s))?;
    let mp = MeasurePair::new(&SpectralCurve::new(&cd)?)?;
    let (e1, e2) = mp.endpoint_exponents()?;
    let vr = mp.variational_check(25, exec)?;
    let eq = mp.contour(vr.ell, 24)?;
    let phi = mp.phi_diagnostics(&eq, 16)?;

    let mut mu1 = Table::new(["x", "density"]);
    for x in midpoints(-cd.x1, cd.x1, grid) {
        mu1.push(vec![x, mp.density_mu1(x)?]);
    }
    let mut mu2 = Table::new(["x", "density"]);
    let reach = 2.0 * cd.x2;
    for x in midpoints(-reach, reach, grid) {
        mu2.push(vec![x, mp.density_mu2(x)?]);
    }
    let mut gamma = Table::new(["re", "im"]);
    for z in &eq.gamma {
        gamma.push(vec![z.re, z.im]);
    }
    let summary = json!({
        "a": p.a, "c": p.c, "t": p.t,
        "x1": cd.x1, "x2": cd.x2,
        "mu1_mass": mp.mu1.mass(),
        "mu2_mass": mp.mu2.mass(),
        "mu2_mass_expected": (p.t + p.c) / p.t,
        "constraint": p.a / (std::f64::consts::PI * p.t),
        "mu2_max_density": mp.mu2.max_value(),
        "endpoint_exponents": [e1, e2],
        "ell": eq.ell,
        "x3": eq.x3,
        "contour": {
            "x_gamma": eq.x_gamma, "y_gamma": eq.y_gamma, "margin": eq.margin,
            "samples": eq.gamma.len(),
        },
        "variational": vr,
        "phi": phi,
    });
    Ok(Output { summary, tables: vec![("mu1", mu1), ("mu2", mu2), ("gamma", gamma)] })
}

pub fn spectral(s: &Settings) -> Result<Output, CliError> {
    let p = params(s)?;
    let cd = solve_conformal(&p, tol(s))?;
    let sc = SpectralCurve::new(&cd)?;
    let roots = sc.disc_roots()?;
    let mut table = Table::new(["re", "im", "multiplicity"]);
    for r in &roots {
        table.push(vec![r.re, r.im, f64::from(r.multiplicity)]);
    }
    let summary = json!({
        "a": p.a, "c": p.c, "t": p.t,
        "c1": sc.c1,
        "c2": sc.c2,
        "constants_spread": sc.constants_spread,
        "nodes": sc.nodes,
        "discriminant": sc.discriminant().0,
        "discriminant_roots": roots,
    });
    Ok(Output { summary, tables: vec![("discriminant_roots", table)] })
}

pub fn oracle(s: &Settings, exec: Exec) -> Result<Output, CliError> {
    let (a, c) = (s.require_a()?, s.require_c()?);
    let (n, big_n) = (s.require_n()?, s.require_big_n()?);
    let op = OracleParams::from_floats(n, big_n, a, c)?;
    let route = s.route.unwrap_or_default();
    let (poly, agree) = match route {
        RouteArg::Kernel => (solve_kernel_route(&op, exec)?, None),
        RouteArg::Moment => (solve_moment_route(&op, exec)?, None),
        RouteArg::Both => {
            let k = solve_kernel_route(&op, exec)?;
            let m = solve_moment_route(&op, exec)?;
            let same = k == m;
            // The moment route also carries the norm.
            (m, Some(same))
        }
    };
    let zs = zeros(&poly, default_frac_bits(n), 1e-10)?;
    let mut table = Table::new(["re", "im"]);
    for z in &zs {
        table.push(vec![z.re, z.im]);
    }
    let mut summary = poly.to_json(Some(&zs));
    summary["t"] = json!(op.t());
    summary["bits"] = json!(poly.bit_size());
    if let Some(same) = agree {
        summary["routes_agree"] = json!(same);
    }
    Ok(Output { summary, tables: vec![("zeros", table)] })
}

pub fn verify_all(s: &Settings, exec: Exec) -> Result<Output, CliError> {
    let mut cfg = SuiteConfig::standard();
    if let Some(a) = s.a {
        cfg.a = a;
    }
    if let Some(c) = s.c {
        cfg.c = c;
    }
    if let Some(t) = s.t {
        cfg.ladder_t = t;
    }
    if let Some(l) = &s.ladder {
        cfg.ladder = l.clone();
    }
    let report = run_suite(&cfg, exec);
    let summary = serde_json::to_value(&report)
        .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    Ok(Output::summary(summary))
}
