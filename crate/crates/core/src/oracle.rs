//! Exact construction of the planar orthogonal polynomials `P_{n,N}`.
//!
//! The weight is `|z^2 + a^2|^{2cN} e^{-N|z|^2}` on the plane, with `cN` a
//! nonnegative integer. Two independent linear systems pin `P_{n,N}`:
//!
//! * the kernel route: `(d^2/dz^2 + a^2 N^2)^{cN} [P (z^2+a^2)^{cN}]` has no
//!   terms below `z^n`;
//! * the moment route: `P` is orthogonal to `1, .., z^{n-1}` in the weighted
//!   inner product, with moments expanded exactly over Ginibre moments.
//!
//! Both are assembled as integer matrices and solved fraction-free (Bareiss),
//! so the results are exact rationals and compare bit for bit. Zeros come
//! from Aberth iteration driven by fixed-point Gaussian-integer Horner.

use std::fmt;

use rug::{Complete, Integer, Rational};
use serde_json::{json, Value};

use crate::poly::aberth_with;
use crate::{Error, Exec, Result, C64};

/// Which linear system produced a polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Kernel,
    Moment,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Kernel => "kernel",
            Route::Moment => "moment",
        })
    }
}

/// Degree, scale and weight parameters of one oracle instance.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleParams {
    pub n: usize,
    pub big_n: u32,
    /// `a^2` as an exact positive rational.
    pub a2: Rational,
    /// The integer `cN`.
    pub cn: u32,
}

impl OracleParams {
    pub fn new(n: usize, big_n: u32, a2: Rational, cn: u32) -> Result<Self> {
        if big_n == 0 {
            return Err(Error::InvalidParams("N must be positive".into()));
        }
        if a2 <= 0 {
            return Err(Error::InvalidParams(format!("a^2 = {a2} must be positive")));
        }
        Ok(Self { n, big_n, a2, cn })
    }

    /// Parameters from floating `a` and `c`; `a^2` and `cN` must be close to
    /// a small-denominator rational and an integer respectively.
    pub fn from_floats(n: usize, big_n: u32, a: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidParams(format!("a = {a}, c = {c}")));
        }
        let cn = c * big_n as f64;
        if (cn - cn.round()).abs() > 1e-9 * cn.max(1.0) {
            return Err(Error::InvalidParams(format!("cN = {cn} is not an integer")));
        }
        let a2 = best_rational(a * a, 1_000_000, 1e-12).ok_or_else(|| {
            Error::InvalidParams(format!("a^2 = {} has no small rational form", a * a))
        })?;
        Self::new(n, big_n, a2, cn.round() as u32)
    }

    pub fn t(&self) -> f64 {
        self.n as f64 / self.big_n as f64
    }

    pub fn c(&self) -> Rational {
        Rational::from((self.cn, self.big_n))
    }

    /// Degrees `j < n` with `j = n (mod 2)`; the only unknowns and equations.
    fn parity_class(&self) -> Vec<usize> {
        (0..self.n).filter(|j| (self.n - j) % 2 == 0).collect()
    }
}

/// Best rational approximation with denominator at most `max_den` that lies
/// within relative `tol` of `x`, by continued fractions.
pub fn best_rational(x: f64, max_den: u64, tol: f64) -> Option<Rational> {
    if !x.is_finite() || x < 0.0 {
        return None;
    }
    let (mut h0, mut h1) = (0u128, 1u128);
    let (mut k0, mut k1) = (1u128, 0u128);
    let mut r = x;
    for _ in 0..64 {
        let q = r.floor();
        if q > 1e18 {
            break;
        }
        let qi = q as u128;
        let (h2, k2) = (qi * h1 + h0, qi * k1 + k0);
        if k2 > max_den as u128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= tol * x.abs().max(1e-300) {
            return Some(Rational::from((Integer::from(h1), Integer::from(k1))));
        }
        let frac = r - q;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

/// Monic `P_{n,N}` with exact rational coefficients.
///
/// Coefficients are stored as `numer[j] / denom` in lowest common terms, so
/// two polynomials are equal exactly when these fields are equal.
#[derive(Debug, Clone)]
pub struct ExactPolynomial {
    pub params: OracleParams,
    pub route: Route,
    pub numer: Vec<Integer>,
    pub denom: Integer,
    /// `h_{n,N} / pi`, available from the moment route only.
    pub norm_h_over_pi: Option<Rational>,
}

impl PartialEq for ExactPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.numer == other.numer && self.denom == other.denom
    }
}

impl ExactPolynomial {
    fn from_scaled(
        params: OracleParams,
        route: Route,
        mut numer: Vec<Integer>,
        mut denom: Integer,
    ) -> Self {
        if denom < 0 {
            denom = -denom;
            for q in &mut numer {
                *q = -std::mem::take(q);
            }
        }
        let mut g = denom.clone();
        for q in &numer {
            g.gcd_mut(q);
        }
        if g != 1 {
            for q in &mut numer {
                q.div_exact_mut(&g);
            }
            denom.div_exact_mut(&g);
        }
        Self { params, route, numer, denom, norm_h_over_pi: None }
    }

    pub fn degree(&self) -> usize {
        self.numer.len() - 1
    }

    pub fn coeff(&self, j: usize) -> Rational {
        Rational::from((&self.numer[j], &self.denom))
    }

    pub fn coeffs(&self) -> Vec<Rational> {
        (0..self.numer.len()).map(|j| self.coeff(j)).collect()
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs().iter().map(|r| r.to_f64()).collect()
    }

    /// Largest bit length among numerators and the denominator.
    pub fn bit_size(&self) -> u32 {
        self.numer
            .iter()
            .chain(std::iter::once(&self.denom))
            .map(|q| q.significant_bits())
            .max()
            .unwrap_or(0)
    }

    /// `log P(z)` computed exactly at the dyadic rounding of `z`; the
    /// imaginary part is the principal argument.
    pub fn log_eval(&self, z: C64) -> Result<C64> {
        let (x, y, e) = dyadic(z)?;
        let (re, im) = exact_horner(&self.numer, &x, &y, e, false);
        if re == 0 && im == 0 {
            return Err(Error::PrecisionExhausted(format!("P vanishes at {z}")));
        }
        let log_den = log_abs_integer(&self.denom);
        let shift = (e as f64) * (self.degree() as f64) * std::f64::consts::LN_2;
        Ok(gauss_log(&re, &im) - C64::new(log_den + shift, 0.0))
    }

    /// `|P(z)| / (|P'(z)| |z|)`, evaluated exactly at the dyadic rounding of `z`.
    pub fn newton_residual(&self, z: C64) -> Result<f64> {
        if z.norm() == 0.0 {
            let p0 = &self.numer[0];
            return Ok(if *p0 == 0 { 0.0 } else { f64::INFINITY });
        }
        let (x, y, e) = dyadic(z)?;
        let (pr, pi) = exact_horner(&self.numer, &x, &y, e, false);
        let d: Vec<Integer> = (1..self.numer.len())
            .map(|j| (&self.numer[j] * j as u64).complete())
            .collect();
        if d.is_empty() {
            return Ok(f64::INFINITY);
        }
        let (dr, di) = exact_horner(&d, &x, &y, e, false);
        // P carries 2^{e n}, P' carries 2^{e (n-1)}.
        let lp = gauss_log(&pr, &pi).re;
        let ld = gauss_log(&dr, &di).re;
        let ln2 = std::f64::consts::LN_2;
        Ok((lp - ld - e as f64 * ln2 - z.norm().ln()).exp())
    }

    /// Deterministic JSON record; coefficients are exact `"p/q"` strings.
    pub fn to_json(&self, zeros: Option<&[C64]>) -> Value {
        let coeffs: Vec<String> = self.coeffs().iter().map(|r| r.to_string()).collect();
        let zeros: Vec<[f64; 2]> = zeros
            .map(|zs| zs.iter().map(|z| [z.re, z.im]).collect())
            .unwrap_or_default();
        json!({
            "n": self.params.n,
            "N": self.params.big_n,
            "a2": self.params.a2.to_string(),
            "c": self.params.c().to_string(),
            "route": self.route.to_string(),
            "coeffs": coeffs,
            "norm_h_over_pi": self.norm_h_over_pi.as_ref().map(|h| h.to_string()),
            "zeros": zeros,
        })
    }
}

/// Solution of an integer system by fraction-free elimination: `x = y / det`.
#[derive(Debug, Clone)]
pub struct BareissSolution {
    pub y: Vec<Integer>,
    pub det: Integer,
}

/// Solves `A x = b` over the rationals without fractions.
///
/// Rows are parallelized per elimination step; the result is independent of
/// the execution policy. The residual `A y - det b` is checked to be zero.
pub fn bareiss_solve(a: &[Vec<Integer>], b: &[Integer], exec: Exec) -> Result<BareissSolution> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParams("system is not square".into()));
    }
    if n == 0 {
        return Ok(BareissSolution { y: vec![], det: Integer::from(1) });
    }
    let mut m: Vec<Vec<Integer>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut row: Vec<Integer> = r.clone();
            row.push(bi.clone());
            reduce_row(&mut row);
            row
        })
        .collect();
    let mut prev = Integer::from(1);
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return Err(Error::SingularSystem(format!("zero pivot column {k} of {n}")));
            };
            m.swap(k, r);
        }
        let (head, tail) = m.split_at_mut(k + 1);
        let pivot = &head[k];
        let updated = exec.map(&*tail, |row| {
            let mut out = Vec::with_capacity(n + 1);
            out.extend((0..=k).map(|_| Integer::new()));
            for j in k + 1..=n {
                let mut v = (&row[j] * &pivot[k]).complete();
                v -= (&row[k] * &pivot[j]).complete();
                v.div_exact_mut(&prev);
                out.push(v);
            }
            out
        });
        for (row, new) in tail.iter_mut().zip(updated) {
            *row = new;
        }
        prev = m[k][k].clone();
    }
    // Cramer: the final pivot times x_i is an integer, so every division below is exact.
    let mut y = vec![Integer::new(); n];
    for i in (0..n).rev() {
        let mut s = (&m[i][n] * &prev).complete();
        for j in i + 1..n {
            s -= (&m[i][j] * &y[j]).complete();
        }
        s.div_exact_mut(&m[i][i]);
        y[i] = s;
    }
    // y = d x with d the final pivot, which is +-det of the row-reduced matrix.
    let det = prev;
    for (r, bi) in a.iter().zip(b) {
        let mut acc = Integer::new();
        for (aij, yj) in r.iter().zip(&y) {
            acc += (aij * yj).complete();
        }
        acc -= (bi * &det).complete();
        if acc != 0 {
            return Err(Error::SingularSystem("nonzero exact residual".into()));
        }
    }
    Ok(BareissSolution { y, det })
}

fn reduce_row(row: &mut [Integer]) {
    let mut g = Integer::new();
    for v in row.iter() {
        g.gcd_mut(v);
    }
    if g > 1 {
        for v in row.iter_mut() {
            v.div_exact_mut(&g);
        }
    }
}

/// Sum `sum_m T(m)` where `T(m0)` is given and
/// `T(m+1) = T(m) * num(m) / den(m)` holds exactly in the integers.
fn hypergeometric_sum<F>(first: Integer, count: usize, mut ratio: F) -> Integer
where
    F: FnMut(usize) -> (Integer, Integer),
{
    let mut term = first;
    let mut sum = term.clone();
    for s in 1..count {
        let (num, den) = ratio(s - 1);
        term *= num;
        term.div_exact_mut(&den);
        sum += &term;
    }
    sum
}

fn pow_int(base: &Integer, e: u32) -> Integer {
    use rug::ops::Pow;
    base.clone().pow(e)
}

struct Scaled {
    a: Integer,
    b: Integer,
    big_n: Integer,
    cn: i64,
}

impl Scaled {
    fn new(op: &OracleParams) -> Self {
        Self {
            a: op.a2.numer().clone(),
            b: op.a2.denom().clone(),
            big_n: Integer::from(op.big_n),
            cn: op.cn as i64,
        }
    }
}

/// Kernel-route entry for equation degree `i` and unknown degree `j`, scaled
/// by `B^{2cN}` with `a^2 = A / B`:
/// `sum_m C(cN,m) C(cN,m+d) A^e B^{2cN-e} N^{2(cN-m)} (i+2m)!/i!`,
/// `d = (i-j)/2`, `e = 2cN - 2m - d`.
fn kernel_entry(s: &Scaled, i: usize, j: usize) -> Integer {
    let cn = s.cn;
    let d = (i as i64 - j as i64) / 2;
    let m0 = 0.max(-d);
    let m1 = cn.min(cn - d);
    if m0 > m1 {
        return Integer::new();
    }
    let e0 = (2 * cn - 2 * m0 - d) as u32;
    let r0 = m0 + d;
    let mut first = Integer::from(Integer::binomial_u(cn as u32, m0 as u32));
    first *= Integer::from(Integer::binomial_u(cn as u32, r0 as u32));
    first *= pow_int(&s.a, e0);
    first *= pow_int(&s.b, 2 * cn as u32 - e0);
    first *= pow_int(&s.big_n, 2 * (cn - m0) as u32);
    let mut fall = Integer::from(1);
    for k in i + 1..=i + 2 * m0 as usize {
        fall *= k as u64;
    }
    first *= fall;
    let a2 = (&s.a * &s.a).complete();
    let b2 = (&s.b * &s.b).complete();
    let n2 = (&s.big_n * &s.big_n).complete();
    hypergeometric_sum(first, (m1 - m0 + 1) as usize, |step| {
        let m = m0 + step as i64;
        let r = m + d;
        let top = (i as i64 + 2 * m + 1) * (i as i64 + 2 * m + 2);
        let mut num = Integer::from((cn - m) * (cn - r));
        num *= top;
        num *= &b2;
        let mut den = Integer::from((m + 1) * (r + 1));
        den *= &a2;
        den *= &n2;
        (num, den)
    })
}

/// Moment-route entry `M_{jk} / pi` scaled by `B^{2cN} N^{n+2cN+1}`:
/// `sum_p C(cN,p) C(cN,q) A^{2cN-p-q} B^{p+q} (j+2p)! N^{n+2cN-j-2p}`,
/// `q = p + (j-k)/2`.
fn moment_entry(s: &Scaled, n: usize, j: usize, k: usize) -> Integer {
    if (j + k) % 2 == 1 {
        return Integer::new();
    }
    let cn = s.cn;
    let d = (j as i64 - k as i64) / 2;
    let p0 = 0.max(-d);
    let p1 = cn.min(cn - d);
    if p0 > p1 {
        return Integer::new();
    }
    let q0 = p0 + d;
    let ea = (2 * cn - p0 - q0) as u32;
    let mut first = Integer::from(Integer::binomial_u(cn as u32, p0 as u32));
    first *= Integer::from(Integer::binomial_u(cn as u32, q0 as u32));
    first *= pow_int(&s.a, ea);
    first *= pow_int(&s.b, (p0 + q0) as u32);
    first *= Integer::from(Integer::factorial(j as u32 + 2 * p0 as u32));
    first *= pow_int(&s.big_n, (n as i64 + 2 * cn - j as i64 - 2 * p0) as u32);
    let a2 = (&s.a * &s.a).complete();
    let b2 = (&s.b * &s.b).complete();
    let n2 = (&s.big_n * &s.big_n).complete();
    hypergeometric_sum(first, (p1 - p0 + 1) as usize, |step| {
        let p = p0 + step as i64;
        let q = p + d;
        let top = (j as i64 + 2 * p + 1) * (j as i64 + 2 * p + 2);
        let mut num = Integer::from((cn - p) * (cn - q));
        num *= top;
        num *= &b2;
        let mut den = Integer::from((p + 1) * (q + 1));
        den *= &a2;
        den *= &n2;
        (num, den)
    })
}

fn assemble(
    op: &OracleParams,
    exec: Exec,
    entry: impl Fn(usize, usize) -> Integer + Sync + Send,
) -> (Vec<usize>, Vec<Vec<Integer>>, Vec<Integer>) {
    let idx = op.parity_class();
    let m = idx.len();
    let n = op.n;
    let rows = exec.map_range(m, |r| {
        let eq = idx[r];
        let row: Vec<Integer> = idx.iter().map(|&j| entry(eq, j)).collect();
        let rhs = -entry(eq, n);
        (row, rhs)
    });
    let (a, b) = rows.into_iter().unzip();
    (idx, a, b)
}

fn finish(
    op: &OracleParams,
    route: Route,
    idx: &[usize],
    sol: BareissSolution,
) -> ExactPolynomial {
    let mut numer = vec![Integer::new(); op.n + 1];
    for (&j, y) in idx.iter().zip(sol.y) {
        numer[j] = y;
    }
    numer[op.n] = sol.det.clone();
    ExactPolynomial::from_scaled(op.clone(), route, numer, sol.det)
}

/// `P_{n,N}` from the kernel characterization.
pub fn solve_kernel_route(op: &OracleParams, exec: Exec) -> Result<ExactPolynomial> {
    let s = Scaled::new(op);
    let (idx, a, b) = assemble(op, exec, |i, j| kernel_entry(&s, i, j));
    let sol = bareiss_solve(&a, &b, exec)?;
    Ok(finish(op, Route::Kernel, &idx, sol))
}

/// `P_{n,N}` from the orthogonality conditions, together with `h_{n,N}/pi`.
pub fn solve_moment_route(op: &OracleParams, exec: Exec) -> Result<ExactPolynomial> {
    let s = Scaled::new(op);
    let n = op.n;
    // Unknown j, condition k: sum_j p_j M_{jk} = 0.
    let (idx, a, b) = assemble(op, exec, |k, j| moment_entry(&s, n, j, k));
    let sol = bareiss_solve(&a, &b, exec)?;
    let mut poly = finish(op, Route::Moment, &idx, sol);
    let mut acc = Integer::new();
    for j in (0..=n).filter(|j| (n - j) % 2 == 0) {
        acc += &poly.numer[j] * moment_entry(&s, n, j, n);
    }
    let mut scale = pow_int(&s.b, 2 * op.cn);
    scale *= pow_int(&s.big_n, (n as u32) + 2 * op.cn + 1);
    scale *= &poly.denom;
    let h = Rational::from((acc, scale));
    if h <= 0 {
        return Err(Error::SingularSystem(format!("non-positive norm {h}")));
    }
    poly.norm_h_over_pi = Some(h);
    Ok(poly)
}

/// Rounds `z` to `(x + i y) 2^{-e}` with about 60 significant bits.
fn dyadic(z: C64) -> Result<(Integer, Integer, i32)> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::PrecisionExhausted(format!("non-finite point {z}")));
    }
    let mag = z.norm();
    let e = if mag == 0.0 { 0 } else { 60 - mag.log2().ceil() as i32 };
    if e < 0 {
        return Err(Error::PrecisionExhausted(format!("point {z} too large")));
    }
    let scale = 2f64.powi(e);
    let x = Integer::from_f64((z.re * scale).round()).unwrap_or_default();
    let y = Integer::from_f64((z.im * scale).round()).unwrap_or_default();
    Ok((x, y, e))
}

/// `2^{e deg} sum_j c_j z^j` with `z = (x + i y) 2^{-e}`, exactly; when
/// `truncate` is set each step is shifted back by `e` bits instead, giving a
/// fixed-point value at the scale of the coefficients.
fn exact_horner(c: &[Integer], x: &Integer, y: &Integer, e: i32, truncate: bool) -> (Integer, Integer) {
    let deg = c.len() - 1;
    let mut re = c[deg].clone();
    let mut im = Integer::new();
    for j in (0..deg).rev() {
        let nr = (&re * x).complete() - (&im * y).complete();
        let ni = (&re * y).complete() + (&im * x).complete();
        if truncate {
            re = shift(nr, -e);
            im = shift(ni, -e);
            re += &c[j];
        } else {
            re = nr;
            im = ni;
            re += shift(c[j].clone(), e * (deg - j) as i32);
        }
    }
    (re, im)
}

fn shift(v: Integer, by: i32) -> Integer {
    if by >= 0 {
        v << by as u32
    } else {
        v >> (-by) as u32
    }
}

fn log_abs_integer(v: &Integer) -> f64 {
    let (m, e) = v.to_f64_exp();
    m.abs().ln() + e as f64 * std::f64::consts::LN_2
}

/// Complex log of the Gaussian integer `re + i im`.
fn gauss_log(re: &Integer, im: &Integer) -> C64 {
    let bits = re.significant_bits().max(im.significant_bits());
    let k = bits.saturating_sub(60);
    let r = (re.clone() >> k).to_f64();
    let i = (im.clone() >> k).to_f64();
    C64::new(r.hypot(i).ln() + k as f64 * std::f64::consts::LN_2, i.atan2(r))
}

fn gauss_ratio(nr: &Integer, ni: &Integer, dr: &Integer, di: &Integer) -> C64 {
    let ln = gauss_log(nr, ni);
    let ld = gauss_log(dr, di);
    (ln - ld).exp()
}

/// All zeros of `P_{n,N}`, sorted by real then imaginary part.
///
/// Parity reduces `P(z) = z^s R(z^2)`; roots of `R` are found by Aberth with
/// `R/R'` evaluated in fixed point at `frac_bits` fractional bits, then each
/// zero is checked by exact evaluation of `|P|/(|P'||z|)` against `tol`.
pub fn zeros(poly: &ExactPolynomial, frac_bits: u32, tol: f64) -> Result<Vec<C64>> {
    let n = poly.degree();
    let s = n % 2;
    // R(u) = sum_k p_{s+2k} u^k, with any factor u^m split off.
    let mut r: Vec<Rational> = (s..=n).step_by(2).map(|j| poly.coeff(j)).collect();
    let mut zero_mult = s;
    while r.len() > 1 && r[0] == 0 {
        r.remove(0);
        zero_mult += 2;
    }
    let mut out = vec![C64::new(0.0, 0.0); zero_mult];
    let deg = r.len() - 1;
    if deg > 0 {
        let fixed: Vec<Integer> = r
            .iter()
            .map(|q| (q.clone() << frac_bits).round().into_numer_denom().0)
            .collect();
        let dfixed: Vec<Integer> = (1..=deg)
            .map(|k| (&fixed[k] * k as u64).complete())
            .collect();
        let approx: Vec<f64> = r.iter().map(|q| q.to_f64()).collect();
        let radius = (0..deg)
            .map(|k| (approx[k] / approx[deg]).abs().powf(1.0 / (deg - k) as f64))
            .fold(0.0f64, f64::max)
            .max(1e-6);
        let seeds: Vec<C64> = (0..deg)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64 + 0.4;
                C64::from_polar(radius, th)
            })
            .collect();
        let ratio = |u: C64| -> C64 {
            let Ok((x, y, e)) = dyadic(u) else {
                return C64::new(f64::NAN, f64::NAN);
            };
            let (pr, pi) = exact_horner(&fixed, &x, &y, e, true);
            let (dr, di) = exact_horner(&dfixed, &x, &y, e, true);
            if dr == 0 && di == 0 {
                return C64::new(f64::NAN, f64::NAN);
            }
            gauss_ratio(&pr, &pi, &dr, &di)
        };
        let us = aberth_with(seeds, ratio, 1e-16, 2000)?;
        for u in us {
            let z = u.sqrt();
            out.push(z);
            out.push(-z);
        }
    }
    for z in out.iter_mut() {
        // Exact conjugation and negation symmetry: snap near-real/imaginary parts.
        if z.im.abs() < 1e-14 * z.norm() {
            z.im = 0.0;
        }
        if z.re.abs() < 1e-14 * z.norm() {
            z.re = 0.0;
        }
    }
    for z in &out {
        let res = poly.newton_residual(*z)?;
        if !(res <= tol) {
            return Err(Error::PrecisionExhausted(format!(
                "zero {z} has residual {res:e} above {tol:e}; raise frac_bits"
            )));
        }
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

/// Default fixed-point precision for [`zeros`] at degree `n`.
pub fn default_frac_bits(n: usize) -> u32 {
    128 + 8 * n as u32
}

/// Empirical measure of zeros projected to the real axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroMeasure {
    pub points: Vec<f64>,
    /// Kolmogorov distance to the reference CDF.
    pub ks: f64,
    pub max_abs_im: f64,
}

/// Projects zeros to their real parts and measures the Kolmogorov distance
/// of the resulting empirical CDF to `cdf`.
pub fn zero_counting_measure(zeros: &[C64], cdf: impl Fn(f64) -> f64) -> ZeroMeasure {
    let mut pts: Vec<f64> = zeros.iter().map(|z| z.re).collect();
    pts.sort_by(f64::total_cmp);
    let n = pts.len() as f64;
    let mut ks = 0.0f64;
    for (i, &x) in pts.iter().enumerate() {
        let f = cdf(x);
        ks = ks.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let max_abs_im = zeros.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    ZeroMeasure { points: pts, ks, max_abs_im }
}

/// Largest distance from a zero to the segment `[-x1, x1]`.
pub fn max_distance_to_segment(zeros: &[C64], x1: f64) -> f64 {
    zeros
        .iter()
        .map(|z| {
            let dx = (z.re.abs() - x1).max(0.0);
            dx.hypot(z.im)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    use rug::ops::Pow;

    fn params(n: usize, big_n: u32, a2: i64, cn: u32) -> OracleParams {
        OracleParams::new(n, big_n, Rational::from(a2), cn).unwrap()
    }

    #[test]
    fn degree_zero_and_one() {
        for route in [solve_kernel_route, solve_moment_route] {
            let p0 = route(&params(0, 4, 4, 4), Exec::Sequential).unwrap();
            assert_eq!(p0.coeffs(), vec![Rational::from(1)]);
            let p1 = route(&params(1, 4, 4, 4), Exec::Sequential).unwrap();
            assert_eq!(p1.coeffs(), vec![Rational::from(0), Rational::from(1)]);
        }
        let p1 = solve_kernel_route(&params(1, 4, 4, 4), Exec::Sequential).unwrap();
        assert_eq!(zeros(&p1, 64, 1e-12).unwrap(), vec![C64::new(0.0, 0.0)]);
    }

    #[test]
    fn ginibre_limit() {
        // No charges: monomials, with h = pi n! / N^{n+1}.
        for n in 0..7usize {
            let op = params(n, 5, 4, 0);
            let p = solve_moment_route(&op, Exec::Sequential).unwrap();
            let mut want = vec![Rational::new(); n + 1];
            want[n] = Rational::from(1);
            assert_eq!(p.coeffs(), want);
            let fact = Integer::from(Integer::factorial(n as u32));
            let h = Rational::from((fact, Integer::from(Integer::u_pow_u(5, n as u32 + 1))));
            assert_eq!(p.norm_h_over_pi.clone().unwrap(), h);
            assert_eq!(solve_kernel_route(&op, Exec::Sequential).unwrap(), p);
        }
    }

    #[test]
    fn moment_parity() {
        let s = Scaled::new(&params(6, 12, 4, 12));
        for j in 0..7 {
            for k in 0..7 {
                if (j + k) % 2 == 1 {
                    assert_eq!(moment_entry(&s, 6, j, k), 0);
                } else {
                    assert!(moment_entry(&s, 6, j, k) > 0);
                }
            }
        }
    }

    #[test]
    fn moment_entry_matches_direct_sum() {
        // Direct rational evaluation of sum_p C C (a^2)^{2K-p-q} (j+2p)!/N^{j+2p+1}.
        let op = OracleParams::new(5, 7, Rational::from((9, 4)), 3).unwrap();
        let s = Scaled::new(&op);
        for (j, k) in [(1, 3), (3, 1), (5, 5), (0, 4), (2, 2)] {
            let kk = op.cn as i64;
            let mut want = Rational::new();
            for p in 0..=kk {
                let q = p + (j as i64 - k as i64) / 2;
                if !(0..=kk).contains(&q) {
                    continue;
                }
                let mut term = Rational::from(Integer::from(Integer::binomial_u(3, p as u32)));
                term *= Integer::from(Integer::binomial_u(3, q as u32));
                term *= op.a2.clone().pow((2 * kk - p - q) as i32);
                term *= Integer::from(Integer::factorial(j as u32 + 2 * p as u32));
                term /= Integer::from(Integer::u_pow_u(7, j as u32 + 2 * p as u32 + 1));
                want += term;
            }
            let scale = Integer::from(Integer::u_pow_u(4, 6)) * Integer::from(Integer::u_pow_u(7, 5 + 6 + 1));
            let got = Rational::from((moment_entry(&s, 5, j, k), scale));
            assert_eq!(got, want, "M_{j}{k}");
        }
    }

    #[test]
    fn routes_agree_exactly() {
        for (n, big_n) in [(4usize, 40u32), (6, 12), (5, 9), (3, 7)] {
            let op = params(n, big_n, 4, big_n);
            let k = solve_kernel_route(&op, Exec::Sequential).unwrap();
            let m = solve_moment_route(&op, Exec::Parallel).unwrap();
            assert_eq!(k, m, "(n, N) = ({n}, {big_n})");
            for j in 0..=n {
                if (n - j) % 2 == 1 {
                    assert_eq!(k.coeff(j), 0);
                }
            }
        }
        // Non-integer a^2 and c != 1.
        let op = OracleParams::new(6, 10, Rational::from((5, 2)), 7).unwrap();
        assert_eq!(
            solve_kernel_route(&op, Exec::Sequential).unwrap(),
            solve_moment_route(&op, Exec::Sequential).unwrap()
        );
    }

    #[test]
    fn bareiss_small_system() {
        let a = vec![
            vec![Integer::from(2), Integer::from(1), Integer::from(-1)],
            vec![Integer::from(-3), Integer::from(-1), Integer::from(2)],
            vec![Integer::from(-2), Integer::from(1), Integer::from(2)],
        ];
        let b = vec![Integer::from(8), Integer::from(-11), Integer::from(-3)];
        let sol = bareiss_solve(&a, &b, Exec::Sequential).unwrap();
        let x: Vec<Rational> = sol.y.iter().map(|y| Rational::from((y, &sol.det))).collect();
        assert_eq!(x, vec![Rational::from(2), Rational::from(3), Rational::from(-1)]);
        let singular = vec![
            vec![Integer::from(1), Integer::from(2)],
            vec![Integer::from(2), Integer::from(4)],
        ];
        let err = bareiss_solve(&singular, &[Integer::from(1), Integer::from(1)], Exec::Sequential);
        assert!(matches!(err, Err(Error::SingularSystem(_))));
    }

    #[test]
    fn zeros_are_symmetric_and_accurate() {
        let op = params(12, 60, 4, 60);
        let p = solve_kernel_route(&op, Exec::Sequential).unwrap();
        let zs = zeros(&p, default_frac_bits(12), 1e-10).unwrap();
        assert_eq!(zs.len(), 12);
        let sum: C64 = zs.iter().sum();
        assert!(sum.norm() < 1e-12);
        for z in &zs {
            assert!(zs.iter().any(|w| (*w + *z).norm() < 1e-12));
            assert!(zs.iter().any(|w| (*w - z.conj()).norm() < 1e-12));
        }
        // f64 roots of the float coefficients agree at this small degree.
        let c: Vec<C64> = p.coeffs_f64().iter().map(|&v| C64::new(v, 0.0)).collect();
        let fr = crate::poly::roots(&c, 1e-15).unwrap();
        for z in &zs {
            let d = fr.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-6, "{z} vs float roots: {d}");
        }
    }

    #[test]
    fn log_eval_matches_float_horner() {
        let op = params(8, 20, 4, 20);
        let p = solve_moment_route(&op, Exec::Sequential).unwrap();
        let c: Vec<C64> = p.coeffs_f64().iter().map(|&v| C64::new(v, 0.0)).collect();
        for z in [C64::new(1.3, 0.2), C64::new(-0.4, 2.0), C64::new(3.0, -1.0)] {
            let want = crate::poly::horner(&c, z).0.ln();
            let got = p.log_eval(z).unwrap();
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn single_zero_counting_measure() {
        // Continuous symmetric reference CDF: one atom at 0 sits at distance 1/2.
        let m = zero_counting_measure(&[C64::new(0.0, 0.0)], |x| 0.5 + 0.5 * (x / 2.0).tanh());
        assert!((m.ks - 0.5).abs() < 1e-15);
    }

    #[test]
    fn continued_fraction() {
        let two = best_rational(2f64.sqrt().powi(2), 1000, 1e-12).unwrap();
        assert_eq!(two, Rational::from(2));
        assert_eq!(best_rational(2.25, 1000, 1e-14).unwrap(), Rational::from((9, 4)));
        assert!(best_rational(std::f64::consts::PI, 100, 1e-12).is_none());
        let op = OracleParams::from_floats(4, 40, 2.0, 1.0).unwrap();
        assert_eq!(op.cn, 40);
        assert!(OracleParams::from_floats(4, 40, 2.0, 0.01).is_err());
    }

    #[test]
    fn json_is_exact() {
        let op = params(2, 4, 4, 4);
        let p = solve_kernel_route(&op, Exec::Sequential).unwrap();
        let v = p.to_json(None);
        let c0: Rational = v["coeffs"][0].as_str().unwrap().parse().unwrap();
        assert_eq!(c0, p.coeff(0));
        assert_eq!(v["coeffs"][2], "1");
    }
}
