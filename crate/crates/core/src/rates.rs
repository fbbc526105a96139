//! Entropy and exponent calculus.
//!
//! The exponents `A1(s, w)` and `A2(s, w1, w)` are the decay rates of the
//! probabilities that `s` random constant-weight columns exactly cover a
//! fixed vector (optionally together with a fixed column `y1`). They are
//! computed numerically from the exact counting formula, evaluated with
//! log-gamma at large `N` and extrapolated to `N -> infinity`.

use std::f64::consts::LN_2;
use std::sync::OnceLock;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::RelativeWeight;

/// Grid resolution used to seed every scalar search.
pub const GRID_STEP: f64 = 1e-3;
/// Golden-section termination width.
pub const GOLDEN_TOL: f64 = 1e-8;
/// Lengths at which the exponent limit is extrapolated.
pub const EXTRAPOLATION_LENGTHS: [f64; 3] = [2000.0, 4000.0, 8000.0];

/// Binary entropy, `h(0) = h(1) = 0`.
pub fn entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("entropy argument {x} outside [0, 1]")));
    }
    Ok(h(x))
}

pub(crate) fn h(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExponentKind {
    A1,
    A2,
}

/// `log2 C(n, k)` for real arguments; `-inf` outside the support.
fn log2_binom(n: f64, k: f64) -> f64 {
    const EPS: f64 = 1e-9;
    if k < -EPS || k > n + EPS || n < -EPS {
        return f64::NEG_INFINITY;
    }
    let k = k.clamp(0.0, n.max(0.0));
    (ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)) / LN_2
}

fn log2_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.filter(|t| t.is_finite()).collect();
    let Some(max) = terms.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    max + terms.iter().map(|t| (t - max).exp2()).sum::<f64>().log2()
}

/// `log2` of the number of ordered `s`-tuples of weight-`k` subsets of a
/// `w`-set that jointly contain a fixed `m`-subset. Each term of the
/// recursion is positive, so the sum is evaluated stably in log space.
fn log2_cover_count(s: usize, w: f64, k: f64, m: f64) -> f64 {
    if s == 0 {
        return if m.abs() < 1e-9 { 0.0 } else { f64::NEG_INFINITY };
    }
    if s == 1 {
        return log2_binom(w - m, k - m);
    }
    // The first column takes `x` mandatory positions and `k - x` others.
    let lo = (k - (w - m)).max(0.0);
    let hi = m.min(k);
    if lo > hi + 1e-9 {
        return f64::NEG_INFINITY;
    }
    let steps = ((hi - lo) + 1e-9).floor() as usize;
    log2_sum((0..=steps).map(|j| {
        let x = lo + j as f64;
        log2_binom(m, x) + log2_binom(w - m, k - x) + log2_cover_count(s - 1, w, k, m - x)
    }))
}

/// `-log2 Pr2(s, w1, w) / N` at finite `N` with real-valued weights.
fn finite_exponent(s: usize, omega1: f64, omega: f64, p: f64, n: f64) -> f64 {
    let k = p * n;
    let w = omega * n;
    let m = (omega - omega1) * n;
    let log_count = log2_cover_count(s, w, k, m);
    if !log_count.is_finite() {
        return f64::INFINITY;
    }
    -(log_count - s as f64 * log2_binom(n, k)) / n
}

/// Fits `f(N) = A + (a ln N + b) / N` through three samples and returns `A`.
fn extrapolate(lengths: [f64; 3], values: [f64; 3]) -> f64 {
    let rows: Vec<[f64; 4]> = lengths
        .iter()
        .zip(values)
        .map(|(&n, v)| [1.0, n.ln() / n, 1.0 / n, v])
        .collect();
    let mut m = [rows[0], rows[1], rows[2]];
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    m[0][3] / m[0][0]
}

/// The exponent `A1(s, omega)` or `A2(s, omega1, omega)` for relative
/// column weight `p`. Returns `+inf` where the probability is zero.
pub fn exponent_a(
    kind: ExponentKind,
    s: usize,
    omega1: Option<f64>,
    omega: f64,
    p: f64,
) -> Result<f64> {
    if !(1..=3).contains(&s) {
        return Err(Error::Domain(format!("s = {s} not in 1..=3")));
    }
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::Domain(format!("omega = {omega} outside [0, 1]")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} outside (0, 1)")));
    }
    let omega1 = match (kind, omega1) {
        (ExponentKind::A1, None) => 0.0,
        (ExponentKind::A1, Some(_)) => {
            return Err(Error::Domain("A1 takes no omega1".into()));
        }
        (ExponentKind::A2, Some(o1)) if (0.0..=omega).contains(&o1) => o1,
        (ExponentKind::A2, o1) => {
            return Err(Error::Domain(format!(
                "A2 needs 0 <= omega1 <= omega, got {o1:?} and {omega}"
            )));
        }
    };
    let values = EXTRAPOLATION_LENGTHS.map(|n| finite_exponent(s, omega1, omega, p, n));
    if values.iter().any(|v| !v.is_finite()) {
        return Ok(f64::INFINITY);
    }
    Ok(extrapolate(EXTRAPOLATION_LENGTHS, values))
}

/// Maximizes a scalar function on `[a, b]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    let candidates = [(x, f(x)), (a, f(a)), (b, f(b))];
    candidates
        .into_iter()
        .filter(|(_, v)| !v.is_nan())
        .max_by(|l, r| l.1.total_cmp(&r.1))
        .unwrap_or((x, f64::NAN))
}

/// Grid scan with step [`GRID_STEP`] followed by golden-section refinement
/// around the best grid point.
fn grid_then_golden(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    if hi < lo {
        return None;
    }
    let steps = ((hi - lo) / GRID_STEP).ceil() as usize;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..=steps {
        let x = (lo + i as f64 * GRID_STEP).min(hi);
        let v = f(x);
        if v.is_finite() && best.is_none_or(|(_, bv)| v > bv) {
            best = Some((x, v));
        }
    }
    let (bx, bv) = best?;
    let (a, b) = ((bx - GRID_STEP).max(lo), (bx + GRID_STEP).min(hi));
    let (gx, gv) = golden_section_max(&f, a, b, GOLDEN_TOL);
    if gv.is_finite() && gv >= bv {
        Some((gx, gv))
    } else {
        Some((bx, bv))
    }
}

/// `max_{p <= omega <= 3p} 1 / A2(2, p, omega)`.
///
/// Fails if `A2` is not strictly positive on the whole grid: the stage-1
/// length formula divides by it.
pub fn c3_constant(p: f64) -> Result<f64> {
    let a2 = |omega: f64| exponent_a(ExponentKind::A2, 2, Some(p), omega, p);
    let (lo, hi) = (p, (3.0 * p).min(1.0));
    let steps = ((hi - lo) / GRID_STEP).ceil() as usize;
    for i in 0..=steps {
        let omega = (lo + i as f64 * GRID_STEP).min(hi);
        let value = a2(omega)?;
        if value.is_nan() || value <= 0.0 {
            return Err(Error::Domain(format!(
                "A2(2, p, omega) = {value} is not positive at omega = {omega}"
            )));
        }
    }
    let inv = |omega: f64| a2(omega).map(|v| 1.0 / v).unwrap_or(f64::NAN);
    grid_then_golden(inv, lo, hi)
        .map(|(_, v)| v)
        .ok_or_else(|| Error::NonConvergence("empty bracket for c3".into()))
}

/// `c3` for the default three-defective weight, computed once per process.
pub fn default_c3() -> Result<f64> {
    static CACHE: OnceLock<std::result::Result<f64, String>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            c3_constant(RelativeWeight::for_defectives(3).value()).map_err(|e| e.to_string())
        })
        .clone()
        .map_err(Error::Domain)
}

/// The two-defective exponent `omega h(p/omega) + p h((omega-p)/p) - 2h(p)`.
pub fn s2_exponent(omega: f64, p: f64) -> f64 {
    omega * h(p / omega) + p * h((omega - p) / p) - 2.0 * h(p)
}

/// Per-`log2 t` coefficients of the two exponents bounding `log2 |E1|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeExponents {
    pub r1: f64,
    pub r2: f64,
}

/// `r1 / log2 t` and `r2 / log2 t` for `N / log2 t = length_coeff`.
pub fn edge_exponents(omega1: f64, omega: f64, p: f64, length_coeff: f64) -> EdgeExponents {
    let r1 = length_coeff
        * (omega * h(omega1 / omega) + omega1 * h(p / omega1) + p * h((omega1 - p) / p)
            - 2.0 * h(p))
        + 2.0;
    let r2 = 1.0 + length_coeff * (omega1 * h((omega - p) / omega1) - h(p));
    EdgeExponents { r1, r2 }
}

/// Objective bounding `(N + 2 log2 |E1|) / log2 t`; `None` outside the
/// feasible region or where `r2 < 0`.
pub fn e1_objective(omega1: f64, omega: f64, p: f64, length_coeff: f64) -> Option<f64> {
    let tol = 1e-12;
    let feasible = omega1 >= p - tol
        && omega1 <= 2.0 * p + tol
        && omega1 <= omega + tol
        && omega <= (omega1 + p).min(3.0 * p).min(1.0) + tol;
    if !feasible {
        return None;
    }
    let EdgeExponents { r1, r2 } = edge_exponents(omega1, omega, p, length_coeff);
    (r2 >= 0.0).then(|| length_coeff + 2.0 * r2.max(r1 + r2))
}

fn omega_range(omega1: f64, p: f64) -> (f64, f64) {
    (omega1, (omega1 + p).min(3.0 * p).min(1.0))
}

/// Maximizes [`e1_objective`] over the feasible simplex, returning
/// `(omega1, omega, value)`.
pub fn e1_bound(p: f64, length_coeff: f64) -> Result<(f64, f64, f64)> {
    let f = |o1: f64, o: f64| e1_objective(o1, o, p, length_coeff).unwrap_or(f64::NEG_INFINITY);
    let mut best: Option<(f64, f64, f64)> = None;
    let steps1 = (p / GRID_STEP).ceil() as usize;
    for i in 0..=steps1 {
        let o1 = (p + i as f64 * GRID_STEP).min(2.0 * p);
        let (lo, hi) = omega_range(o1, p);
        let steps = ((hi - lo) / GRID_STEP).ceil() as usize;
        for j in 0..=steps {
            let o = (lo + j as f64 * GRID_STEP).min(hi);
            let v = f(o1, o);
            if v.is_finite() && best.is_none_or(|b| v > b.2) {
                best = Some((o1, o, v));
            }
        }
    }
    let (mut o1, mut o, mut v) =
        best.ok_or_else(|| Error::NonConvergence("no feasible point with r2 >= 0".into()))?;
    // Coordinate-wise golden refinement.
    for _ in 0..8 {
        let (a, b) = ((o1 - GRID_STEP).max(p), (o1 + GRID_STEP).min(2.0 * p).min(o));
        if b > a {
            let (x, fx) = golden_section_max(|x| f(x, o), a, b, GOLDEN_TOL);
            if fx > v {
                o1 = x;
                v = fx;
            }
        }
        let (lo, hi) = omega_range(o1, p);
        let (a, b) = ((o - GRID_STEP).max(lo), (o + GRID_STEP).min(hi));
        if b > a {
            let (x, fx) = golden_section_max(|x| f(o1, x), a, b, GOLDEN_TOL);
            if fx > v {
                o = x;
                v = fx;
            }
        }
    }
    if !v.is_finite() {
        return Err(Error::NonConvergence("e1 objective not finite".into()));
    }
    Ok((o1, o, v))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub c3: f64,
    pub omega_star_s2: f64,
    pub value_s2: f64,
    pub e1_bound: f64,
}

/// Reproduces the rate constants behind both stage-1 lengths.
///
/// `e1_bound` fixes `N / log2 t` at its large-`t` limit `2 * c3`.
pub fn optimize_constants(p2: f64, p3: f64) -> Result<RateReport> {
    for (name, p) in [("p2", p2), ("p3", p3)] {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::Domain(format!("{name} = {p} outside (0, 0.5)")));
        }
    }
    let c3 = c3_constant(p3)?;
    let (omega_star_s2, value_s2) = grid_then_golden(|o| s2_exponent(o, p2), p2, 2.0 * p2)
        .ok_or_else(|| Error::NonConvergence("empty bracket for the s = 2 exponent".into()))?;
    let (_, _, e1) = e1_bound(p3, 2.0 * c3)?;
    Ok(RateReport {
        c3,
        omega_star_s2,
        value_s2,
        e1_bound: e1,
    })
}

/// [`optimize_constants`] at the default weights.
pub fn default_rate_report() -> Result<RateReport> {
    optimize_constants(
        RelativeWeight::for_defectives(2).value(),
        RelativeWeight::for_defectives(3).value(),
    )
}
