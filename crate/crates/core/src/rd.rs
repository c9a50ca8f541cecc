//! Rate-distortion functions on compact groups.
//!
//! For the uniform source the curve is parametrized by the slope `β ≤ 0`
//! through the partition function `Z(β) = ∫ exp(β d(g, e)) dU(g)`:
//! `δ = Z'(β)/Z(β)`, `R = βδ − log Z(β)`. Arbitrary sources on finite groups
//! are handled by Blahut–Arimoto alternating minimization.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bessel::{bessel_i_scaled, bessel_ratio_10};
use crate::distortion::{distortion_matrix, DistortionSpec};
use crate::error::{Error, Result};
use crate::measure::{divergence_to_uniform, GroupDistribution};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RDPoint {
    pub beta: f64,
    pub delta: f64,
    /// nats
    pub rate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RDCurve {
    pub points: Vec<RDPoint>,
    pub source: String,
}

impl RDCurve {
    /// Points ordered by increasing distortion.
    pub fn sorted_by_delta(&self) -> Vec<RDPoint> {
        let mut pts = self.points.clone();
        pts.sort_by(|a, b| a.delta.total_cmp(&b.delta));
        pts
    }

    /// Slopes between consecutive points (ordered by δ) are nondecreasing,
    /// up to `tol`.
    pub fn is_convex(&self, tol: f64) -> bool {
        let pts = self.sorted_by_delta();
        let slopes: Vec<f64> = pts
            .windows(2)
            .filter(|w| w[1].delta - w[0].delta > 1e-12)
            .map(|w| (w[1].rate - w[0].rate) / (w[1].delta - w[0].delta))
            .collect();
        slopes.windows(2).all(|s| s[1] >= s[0] - tol)
    }

    /// Piecewise-linear rate at `delta`; `None` outside the sampled range.
    pub fn rate_at(&self, delta: f64) -> Option<f64> {
        let pts = self.sorted_by_delta();
        let first = pts.first()?;
        let last = pts.last()?;
        if delta < first.delta || delta > last.delta {
            return None;
        }
        for w in pts.windows(2) {
            if delta >= w[0].delta && delta <= w[1].delta {
                let span = w[1].delta - w[0].delta;
                if span <= 0.0 {
                    return Some(w[0].rate.min(w[1].rate));
                }
                let t = (delta - w[0].delta) / span;
                return Some(w[0].rate + t * (w[1].rate - w[0].rate));
            }
        }
        Some(last.rate)
    }
}

/// `Z(β)`. On the circle, `e^{2β} I₀(−2β)`.
pub fn partition_function(spec: &DistortionSpec, beta: f64) -> f64 {
    log_partition(spec, beta).exp()
}

/// `log Z(β)`, evaluated without overflow.
pub fn log_partition(spec: &DistortionSpec, beta: f64) -> f64 {
    match spec {
        DistortionSpec::Finite { profile, .. } => {
            let shift = profile.iter().map(|d| beta * d).fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = profile.iter().map(|d| (beta * d - shift).exp()).sum();
            shift + (s / profile.len() as f64).ln()
        }
        DistortionSpec::Circle => {
            // e^{2β} I₀(2|β|) = e^{2β + 2|β|} · e^{-2|β|} I₀(2|β|)
            let x = 2.0 * beta.abs();
            2.0 * beta + x + bessel_i_scaled(0, x).ln()
        }
    }
}

/// `δ(β) = Z'(β)/Z(β)`.
pub fn mean_distortion(spec: &DistortionSpec, beta: f64) -> f64 {
    match spec {
        DistortionSpec::Finite { profile, .. } => {
            let shift = profile.iter().map(|d| beta * d).fold(f64::NEG_INFINITY, f64::max);
            let (num, den) = profile.iter().fold((0.0, 0.0), |(n, s), &d| {
                let w = (beta * d - shift).exp();
                (n + d * w, s + w)
            });
            num / den
        }
        // d/dβ [2β + log I₀(−2β)] = 2 − 2 I₁(−2β)/I₀(−2β)
        DistortionSpec::Circle => 2.0 - 2.0 * bessel_ratio_10(-2.0 * beta),
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_nan() || beta > 0.0 {
        Err(Error::InvalidBeta(beta))
    } else {
        Ok(())
    }
}

/// Point on the rate-distortion curve of the uniform source at slope `β ≤ 0`.
pub fn uniform_rd_point(spec: &DistortionSpec, beta: f64) -> Result<RDPoint> {
    check_beta(beta)?;
    if beta == 0.0 {
        return Ok(RDPoint {
            beta,
            delta: spec.d_crit(),
            rate: 0.0,
        });
    }
    if beta == f64::NEG_INFINITY {
        let rate = match spec {
            DistortionSpec::Finite { profile, .. } => (profile.len() as f64).ln(),
            DistortionSpec::Circle => f64::INFINITY,
        };
        return Ok(RDPoint { beta, delta: 0.0, rate });
    }
    let delta = mean_distortion(spec, beta);
    let rate = (beta * delta - log_partition(spec, beta)).max(0.0);
    Ok(RDPoint { beta, delta, rate })
}

/// `R_U(δ)` by solving `δ(β) = delta` for `β` and evaluating
/// `βδ − log Z(β)`, which is stationary in `β` at the solution.
pub fn uniform_rate_at(spec: &DistortionSpec, delta: f64) -> f64 {
    if delta >= spec.d_crit() {
        return 0.0;
    }
    if delta <= 0.0 {
        return match spec {
            DistortionSpec::Finite { profile, .. } => (profile.len() as f64).ln(),
            DistortionSpec::Circle => f64::INFINITY,
        };
    }
    let beta = uniform_beta_for(spec, delta);
    (beta * delta - log_partition(spec, beta)).max(0.0)
}

/// Slope `β ≤ 0` with `δ(β) = delta`, for `0 < delta < d_crit`.
pub fn uniform_beta_for(spec: &DistortionSpec, delta: f64) -> f64 {
    let mut lo = -1.0;
    while mean_distortion(spec, lo) > delta && lo > -1e12 {
        lo *= 2.0;
    }
    let mut hi = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mean_distortion(spec, mid) > delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Closed-form curve of the uniform source over a grid of slopes.
pub fn uniform_rd_curve(spec: &DistortionSpec, betas: &[f64]) -> Result<RDCurve> {
    let points = betas
        .iter()
        .map(|&b| uniform_rd_point(spec, b))
        .collect::<Result<_>>()?;
    let source = match spec {
        DistortionSpec::Finite { group, .. } => format!("uniform on group of order {}", group.order()),
        DistortionSpec::Circle => "uniform on SO(2)".into(),
    };
    Ok(RDCurve { points, source })
}

#[derive(Clone, Copy, Debug)]
pub struct BaOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Keep the tilted objective after every iteration.
    pub record_objective: bool,
}

impl Default for BaOptions {
    fn default() -> Self {
        BaOptions {
            tol: 1e-10,
            max_iter: 100_000,
            record_objective: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BaSolution {
    pub point: RDPoint,
    /// `kernel[i][j] = q(j | i)`.
    pub kernel: Vec<Vec<f64>>,
    /// Reproduction marginal `r`.
    pub reproduction: Vec<f64>,
    pub iterations: usize,
    /// `−Σ_i P_i log Σ_j r_j e^{β d_ij}` at each iterate, when recorded.
    pub objective: Vec<f64>,
}

/// Blahut–Arimoto at slope `β ≤ 0`, reproduction alphabet = the group.
///
/// The update is `r_j ← r_j c_j` with
/// `c_j = Σ_i P_i e^{β d_ij} / Σ_k r_k e^{β d_ik}`, starting from uniform `r`.
/// Each iteration also tries the extrapolated step `r_j ∝ r_j c_j^λ` and keeps
/// it when it lowers the tilted objective further; `λ` doubles on success and
/// halves on failure. This matters where reproduction letters nearly tie and
/// the plain update contracts at a rate close to 1.
///
/// `max_j log c_j` bounds the distance of the tilted objective from its
/// minimum, so iteration stops once it drops below `tol`; the returned rate
/// then exceeds `R_P` at the returned distortion by at most `tol`.
pub fn blahut_arimoto(p: &GroupDistribution, spec: &DistortionSpec, beta: f64, opts: &BaOptions) -> Result<BaSolution> {
    check_beta(beta)?;
    if !beta.is_finite() {
        return Err(Error::InvalidBeta(beta));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::PreconditionFailed(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let group = spec
        .group()
        .ok_or_else(|| Error::ProfileInvalid("Blahut-Arimoto needs a finite group; discretize the circle".into()))?;
    if **group != **p.group() {
        return Err(Error::GroupMismatch);
    }
    let n = p.order();
    let dist = distortion_matrix(spec)?;
    let tilt: Vec<Vec<f64>> = dist
        .iter()
        .map(|row| row.iter().map(|d| (beta * d).exp()).collect())
        .collect();
    let support: Vec<usize> = p.support();
    let pm = p.mass();
    // −Σ_i P_i log Z_i, filling Z_i = Σ_j r_j e^{β d_ij}
    let tilted = |r: &[f64], z: &mut [f64]| -> f64 {
        let mut f = 0.0;
        for &i in &support {
            z[i] = r.iter().zip(&tilt[i]).map(|(rj, t)| rj * t).sum();
            f -= pm[i] * z[i].ln();
        }
        f
    };

    let mut r = vec![1.0 / n as f64; n];
    let mut z = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut lambda = 2.0;
    let mut objective = Vec::new();
    let mut gap = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let obj = tilted(&r, &mut z);
        c.fill(0.0);
        for &i in &support {
            let w = pm[i] / z[i];
            for (cj, t) in c.iter_mut().zip(&tilt[i]) {
                *cj += w * t;
            }
        }
        if opts.record_objective {
            objective.push(obj);
        }
        gap = c.iter().fold(f64::NEG_INFINITY, |m, cj| m.max(cj.ln()));
        if gap <= opts.tol {
            let kernel: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    if pm[i] > 0.0 {
                        (0..n).map(|j| r[j] * tilt[i][j] / z[i]).collect()
                    } else {
                        vec![0.0; n]
                    }
                })
                .collect();
            let reproduction: Vec<f64> = r.iter().zip(&c).map(|(rj, cj)| rj * cj).collect();
            let (delta, rate) = evaluate(pm, &support, &kernel, &reproduction, &dist);
            return Ok(BaSolution {
                point: RDPoint { beta, delta, rate },
                kernel,
                reproduction,
                iterations: iter,
                objective,
            });
        }
        let plain = powered_step(&r, &c, 1.0);
        let bold = powered_step(&r, &c, lambda);
        if tilted(&bold, &mut scratch) <= tilted(&plain, &mut scratch) {
            r = bold;
            lambda = (2.0 * lambda).min(MAX_EXTRAPOLATION);
        } else {
            r = plain;
            lambda = (0.5 * lambda).max(2.0);
        }
    }
    Err(Error::NoConvergence { beta, last_delta: gap })
}

const MAX_EXTRAPOLATION: f64 = 1e6;

/// `r_j c_j^λ`, renormalized, computed in log space.
fn powered_step(r: &[f64], c: &[f64], lambda: f64) -> Vec<f64> {
    let logs: Vec<f64> = r.iter().zip(c).map(|(rj, cj)| rj.ln() + lambda * cj.ln()).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= s);
    out
}

/// Expected distortion and mutual information of the joint `P_i q(j|i)`.
fn evaluate(pm: &[f64], support: &[usize], q: &[Vec<f64>], r: &[f64], dist: &[Vec<f64>]) -> (f64, f64) {
    let mut delta = 0.0;
    let mut rate = 0.0;
    for &i in support {
        for (j, &qij) in q[i].iter().enumerate() {
            if qij > 0.0 {
                delta += pm[i] * qij * dist[i][j];
                rate += pm[i] * qij * (qij / r[j]).ln();
            }
        }
    }
    (delta, rate.max(0.0))
}

fn is_uniform(p: &GroupDistribution) -> bool {
    let u = 1.0 / p.order() as f64;
    p.mass().iter().all(|m| (m - u).abs() <= 1e-12 * u.max(1e-300) + 1e-15)
}

/// Rate-distortion curve of `P` over a slope grid. Uniform sources use the
/// closed form; others run Blahut–Arimoto per slope, in parallel.
pub fn rd_curve(p: &GroupDistribution, spec: &DistortionSpec, betas: &[f64], opts: &BaOptions) -> Result<RDCurve> {
    if betas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Parse("beta grid must be sorted".into()));
    }
    if is_uniform(p) {
        let mut c = uniform_rd_curve(spec, betas)?;
        c.source = format!("uniform on group of order {}", p.order());
        return Ok(c);
    }
    let points = betas
        .par_iter()
        .map(|&b| blahut_arimoto(p, spec, b, opts).map(|s| s.point))
        .collect::<Result<Vec<_>>>()?;
    Ok(RDCurve {
        points,
        source: format!("distribution on group of order {}", p.order()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichRow {
    pub beta: f64,
    pub delta: f64,
    pub rate_p: f64,
    pub rate_u: f64,
    /// `R_U(δ) − D(P‖U)`
    pub lower: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub divergence: f64,
    pub tolerance: f64,
    pub rows: Vec<SandwichRow>,
    /// Row indices violating `max(0, R_U − D) − ε ≤ R_P ≤ R_U + ε`.
    pub violations: Vec<usize>,
}

pub const SANDWICH_TOL: f64 = 1e-6;

/// Checks `R_U(δ) − D(P‖U) ≤ R_P(δ) ≤ R_U(δ)` at the distortions reached by
/// Blahut–Arimoto on `P` along the slope grid.
pub fn sandwich_check(
    p: &GroupDistribution,
    spec: &DistortionSpec,
    betas: &[f64],
    opts: &BaOptions,
) -> Result<SandwichReport> {
    let divergence = divergence_to_uniform(p);
    let curve = rd_curve(p, spec, betas, opts)?;
    let mut rows = Vec::with_capacity(curve.points.len());
    let mut violations = Vec::new();
    for (k, pt) in curve.points.iter().enumerate() {
        let rate_u = uniform_rate_at(spec, pt.delta);
        let lower = rate_u - divergence;
        if pt.rate < lower.max(0.0) - SANDWICH_TOL || pt.rate > rate_u + SANDWICH_TOL {
            violations.push(k);
        }
        rows.push(SandwichRow {
            beta: pt.beta,
            delta: pt.delta,
            rate_p: pt.rate,
            rate_u,
            lower,
        });
    }
    Ok(SandwichReport {
        divergence,
        tolerance: SANDWICH_TOL,
        rows,
        violations,
    })
}

/// Slope grid specification, e.g. `log:-20..0:40` or `lin:-5..-1:9`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

/// Smallest magnitude of a log grid that ends at 0, relative to `|min|`.
const LOG_GRID_DEPTH: f64 = 1e-4;

impl BetaGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        if n == 0 {
            return Vec::new();
        }
        if n == 1 {
            return vec![self.min];
        }
        if !self.log {
            return (0..n)
                .map(|k| self.min + (self.max - self.min) * k as f64 / (n - 1) as f64)
                .collect();
        }
        if self.max == 0.0 {
            // log-spaced magnitudes down to |min|·1e-4, then exactly 0
            let mut v = log_space(self.min.abs(), self.min.abs() * LOG_GRID_DEPTH, n - 1);
            v.iter_mut().for_each(|b| *b = -*b);
            v.push(0.0);
            return v;
        }
        let mut v = log_space(self.min.abs(), self.max.abs(), n);
        v.iter_mut().for_each(|b| *b = -*b);
        v
    }
}

fn log_space(from: f64, to: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![from];
    }
    let (a, b) = (from.ln(), to.ln());
    let mut v: Vec<f64> = (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect();
    v[0] = from;
    v[n - 1] = to;
    v
}

impl FromStr for BetaGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad beta grid '{s}', expected log:-20..0:40 or lin:-5..0:20"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let (range, count) = rest.rsplit_once(':').ok_or_else(bad)?;
        let (min, max) = range.split_once("..").ok_or_else(bad)?;
        let grid = BetaGrid {
            min: min.trim().parse().map_err(|_| bad())?,
            max: max.trim().parse().map_err(|_| bad())?,
            count: count.trim().parse().map_err(|_| bad())?,
            log: match kind {
                "log" => true,
                "lin" | "linear" => false,
                _ => return Err(bad()),
            },
        };
        if !(grid.min <= grid.max && grid.max <= 0.0) || grid.count == 0 {
            return Err(Error::Parse(format!(
                "beta grid '{s}' must satisfy min <= max <= 0, count >= 1"
            )));
        }
        if grid.log && grid.min == 0.0 {
            return Err(Error::Parse("log grid needs min < 0".into()));
        }
        Ok(grid)
    }
}
