//! Densities on the circle group `SO(2) = ℝ/2πℤ` as truncated cosine series
//!
//! `f(x) = 1 + Σ_k a_k cos(k(x + φ_k))`
//!
//! with respect to the normalized Haar measure `dx/2π`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::measure::{kl_term, GroupDistribution};

/// Grid minimum below which a series is rejected as a density.
pub const DENSITY_TOL: f64 = -1e-9;
/// Stop refining the quadrature once successive estimates agree to this
/// relative tolerance.
pub const QUADRATURE_TOL: f64 = 1e-10;
const QUADRATURE_MAX_POINTS: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FourierJson")]
pub struct FourierDensity {
    amps: Vec<f64>,
    phases: Vec<f64>,
}

impl FourierDensity {
    /// Validates that the series is non-negative.
    ///
    /// `Σ|a_k| ≤ 1` is accepted immediately; otherwise the minimum over a grid
    /// of `max(8192·K, 4096)` points decides.
    pub fn new(amps: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if amps.len() != phases.len() {
            return Err(Error::Parse(format!(
                "{} amplitudes but {} phases",
                amps.len(),
                phases.len()
            )));
        }
        if amps.iter().chain(&phases).any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite Fourier coefficient".into()));
        }
        let density = FourierDensity { amps, phases };
        if density.amps.iter().map(|a| a.abs()).sum::<f64>() <= 1.0 {
            return Ok(density);
        }
        let grid = (8 * 1024 * density.harmonics()).max(4096);
        let (min_value, argmin) = density.grid_minimum(grid);
        if min_value < DENSITY_TOL {
            return Err(Error::NotADensity { min_value, argmin });
        }
        Ok(density)
    }

    pub fn uniform() -> Self {
        FourierDensity {
            amps: Vec::new(),
            phases: Vec::new(),
        }
    }

    /// Single harmonic `1 + a cos(k(x + φ))`.
    pub fn single(k: usize, amp: f64, phase: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parse("harmonic index starts at 1".into()));
        }
        let mut amps = vec![0.0; k];
        let mut phases = vec![0.0; k];
        amps[k - 1] = amp;
        phases[k - 1] = phase;
        Self::new(amps, phases)
    }

    pub fn amps(&self) -> &[f64] {
        &self.amps
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Truncation order `K`.
    pub fn harmonics(&self) -> usize {
        self.amps.len()
    }

    pub fn is_uniform(&self) -> bool {
        self.amps.iter().all(|&a| a == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        1.0 + self.deviation(x)
    }

    /// `f(x) − 1`, without the rounding of the leading 1.
    pub fn deviation(&self, x: f64) -> f64 {
        self.amps
            .iter()
            .zip(&self.phases)
            .enumerate()
            .filter(|(_, (a, _))| **a != 0.0)
            .map(|(i, (a, phi))| {
                let k = (i + 1) as f64;
                a * (k * (x + phi.rem_euclid(TAU))).rem_euclid(TAU).cos()
            })
            .sum::<f64>()
    }

    /// Minimum of `f` over `points` equally spaced angles, with its location.
    pub fn grid_minimum(&self, points: usize) -> (f64, f64) {
        (0..points)
            .map(|j| {
                let x = TAU * j as f64 / points as f64;
                (self.eval(x), x)
            })
            .fold((f64::INFINITY, 0.0), |acc, v| if v.0 < acc.0 { v } else { acc })
    }

    /// Coefficient product rule: `c_k = a_k b_k / 2`, phases add. Missing
    /// harmonics count as zero amplitude.
    pub fn convolve(&self, other: &FourierDensity) -> FourierDensity {
        let k = self.harmonics().max(other.harmonics());
        let get = |d: &FourierDensity, i: usize| {
            (
                d.amps.get(i).copied().unwrap_or(0.0),
                d.phases.get(i).copied().unwrap_or(0.0),
            )
        };
        let (amps, phases) = (0..k)
            .map(|i| {
                let (a, phi) = get(self, i);
                let (b, psi) = get(other, i);
                (a * b / 2.0, phi + psi)
            })
            .unzip();
        FourierDensity { amps, phases }
    }

    /// `n`-fold convolution: amplitudes `a_k^n / 2^{n-1}`, phases `n·φ_k`.
    pub fn n_fold(&self, n: usize) -> Result<FourierDensity> {
        if n == 0 {
            return Err(Error::Parse("n-fold convolution needs n >= 1".into()));
        }
        let scale = 2f64.powi(n as i32 - 1);
        Ok(FourierDensity {
            amps: self.amps.iter().map(|a| a.powi(n as i32) / scale).collect(),
            phases: self.phases.iter().map(|p| p * n as f64).collect(),
        })
    }

    /// `D(P‖U) = (1/2π) ∫ f log f dx` by composite Simpson on a doubling grid.
    ///
    /// The integrand is `f log f − f + 1`, which has the same mean and stays
    /// non-negative, so tiny divergences keep their relative precision.
    pub fn divergence_exact(&self) -> Result<f64> {
        if self.is_uniform() {
            return Ok(0.0);
        }
        let integrand = |x: f64| kl_term(self.deviation(x).max(-1.0));
        let mut points = 64usize;
        let mut prev = simpson_periodic_mean(&integrand, points);
        loop {
            points *= 2;
            let next = simpson_periodic_mean(&integrand, points);
            let change = (next - prev).abs();
            if change <= QUADRATURE_TOL * next.abs() {
                return Ok(next.max(0.0));
            }
            if points >= QUADRATURE_MAX_POINTS {
                return Err(Error::QuadratureFailure {
                    points,
                    last_change: change,
                });
            }
            prev = next;
        }
    }

    /// `½ Σ a_k²`, the small-amplitude approximation obtained from
    /// `log f ≈ f − 1`. This is the chi-square divergence `χ²(P‖U)`; the
    /// divergence itself behaves like half of it, see
    /// [`divergence_second_order`](Self::divergence_second_order).
    pub fn divergence_quadratic(&self) -> f64 {
        0.5 * self.amps.iter().map(|a| a * a).sum::<f64>()
    }

    /// `¼ Σ a_k²`, the second-order Taylor term of `D(P‖U)`.
    pub fn divergence_second_order(&self) -> f64 {
        0.5 * self.divergence_quadratic()
    }

    /// Samples the density on `Z_M`: `mass[j] ∝ f(2πj/M)`.
    pub fn discretize(&self, m: usize) -> Result<GroupDistribution> {
        let needed = (4 * self.harmonics()).max(1);
        if m < needed {
            return Err(Error::GridTooCoarse {
                grid: m,
                harmonics: self.harmonics(),
                needed,
            });
        }
        let group = Arc::new(FiniteGroup::cyclic(m)?);
        let mass = (0..m).map(|j| self.eval(TAU * j as f64 / m as f64).max(0.0)).collect();
        GroupDistribution::new(group, mass)
    }

    /// Inline form `a1=0.5@0.3,a2=0.1@0`.
    pub fn to_inline(&self) -> String {
        let parts: Vec<String> = self
            .amps
            .iter()
            .zip(&self.phases)
            .enumerate()
            .filter(|(_, (a, _))| **a != 0.0)
            .map(|(i, (a, p))| format!("a{}={}@{}", i + 1, a, p))
            .collect();
        if parts.is_empty() {
            "uniform".into()
        } else {
            parts.join(",")
        }
    }
}

/// Wire form `{amps: [...], phases: [...]}`, validated on deserialization.
#[derive(Deserialize)]
struct FourierJson {
    amps: Vec<f64>,
    #[serde(default)]
    phases: Option<Vec<f64>>,
}

impl TryFrom<FourierJson> for FourierDensity {
    type Error = Error;

    fn try_from(raw: FourierJson) -> Result<Self> {
        let phases = raw.phases.unwrap_or_else(|| vec![0.0; raw.amps.len()]);
        FourierDensity::new(raw.amps, phases)
    }
}

impl fmt::Display for FourierDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_inline())
    }
}

impl FromStr for FourierDensity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "uniform" {
            return Ok(Self::uniform());
        }
        let mut terms: Vec<(usize, f64, f64)> = Vec::new();
        for part in s.split(',') {
            let bad = || Error::Parse(format!("bad Fourier term '{part}', expected a<k>=<amp>@<phase>"));
            let part = part.trim();
            let rest = part.strip_prefix('a').ok_or_else(bad)?;
            let (k, rhs) = rest.split_once('=').ok_or_else(bad)?;
            let k: usize = k.parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            let (amp, phase) = match rhs.split_once('@') {
                Some((a, p)) => (a, p),
                None => (rhs, "0"),
            };
            terms.push((k, amp.parse().map_err(|_| bad())?, phase.parse().map_err(|_| bad())?));
        }
        let k_max = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut amps = vec![0.0; k_max];
        let mut phases = vec![0.0; k_max];
        for (k, a, p) in terms {
            amps[k - 1] = a;
            phases[k - 1] = p;
        }
        Self::new(amps, phases)
    }
}

/// Mean over `[0, 2π)` of a periodic function by composite Simpson with
/// `points` (even) subintervals.
fn simpson_periodic_mean(f: &impl Fn(f64) -> f64, points: usize) -> f64 {
    let h = TAU / points as f64;
    let mut sum = 0.0;
    for j in 0..points {
        let w = if j % 2 == 0 { 2.0 } else { 4.0 };
        sum += w * f(h * j as f64);
    }
    // endpoints f(0) = f(2π) each carry weight 1; together 2, which the j=0 term holds
    sum * h / 3.0 / TAU
}

/// Numerical circular convolution of two densities sampled on `points`
/// angles, `(1/2π)∫ f(x − y) g(y) dy` by the trapezoid rule.
pub fn convolve_by_quadrature(a: &FourierDensity, b: &FourierDensity, points: usize) -> Vec<f64> {
    let xs: Vec<f64> = (0..points).map(|j| TAU * j as f64 / points as f64).collect();
    let fa: Vec<f64> = xs.iter().map(|&x| a.eval(x)).collect();
    let fb: Vec<f64> = xs.iter().map(|&x| b.eval(x)).collect();
    (0..points)
        .map(|i| (0..points).map(|j| fa[(i + points - j) % points] * fb[j]).sum::<f64>() / points as f64)
        .collect()
}
