//! Convergence of convolution powers `P^{∗n}` to the Haar measure.
//!
//! Series of divergence, total variation and transport cost along `n`,
//! detection of the subgroup and coset supports that block convergence, and
//! executable checks of the decay bounds.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::distortion::DistortionSpec;
use crate::error::{Error, Result};
use crate::fourier::FourierDensity;
use crate::io::{fmt_sci, Table};
use crate::measure::{divergence_to_uniform, total_variation_to_uniform, GroupDistribution};
use crate::rd::{rd_curve, uniform_rate_at, BaOptions, SANDWICH_TOL};
use crate::transport::transport_distance;

/// Slack for the pointwise inequalities checked below.
pub const CHECK_SLACK: f64 = 1e-12;
/// Divergences at or below this are excluded from rate fits.
pub const FIT_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converges,
    SubgroupSupported,
    CosetSupported,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Converges => "converges",
            Verdict::SubgroupSupported => "subgroup_supported",
            Verdict::CosetSupported => "coset_supported",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub verdict: Verdict,
    /// Members of `F`, when the support sits in `F` or one of its cosets.
    pub subgroup: Option<Vec<usize>>,
    pub subgroup_is_normal: Option<bool>,
    pub coset_rep: Option<usize>,
    pub period: Option<usize>,
    /// Whether `supp(P^{∗n})` is eventually the whole group.
    pub eventual_support_full: bool,
}

/// Tests whether `supp(P)` lies in a coset `x₀F` of a proper subgroup `F`.
///
/// `F` is generated by `x₀⁻¹ supp(P)` for the first support element `x₀`.
/// For a coset the period is the order of `x₀F` in `G/F` when `F` is normal,
/// otherwise the cycle length of the support sequence.
pub fn detect_obstruction(p: &GroupDistribution) -> ObstructionReport {
    let g = p.group();
    let support = p.support();
    let x0 = support[0];
    let shifted: Vec<usize> = support.iter().map(|&s| g.mul(g.inv(x0), s)).collect();
    let f = crate::group::subgroup_closure(g, &shifted).expect("support is non-empty and in range");
    let cycle = support_cycle(p);
    let eventual_support_full = cycle.as_ref().is_some_and(|c| c.full);
    if f.is_whole_group() {
        return ObstructionReport {
            verdict: Verdict::Converges,
            subgroup: None,
            subgroup_is_normal: None,
            coset_rep: None,
            period: None,
            eventual_support_full,
        };
    }
    let normal = f.is_normal();
    if f.contains(x0) {
        return ObstructionReport {
            verdict: Verdict::SubgroupSupported,
            subgroup: Some(f.members().to_vec()),
            subgroup_is_normal: Some(normal),
            coset_rep: None,
            period: None,
            eventual_support_full,
        };
    }
    let period = if normal {
        let mut k = 1;
        let mut x = x0;
        while !f.contains(x) {
            x = g.mul(x, x0);
            k += 1;
        }
        Some(k)
    } else {
        cycle.map(|c| c.period)
    };
    ObstructionReport {
        verdict: Verdict::CosetSupported,
        subgroup: Some(f.members().to_vec()),
        subgroup_is_normal: Some(normal),
        coset_rep: Some(x0),
        period,
        eventual_support_full,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportCycle {
    /// First `n` whose support recurs.
    pub start: usize,
    pub period: usize,
    /// The recurring supports are the whole group.
    pub full: bool,
}

/// Iterates `S_{n+1} = S_n · S_1` until a support repeats, for at most
/// `order² + order` steps.
pub fn support_cycle(p: &GroupDistribution) -> Option<SupportCycle> {
    let g = p.group();
    let order = g.order();
    let s1 = p.support();
    let mut current: Vec<bool> = (0..order).map(|i| p.mass()[i] > 0.0).collect();
    let mut seen: HashMap<Vec<bool>, usize> = HashMap::new();
    for n in 1..=order * order + order {
        if let Some(&first) = seen.get(&current) {
            return Some(SupportCycle {
                start: first,
                period: n - first,
                full: current.iter().all(|&b| b),
            });
        }
        let mut next = vec![false; order];
        for (a, _) in current.iter().enumerate().filter(|(_, &b)| b) {
            for &b in &s1 {
                next[g.mul(a, b)] = true;
            }
        }
        seen.insert(std::mem::replace(&mut current, next), n);
    }
    None
}

/// Per-`n` statistics of `P^{∗n}` for `n = 1..=N`.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceSeries {
    pub n_values: Vec<usize>,
    /// `D(P^{∗n}‖U)`, nats.
    pub divergence: Vec<f64>,
    pub tv: Vec<f64>,
    pub transport: Option<Vec<f64>>,
    /// `min dP^{∗n}/dU`.
    pub min_density: Vec<f64>,
    /// `(1 − c)^{n−1} D(P)` with `c = min dP/dU`.
    pub bound: Vec<f64>,
}

/// Iterates `P^{∗(n+1)} = P^{∗n} ∗ P`, recording every `n ≤ N`.
pub fn run_series(p: &GroupDistribution, n_max: usize, spec: Option<&DistortionSpec>) -> Result<ConvergenceSeries> {
    if n_max == 0 {
        return Err(Error::InsufficientData("series needs N >= 1".into()));
    }
    let u = GroupDistribution::uniform(p.group().clone());
    let d1 = divergence_to_uniform(p);
    let c = p.min_density().clamp(0.0, 1.0);
    let mut s = ConvergenceSeries {
        n_values: Vec::with_capacity(n_max),
        divergence: Vec::with_capacity(n_max),
        tv: Vec::with_capacity(n_max),
        transport: spec.map(|_| Vec::with_capacity(n_max)),
        min_density: Vec::with_capacity(n_max),
        bound: Vec::with_capacity(n_max),
    };
    let mut q = p.clone();
    for n in 1..=n_max {
        if n > 1 {
            q = q.convolve(p)?;
        }
        s.n_values.push(n);
        s.divergence.push(divergence_to_uniform(&q));
        s.tv.push(total_variation_to_uniform(&q));
        s.min_density.push(q.min_density());
        s.bound.push((1.0 - c).powi(n as i32 - 1) * d1);
        if let (Some(spec), Some(col)) = (spec, s.transport.as_mut()) {
            col.push(transport_distance(&q, &u, spec)?.value);
        }
    }
    Ok(s)
}

impl ConvergenceSeries {
    pub fn len(&self) -> usize {
        self.n_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_values.is_empty()
    }

    pub fn fit_rate(&self, burn_in: usize) -> Result<RateFit> {
        fit_rate(&self.n_values, &self.divergence, burn_in)
    }

    /// Columns `n, divergence_nats, tv, transport, min_density, bound_(1-c)^(n-1)`;
    /// the transport cell is empty when no distortion was given.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new([
            "n",
            "divergence_nats",
            "tv",
            "transport",
            "min_density",
            "bound_(1-c)^(n-1)",
        ]);
        for k in 0..self.len() {
            t.push(vec![
                self.n_values[k].to_string(),
                fmt_sci(self.divergence[k]),
                fmt_sci(self.tv[k]),
                self.transport.as_ref().map_or(String::new(), |c| fmt_sci(c[k])),
                fmt_sci(self.min_density[k]),
                fmt_sci(self.bound[k]),
            ]);
        }
        t
    }
}

/// Divergence series of `A^{∗n}` on the circle.
#[derive(Clone, Debug, Serialize)]
pub struct FourierSeries {
    pub n_values: Vec<usize>,
    pub exact: Vec<f64>,
    /// `½ Σ a_k²` of `A^{∗n}`.
    pub quadratic: Vec<f64>,
    /// `¼ Σ a_k²` of `A^{∗n}`.
    pub second_order: Vec<f64>,
}

pub fn run_series_fourier(a: &FourierDensity, n_max: usize) -> Result<FourierSeries> {
    if n_max == 0 {
        return Err(Error::InsufficientData("series needs N >= 1".into()));
    }
    let powers: Vec<FourierDensity> = (1..=n_max).map(|n| a.n_fold(n)).collect::<Result<_>>()?;
    let exact = powers
        .par_iter()
        .map(FourierDensity::divergence_exact)
        .collect::<Result<Vec<_>>>()?;
    Ok(FourierSeries {
        n_values: (1..=n_max).collect(),
        exact,
        quadratic: powers.iter().map(FourierDensity::divergence_quadratic).collect(),
        second_order: powers.iter().map(FourierDensity::divergence_second_order).collect(),
    })
}

impl FourierSeries {
    pub fn fit_rate(&self, burn_in: usize) -> Result<RateFit> {
        fit_rate(&self.n_values, &self.exact, burn_in)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new([
            "n",
            "divergence_exact",
            "divergence_quadratic",
            "divergence_second_order",
        ]);
        for k in 0..self.n_values.len() {
            t.push(vec![
                self.n_values[k].to_string(),
                fmt_sci(self.exact[k]),
                fmt_sci(self.quadratic[k]),
                fmt_sci(self.second_order[k]),
            ]);
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    /// Per-step factor `e^{slope}`.
    pub rho: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
    pub first_n: usize,
    pub last_n: usize,
    /// No decay over the window (`rho ≥ 1 − 1e-9`).
    pub stalled: bool,
}

/// Least-squares line through `(n, log D_n)` over the entries after the
/// first `burn_in`, up to the last entry above [`FIT_FLOOR`].
///
/// The window is also cut at the first clear increase (relative `1e-6`):
/// exact divergences never increase along `n`, so an increase marks the
/// rounding floor.
pub fn fit_rate(n_values: &[usize], divergence: &[f64], burn_in: usize) -> Result<RateFit> {
    if n_values.len() != divergence.len() {
        return Err(Error::InsufficientData("column lengths differ".into()));
    }
    let last = divergence.iter().rposition(|&d| d > FIT_FLOOR);
    let mut window: Vec<(f64, f64)> = Vec::new();
    if let Some(last) = last {
        for k in burn_in..=last {
            let d = divergence[k];
            if d <= FIT_FLOOR {
                continue;
            }
            if window.last().is_some_and(|&(_, prev)| d.ln() > prev + 1e-6) {
                break;
            }
            window.push((n_values[k] as f64, d.ln()));
        }
    }
    if window.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} usable entries after burn-in {burn_in}, need 5",
            window.len()
        )));
    }
    let m = window.len() as f64;
    let mx = window.iter().map(|w| w.0).sum::<f64>() / m;
    let my = window.iter().map(|w| w.1).sum::<f64>() / m;
    let sxx: f64 = window.iter().map(|w| (w.0 - mx).powi(2)).sum();
    let sxy: f64 = window.iter().map(|w| (w.0 - mx) * (w.1 - my)).sum();
    let syy: f64 = window.iter().map(|w| (w.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = window.iter().map(|w| (w.1 - intercept - slope * w.0).powi(2)).sum();
    // a constant series is fitted perfectly
    let r2 = if syy <= 1e-24 * my.abs().max(1.0) {
        1.0
    } else {
        1.0 - ss_res / syy
    };
    let rho = slope.exp();
    Ok(RateFit {
        rho,
        slope,
        intercept,
        r2,
        points: window.len(),
        first_n: window[0].0 as usize,
        last_n: window[window.len() - 1].0 as usize,
        stalled: rho >= 1.0 - 1e-9,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub n: usize,
    pub divergence: f64,
    pub bound: f64,
    /// `bound − divergence`
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    /// `min dP/dU`
    pub c: f64,
    pub divergence_p: f64,
    pub rows: Vec<DecayRow>,
    pub holds: bool,
}

/// `D(P^{∗n}‖U) ≤ (1 − c)^{n−1} D(P‖U)` for `n ≤ N`, `c = min dP/dU > 0`.
pub fn decay_bound_check(p: &GroupDistribution, n_max: usize) -> Result<DecayReport> {
    let c = p.min_density();
    if c <= 0.0 {
        return Err(Error::PreconditionFailed(
            "min dP/dU = 0, the decay bound is vacuous".into(),
        ));
    }
    let s = run_series(p, n_max, None)?;
    let rows: Vec<DecayRow> = (0..s.len())
        .map(|k| DecayRow {
            n: s.n_values[k],
            divergence: s.divergence[k],
            bound: s.bound[k],
            margin: s.bound[k] - s.divergence[k],
        })
        .collect();
    let holds = rows.iter().all(|r| r.margin >= -CHECK_SLACK);
    Ok(DecayReport {
        c: c.min(1.0),
        divergence_p: s.divergence[0],
        rows,
        holds,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OneBitReport {
    pub d_nats: f64,
    /// `max_ε 2ε²(U{dP/dU ≥ ε} − ½)` over attained density values.
    pub floor: f64,
    pub epsilon: f64,
    pub min_density_pp: f64,
    /// `D(P‖U) < log 2`
    pub applicable: bool,
    pub holds: bool,
}

/// Lower floor for `d(P∗P)/dU` when `P` is within one bit of uniform.
///
/// Values are reported whether or not the hypothesis holds.
pub fn one_bit_floor(p: &GroupDistribution) -> Result<OneBitReport> {
    let d = divergence_to_uniform(p);
    let dens = p.density();
    let order = dens.len() as f64;
    let mut values: Vec<f64> = dens.iter().copied().filter(|&v| v > 0.0).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let (mut floor, mut epsilon) = (f64::NEG_INFINITY, 0.0);
    for &v in &values {
        let frac = dens.iter().filter(|&&f| f >= v).count() as f64 / order;
        let candidate = 2.0 * v * v * (frac - 0.5);
        if candidate > floor {
            floor = candidate;
            epsilon = v;
        }
    }
    let min_density_pp = p.convolve(p)?.min_density();
    let applicable = d < std::f64::consts::LN_2 - CHECK_SLACK;
    let holds = applicable && floor > 0.0 && min_density_pp >= floor - CHECK_SLACK;
    Ok(OneBitReport {
        d_nats: d,
        floor,
        epsilon,
        min_density_pp,
        applicable,
        holds,
    })
}

/// [`one_bit_floor`], failing when `D(P‖U) ≥ log 2`.
pub fn one_bit_floor_check(p: &GroupDistribution) -> Result<OneBitReport> {
    let r = one_bit_floor(p)?;
    if !r.applicable {
        return Err(Error::PreconditionFailed(format!(
            "D(P||U) = {} nats is not below log 2 (floor {}, min density of P*P {})",
            r.d_nats, r.floor, r.min_density_pp
        )));
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct PointwiseRow {
    pub n: usize,
    /// `U(|dP^{∗n}/dU − 1| ≥ eps)`
    pub fraction: f64,
    pub tv: f64,
    /// `tv / eps`
    pub bound: f64,
    pub holds: bool,
}

pub fn pointwise_density_check(p: &GroupDistribution, n_max: usize, eps: f64) -> Result<Vec<PointwiseRow>> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::PreconditionFailed(format!("eps must be positive, got {eps}")));
    }
    let mut q = p.clone();
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if n > 1 {
            q = q.convolve(p)?;
        }
        let dens = q.density();
        let fraction = dens.iter().filter(|&&f| (f - 1.0).abs() >= eps).count() as f64 / dens.len() as f64;
        let tv = total_variation_to_uniform(&q);
        let bound = tv / eps;
        rows.push(PointwiseRow {
            n,
            fraction,
            tv,
            bound,
            holds: fraction <= bound + CHECK_SLACK,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct RdConvergenceRow {
    pub n: usize,
    pub divergence: f64,
    /// `sup_δ |R_{P^{∗n}}(δ) − R_U(δ)|` over the grid.
    pub sup_gap: f64,
    /// `sup_gap ≤ divergence + tolerance`
    pub squeezed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RdConvergenceReport {
    pub verdict: Verdict,
    pub rows: Vec<RdConvergenceRow>,
    /// Gaps nonincreasing in `n` up to the tolerance.
    pub monotone: bool,
    pub tolerance: f64,
}

/// Distance between the rate-distortion curves of `P^{∗n}` and `U`.
///
/// The gap of each solved point is taken against the uniform curve at the
/// same distortion. Non-converging `P` are accepted; their gaps stay bounded
/// away from zero.
pub fn rd_convergence_check(
    p: &GroupDistribution,
    spec: &DistortionSpec,
    betas: &[f64],
    n_list: &[usize],
    opts: &BaOptions,
) -> Result<RdConvergenceReport> {
    let verdict = detect_obstruction(p).verdict;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let q = p.n_fold(n)?;
        let divergence = divergence_to_uniform(&q);
        let curve = rd_curve(&q, spec, betas, opts)?;
        let sup_gap = curve
            .points
            .iter()
            .map(|pt| (pt.rate - uniform_rate_at(spec, pt.delta)).abs())
            .fold(0.0, f64::max);
        rows.push(RdConvergenceRow {
            n,
            divergence,
            sup_gap,
            squeezed: sup_gap <= divergence + SANDWICH_TOL,
        });
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].n < w[0].n || w[1].sup_gap <= w[0].sup_gap + SANDWICH_TOL);
    Ok(RdConvergenceReport {
        verdict,
        rows,
        monotone,
        tolerance: SANDWICH_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{builtin_group, FiniteGroup, GroupFamily};
    use proptest::prelude::*;
    use std::f64::consts::LN_2;
    use std::sync::Arc;

    fn z(n: usize) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(n).unwrap())
    }

    /// Oracle for supports: iterate sets of elements directly.
    fn oracle_supports(g: &FiniteGroup, s1: &[usize], steps: usize) -> Vec<Vec<usize>> {
        let mut out = vec![s1.to_vec()];
        for _ in 1..steps {
            let prev = out.last().unwrap();
            let mut next: Vec<usize> = prev
                .iter()
                .flat_map(|&a| s1.iter().map(move |&b| g.mul(a, b)))
                .collect();
            next.sort_unstable();
            next.dedup();
            out.push(next);
        }
        out
    }

    #[test]
    fn obstruction_verdicts_on_z6() {
        let g = z(6);
        let full = GroupDistribution::new(g.clone(), vec![1.0; 6]).unwrap();
        assert_eq!(detect_obstruction(&full).verdict, Verdict::Converges);

        let even = GroupDistribution::uniform_on(g.clone(), &[0, 2, 4]).unwrap();
        let r = detect_obstruction(&even);
        assert_eq!(r.verdict, Verdict::SubgroupSupported);
        assert_eq!(r.subgroup.as_deref(), Some(&[0, 2, 4][..]));
        assert!(!r.eventual_support_full);

        let odd = GroupDistribution::uniform_on(g.clone(), &[1, 3, 5]).unwrap();
        let r = detect_obstruction(&odd);
        assert_eq!(r.verdict, Verdict::CosetSupported);
        assert_eq!(r.subgroup.as_deref(), Some(&[0, 2, 4][..]));
        assert_eq!((r.coset_rep, r.period), (Some(1), Some(2)));
        let sup = oracle_supports(&g, &[1, 3, 5], 6);
        for (k, s) in sup.iter().enumerate() {
            assert_eq!(s, if k % 2 == 0 { &[1, 3, 5][..] } else { &[0, 2, 4][..] });
        }
        assert_eq!(
            support_cycle(&odd).unwrap(),
            SupportCycle {
                start: 1,
                period: 2,
                full: false
            }
        );

        let two = GroupDistribution::new(g, vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let r = detect_obstruction(&two);
        assert_eq!(r.verdict, Verdict::Converges);
        assert!(r.eventual_support_full);
    }

    #[test]
    fn point_masses() {
        let g = z(5);
        let e = GroupDistribution::point(g.clone(), 0).unwrap();
        assert_eq!(detect_obstruction(&e).verdict, Verdict::SubgroupSupported);
        let r = detect_obstruction(&GroupDistribution::point(g, 2).unwrap());
        assert_eq!(r.verdict, Verdict::CosetSupported);
        assert_eq!(r.subgroup.as_deref(), Some(&[0][..]));
        assert_eq!(r.period, Some(5));
    }

    #[test]
    fn non_normal_coset_can_fill_the_group() {
        let (g, _) = builtin_group(GroupFamily::Symmetric(3)).unwrap();
        let inv: Vec<usize> = (0..6)
            .filter(|&x| x != g.identity() && g.mul(x, x) == g.identity())
            .collect();
        let (t, s) = (inv[0], inv[1]);
        let p = GroupDistribution::uniform_on(g.clone(), &[t, g.mul(t, s)]).unwrap();
        let r = detect_obstruction(&p);
        assert_eq!(r.verdict, Verdict::CosetSupported);
        assert_eq!(r.subgroup_is_normal, Some(false));
        assert!(r.eventual_support_full);
        let sup = oracle_supports(&g, &p.support(), 12);
        assert_eq!(sup.last().unwrap().len(), 6);
    }

    #[test]
    fn series_full_support_decreases() {
        let g = z(6);
        let p = GroupDistribution::new(g, vec![0.3, 0.25, 0.15, 0.1, 0.12, 0.08]).unwrap();
        let s = run_series(&p, 30, None).unwrap();
        assert!(s.divergence.windows(2).all(|w| w[1] < w[0]));
        assert!(*s.divergence.last().unwrap() < 1e-12);
        // direct iteration oracle
        let mut q = p.mass().to_vec();
        for n in 2..=30 {
            let mut next = vec![0.0; 6];
            for a in 0..6 {
                for b in 0..6 {
                    next[(a + b) % 6] += q[a] * p.mass()[b];
                }
            }
            q = next;
            let d: f64 = q.iter().map(|&m| m * (6.0 * m).ln()).sum();
            assert!((s.divergence[n - 1] - d).abs() < 1e-14, "n={n}");
        }
        for k in 0..30 {
            assert!(0.5 * s.tv[k] * s.tv[k] <= s.divergence[k] + 1e-15);
        }
    }

    #[test]
    fn subgroup_and_coset_series_are_constant() {
        let g = z(6);
        for support in [[0, 2, 4], [1, 3, 5]] {
            let p = GroupDistribution::uniform_on(g.clone(), &support).unwrap();
            let s = run_series(&p, 40, None).unwrap();
            assert!(s.divergence.iter().all(|d| (d - LN_2).abs() < 1e-12));
            let fit = s.fit_rate(4).unwrap();
            assert!(fit.stalled && (fit.rho - 1.0).abs() < 1e-9 && fit.r2 == 1.0);
        }
    }

    #[test]
    fn transport_column() {
        let g = z(6);
        let spec = DistortionSpec::cosine(g.clone()).unwrap();
        let p = GroupDistribution::new(g, vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
        // slowest mode decays like cos(π/6)^n
        let s = run_series(&p, 150, Some(&spec)).unwrap();
        let t = s.transport.as_ref().unwrap();
        assert!(t[149] < 1e-6 && t[0] > 0.5);
        assert!(t.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let csv = s.to_table().to_csv();
        assert!(csv.starts_with("n,divergence_nats,tv,transport,min_density,bound_(1-c)^(n-1)\n"));
        assert_eq!(csv.lines().count(), 151);
    }

    #[test]
    fn fourier_series() {
        let u = run_series_fourier(&FourierDensity::uniform(), 5).unwrap();
        assert!(u.exact.iter().chain(&u.quadratic).all(|&d| d == 0.0));
        let a = FourierDensity::single(1, 0.8, 0.0).unwrap();
        let s = run_series_fourier(&a, 20).unwrap();
        for (k, &q) in s.quadratic.iter().enumerate() {
            let n = (k + 1) as i32;
            let want = 2.0 * 0.4f64.powi(2 * n);
            assert!((q - want).abs() <= 1e-14 * want);
        }
        // exact ≈ ¼Σa², i.e. half the quadratic column, once amplitudes are small
        let ratio = s.exact[4] / s.quadratic[4];
        assert!((ratio - 0.5).abs() < 0.005, "{ratio}");
        assert!((s.exact[4] / s.second_order[4] - 1.0).abs() < 0.01);
        let fit = s.fit_rate(4).unwrap();
        assert!((fit.rho / 0.16 - 1.0).abs() < 0.02, "{fit:?}");
        assert_eq!((fit.first_n, fit.last_n), (5, 20));
    }

    #[test]
    fn discretized_series_matches_fourier() {
        let a = FourierDensity::new(vec![0.6, 0.3], vec![0.2, -1.0]).unwrap();
        let f = run_series_fourier(&a, 10).unwrap();
        let d = run_series(&a.discretize(4096).unwrap(), 10, None).unwrap();
        for k in 0..10 {
            assert!((f.exact[k] - d.divergence[k]).abs() < 1e-5, "n={}", k + 1);
        }
    }

    #[test]
    fn fit_rate_errors_and_exact_geometric() {
        let n: Vec<usize> = (1..=12).collect();
        let d: Vec<f64> = n.iter().map(|&k| 3.0 * 0.3f64.powi(k as i32)).collect();
        let fit = fit_rate(&n, &d, 2).unwrap();
        assert!((fit.rho - 0.3).abs() < 1e-12 && (fit.r2 - 1.0).abs() < 1e-12);
        assert!(matches!(fit_rate(&n[..6], &d[..6], 2), Err(Error::InsufficientData(_))));
        let zeros = vec![0.0; 12];
        assert!(fit_rate(&n, &zeros, 0).is_err());
    }

    #[test]
    fn decay_bound_examples() {
        let g = z(4);
        let u = GroupDistribution::uniform(g.clone());
        let r = decay_bound_check(&u, 5).unwrap();
        assert!(r.holds && r.rows.iter().all(|row| row.divergence == 0.0));
        let p = GroupDistribution::new(g.clone(), vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let r = decay_bound_check(&p, 20).unwrap();
        assert!((r.c - 0.4).abs() < 1e-15);
        assert!(r.holds);
        assert!(r.rows[1..].iter().all(|row| row.margin > 0.0));
        let eps = 1e-4;
        let near = GroupDistribution::new(g.clone(), vec![1.0 - 3.0 * eps, eps, eps, eps]).unwrap();
        assert!(decay_bound_check(&near, 20).unwrap().holds);
        let holey = GroupDistribution::new(g, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(
            decay_bound_check(&holey, 5),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn one_bit_examples() {
        let g = z(6);
        let r = one_bit_floor_check(&GroupDistribution::uniform(g.clone())).unwrap();
        assert!(r.holds && (r.floor - 1.0).abs() < 1e-15 && r.min_density_pp == 1.0);

        let uf = GroupDistribution::uniform_on(g.clone(), &[0, 2, 4]).unwrap();
        assert!(matches!(one_bit_floor_check(&uf), Err(Error::PreconditionFailed(_))));
        let r = one_bit_floor(&uf).unwrap();
        assert!(!r.applicable && !r.holds && r.min_density_pp == 0.0);

        // a Z6 distribution tuned to D = 0.5 nats
        let shape = |t: f64| GroupDistribution::new(g.clone(), vec![t, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let (mut lo, mut hi) = (1.0, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if divergence_to_uniform(&shape(mid)) < 0.5 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let p = shape(lo);
        assert!((divergence_to_uniform(&p) - 0.5).abs() < 1e-9);
        let r = one_bit_floor_check(&p).unwrap();
        assert!(r.holds && r.floor > 0.0);
        // scan oracle over a fine ε grid never beats the breakpoint maximum
        let dens = p.density();
        for k in 1..2000 {
            let e = k as f64 * 1e-3;
            let frac = dens.iter().filter(|&&f| f > e).count() as f64 / 6.0;
            assert!(2.0 * e * e * (frac - 0.5) <= r.floor + 1e-12);
        }
    }

    #[test]
    fn pointwise_examples() {
        let g = z(8);
        let u = GroupDistribution::uniform(g.clone());
        assert!(pointwise_density_check(&u, 5, 0.1)
            .unwrap()
            .iter()
            .all(|r| r.fraction == 0.0));
        let p = GroupDistribution::new(g, vec![0.3, 0.2, 0.1, 0.05, 0.05, 0.1, 0.1, 0.1]).unwrap();
        let rows = pointwise_density_check(&p, 40, 0.1).unwrap();
        assert!(rows.iter().all(|r| r.holds));
        let n0 = rows.iter().position(|r| r.fraction == 0.0).unwrap();
        assert!(rows[n0..].iter().all(|r| r.fraction == 0.0));
        assert!(pointwise_density_check(&p, 5, 0.0).is_err());
    }

    #[test]
    fn rd_convergence_examples() {
        let g = z(6);
        let spec = DistortionSpec::cosine(g.clone()).unwrap();
        let betas = crate::rd::BetaGrid {
            min: -10.0,
            max: -0.05,
            count: 8,
            log: true,
        }
        .values();
        let opts = BaOptions::default();

        let u = GroupDistribution::uniform(g.clone());
        let r = rd_convergence_check(&u, &spec, &betas, &[1], &opts).unwrap();
        assert!(r.rows[0].sup_gap <= 1e-8);

        let p = GroupDistribution::new(g.clone(), vec![0.4, 0.3, 0.1, 0.05, 0.05, 0.1]).unwrap();
        let r = rd_convergence_check(&p, &spec, &betas, &[1, 2, 4, 8, 16, 40], &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Converges);
        assert!(r.monotone && r.rows.iter().all(|row| row.squeezed), "{:?}", r.rows);
        let last = r.rows.last().unwrap();
        assert!(last.divergence < 1e-6 && last.sup_gap < 1e-5);

        let uf = GroupDistribution::uniform_on(g, &[0, 2, 4]).unwrap();
        let r = rd_convergence_check(&uf, &spec, &betas, &[1, 5, 20], &opts).unwrap();
        let first = r.rows[0].sup_gap;
        assert!(first > 0.05);
        assert!(r.rows.iter().all(|row| (row.sup_gap - first).abs() < 1e-9));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn series_is_monotone_and_bounded(
            n in 2usize..12,
            raw in proptest::collection::vec(0.0f64..1.0, 12),
        ) {
            let mass: Vec<f64> = raw[..n].iter().map(|v| v + 1e-3).collect();
            let p = GroupDistribution::new(z(n), mass).unwrap();
            let s = run_series(&p, 15, None).unwrap();
            for k in 1..s.len() {
                prop_assert!(s.divergence[k] <= s.divergence[k - 1] + 1e-15);
                prop_assert!(s.divergence[k] <= s.bound[k] + CHECK_SLACK);
            }
        }
    }
}
