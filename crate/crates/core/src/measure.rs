//! Probability distributions on finite groups.
//!
//! All divergences are in nats. The Haar measure is the uniform distribution
//! with mass `1/order` on every element.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{subgroup_closure, FiniteGroup, Subgroup};

/// Renormalization tolerance at construction.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Tolerance for equality of distributions.
pub const EQUALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct GroupDistribution {
    group: Arc<FiniteGroup>,
    mass: Vec<f64>,
}

impl GroupDistribution {
    /// Checks non-negativity and renormalizes to total mass 1.
    pub fn new(group: Arc<FiniteGroup>, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != group.order() {
            return Err(Error::InvalidDistribution(format!(
                "{} masses for a group of order {}",
                mass.len(),
                group.order()
            )));
        }
        if let Some((i, m)) = mass.iter().enumerate().find(|(_, m)| !m.is_finite() || **m < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "mass[{i}] = {m} is not a non-negative number"
            )));
        }
        let total: f64 = mass.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("total mass is zero".into()));
        }
        let mut mass = mass;
        if total != 1.0 {
            mass.iter_mut().for_each(|m| *m /= total);
        }
        debug_assert!((mass.iter().sum::<f64>() - 1.0).abs() <= NORMALIZATION_TOL);
        Ok(GroupDistribution { group, mass })
    }

    /// Haar probability measure.
    pub fn uniform(group: Arc<FiniteGroup>) -> Self {
        let n = group.order();
        GroupDistribution {
            group,
            mass: vec![1.0 / n as f64; n],
        }
    }

    pub fn point(group: Arc<FiniteGroup>, a: usize) -> Result<Self> {
        group.check_index(a)?;
        let mut mass = vec![0.0; group.order()];
        mass[a] = 1.0;
        Ok(GroupDistribution { group, mass })
    }

    /// Uniform on an arbitrary set of elements (duplicates ignored).
    pub fn uniform_on(group: Arc<FiniteGroup>, elements: &[usize]) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let mut mass = vec![0.0; group.order()];
        for &a in elements {
            group.check_index(a)?;
            mass[a] = 1.0;
        }
        Self::new(group, mass)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn order(&self) -> usize {
        self.mass.len()
    }

    /// `dP/dU` at each element.
    pub fn density(&self) -> Vec<f64> {
        let n = self.order() as f64;
        self.mass.iter().map(|m| m * n).collect()
    }

    /// `min dP/dU`.
    pub fn min_density(&self) -> f64 {
        self.order() as f64 * self.mass.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.order()).filter(|&i| self.mass[i] > 0.0).collect()
    }

    pub fn has_full_support(&self) -> bool {
        self.mass.iter().all(|&m| m > 0.0)
    }

    pub fn same_group(&self, other: &GroupDistribution) -> bool {
        Arc::ptr_eq(&self.group, &other.group) || *self.group == *other.group
    }

    fn require_same_group(&self, other: &GroupDistribution) -> Result<()> {
        if self.same_group(other) {
            Ok(())
        } else {
            Err(Error::GroupMismatch)
        }
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self.mass.iter().filter(|&&m| m > 0.0).map(|m| m * m.ln()).sum::<f64>()
    }

    /// Sup-norm distance between mass vectors.
    pub fn max_abs_diff(&self, other: &GroupDistribution) -> Result<f64> {
        self.require_same_group(other)?;
        Ok(self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &GroupDistribution, tol: f64) -> bool {
        self.max_abs_diff(other).map(|d| d <= tol).unwrap_or(false)
    }

    /// Left translate `g∗P`: the law of `g∗X` for `X ~ P`.
    pub fn translate(&self, g: usize) -> Result<Self> {
        self.group.check_index(g)?;
        let mut mass = vec![0.0; self.order()];
        for (x, &m) in self.mass.iter().enumerate() {
            mass[self.group.mul(g, x)] = m;
        }
        Ok(GroupDistribution {
            group: self.group.clone(),
            mass,
        })
    }

    /// Right translate `P∗g`: the law of `X∗g`.
    pub fn translate_right(&self, g: usize) -> Result<Self> {
        self.group.check_index(g)?;
        let mut mass = vec![0.0; self.order()];
        for (x, &m) in self.mass.iter().enumerate() {
            mass[self.group.mul(x, g)] = m;
        }
        Ok(GroupDistribution {
            group: self.group.clone(),
            mass,
        })
    }

    /// `(P∗Q)(g) = Σ_h P(g∗h⁻¹)·Q(h)`, the law of `X∗Y` for independent
    /// `X ~ P`, `Y ~ Q`.
    pub fn convolve(&self, other: &GroupDistribution) -> Result<Self> {
        self.require_same_group(other)?;
        let g = &self.group;
        let mut mass = vec![0.0; self.order()];
        let right: Vec<(usize, f64)> = other
            .mass
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, m)| *m > 0.0)
            .collect();
        for (a, &pa) in self.mass.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            for &(b, qb) in &right {
                mass[g.mul(a, b)] += pa * qb;
            }
        }
        Ok(GroupDistribution { group: g.clone(), mass })
    }

    /// `P^{∗n}` by repeated squaring.
    pub fn n_fold(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution("n-fold convolution needs n >= 1".into()));
        }
        let mut result: Option<GroupDistribution> = None;
        let mut base = self.clone();
        let mut k = n;
        loop {
            if k & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.convolve(&base)?,
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.convolve(&base)?;
        }
        Ok(result.expect("n >= 1"))
    }

    pub fn to_json(&self, group_ref: &str) -> DistributionJson {
        DistributionJson {
            group_ref: group_ref.to_string(),
            mass: self.mass.clone(),
        }
    }
}

/// Serialized distribution; `group_ref` names the group (e.g. `cyclic:6`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionJson {
    pub group_ref: String,
    pub mass: Vec<f64>,
}

/// `D(P‖Q) = Σ P log(P/Q)` in nats; `+∞` when `P` is not absolutely
/// continuous with respect to `Q`.
///
/// Summed as `Σ Q φ(P/Q − 1)` with `φ(t) = (1+t) ln(1+t) − t ≥ 0`, which equals
/// the usual sum for normalized inputs and has no cancellation near `P = Q`.
pub fn divergence(p: &GroupDistribution, q: &GroupDistribution) -> Result<f64> {
    p.require_same_group(q)?;
    let mut d = 0.0;
    for (&pi, &qi) in p.mass.iter().zip(&q.mass) {
        if qi == 0.0 {
            if pi > 0.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        d += qi * kl_term((pi - qi) / qi);
    }
    Ok(d)
}

/// `D(P‖U)`.
pub fn divergence_to_uniform(p: &GroupDistribution) -> f64 {
    let n = p.order() as f64;
    p.mass.iter().map(|&m| kl_term(m * n - 1.0)).sum::<f64>() / n
}

/// `(1+t) ln(1+t) − t` for `t ≥ −1`.
pub(crate) fn kl_term(t: f64) -> f64 {
    if t <= -1.0 {
        return 1.0;
    }
    if t.abs() < 0.25 {
        // Σ_{k≥2} (−t)^k / (k(k−1))
        let mut pow = t * t;
        let mut sum = 0.0;
        for k in 2..48 {
            let kf = k as f64;
            sum += pow / (kf * (kf - 1.0));
            pow *= -t;
        }
        return sum;
    }
    ((1.0 + t) * t.ln_1p() - t).max(0.0)
}

/// `Σ |P − Q|`, in `[0, 2]`.
pub fn total_variation(p: &GroupDistribution, q: &GroupDistribution) -> Result<f64> {
    p.require_same_group(q)?;
    Ok(p.mass.iter().zip(&q.mass).map(|(a, b)| (a - b).abs()).sum())
}

pub fn total_variation_to_uniform(p: &GroupDistribution) -> f64 {
    let u = 1.0 / p.order() as f64;
    p.mass.iter().map(|m| (m - u).abs()).sum()
}

pub fn convolve(p: &GroupDistribution, q: &GroupDistribution) -> Result<GroupDistribution> {
    p.convolve(q)
}

pub fn n_fold(p: &GroupDistribution, n: usize) -> Result<GroupDistribution> {
    p.n_fold(n)
}

pub fn translate(g: usize, p: &GroupDistribution) -> Result<GroupDistribution> {
    p.translate(g)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HaarCheck {
    pub is_haar: bool,
    pub translation_invariant: bool,
    pub idempotent: bool,
    pub full_support: bool,
    /// First violated condition, if any.
    pub evidence: Option<String>,
}

/// Decides whether `P` is the Haar measure by translation invariance, and
/// cross-checks the equivalent idempotency-plus-full-support criterion.
pub fn haar_check(p: &GroupDistribution) -> HaarCheck {
    let g = p.group();
    let mut evidence = None;
    let mut translation_invariant = true;
    for x in 0..g.order() {
        let t = p.translate(x).expect("valid index");
        let diff = t.max_abs_diff(p).expect("same group");
        if diff > EQUALITY_TOL {
            translation_invariant = false;
            evidence = Some(format!(
                "translation by {} moves the distribution by {diff:.3e}",
                g.label(x)
            ));
            break;
        }
    }
    let full_support = p.has_full_support();
    let pp = p.convolve(p).expect("same group");
    let idem_diff = pp.max_abs_diff(p).expect("same group");
    let idempotent = idem_diff <= EQUALITY_TOL;
    if evidence.is_none() {
        if !idempotent {
            evidence = Some(format!("P∗P differs from P by {idem_diff:.3e}"));
        } else if !full_support {
            evidence = Some("idempotent but support is not the whole group".into());
        }
    }
    HaarCheck {
        is_haar: translation_invariant,
        translation_invariant,
        idempotent,
        full_support,
        evidence,
    }
}

/// Uniform distribution on the left coset `rep∗F`.
pub fn uniform_on_coset(subgroup: &Subgroup, rep: usize) -> Result<GroupDistribution> {
    let g = subgroup.parent().clone();
    g.check_index(rep)?;
    let coset: Vec<usize> = subgroup.members().iter().map(|&f| g.mul(rep, f)).collect();
    GroupDistribution::uniform_on(g, &coset)
}

/// Decomposes an idempotent `P` as the Haar measure of the subgroup generated
/// by its support. Returns `None` when `P∗P ≠ P`.
pub fn idempotent_subgroup(p: &GroupDistribution) -> Option<Subgroup> {
    let pp = p.convolve(p).ok()?;
    if !pp.approx_eq(p, EQUALITY_TOL) {
        return None;
    }
    subgroup_closure(p.group(), &p.support()).ok()
}

/// Residual `|LHS − RHS|` of the compensation identity
///
/// `Σ_x w_x D(P_x‖R) = D(P̄‖R) + Σ_x w_x D(P_x‖P̄)`, with `P̄ = Σ_x w_x P_x`.
pub fn compensation_identity_residual(
    family: &[GroupDistribution],
    weights: &[f64],
    reference: &GroupDistribution,
) -> Result<f64> {
    let sides = compensation_sides(family, weights, reference)?;
    Ok((sides.0 - sides.1).abs())
}

/// Both sides of the compensation identity.
pub fn compensation_sides(
    family: &[GroupDistribution],
    weights: &[f64],
    reference: &GroupDistribution,
) -> Result<(f64, f64)> {
    if family.is_empty() || family.len() != weights.len() {
        return Err(Error::InvalidDistribution(format!(
            "{} family members with {} weights",
            family.len(),
            weights.len()
        )));
    }
    let w = GroupDistribution::new(Arc::new(FiniteGroup::cyclic(weights.len())?), weights.to_vec())?;
    let w = w.mass();
    let n = reference.order();
    let mut mixture = vec![0.0; n];
    for (p, &wx) in family.iter().zip(w) {
        p.require_same_group(reference)?;
        for (m, &px) in mixture.iter_mut().zip(p.mass()) {
            *m += wx * px;
        }
    }
    let mixture = GroupDistribution::new(reference.group().clone(), mixture)?;
    let mut lhs = 0.0;
    let mut spread = 0.0;
    for (p, &wx) in family.iter().zip(w) {
        if wx == 0.0 {
            continue;
        }
        lhs += wx * divergence(p, reference)?;
        spread += wx * divergence(p, &mixture)?;
    }
    if !lhs.is_finite() {
        return Err(Error::InfiniteTerm);
    }
    let rhs = divergence(&mixture, reference)? + spread;
    Ok((lhs, rhs))
}
