//! Right-invariant distortion functions.
//!
//! A right-invariant distortion is determined by its profile
//! `d₀(g) = d(g, e)` through `d(x, y) = d₀(x∗y⁻¹)`.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;

#[derive(Clone, Debug, PartialEq)]
pub enum DistortionSpec {
    /// Profile over the elements of a finite group.
    Finite { group: Arc<FiniteGroup>, profile: Vec<f64> },
    /// `SO(2)` with `d₀(x) = 2 − 2cos x`.
    Circle,
}

impl DistortionSpec {
    /// Checks `d₀(e) = 0` and `d₀(g) > 0` for `g ≠ e`.
    pub fn table(group: Arc<FiniteGroup>, profile: Vec<f64>) -> Result<Self> {
        if profile.len() != group.order() {
            return Err(Error::ProfileInvalid(format!(
                "{} profile values for a group of order {}",
                profile.len(),
                group.order()
            )));
        }
        let e = group.identity();
        for (g, &v) in profile.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::ProfileInvalid(format!("d0({g}) = {v} is not finite")));
            }
            if g == e && v != 0.0 {
                return Err(Error::ProfileInvalid(format!("d0(e) = {v}, must be 0")));
            }
            if g != e && v <= 0.0 {
                return Err(Error::ProfileInvalid(format!("d0({g}) = {v}, must be positive")));
            }
        }
        Ok(DistortionSpec::Finite { group, profile })
    }

    /// `d₀(k) = 2 − 2cos(2πk/n)` on `Z_n`.
    pub fn cosine(group: Arc<FiniteGroup>) -> Result<Self> {
        if !group.is_standard_cyclic() {
            return Err(Error::ProfileInvalid(
                "cosine profile needs a cyclic group with law (i + j) mod n".into(),
            ));
        }
        let n = group.order();
        let profile = (0..n).map(|k| cosine_profile_value(k, n)).collect();
        Self::table(group, profile)
    }

    /// `d₀(g) = 1` for every `g ≠ e`.
    pub fn hamming(group: Arc<FiniteGroup>) -> Result<Self> {
        let e = group.identity();
        let profile = (0..group.order()).map(|g| if g == e { 0.0 } else { 1.0 }).collect();
        Self::table(group, profile)
    }

    pub fn so2() -> Self {
        DistortionSpec::Circle
    }

    pub fn group(&self) -> Option<&Arc<FiniteGroup>> {
        match self {
            DistortionSpec::Finite { group, .. } => Some(group),
            DistortionSpec::Circle => None,
        }
    }

    pub fn profile(&self) -> Option<&[f64]> {
        match self {
            DistortionSpec::Finite { profile, .. } => Some(profile),
            DistortionSpec::Circle => None,
        }
    }

    /// `d(x, y) = d₀(x∗y⁻¹)` on a finite group.
    pub fn distortion(&self, x: usize, y: usize) -> Result<f64> {
        match self {
            DistortionSpec::Finite { group, profile } => {
                group.check_index(x)?;
                group.check_index(y)?;
                Ok(profile[group.mul(x, group.inv(y))])
            }
            DistortionSpec::Circle => Err(Error::ProfileInvalid(
                "circle distortion takes angles, not indices".into(),
            )),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            DistortionSpec::Finite { group, profile } => {
                (0..group.order()).all(|g| profile[g] == profile[group.inv(g)])
            }
            DistortionSpec::Circle => true,
        }
    }

    pub fn d_max(&self) -> f64 {
        match self {
            DistortionSpec::Finite { profile, .. } => profile.iter().copied().fold(0.0, f64::max),
            DistortionSpec::Circle => 4.0,
        }
    }

    /// Mean of the profile under the Haar measure: the distortion reached at
    /// zero rate with an independent reproduction.
    pub fn d_crit(&self) -> f64 {
        match self {
            DistortionSpec::Finite { profile, .. } => profile.iter().sum::<f64>() / profile.len() as f64,
            DistortionSpec::Circle => 2.0,
        }
    }

    pub fn from_json(json: &ProfileJson, group: Arc<FiniteGroup>) -> Result<Self> {
        match json {
            ProfileJson::Table { values } => Self::table(group, values.clone()),
            ProfileJson::Cosine => Self::cosine(group),
            ProfileJson::Hamming => Self::hamming(group),
        }
    }
}

/// Profile wire format: `{type: "table", values: [...]}`, `{type: "cosine"}`
/// or `{type: "hamming"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ProfileJson {
    Table { values: Vec<f64> },
    Cosine,
    Hamming,
}

pub fn cosine_profile_value(k: usize, n: usize) -> f64 {
    2.0 - 2.0 * (TAU * k as f64 / n as f64).cos()
}

/// `2 − 2cos(x − y)`, the squared chord length between two angles; in `[0, 4]`.
pub fn so2_distortion(x: f64, y: f64) -> f64 {
    2.0 - 2.0 * (x - y).rem_euclid(TAU).cos()
}

/// `matrix[i][j] = d₀(gᵢ∗gⱼ⁻¹)`.
pub fn distortion_matrix(spec: &DistortionSpec) -> Result<Vec<Vec<f64>>> {
    match spec {
        DistortionSpec::Finite { group, profile } => Ok((0..group.order())
            .map(|i| {
                (0..group.order())
                    .map(|j| profile[group.mul(i, group.inv(j))])
                    .collect()
            })
            .collect()),
        DistortionSpec::Circle => Err(Error::ProfileInvalid(
            "no distortion matrix for the circle; discretize first".into(),
        )),
    }
}
