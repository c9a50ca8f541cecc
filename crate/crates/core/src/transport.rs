//! Exact optimal transport between two distributions on a finite group.
//!
//! The transportation problem `min Σ π_ij c_ij` over couplings `π` with
//! marginals `P` and `Q` is solved as a min-cost flow on the complete
//! bipartite graph by successive shortest paths. Reduced costs are kept
//! non-negative with node potentials, so each path search is a dense
//! Dijkstra.

use serde::Serialize;

use crate::distortion::{distortion_matrix, DistortionSpec};
use crate::error::{Error, Result};
use crate::measure::GroupDistribution;

/// Largest group the exact solver accepts.
pub const MAX_TRANSPORT_ORDER: usize = 256;
const FLOW_EPS: f64 = 1e-15;

#[derive(Clone, Debug, Serialize)]
pub struct Coupling {
    /// `joint[i][j]`: mass moved from source element `i` to reproduction `j`.
    pub joint: Vec<Vec<f64>>,
    pub cost: f64,
}

impl Coupling {
    pub fn row_sums(&self) -> Vec<f64> {
        self.joint.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let n = self.joint.first().map_or(0, Vec::len);
        (0..n).map(|j| self.joint.iter().map(|r| r[j]).sum()).collect()
    }

    /// Dense CSV, one row per source element.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.joint {
            let cells: Vec<String> = row.iter().map(|v| crate::io::fmt_sci(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Transport {
    pub value: f64,
    pub coupling: Coupling,
}

/// `d(P, Q) = min E[d(X, Y)]` over couplings of `P` and `Q`.
pub fn transport_distance(p: &GroupDistribution, q: &GroupDistribution, spec: &DistortionSpec) -> Result<Transport> {
    if !p.same_group(q) {
        return Err(Error::GroupMismatch);
    }
    let group = spec
        .group()
        .ok_or_else(|| Error::ProfileInvalid("circle transport needs discretized inputs".into()))?;
    if **group != **p.group() {
        return Err(Error::GroupMismatch);
    }
    let n = p.order();
    if n > MAX_TRANSPORT_ORDER {
        return Err(Error::SizeLimit {
            order: n,
            limit: MAX_TRANSPORT_ORDER,
        });
    }
    let cost = distortion_matrix(spec)?;
    let joint = min_cost_transport(p.mass(), q.mass(), &cost);
    let value = joint
        .iter()
        .zip(&cost)
        .map(|(fr, cr)| fr.iter().zip(cr).map(|(f, c)| f * c).sum::<f64>())
        .sum::<f64>()
        .max(0.0);
    Ok(Transport {
        value,
        coupling: Coupling { joint, cost: value },
    })
}

/// Successive-shortest-path solver for a balanced transportation problem.
///
/// Nodes: `0..n` sources, `n..2n` sinks. Arc `i → j` has infinite capacity and
/// cost `c_ij`; the residual reverse arc exists while `flow[i][j] > 0`.
pub(crate) fn min_cost_transport(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = supply.len();
    let m = demand.len();
    let mut flow = vec![vec![0.0; m]; n];
    let mut supply_left = supply.to_vec();
    let mut demand_left = demand.to_vec();
    // Potentials. Rows that still hold supply are reached directly from the
    // super source at distance 0, so their potential never moves.
    let mut h_row = vec![0.0; n];
    let mut h_col = vec![0.0; m];
    let total: f64 = supply.iter().sum::<f64>().min(demand.iter().sum());
    let eps = FLOW_EPS * total.max(1.0);

    let mut dist_row = vec![0.0; n];
    let mut dist_col = vec![0.0; m];
    let mut prev_col = vec![usize::MAX; m]; // row feeding each column
    let mut prev_row = vec![usize::MAX; n]; // column feeding each row (MAX = source)
    let mut done_row = vec![false; n];
    let mut done_col = vec![false; m];

    // bounded by the number of arcs that can saturate or empty
    let max_rounds = 4 * (n + m) * (n + m) + 16;
    for _ in 0..max_rounds {
        if supply_left.iter().all(|&s| s <= eps) || demand_left.iter().all(|&d| d <= eps) {
            break;
        }
        dist_row.fill(f64::INFINITY);
        dist_col.fill(f64::INFINITY);
        done_row.fill(false);
        done_col.fill(false);
        for i in 0..n {
            if supply_left[i] > eps {
                dist_row[i] = 0.0;
                prev_row[i] = usize::MAX;
            }
        }
        let mut target = None;
        loop {
            // pick the closest unsettled node
            let mut best = f64::INFINITY;
            let mut pick = None;
            for i in 0..n {
                if !done_row[i] && dist_row[i] < best {
                    best = dist_row[i];
                    pick = Some((true, i));
                }
            }
            for j in 0..m {
                if !done_col[j] && dist_col[j] < best {
                    best = dist_col[j];
                    pick = Some((false, j));
                }
            }
            let Some((is_row, k)) = pick else { break };
            if is_row {
                done_row[k] = true;
                for j in 0..m {
                    if done_col[j] {
                        continue;
                    }
                    let rc = (cost[k][j] + h_row[k] - h_col[j]).max(0.0);
                    let nd = best + rc;
                    if nd < dist_col[j] {
                        dist_col[j] = nd;
                        prev_col[j] = k;
                    }
                }
            } else {
                done_col[k] = true;
                if demand_left[k] > eps {
                    target = Some(k);
                    break;
                }
                for i in 0..n {
                    if done_row[i] || flow[i][k] <= eps {
                        continue;
                    }
                    let rc = (-cost[i][k] - h_row[i] + h_col[k]).max(0.0);
                    let nd = best + rc;
                    if nd < dist_row[i] {
                        dist_row[i] = nd;
                        prev_row[i] = k;
                    }
                }
            }
        }
        let Some(t) = target else { break };
        let dt = dist_col[t];
        // potential update keeps reduced costs non-negative
        for i in 0..n {
            h_row[i] += dist_row[i].min(dt);
        }
        for j in 0..m {
            h_col[j] += dist_col[j].min(dt);
        }

        // bottleneck along the path
        let mut amount = demand_left[t];
        let mut j = t;
        loop {
            let i = prev_col[j];
            match prev_row[i] {
                usize::MAX => {
                    amount = amount.min(supply_left[i]);
                    break;
                }
                jj => {
                    amount = amount.min(flow[i][jj]);
                    j = jj;
                }
            }
        }
        // augment
        let mut j = t;
        loop {
            let i = prev_col[j];
            flow[i][j] += amount;
            match prev_row[i] {
                usize::MAX => {
                    supply_left[i] -= amount;
                    break;
                }
                jj => {
                    flow[i][jj] -= amount;
                    if flow[i][jj] < eps {
                        flow[i][jj] = 0.0;
                    }
                    j = jj;
                }
            }
        }
        demand_left[t] -= amount;
    }
    flow
}
