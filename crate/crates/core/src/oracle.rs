//! Brute-force reference: every assignment times a power grid, evaluated with
//! the rates module alone.
//!
//! Each user occupies at most one subchannel, so a subchannel's rates depend
//! only on the powers of its own users, and both sum rates add up over
//! subchannels. The search therefore computes the non-dominated
//! `(R_DU, R_CU)` points of every (subchannel, user set) over the grid and
//! combines them with Minkowski sums. χ is decreasing in both rates, so its
//! minimum over the combined front equals its minimum over the full grid
//! product.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::adapter::{Assignment, enumerate_assignments};
use crate::channel::NetworkInstance;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::rates::{Allocation, User, user_rates};
use crate::scalarize::{MoopConfig, tcheby_chi};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    /// `0`, then geometric from `min_ratio·p_max` to `p_max`.
    #[default]
    Geometric,
    /// Evenly spaced on `[0, p_max]`.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points per power variable, endpoints included.
    pub levels: usize,
    pub spacing: Spacing,
    pub min_ratio: f64,
    /// Maximum number of rate evaluations.
    pub cap: usize,
}

impl GridSpec {
    pub fn new(levels: usize) -> Self {
        Self {
            levels,
            spacing: Spacing::Geometric,
            // Optimal CU powers a few 1e-4 of the budget do occur.
            min_ratio: 1e-5,
            cap: 10_000_000,
        }
    }

    pub fn linear(levels: usize) -> Self {
        Self {
            spacing: Spacing::Linear,
            ..Self::new(levels)
        }
    }

    /// A grid containing every point of this one and one more between each
    /// neighbouring pair of positive points.
    pub fn refined(&self) -> Self {
        let levels = match self.spacing {
            Spacing::Geometric => 2 * self.levels - 2,
            Spacing::Linear => 2 * self.levels - 1,
        };
        Self { levels, ..*self }
    }

    pub fn values(&self, p_max: f64) -> Vec<f64> {
        let l = self.levels;
        match self.spacing {
            Spacing::Linear => (0..l).map(|i| p_max * i as f64 / (l - 1) as f64).collect(),
            Spacing::Geometric if l == 2 => vec![0.0, p_max],
            Spacing::Geometric => {
                let steps = (l - 2) as f64;
                std::iter::once(0.0)
                    .chain((0..l - 1).map(|i| {
                        if i == l - 2 {
                            p_max
                        } else {
                            p_max * self.min_ratio.powf(1.0 - i as f64 / steps)
                        }
                    }))
                    .collect()
            }
        }
    }

    fn check(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(Error::InvalidConfig(format!("grid needs at least 2 levels, got {}", self.levels)));
        }
        if !(self.min_ratio > 0.0 && self.min_ratio < 1.0) {
            return Err(Error::InvalidConfig(format!("grid min_ratio must lie in (0, 1), got {}", self.min_ratio)));
        }
        Ok(())
    }
}

/// A feasible operating point and the powers achieving it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    pub r_du: f64,
    pub r_cu: f64,
    pub powers: Vec<(User, usize, f64)>,
}

impl FrontPoint {
    pub fn allocation(&self, inst: &NetworkInstance) -> Allocation {
        let mut a = Allocation::zeros(inst.dims());
        for &(u, n, p) in &self.powers {
            a.set(u, n, p);
        }
        a
    }

    pub fn dominates(&self, r_du: f64, r_cu: f64, margin: f64) -> bool {
        self.r_du > r_du + margin && self.r_cu > r_cu + margin
    }
}

/// Keeps the points not weakly dominated by another; among equal points the
/// first survives. Output sorted by `r_cu` ascending.
pub fn pareto_filter(mut pts: Vec<FrontPoint>) -> Vec<FrontPoint> {
    pts.sort_by(|a, b| b.r_cu.total_cmp(&a.r_cu).then(b.r_du.total_cmp(&a.r_du)));
    let mut out: Vec<FrontPoint> = Vec::new();
    let mut best_du = f64::NEG_INFINITY;
    for p in pts {
        if p.r_du > best_du {
            best_du = p.r_du;
            out.push(p);
        }
    }
    out.reverse();
    out
}

fn minkowski(a: &[FrontPoint], b: &[FrontPoint]) -> Vec<FrontPoint> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let mut powers = x.powers.clone();
            powers.extend_from_slice(&y.powers);
            out.push(FrontPoint {
                r_du: x.r_du + y.r_du,
                r_cu: x.r_cu + y.r_cu,
                powers,
            });
        }
    }
    pareto_filter(out)
}

fn user_floor(cfg: &MoopConfig, u: User) -> f64 {
    match u {
        User::Cu(m) => cfg.r_min_cu[m],
        User::Du(k) => cfg.r_min_du[k],
    }
}

fn user_budget(cfg: &MoopConfig, u: User) -> f64 {
    match u {
        User::Cu(m) => cfg.p_max_cu[m],
        User::Du(k) => cfg.p_max_du[k],
    }
}

/// Front of one subchannel carrying `users`, or `None` if no grid point meets
/// their floors.
fn subchannel_front(
    inst: &NetworkInstance,
    cfg: &MoopConfig,
    grid: &GridSpec,
    n: usize,
    users: &[User],
) -> Vec<FrontPoint> {
    let values: Vec<Vec<f64>> = users.iter().map(|&u| grid.values(user_budget(cfg, u))).collect();
    let mut idx = vec![0usize; users.len()];
    let mut pts = Vec::new();
    let mut alloc = Allocation::zeros(inst.dims());
    let tol = cfg.tolerances.rate_tol;
    loop {
        for (j, &u) in users.iter().enumerate() {
            alloc.set(u, n, values[j][idx[j]]);
        }
        let r = user_rates(inst, &alloc, cfg.rate_unit);
        let rate = |u: User| match u {
            User::Cu(m) => r.cu[m],
            User::Du(k) => r.du[k],
        };
        if users.iter().all(|&u| rate(u) >= user_floor(cfg, u) - tol) {
            pts.push(FrontPoint {
                r_du: r.r_du(),
                r_cu: r.r_cu(),
                powers: users.iter().zip(&idx).zip(&values).map(|((&u, &i), v)| (u, n, v[i])).collect(),
            });
        }
        // odometer
        let mut j = 0;
        loop {
            if j == users.len() {
                return pareto_filter(pts);
            }
            idx[j] += 1;
            if idx[j] < grid.levels {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

fn users_on(a: &Assignment, n: usize) -> Vec<User> {
    a.users().filter(|&u| a.get(u) == Some(n)).collect()
}

/// Non-dominated `(R_DU, R_CU)` over every assignment and grid point meeting
/// all constraints.
pub fn oracle_pareto(inst: &NetworkInstance, cfg: &MoopConfig, grid: &GridSpec, exec: Execution) -> Result<Vec<FrontPoint>> {
    grid.check()?;
    cfg.validate(inst.dims())?;
    let assignments = enumerate_assignments(inst.dims(), cfg)?;
    let floored_silent = |a: &Assignment| a.users().any(|u| a.get(u).is_none() && user_floor(cfg, u) > 0.0);
    let assignments: Vec<Assignment> = assignments.into_iter().filter(|a| !floored_silent(a)).collect();
    if assignments.is_empty() {
        return Err(Error::Infeasible("no assignment places every user with a rate floor".into()));
    }

    let mut keys: Vec<(usize, Vec<User>)> = Vec::new();
    let mut seen: HashMap<(usize, Vec<User>), usize> = HashMap::new();
    for a in &assignments {
        for n in 0..inst.n_sub {
            let key = (n, users_on(a, n));
            if !seen.contains_key(&key) {
                seen.insert(key.clone(), keys.len());
                keys.push(key);
            }
        }
    }
    let evaluations: usize = keys.iter().map(|(_, us)| grid.levels.saturating_pow(us.len() as u32)).sum();
    if evaluations > grid.cap {
        return Err(Error::EnumerationCap {
            count: evaluations,
            cap: grid.cap,
        });
    }
    let fronts = exec.map(&keys, |(n, us)| subchannel_front(inst, cfg, grid, *n, us));

    let per_assignment = exec.map(&assignments, |a| {
        let mut acc = vec![FrontPoint {
            r_du: 0.0,
            r_cu: 0.0,
            powers: Vec::new(),
        }];
        for n in 0..inst.n_sub {
            let f = &fronts[seen[&(n, users_on(a, n))]];
            acc = minkowski(&acc, f);
            if acc.is_empty() {
                break;
            }
        }
        acc
    });
    let all: Vec<FrontPoint> = per_assignment.into_iter().flatten().collect();
    if all.is_empty() {
        return Err(Error::Infeasible("no grid point meets the rate floors".into()));
    }
    Ok(pareto_filter(all))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleBest {
    pub chi: f64,
    pub point: FrontPoint,
}

/// Smallest χ on a precomputed front (first point on ties).
pub fn best_chi_on_front(front: &[FrontPoint], cfg: &MoopConfig) -> Result<OracleBest> {
    let mut best: Option<OracleBest> = None;
    for p in front {
        let chi = tcheby_chi(p.r_du, p.r_cu, cfg)?;
        if best.as_ref().is_none_or(|b| chi < b.chi) {
            best = Some(OracleBest { chi, point: p.clone() });
        }
    }
    best.ok_or_else(|| Error::Infeasible("empty front".into()))
}

pub fn oracle_best_chi(inst: &NetworkInstance, cfg: &MoopConfig, grid: &GridSpec, exec: Execution) -> Result<OracleBest> {
    cfg.utopia()?;
    best_chi_on_front(&oracle_pareto(inst, cfg, grid, exec)?, cfg)
}
