//! Monotonic reformulation of the scalarized problem for a fixed set of power
//! variables.
//!
//! With `C = minus(p_max)` a rate `plus(p) − minus(p)` equals
//! `plus(p) + s − C` for the slack `s = C − minus(p)`. Requiring
//! `minus(p) + s ≤ C` (normal) makes `plus(p) + s − C` a lower bound on the
//! rate that is tight at the optimum and increasing in `(p, s)`. Rate floors
//! use one slack per user in the same way, with the floor itself on the
//! co-normal side.

use polyblock::MonotonicProblem;

use super::dm::{DmDecomposition, DmPair, PowerVar};
use super::Objective;
use crate::channel::NetworkInstance;
use crate::error::{Error, Result};
use crate::rates::User;
use crate::scalarize::MoopConfig;

/// Slack widths at or below this are treated as zero and the slack dropped.
const MIN_SLACK_WIDTH: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Side {
    pair: DmPair,
    /// `minus(p_max)`.
    cap: f64,
    slack: Option<usize>,
}

impl Side {
    fn lifted(&self, x: &[f64]) -> f64 {
        self.pair.plus(x) + self.slack.map_or(0.0, |i| x[i]) - self.cap
    }
}

#[derive(Debug, Clone)]
struct Floor {
    side: Side,
    r_min_nats: f64,
}

#[derive(Debug, Clone)]
enum Goal {
    /// `min` over `(side, weight, utopia)` of `w (R / R_max − 1)`.
    Tchebycheff(Vec<(usize, f64, f64)>),
    Rate(usize),
}

/// The power variables, DM slacks and floor slacks of one lifted problem.
/// Coordinates are laid out as `[powers…, side slacks…, floor slacks…]`.
#[derive(Debug, Clone)]
pub struct Lifted {
    pub dm: DmDecomposition,
    upper: Vec<f64>,
    /// `[0]` DU side, `[1]` CU side; `None` when not needed by the objective.
    sides: [Option<Side>; 2],
    floors: Vec<Floor>,
    /// Per-user budgets over several variables.
    budgets: Vec<(Vec<usize>, f64)>,
    goal: Goal,
    /// nats to the configured unit.
    scale: f64,
    tol: f64,
}

fn budget(cfg: &MoopConfig, u: User) -> f64 {
    match u {
        User::Cu(m) => cfg.p_max_cu[m],
        User::Du(k) => cfg.p_max_du[k],
    }
}

fn floor(cfg: &MoopConfig, u: User) -> f64 {
    match u {
        User::Cu(m) => cfg.r_min_cu[m],
        User::Du(k) => cfg.r_min_du[k],
    }
}

impl Lifted {
    pub fn new(inst: &NetworkInstance, cfg: &MoopConfig, vars: Vec<PowerVar>, objective: Objective) -> Result<Self> {
        let dm = DmDecomposition::new(inst, vars);
        let p_max: Vec<f64> = dm.vars.iter().map(|v| budget(cfg, v.user)).collect();
        let zeros = vec![0.0; p_max.len()];
        let mut upper = p_max.clone();
        let scale = cfg.rate_unit.scale_nats(1.0);

        let add_side = |pair: &DmPair, upper: &mut Vec<f64>| {
            let cap = pair.minus(&p_max);
            let width = cap - pair.minus(&zeros);
            let slack = (width > MIN_SLACK_WIDTH).then(|| {
                upper.push(width);
                upper.len() - 1
            });
            Side {
                pair: pair.clone(),
                cap,
                slack,
            }
        };

        let (goal, used) = match objective {
            Objective::Tchebycheff => {
                let [du, cu] = cfg.tcheby_terms()?;
                let terms: Vec<_> = [(0, du), (1, cu)]
                    .into_iter()
                    .filter_map(|(i, t)| t.map(|(w, max)| (i, w, max)))
                    .collect();
                let used = [terms.iter().any(|t| t.0 == 0), terms.iter().any(|t| t.0 == 1)];
                (Goal::Tchebycheff(terms), used)
            }
            Objective::MaxDu => (Goal::Rate(0), [true, false]),
            Objective::MaxCu => (Goal::Rate(1), [false, true]),
        };
        let sides = [
            used[0].then(|| add_side(&dm.du, &mut upper)),
            used[1].then(|| add_side(&dm.cu, &mut upper)),
        ];

        let mut floors = Vec::new();
        for u in (0..inst.m_cus).map(User::Cu).chain((0..inst.k_dus).map(User::Du)) {
            let r_min = floor(cfg, u);
            if r_min <= 0.0 {
                continue;
            }
            let Some(pair) = dm.user(u) else {
                return Err(Error::Infeasible(format!("{u:?} has a rate floor but no subchannel")));
            };
            let side = add_side(pair, &mut upper);
            floors.push(Floor {
                side,
                r_min_nats: r_min / scale,
            });
        }

        let mut budgets = Vec::new();
        for (u, _) in &dm.per_user {
            let idx: Vec<usize> = (0..dm.vars.len()).filter(|&i| dm.vars[i].user == *u).collect();
            if idx.len() > 1 {
                budgets.push((idx, budget(cfg, *u)));
            }
        }

        Ok(Self {
            dm,
            upper,
            sides,
            floors,
            budgets,
            goal,
            scale,
            tol: cfg.tolerances.feas_tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.upper.len()
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn n_powers(&self) -> usize {
        self.dm.vars.len()
    }

    /// Lower bound on `(R_DU, R_CU)` at `x`, in the configured unit; exact when
    /// the slacks are tight. Sides the objective ignores read as `0`.
    pub fn lifted_rates(&self, x: &[f64]) -> [f64; 2] {
        [0, 1].map(|i| self.sides[i].as_ref().map_or(0.0, |s| self.scale * s.lifted(x)))
    }

    /// Powers `p` followed by every slack at its tight value, clamped to the
    /// box.
    pub fn tight_point(&self, p: &[f64]) -> Vec<f64> {
        let mut x = p.to_vec();
        x.resize(self.dim(), 0.0);
        let sides = self.sides.iter().flatten().chain(self.floors.iter().map(|f| &f.side));
        for s in sides {
            if let Some(i) = s.slack {
                x[i] = (s.cap - s.pair.minus(p)).clamp(0.0, self.upper[i]);
            }
        }
        x
    }

    /// `x` with each slack raised to its tight value where that is larger.
    pub fn tighten(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.tight_point(&x[..self.n_powers()]);
        for (a, &b) in y.iter_mut().zip(x) {
            *a = a.max(b);
        }
        y
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let r = self.lifted_rates(x);
        match &self.goal {
            Goal::Tchebycheff(terms) if terms.is_empty() => 0.0,
            Goal::Tchebycheff(terms) => terms
                .iter()
                .map(|&(i, w, max)| w * (r[i] / max - 1.0))
                .fold(f64::INFINITY, f64::min),
            Goal::Rate(i) => r[*i],
        }
    }

    pub fn in_normal(&self, x: &[f64]) -> bool {
        let tol = self.tol;
        let slack_ok = |s: &Side| match s.slack {
            Some(i) => s.pair.minus(x) + x[i] <= s.cap + tol,
            None => true,
        };
        self.budgets
            .iter()
            .all(|(idx, p)| idx.iter().map(|&i| x[i]).sum::<f64>() <= p * (1.0 + tol))
            && self.sides.iter().flatten().all(slack_ok)
            && self.floors.iter().all(|f| slack_ok(&f.side))
    }

    pub fn in_conormal(&self, x: &[f64]) -> bool {
        let tol = self.tol;
        self.sides.iter().flatten().all(|s| s.lifted(x) >= -tol)
            && self.floors.iter().all(|f| f.side.lifted(x) >= f.r_min_nats - tol)
    }
}

/// Monotonic problem for one fixed assignment: one power variable per
/// assigned user plus slacks.
#[derive(Debug, Clone)]
pub struct AssignmentProblem {
    pub(crate) lifted: Lifted,
}

impl AssignmentProblem {
    pub fn dm(&self) -> &DmDecomposition {
        &self.lifted.dm
    }

    pub fn powers<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[..self.lifted.n_powers()]
    }

    pub fn lifted_rates(&self, x: &[f64]) -> [f64; 2] {
        self.lifted.lifted_rates(x)
    }

    /// `x` with powers `p` and every slack at its tight value, clamped to the
    /// box.
    pub fn tight_point(&self, p: &[f64]) -> Vec<f64> {
        self.lifted.tight_point(p)
    }
}

impl MonotonicProblem for AssignmentProblem {
    fn dim(&self) -> usize {
        self.lifted.dim()
    }
    fn upper(&self) -> &[f64] {
        self.lifted.upper()
    }
    fn objective(&self, x: &[f64]) -> f64 {
        self.lifted.objective(x)
    }
    fn in_normal(&self, x: &[f64]) -> bool {
        self.lifted.in_normal(x)
    }
    fn in_conormal(&self, x: &[f64]) -> bool {
        self.lifted.in_conormal(x)
    }
    fn improve(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.lifted.tighten(x))
    }
}
