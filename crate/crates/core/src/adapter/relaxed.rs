//! Continuous relaxation of the subchannel indicators.
//!
//! Every user gets a power variable `q` and an off-indicator `ω = 1 − ψ` on
//! every subchannel. In terms of `ω` all constraints are monotone:
//! `q + p_max·ω ≤ p_max` and `Σω + ν ≤ R` are normal, while
//! `Σ_n ω ≥ N − 1`, `Σ_u ω ≥ U − L_max` and `Σω² + ν ≥ R` are co-normal.
//! Together the last pair forces `Σω² ≥ Σω`, hence binary `ω`.

use polyblock::{MonotonicProblem, Status};
use serde::{Deserialize, Serialize};

use super::dm::PowerVar;
use super::lifted::Lifted;
use super::{Assignment, Objective, Solution, solve_options, solve_over};
use crate::channel::{Dims, NetworkInstance};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::rates::User;
use crate::scalarize::MoopConfig;

#[derive(Debug, Clone)]
pub struct RelaxedProblem {
    lifted: Lifted,
    upper: Vec<f64>,
    /// Index of the first `ω`; `ω` follow the power variables' order.
    omega0: usize,
    nu: Option<usize>,
    mu: Option<usize>,
    r1: f64,
    r2: f64,
    l_max: usize,
    n_sub: usize,
    p_max: Vec<f64>,
    tol: f64,
}

/// `(R₁, R₂) = (K·N + ½, M·N + ½)`: just above the largest possible sum of
/// off-indicators of each kind.
pub fn default_relaxation_constants(dims: Dims) -> (f64, f64) {
    (
        (dims.k_dus * dims.n_sub) as f64 + 0.5,
        (dims.m_cus * dims.n_sub) as f64 + 0.5,
    )
}

pub fn build_relaxed_problem(
    inst: &NetworkInstance,
    cfg: &MoopConfig,
    objective: Objective,
    r1: f64,
    r2: f64,
) -> Result<RelaxedProblem> {
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(Error::InvalidConfig(format!("relaxation constants must be positive, got {r1}, {r2}")));
    }
    cfg.validate(inst.dims())?;
    let mut vars = Vec::new();
    for user in (0..inst.m_cus).map(User::Cu).chain((0..inst.k_dus).map(User::Du)) {
        for n in 0..inst.n_sub {
            vars.push(PowerVar { user, n });
        }
    }
    let lifted = Lifted::new(inst, cfg, vars, objective)?;
    let p_max: Vec<f64> = lifted.upper()[..lifted.n_powers()].to_vec();
    let mut upper = lifted.upper().to_vec();
    let omega0 = upper.len();
    upper.extend(std::iter::repeat_n(1.0, lifted.n_powers()));
    let mut push = |present: bool, cap: f64| {
        present.then(|| {
            upper.push(cap);
            upper.len() - 1
        })
    };
    let nu = push(inst.k_dus > 0, r1);
    let mu = push(inst.m_cus > 0, r2);
    Ok(RelaxedProblem {
        lifted,
        upper,
        omega0,
        nu,
        mu,
        r1,
        r2,
        l_max: cfg.l_max,
        n_sub: inst.n_sub,
        p_max,
        tol: cfg.tolerances.feas_tol,
    })
}

impl RelaxedProblem {
    pub fn vars(&self) -> &[PowerVar] {
        &self.lifted.dm.vars
    }

    pub fn powers<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[..self.lifted.n_powers()]
    }

    pub fn omegas<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.omega0..self.omega0 + self.lifted.n_powers()]
    }

    pub fn nu_index(&self) -> Option<usize> {
        self.nu
    }

    pub fn mu_index(&self) -> Option<usize> {
        self.mu
    }

    /// Full point from powers, off-indicators and the two cardinality slacks,
    /// with the DM slacks tight.
    pub fn point(&self, q: &[f64], omega: &[f64], nu: f64, mu: f64) -> Vec<f64> {
        let mut x = self.lifted.tight_point(q);
        x.extend_from_slice(omega);
        if self.nu.is_some() {
            x.push(nu);
        }
        if self.mu.is_some() {
            x.push(mu);
        }
        x
    }

    fn kind_sums(&self, x: &[f64], f: impl Fn(f64) -> f64) -> (f64, f64) {
        let (mut du, mut cu) = (0.0, 0.0);
        for (v, &w) in self.vars().iter().zip(self.omegas(x)) {
            match v.user {
                User::Du(_) => du += f(w),
                User::Cu(_) => cu += f(w),
            }
        }
        (du, cu)
    }
}

impl MonotonicProblem for RelaxedProblem {
    fn dim(&self) -> usize {
        self.upper.len()
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.lifted.objective(&x[..self.omega0])
    }

    fn in_normal(&self, x: &[f64]) -> bool {
        let tol = self.tol;
        let coupled = self
            .powers(x)
            .iter()
            .zip(self.omegas(x))
            .zip(&self.p_max)
            .all(|((q, w), p)| q + p * w <= p * (1.0 + tol));
        if !coupled || !self.lifted.in_normal(&x[..self.omega0]) {
            return false;
        }
        let (du, cu) = self.kind_sums(x, |w| w);
        self.nu.is_none_or(|i| du + x[i] <= self.r1 + tol) && self.mu.is_none_or(|i| cu + x[i] <= self.r2 + tol)
    }

    fn improve(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut y = self.lifted.tighten(&x[..self.omega0]);
        y.extend_from_slice(&x[self.omega0..]);
        let (du, cu) = self.kind_sums(x, |w| w);
        for (idx, r, sum) in [(self.nu, self.r1, du), (self.mu, self.r2, cu)] {
            if let Some(i) = idx {
                y[i] = y[i].max((r - sum).clamp(0.0, self.upper[i]));
            }
        }
        Some(y)
    }

    fn in_conormal(&self, x: &[f64]) -> bool {
        let tol = self.tol;
        if !self.lifted.in_conormal(&x[..self.omega0]) {
            return false;
        }
        let vars = self.vars();
        let om = self.omegas(x);
        let n_sub = self.n_sub as f64;
        let mut per_user: Vec<(User, f64)> = Vec::new();
        let mut per_sub = vec![0.0; self.n_sub];
        let mut users_on_sub = vec![0usize; self.n_sub];
        for (v, &w) in vars.iter().zip(om) {
            match per_user.last_mut() {
                Some((u, s)) if *u == v.user => *s += w,
                _ => per_user.push((v.user, w)),
            }
            per_sub[v.n] += w;
            users_on_sub[v.n] += 1;
        }
        let single = per_user.iter().all(|(_, s)| *s >= n_sub - 1.0 - tol);
        let capacity = per_sub
            .iter()
            .zip(&users_on_sub)
            .all(|(s, &u)| *s >= u.saturating_sub(self.l_max) as f64 - tol);
        let (du, cu) = self.kind_sums(x, |w| w * w);
        single
            && capacity
            && self.nu.is_none_or(|i| du + x[i] >= self.r1 - tol)
            && self.mu.is_none_or(|i| cu + x[i] >= self.r2 - tol)
    }
}

/// `ψ = 1` where the off-indicator is below ½.
pub fn round_indicators(omega: &[f64]) -> Vec<bool> {
    omega.iter().map(|&w| w < 0.5).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxedOutcome {
    pub solution: Solution,
    /// Status and iteration count of the relaxed polyblock run.
    pub relaxed_status: Status,
    pub relaxed_iterations: usize,
    /// Rounded indicators `(phi [K][N], psi [M][N])` before repair.
    pub rounded: (Vec<Vec<bool>>, Vec<Vec<bool>>),
    pub repaired: Assignment,
}

/// Thresholds the relaxed indicators, then repairs them into a maximal
/// assignment: a user on several subchannels keeps the one with the highest
/// power, an overloaded subchannel drops its lowest-power users, and silent
/// users (floored users first) join the free subchannel where their relaxed
/// power is highest.
pub fn repair(cfg: &MoopConfig, dims: Dims, vars: &[PowerVar], q: &[f64], on: &[bool]) -> Assignment {
    let power = |u: User, n: usize| {
        vars.iter()
            .zip(q)
            .find(|(v, _)| v.user == u && v.n == n)
            .map_or(0.0, |(_, &p)| p)
    };
    let mut a = Assignment::empty(dims);
    for (v, _) in vars.iter().zip(on).filter(|(_, o)| **o) {
        let better = a.get(v.user).is_none_or(|cur| power(v.user, v.n) > power(v.user, cur));
        if better {
            a.set(v.user, Some(v.n));
        }
    }
    for n in 0..dims.n_sub {
        loop {
            let mut users: Vec<User> = a.users().filter(|&u| a.get(u) == Some(n)).collect();
            if users.len() <= cfg.l_max {
                break;
            }
            users.sort_by(|&x, &y| power(x, n).total_cmp(&power(y, n)).then(y.cmp(&x)));
            a.set(users[0], None);
        }
    }
    let floored = |u: User| match u {
        User::Cu(m) => cfg.r_min_cu[m] > 0.0,
        User::Du(k) => cfg.r_min_du[k] > 0.0,
    };
    let mut silent: Vec<User> = a.users().filter(|&u| a.get(u).is_none()).collect();
    silent.sort_by_key(|&u| (!floored(u), u));
    for u in silent {
        let load = a.load(dims.n_sub);
        let best = (0..dims.n_sub)
            .filter(|&n| load[n] < cfg.l_max)
            .max_by(|&x, &y| power(u, x).total_cmp(&power(u, y)).then(y.cmp(&x)));
        if let Some(n) = best {
            a.set(u, Some(n));
        }
    }
    a
}

/// Relaxed-mode solve: one polyblock run on the relaxed problem, rounding and
/// repair, then powers re-optimized for the repaired assignment. If the run
/// ends without a point in both sets, the best point found in the normal set
/// is rounded instead.
pub fn solve_relaxed(
    inst: &NetworkInstance,
    cfg: &MoopConfig,
    constants: Option<(f64, f64)>,
    exec: Execution,
) -> Result<RelaxedOutcome> {
    cfg.utopia()?;
    solve_relaxed_for(inst, cfg, Objective::Tchebycheff, constants, exec)
}

/// [`solve_relaxed`] for any objective.
pub fn solve_relaxed_for(
    inst: &NetworkInstance,
    cfg: &MoopConfig,
    objective: Objective,
    constants: Option<(f64, f64)>,
    exec: Execution,
) -> Result<RelaxedOutcome> {
    let (r1, r2) = constants.unwrap_or_else(|| default_relaxation_constants(inst.dims()));
    let prob = build_relaxed_problem(inst, cfg, objective, r1, r2)?;
    let mut opts = solve_options(cfg);
    opts.max_iter = cfg.solver.relaxed_max_iter;
    let res = polyblock::solve(&prob, &opts)?;
    let x = res
        .x_star
        .clone()
        .or_else(|| res.best_normal.clone().map(|(x, _)| x))
        .unwrap_or_else(|| vec![0.0; prob.dim()]);
    let on = round_indicators(prob.omegas(&x));

    let dims = inst.dims();
    let mut phi = vec![vec![false; dims.n_sub]; dims.k_dus];
    let mut psi = vec![vec![false; dims.n_sub]; dims.m_cus];
    for (v, &o) in prob.vars().iter().zip(&on) {
        match v.user {
            User::Cu(m) => psi[m][v.n] = o,
            User::Du(k) => phi[k][v.n] = o,
        }
    }
    let repaired = repair(cfg, dims, prob.vars(), prob.powers(&x), &on);
    let solution = solve_over(inst, cfg, std::slice::from_ref(&repaired), objective, exec)?;
    Ok(RelaxedOutcome {
        solution,
        relaxed_status: res.status,
        relaxed_iterations: res.iterations,
        rounded: (phi, psi),
        repaired,
    })
}
