//! The scalarized allocation problem in monotonic form, solved exactly by
//! enumerating subchannel assignments, or approximately through a continuous
//! relaxation of the indicators.

mod assign;
mod dm;
mod lifted;
mod relaxed;

pub use assign::{Assignment, candidate_assignments, enumerate_assignments};
pub use dm::{DmDecomposition, DmPair, LogTerm, PowerVar};
pub use lifted::AssignmentProblem;
pub use relaxed::{RelaxedOutcome, RelaxedProblem, build_relaxed_problem, default_relaxation_constants, solve_relaxed, solve_relaxed_for};

use polyblock::{SolveOptions, Status, TraceRecord};
use serde::{Deserialize, Serialize};

use crate::channel::NetworkInstance;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::rates::{Allocation, check_constraints, sum_rates};
use crate::scalarize::{MoopConfig, tcheby_chi};

/// What the lifted problem maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `−χ`, the weighted Tchebycheff achievement; needs a utopia point.
    Tchebycheff,
    MaxDu,
    MaxCu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Exact,
    Relaxed,
}

/// Aggregate solver effort over the sub-problems of one search.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub assignments: usize,
    pub infeasible: usize,
    pub iteration_capped: usize,
    pub iterations_total: usize,
    pub iterations_max: usize,
    pub max_bisection_steps: usize,
    pub max_dim: usize,
    pub evicted_vertices: usize,
}

impl SearchStats {
    fn add(&mut self, r: &polyblock::SolveResult) {
        self.assignments += 1;
        match r.status {
            Status::Infeasible => self.infeasible += 1,
            Status::IterationCap => self.iteration_capped += 1,
            Status::EpsOptimal => {}
        }
        self.iterations_total += r.iterations;
        self.iterations_max = self.iterations_max.max(r.iterations);
        self.max_bisection_steps = self.max_bisection_steps.max(r.counters.max_bisection_steps);
        self.max_dim = self.max_dim.max(r.counters.dim);
        self.evicted_vertices += r.counters.evicted_vertices;
    }

    pub fn merge(&mut self, o: &SearchStats) {
        self.assignments += o.assignments;
        self.infeasible += o.infeasible;
        self.iteration_capped += o.iteration_capped;
        self.iterations_total += o.iterations_total;
        self.iterations_max = self.iterations_max.max(o.iterations_max);
        self.max_bisection_steps = self.max_bisection_steps.max(o.max_bisection_steps);
        self.max_dim = self.max_dim.max(o.max_dim);
        self.evicted_vertices += o.evicted_vertices;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub allocation: Allocation,
    pub assignment: Assignment,
    /// `None` unless the objective was Tchebycheff.
    pub chi: Option<f64>,
    pub r_du: f64,
    pub r_cu: f64,
    /// Status of the winning sub-problem.
    pub status: Status,
    pub stats: SearchStats,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRecord>,
}

impl Solution {
    pub fn sum_rate(&self) -> f64 {
        self.r_du + self.r_cu
    }
}

pub fn solve_options(cfg: &MoopConfig) -> SolveOptions {
    SolveOptions {
        eps: cfg.tolerances.eps_solver,
        delta: cfg.tolerances.delta_bisect,
        max_iter: cfg.solver.max_iter,
        vertex_cap: cfg.solver.vertex_cap,
        prune_by_bound: true,
        record_trace: cfg.solver.record_trace,
        zero_snap: polyblock::SolveOptions::default().zero_snap,
    }
}

/// Lifted problem over the powers of the users placed by `assignment`.
pub fn build_problem_for_assignment(
    inst: &NetworkInstance,
    cfg: &MoopConfig,
    assignment: &Assignment,
    objective: Objective,
) -> Result<AssignmentProblem> {
    assignment.check(inst.dims(), cfg.l_max)?;
    let vars = assignment
        .pairs()
        .into_iter()
        .map(|(user, n)| PowerVar { user, n })
        .collect();
    Ok(AssignmentProblem {
        lifted: lifted::Lifted::new(inst, cfg, vars, objective)?,
    })
}

/// Allocation from a solver point: indicators follow the assignment where the
/// power exceeds the power floor. If switching the near-silent users off
/// would break a rate floor, their indicators are kept.
pub fn recover_allocation(inst: &NetworkInstance, cfg: &MoopConfig, prob: &AssignmentProblem, x: &[f64]) -> Allocation {
    let p = prob.powers(x);
    let raw = prob.dm().allocation(inst, p);
    let mut floored = Allocation::zeros(inst.dims());
    for (v, &pw) in prob.dm().vars.iter().zip(p) {
        if pw > cfg.solver.power_floor {
            floored.set(v.user, v.n, pw);
        }
    }
    if floored != raw && !check_constraints(inst, &floored, cfg).feasible && check_constraints(inst, &raw, cfg).feasible {
        raw
    } else {
        floored
    }
}

struct Candidate {
    solution: Solution,
    score: f64,
}

fn score(objective: Objective, chi: Option<f64>, r_du: f64, r_cu: f64) -> f64 {
    match objective {
        Objective::Tchebycheff => chi.unwrap_or(f64::INFINITY),
        Objective::MaxDu => -r_du,
        Objective::MaxCu => -r_cu,
    }
}

fn solve_one(
    inst: &NetworkInstance,
    cfg: &MoopConfig,
    assignment: &Assignment,
    objective: Objective,
) -> Result<(Option<Candidate>, SearchStats)> {
    let prob = build_problem_for_assignment(inst, cfg, assignment, objective)?;
    let res = polyblock::solve(&prob, &solve_options(cfg))?;
    let mut stats = SearchStats::default();
    stats.add(&res);
    let Some(x) = res.x_star.as_deref() else {
        return Ok((None, stats));
    };
    let allocation = recover_allocation(inst, cfg, &prob, x);
    if !check_constraints(inst, &allocation, cfg).feasible {
        stats.infeasible += 1;
        return Ok((None, stats));
    }
    let (r_du, r_cu) = sum_rates(inst, &allocation, cfg.rate_unit);
    let chi = match objective {
        Objective::Tchebycheff => Some(tcheby_chi(r_du, r_cu, cfg)?),
        _ => None,
    };
    let solution = Solution {
        allocation,
        assignment: assignment.clone(),
        chi,
        r_du,
        r_cu,
        status: res.status,
        stats: SearchStats::default(),
        trace: res.trace,
    };
    Ok((
        Some(Candidate {
            score: score(objective, chi, r_du, r_cu),
            solution,
        }),
        stats,
    ))
}

/// Best solution over the given assignments; ties go to the earliest.
pub fn solve_over(
    inst: &NetworkInstance,
    cfg: &MoopConfig,
    assignments: &[Assignment],
    objective: Objective,
    exec: Execution,
) -> Result<Solution> {
    cfg.validate(inst.dims())?;
    let outcomes = exec.map(assignments, |a| solve_one(inst, cfg, a, objective));
    let mut stats = SearchStats::default();
    let mut best: Option<Candidate> = None;
    for o in outcomes {
        let (cand, s) = o?;
        stats.merge(&s);
        if let Some(c) = cand {
            if best.as_ref().is_none_or(|b| c.score < b.score) {
                best = Some(c);
            }
        }
    }
    let mut best = best
        .ok_or_else(|| Error::Infeasible("no assignment admits an allocation meeting the rate floors".into()))?
        .solution;
    best.stats = stats;
    Ok(best)
}

/// Exact search over all candidate assignments.
pub fn maximize(inst: &NetworkInstance, cfg: &MoopConfig, objective: Objective, exec: Execution) -> Result<Solution> {
    let assignments = candidate_assignments(inst.dims(), cfg)?;
    solve_over(inst, cfg, &assignments, objective, exec)
}

/// Minimizes χ; `cfg` must carry the utopia point.
pub fn solve_scalarized(inst: &NetworkInstance, cfg: &MoopConfig, exec: Execution) -> Result<Solution> {
    cfg.utopia()?;
    maximize(inst, cfg, Objective::Tchebycheff, exec)
}

/// Maximizes `objective` in the requested mode.
pub fn maximize_mode(inst: &NetworkInstance, cfg: &MoopConfig, objective: Objective, mode: Mode, exec: Execution) -> Result<Solution> {
    match mode {
        Mode::Exact => maximize(inst, cfg, objective, exec),
        Mode::Relaxed => solve_relaxed_for(inst, cfg, objective, None, exec).map(|o| o.solution),
    }
}

/// Minimizes χ in the requested mode.
pub fn solve_mode(inst: &NetworkInstance, cfg: &MoopConfig, mode: Mode, exec: Execution) -> Result<Solution> {
    match mode {
        Mode::Exact => solve_scalarized(inst, cfg, exec),
        Mode::Relaxed => solve_relaxed(inst, cfg, None, exec).map(|o| o.solution),
    }
}
