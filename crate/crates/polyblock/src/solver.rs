use serde::{Deserialize, Serialize};

use crate::cut::cut_vertices;
use crate::projection::project;
use crate::{MonotonicProblem, SolveError};

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Absolute optimality tolerance on the objective.
    pub eps: f64,
    /// Bisection tolerance; `None` means `eps / 10`.
    pub delta: Option<f64>,
    pub max_iter: usize,
    /// Upper limit on stored vertices. Past it the lowest-valued vertices are
    /// evicted, which forfeits the optimality certificate.
    pub vertex_cap: usize,
    /// Drop vertices whose value cannot beat the incumbent by more than `eps`.
    pub prune_by_bound: bool,
    /// Keep one [`TraceRecord`] per iteration in the result.
    pub record_trace: bool,
    /// A child coordinate at or below `zero_snap · b_i` is set to zero.
    /// Without this a coordinate the objective hardly depends on can shrink
    /// geometrically forever while its vertex keeps the largest bound. `0`
    /// disables snapping.
    pub zero_snap: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            delta: None,
            max_iter: 10_000,
            vertex_cap: 200_000,
            prune_by_bound: true,
            record_trace: false,
            zero_snap: 1e-9,
        }
    }
}

impl SolveOptions {
    pub fn with_eps(eps: f64) -> Self {
        Self {
            eps,
            ..Self::default()
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(self.eps / 10.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    EpsOptimal,
    Infeasible,
    IterationCap,
}

/// Work counters: problem dimension, iterations, and bisection effort.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    pub dim: usize,
    pub iterations: usize,
    pub max_bisection_steps: usize,
    pub bisection_steps: usize,
    pub peak_vertices: usize,
    pub evicted_vertices: usize,
}

/// One polyblock iteration, as emitted in JSON-lines traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub f_pi: f64,
    #[serde(rename = "V")]
    pub best_value: f64,
    pub vertex_count: usize,
    pub lambda: f64,
    #[serde(skip)]
    pub lambda_upper: f64,
    #[serde(skip)]
    pub pi: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Best feasible point found (in `G ∩ H`).
    pub x_star: Option<Vec<f64>>,
    /// Objective at `x_star`, `-inf` when none was found.
    pub value: f64,
    /// Upper bound on the optimum at termination.
    pub upper_bound: f64,
    pub gap: f64,
    pub iterations: usize,
    pub status: Status,
    pub counters: Counters,
    /// Best projection point seen, feasible for `G` but not necessarily for
    /// `H`. Useful as a starting guess when `H` is thin.
    pub best_normal: Option<(Vec<f64>, f64)>,
    pub trace: Vec<TraceRecord>,
}

struct Vertex {
    coords: Vec<f64>,
    value: f64,
}

impl AsRef<[f64]> for Vertex {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

fn check_tol(name: &'static str, value: f64) -> Result<(), SolveError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(SolveError::InvalidTolerance { name, value })
    }
}

/// Maximizes `prob.objective` over `G ∩ H` by outer polyblock approximation.
///
/// Each iteration selects the vertex `π` with the largest objective value,
/// projects it onto the upper boundary of `G`, records the projection as the
/// incumbent when it is in `H` and improves on it, and replaces every vertex
/// above the projection by its children. The loop stops when
/// `f(π) - V ≤ eps`, when no vertex remains, or at `max_iter`.
///
/// The cone is cut at the infeasible end of the bisection bracket, so no point
/// of `G` is ever removed from the polyblock.
pub fn solve<P: MonotonicProblem + ?Sized>(
    prob: &P,
    opts: &SolveOptions,
) -> Result<SolveResult, SolveError> {
    check_tol("eps", opts.eps)?;
    let delta = opts.delta();
    check_tol("delta", delta)?;
    let n = prob.dim();
    let b = prob.upper().to_vec();
    if b.len() != n {
        return Err(SolveError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if let Some((index, &value)) = b
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(SolveError::InvalidBox { index, value });
    }

    let mut counters = Counters {
        dim: n,
        ..Counters::default()
    };
    let unsolved = |status, counters| SolveResult {
        x_star: None,
        value: f64::NEG_INFINITY,
        upper_bound: f64::NEG_INFINITY,
        gap: f64::INFINITY,
        iterations: 0,
        status,
        counters,
        best_normal: None,
        trace: Vec::new(),
    };

    let origin = vec![0.0; n];
    if !prob.in_normal(&origin) {
        return Err(SolveError::OriginNotNormal);
    }
    if n == 0 {
        // The box is a single point.
        if prob.in_conormal(&origin) {
            let v = prob.objective(&origin);
            return Ok(SolveResult {
                x_star: Some(origin.clone()),
                value: v,
                upper_bound: v,
                gap: 0.0,
                iterations: 0,
                status: Status::EpsOptimal,
                counters,
                best_normal: Some((origin, v)),
                trace: Vec::new(),
            });
        }
        return Ok(unsolved(Status::Infeasible, counters));
    }
    if !prob.in_conormal(&b) {
        // H is upward closed, so nothing in the box reaches it.
        return Ok(unsolved(Status::Infeasible, counters));
    }

    let eps = opts.eps;
    let upper = b.clone();
    let mut vertices = vec![Vertex {
        value: prob.objective(&b),
        coords: b,
    }];
    counters.peak_vertices = 1;
    let mut best: Option<Vec<f64>> = None;
    let mut best_value = f64::NEG_INFINITY;
    let mut best_normal: Option<(Vec<f64>, f64)> = None;
    let mut pruned_upper = f64::NEG_INFINITY;
    let mut evicted_upper = f64::NEG_INFINITY;
    let mut last_f_pi = f64::INFINITY;
    let mut trace = Vec::new();
    let mut status = None;
    let mut iterations = 0;

    while !vertices.is_empty() {
        if iterations >= opts.max_iter {
            status = Some(Status::IterationCap);
            break;
        }
        iterations += 1;

        let (idx, _) = vertices.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, v)| if v.value > acc.1 { (i, v.value) } else { acc },
        );
        let pi = vertices[idx].coords.clone();
        let f_pi = vertices[idx].value;
        last_f_pi = f_pi;

        let proj = project(prob, &pi, delta);
        counters.bisection_steps += proj.steps;
        counters.max_bisection_steps = counters.max_bisection_steps.max(proj.steps);

        if proj.inside {
            // π ∈ G and every stored vertex is in H: π is optimal.
            best = Some(pi.clone());
            best_value = f_pi;
            if best_normal.as_ref().is_none_or(|(_, v)| f_pi > *v) {
                best_normal = Some((pi.clone(), f_pi));
            }
            if opts.record_trace {
                trace.push(TraceRecord {
                    iter: iterations,
                    f_pi,
                    best_value,
                    vertex_count: vertices.len(),
                    lambda: 1.0,
                    lambda_upper: 1.0,
                    pi,
                });
            }
            status = Some(Status::EpsOptimal);
            break;
        }

        let mut x_lo: Vec<f64> = pi.iter().map(|v| v * proj.lambda).collect();
        let mut f_lo = prob.objective(&x_lo);
        if let Some(y) = prob.improve(&x_lo) {
            let dominates = y.len() == n && y.iter().zip(&x_lo).zip(prob.upper()).all(|((a, b), u)| a >= b && a <= u);
            if dominates && prob.in_normal(&y) {
                let f_y = prob.objective(&y);
                if f_y >= f_lo {
                    x_lo = y;
                    f_lo = f_y;
                }
            }
        }
        if best_normal.as_ref().is_none_or(|(_, v)| f_lo > *v) {
            best_normal = Some((x_lo.clone(), f_lo));
        }
        let mut improved = false;
        if (best.is_none() || f_lo > best_value) && prob.in_conormal(&x_lo) {
            best = Some(x_lo);
            best_value = f_lo;
            improved = true;
        }

        let x_hi: Vec<f64> = pi.iter().map(|v| v * proj.lambda_upper).collect();
        let prune = opts.prune_by_bound && best.is_some();
        let threshold = best_value + eps;
        let (mut next, _) = cut_vertices(std::mem::take(&mut vertices), &x_hi, |z, i| {
            let mut coords = z.coords.clone();
            coords[i] = if x_hi[i] <= opts.zero_snap * upper[i] { 0.0 } else { x_hi[i] };
            if !prob.in_conormal(&coords) {
                return None;
            }
            let value = prob.objective(&coords);
            if prune && value <= threshold {
                pruned_upper = pruned_upper.max(value);
                return None;
            }
            Some(Vertex { coords, value })
        });
        if improved && opts.prune_by_bound {
            next.retain(|v| {
                let keep = v.value > threshold;
                if !keep {
                    pruned_upper = pruned_upper.max(v.value);
                }
                keep
            });
        }
        if next.len() > opts.vertex_cap {
            let mut order: Vec<usize> = (0..next.len()).collect();
            order.sort_by(|&a, &b| next[b].value.total_cmp(&next[a].value).then(a.cmp(&b)));
            let mut keep = vec![false; next.len()];
            for &i in &order[..opts.vertex_cap] {
                keep[i] = true;
            }
            for &i in &order[opts.vertex_cap..] {
                evicted_upper = evicted_upper.max(next[i].value);
            }
            counters.evicted_vertices += next.len() - opts.vertex_cap;
            let mut k = keep.into_iter();
            next.retain(|_| k.next().unwrap_or(false));
        }
        vertices = next;
        counters.peak_vertices = counters.peak_vertices.max(vertices.len());

        if opts.record_trace {
            trace.push(TraceRecord {
                iter: iterations,
                f_pi,
                best_value,
                vertex_count: vertices.len(),
                lambda: proj.lambda,
                lambda_upper: proj.lambda_upper,
                pi,
            });
        }

        if best.is_some() && f_pi - best_value <= eps && evicted_upper - best_value <= eps {
            status = Some(Status::EpsOptimal);
            break;
        }
    }

    counters.iterations = iterations;
    let remaining_upper = vertices
        .iter()
        .map(|v| v.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let status = match status {
        Some(s) => s,
        // Polyblock exhausted.
        None if best.is_some() && evicted_upper - best_value <= eps => Status::EpsOptimal,
        None if best.is_none() && counters.evicted_vertices == 0 => Status::Infeasible,
        None => Status::IterationCap,
    };
    let upper_bound = match status {
        Status::EpsOptimal if vertices.is_empty() => pruned_upper.max(evicted_upper).max(best_value),
        Status::EpsOptimal => last_f_pi.max(evicted_upper),
        _ => remaining_upper.max(evicted_upper).max(pruned_upper),
    };
    let gap = if best.is_some() {
        (upper_bound - best_value).max(0.0)
    } else {
        f64::INFINITY
    };
    Ok(SolveResult {
        x_star: best,
        value: best_value,
        upper_bound,
        gap,
        iterations,
        status,
        counters,
        best_normal,
        trace,
    })
}
