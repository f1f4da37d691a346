use crate::{MonotonicProblem, SolveError};

/// Outcome of projecting a point onto the upper boundary of the normal set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Largest scale known to keep the point inside `G` (`lambda · π ∈ G`).
    pub lambda: f64,
    /// Smallest scale known to leave `G`. Equal to `lambda` when `π ∈ G`.
    pub lambda_upper: f64,
    /// Number of bisection halvings performed.
    pub steps: usize,
    /// `true` when `π` itself belongs to `G`.
    pub inside: bool,
}

fn scaled(x: &[f64], s: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend(x.iter().map(|v| v * s));
}

/// Bisection on `λ ∈ [0, 1]` for `max { λ : λπ ∈ G }`.
///
/// Assumes `0 ∈ G`; callers that have not verified this should use
/// [`bisect_project`]. Each halving is a single membership query. On return
/// `lambda_upper - lambda < delta` unless `π ∈ G`.
pub fn project<P: MonotonicProblem + ?Sized>(prob: &P, pi: &[f64], delta: f64) -> Projection {
    if prob.in_normal(pi) {
        return Projection {
            lambda: 1.0,
            lambda_upper: 1.0,
            steps: 0,
            inside: true,
        };
    }
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut steps = 0;
    let mut buf = Vec::with_capacity(pi.len());
    while hi - lo >= delta {
        let mid = 0.5 * (lo + hi);
        scaled(pi, mid, &mut buf);
        if prob.in_normal(&buf) {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Projection {
        lambda: lo,
        lambda_upper: hi,
        steps,
        inside: false,
    }
}

/// Projection parameter `λ` of `π` onto `∂⁺G`, checking preconditions.
///
/// Returns `1` when `π ∈ G` (in particular when `π = 0`).
pub fn bisect_project<P: MonotonicProblem + ?Sized>(
    prob: &P,
    pi: &[f64],
    delta: f64,
) -> Result<f64, SolveError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(SolveError::InvalidTolerance {
            name: "delta",
            value: delta,
        });
    }
    if pi.len() != prob.dim() {
        return Err(SolveError::DimensionMismatch {
            expected: prob.dim(),
            got: pi.len(),
        });
    }
    if !prob.in_normal(&vec![0.0; prob.dim()]) {
        return Err(SolveError::OriginNotNormal);
    }
    Ok(project(prob, pi, delta).lambda)
}
