/// A maximization problem in canonical monotonic form.
///
/// Implementations must uphold the monotonicity contract: `objective` is
/// non-decreasing in every coordinate on `[0, upper()]`, `in_normal` describes a
/// downward-closed set and `in_conormal` an upward-closed one. The solver does
/// not check these properties; violating them voids the optimality guarantee.
pub trait MonotonicProblem {
    fn dim(&self) -> usize;

    /// Upper corner `b` of the enclosing box `[0, b]`.
    fn upper(&self) -> &[f64];

    fn objective(&self, x: &[f64]) -> f64;

    /// Membership in the normal set `G`.
    fn in_normal(&self, x: &[f64]) -> bool;

    /// Membership in the co-normal set `H`.
    fn in_conormal(&self, x: &[f64]) -> bool;

    /// Optional local improvement of a projected point `x ∈ G`: a point of
    /// `G` inside the box with every coordinate at least that of `x`. The
    /// solver double-checks `G` membership and keeps whichever point has the
    /// larger objective.
    fn improve(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

impl<P: MonotonicProblem + ?Sized> MonotonicProblem for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn upper(&self) -> &[f64] {
        (**self).upper()
    }
    fn objective(&self, x: &[f64]) -> f64 {
        (**self).objective(x)
    }
    fn in_normal(&self, x: &[f64]) -> bool {
        (**self).in_normal(x)
    }
    fn in_conormal(&self, x: &[f64]) -> bool {
        (**self).in_conormal(x)
    }
    fn improve(&self, x: &[f64]) -> Option<Vec<f64>> {
        (**self).improve(x)
    }
}

/// Closure-backed problem, handy for synthetic problems and tests.
pub struct FnProblem<F, G, H> {
    upper: Vec<f64>,
    objective: F,
    normal: G,
    conormal: H,
}

impl<F, G, H> FnProblem<F, G, H>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> bool,
    H: Fn(&[f64]) -> bool,
{
    pub fn new(upper: Vec<f64>, objective: F, normal: G, conormal: H) -> Self {
        Self {
            upper,
            objective,
            normal,
            conormal,
        }
    }
}

impl<F, G, H> MonotonicProblem for FnProblem<F, G, H>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> bool,
    H: Fn(&[f64]) -> bool,
{
    fn dim(&self) -> usize {
        self.upper.len()
    }
    fn upper(&self) -> &[f64] {
        &self.upper
    }
    fn objective(&self, x: &[f64]) -> f64 {
        (self.objective)(x)
    }
    fn in_normal(&self, x: &[f64]) -> bool {
        (self.normal)(x)
    }
    fn in_conormal(&self, x: &[f64]) -> bool {
        (self.conormal)(x)
    }
}
