//! Weighted Tchebycheff scalarization of the (R_DU, R_CU) trade-off and the
//! utopia point it is measured against.

use serde::{Deserialize, Serialize};

use crate::adapter::{self, Mode, Objective};
use crate::channel::{Dims, NetworkInstance};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::rates::{Allocation, RateUnit, sum_rates};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Polyblock termination gap, in units of the objective being maximized.
    pub eps_solver: f64,
    /// Bisection width; `None` means `eps_solver / 10`.
    pub delta_bisect: Option<f64>,
    /// Slack allowed on linear constraints and on membership tests.
    pub feas_tol: f64,
    /// Slack allowed on rate floors when checking an allocation.
    pub rate_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_solver: 1e-3,
            delta_bisect: None,
            feas_tol: 1e-9,
            rate_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub max_iter: usize,
    pub vertex_cap: usize,
    /// Powers at or below this (watts) are treated as switched off.
    pub power_floor: f64,
    /// Maximum number of subchannel assignments exact mode will enumerate.
    pub enumeration_cap: usize,
    /// Iteration budget of the single relaxed-mode polyblock run.
    pub relaxed_max_iter: usize,
    /// Keep the per-iteration log of the winning sub-problem.
    pub record_trace: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            vertex_cap: 200_000,
            power_floor: 1e-9,
            enumeration_cap: 20_000,
            relaxed_max_iter: 2_000,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Utopia {
    pub r_du_max: f64,
    pub r_cu_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoopConfig {
    pub alpha: f64,
    pub p_max_du: Vec<f64>,
    pub p_max_cu: Vec<f64>,
    pub l_max: usize,
    pub r_min_cu: Vec<f64>,
    pub r_min_du: Vec<f64>,
    pub utopia: Option<Utopia>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub rate_unit: RateUnit,
}

impl MoopConfig {
    /// Same budget and floor for every user of a kind, `L_max = 2`, no utopia.
    pub fn uniform(dims: Dims, alpha: f64, p_max_du: f64, p_max_cu: f64, r_min: f64) -> Self {
        Self {
            alpha,
            p_max_du: vec![p_max_du; dims.k_dus],
            p_max_cu: vec![p_max_cu; dims.m_cus],
            l_max: 2,
            r_min_cu: vec![r_min; dims.m_cus],
            r_min_du: vec![r_min; dims.k_dus],
            utopia: None,
            tolerances: Tolerances::default(),
            solver: SolverSettings::default(),
            rate_unit: RateUnit::Bits,
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            ..self.clone()
        }
    }

    pub fn validate(&self, dims: Dims) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if self.l_max == 0 {
            return bad("l_max must be at least 1".into());
        }
        for (name, v, len) in [
            ("p_max_du", &self.p_max_du, dims.k_dus),
            ("p_max_cu", &self.p_max_cu, dims.m_cus),
            ("r_min_du", &self.r_min_du, dims.k_dus),
            ("r_min_cu", &self.r_min_cu, dims.m_cus),
        ] {
            if v.len() != len {
                return Err(Error::Dimension(format!("{name} has {} entries, expected {len}", v.len())));
            }
        }
        if let Some(p) = self.p_max_du.iter().chain(&self.p_max_cu).find(|p| !(p.is_finite() && **p > 0.0)) {
            return bad(format!("power budgets must be positive, got {p}"));
        }
        if let Some(r) = self.r_min_du.iter().chain(&self.r_min_cu).find(|r| !(r.is_finite() && **r >= 0.0)) {
            return bad(format!("rate floors must be non-negative, got {r}"));
        }
        let t = &self.tolerances;
        if !(t.eps_solver > 0.0 && t.feas_tol >= 0.0 && t.rate_tol >= 0.0) {
            return bad(format!("invalid tolerances {t:?}"));
        }
        Ok(())
    }

    pub fn utopia(&self) -> Result<Utopia> {
        let u = self
            .utopia
            .ok_or_else(|| Error::Utopia("utopia point not computed".into()))?;
        for (name, v) in [("R_DU,max", u.r_du_max), ("R_CU,max", u.r_cu_max)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Utopia(format!("{name} = {v}")));
            }
        }
        Ok(u)
    }

    /// Weighted terms `(weight, utopia)` that take part in χ. A term drops out
    /// when its weight is zero or when its utopia is zero, since the
    /// corresponding rate is then identically zero on the feasible set.
    pub fn tcheby_terms(&self) -> Result<[Option<(f64, f64)>; 2]> {
        let u = self.utopia()?;
        let term = |w: f64, max: f64| (w > 0.0 && max > 0.0).then_some((w, max));
        Ok([term(self.alpha, u.r_du_max), term(1.0 - self.alpha, u.r_cu_max)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarizedValue {
    pub chi: f64,
    pub r_du: f64,
    pub r_cu: f64,
}

/// Smallest χ with `α(R_DU,max − R_DU)/R_DU,max ≤ χ` and
/// `(1−α)(R_CU,max − R_CU)/R_CU,max ≤ χ`.
pub fn tcheby_chi(r_du: f64, r_cu: f64, cfg: &MoopConfig) -> Result<f64> {
    let [du, cu] = cfg.tcheby_terms()?;
    let dev = |t: Option<(f64, f64)>, r: f64| t.map_or(0.0, |(w, max)| w * (max - r) / max);
    Ok(dev(du, r_du).max(dev(cu, r_cu)))
}

pub fn evaluate(inst: &NetworkInstance, alloc: &Allocation, cfg: &MoopConfig) -> Result<ScalarizedValue> {
    let (r_du, r_cu) = sum_rates(inst, alloc, cfg.rate_unit);
    Ok(ScalarizedValue {
        chi: tcheby_chi(r_du, r_cu, cfg)?,
        r_du,
        r_cu,
    })
}

/// Maximizes `R_DU` and `R_CU` separately under every constraint, rate
/// floors included.
pub fn compute_utopia(inst: &NetworkInstance, cfg: &MoopConfig, exec: Execution) -> Result<Utopia> {
    compute_utopia_mode(inst, cfg, Mode::Exact, exec)
}

/// [`compute_utopia`] with the individual maxima found in `mode`. Relaxed
/// mode gives achievable rates, which may fall short of the true maxima.
pub fn compute_utopia_mode(inst: &NetworkInstance, cfg: &MoopConfig, mode: Mode, exec: Execution) -> Result<Utopia> {
    let (du, cu) = exec.join(
        || adapter::maximize_mode(inst, cfg, Objective::MaxDu, mode, exec),
        || adapter::maximize_mode(inst, cfg, Objective::MaxCu, mode, exec),
    );
    Ok(Utopia {
        r_du_max: du?.r_du,
        r_cu_max: cu?.r_cu,
    })
}

/// Copy of `cfg` carrying the utopia of `inst`.
pub fn with_utopia(inst: &NetworkInstance, cfg: &MoopConfig, exec: Execution) -> Result<MoopConfig> {
    let utopia = compute_utopia(inst, cfg, exec)?;
    Ok(MoopConfig {
        utopia: Some(utopia),
        ..cfg.clone()
    })
}
