//! SIC decoding order, SINRs, rates and constraint checks for a candidate
//! allocation. Everything here is a direct evaluation of the system model; the
//! optimizer's lifted forms live in [`crate::adapter`] and are cross-checked
//! against this module.

use serde::{Deserialize, Serialize};

use crate::channel::{Dims, NetworkInstance};
use crate::error::{Error, Result};
use crate::scalarize::MoopConfig;

/// Unit used for rates: bits/s/Hz (`log2`) or nats/s/Hz (`ln`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateUnit {
    #[default]
    Bits,
    Nats,
}

impl RateUnit {
    /// `log(1 + x)` in this unit.
    pub fn log1p(self, x: f64) -> f64 {
        self.scale_nats(x.ln_1p())
    }

    pub fn ln(self, x: f64) -> f64 {
        self.scale_nats(x.ln())
    }

    pub fn scale_nats(self, nats: f64) -> f64 {
        match self {
            RateUnit::Bits => nats / std::f64::consts::LN_2,
            RateUnit::Nats => nats,
        }
    }
}

/// A transmitter. CUs order before DUs, then by index; this is the SIC
/// tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum User {
    Cu(usize),
    Du(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// `[K][N]` DU transmit powers, watts.
    pub p_du: Vec<Vec<f64>>,
    /// `[M][N]` CU transmit powers, watts.
    pub p_cu: Vec<Vec<f64>>,
    /// `[K][N]` DU subchannel indicators.
    pub phi: Vec<Vec<bool>>,
    /// `[M][N]` CU subchannel indicators.
    pub psi: Vec<Vec<bool>>,
}

impl Allocation {
    pub fn zeros(dims: Dims) -> Self {
        Self {
            p_du: vec![vec![0.0; dims.n_sub]; dims.k_dus],
            p_cu: vec![vec![0.0; dims.n_sub]; dims.m_cus],
            phi: vec![vec![false; dims.n_sub]; dims.k_dus],
            psi: vec![vec![false; dims.n_sub]; dims.m_cus],
        }
    }

    pub fn check_shape(&self, dims: Dims) -> Result<()> {
        let ok = |rows: &[Vec<f64>], r: usize| rows.len() == r && rows.iter().all(|x| x.len() == dims.n_sub);
        let okb = |rows: &[Vec<bool>], r: usize| rows.len() == r && rows.iter().all(|x| x.len() == dims.n_sub);
        if ok(&self.p_du, dims.k_dus)
            && ok(&self.p_cu, dims.m_cus)
            && okb(&self.phi, dims.k_dus)
            && okb(&self.psi, dims.m_cus)
        {
            Ok(())
        } else {
            Err(Error::Dimension(format!("allocation does not match {dims:?}")))
        }
    }

    /// Turns a user on at `power` on subchannel `n`.
    pub fn set(&mut self, user: User, n: usize, power: f64) {
        match user {
            User::Cu(m) => {
                self.p_cu[m][n] = power;
                self.psi[m][n] = true;
            }
            User::Du(k) => {
                self.p_du[k][n] = power;
                self.phi[k][n] = true;
            }
        }
    }

    pub fn is_active(&self, user: User, n: usize) -> bool {
        match user {
            User::Cu(m) => self.psi[m][n],
            User::Du(k) => self.phi[k][n],
        }
    }

    /// Power of `user` on `n` counted only when the indicator is set.
    pub fn effective_power(&self, user: User, n: usize) -> f64 {
        match user {
            User::Cu(m) if self.psi[m][n] => self.p_cu[m][n],
            User::Du(k) if self.phi[k][n] => self.p_du[k][n],
            _ => 0.0,
        }
    }

    /// Positive power implies the indicator is set, and powers are
    /// non-negative.
    pub fn is_consistent(&self) -> bool {
        let check = |p: &[Vec<f64>], ind: &[Vec<bool>]| {
            p.iter()
                .zip(ind)
                .all(|(pr, ir)| pr.iter().zip(ir).all(|(&v, &on)| v >= 0.0 && (v == 0.0 || on)))
        };
        check(&self.p_du, &self.phi) && check(&self.p_cu, &self.psi)
    }
}

fn gain_to_bs(inst: &NetworkInstance, user: User, n: usize) -> f64 {
    match user {
        User::Cu(m) => inst.g_cu_bs[m][n],
        User::Du(k) => inst.h_du_bs[k][n],
    }
}

/// Active transmitters on subchannel `n`, strongest gain to the BS first.
pub fn sic_order(inst: &NetworkInstance, alloc: &Allocation, n: usize) -> Vec<User> {
    let mut users: Vec<User> = (0..inst.m_cus)
        .map(User::Cu)
        .chain((0..inst.k_dus).map(User::Du))
        .filter(|&u| alloc.is_active(u, n))
        .collect();
    users.sort_by(|&a, &b| {
        gain_to_bs(inst, b, n)
            .total_cmp(&gain_to_bs(inst, a, n))
            .then(a.cmp(&b))
    });
    users
}

/// SINR at the BS of CU `m` on subchannel `n`.
///
/// Signals decoded after `m` (weaker gain to the BS) remain as interference;
/// stronger ones have already been cancelled.
pub fn sinr_cu(inst: &NetworkInstance, alloc: &Allocation, m: usize, n: usize) -> f64 {
    if !alloc.psi[m][n] {
        return 0.0;
    }
    let order = sic_order(inst, alloc, n);
    sinr_cu_in_order(inst, alloc, &order, m, n)
}

fn sinr_cu_in_order(
    inst: &NetworkInstance,
    alloc: &Allocation,
    order: &[User],
    m: usize,
    n: usize,
) -> f64 {
    let pos = order
        .iter()
        .position(|&u| u == User::Cu(m))
        .expect("active CU is in the SIC order");
    let interference: f64 = order[pos + 1..]
        .iter()
        .map(|&u| alloc.effective_power(u, n) * gain_to_bs(inst, u, n))
        .sum();
    alloc.p_cu[m][n] * inst.g_cu_bs[m][n] / (inst.noise_cu + interference)
}

/// SINR at the receiver of DU `k` on subchannel `n`. D2D receivers decode
/// directly, treating every co-channel transmitter as noise.
pub fn sinr_du(inst: &NetworkInstance, alloc: &Allocation, k: usize, n: usize) -> f64 {
    if !alloc.phi[k][n] {
        return 0.0;
    }
    let from_cus: f64 = (0..inst.m_cus)
        .map(|m| alloc.effective_power(User::Cu(m), n) * inst.g_cu_du[m][k][n])
        .sum();
    let from_dus: f64 = (0..inst.k_dus)
        .filter(|&j| j != k)
        .map(|j| alloc.effective_power(User::Du(j), n) * inst.h_du_du_cross[j][k][n])
        .sum();
    alloc.p_du[k][n] * inst.h_du_du_desired[k][n] / (inst.noise_du + from_cus + from_dus)
}

/// Per-user rates summed over subchannels.
#[derive(Debug, Clone, PartialEq)]
pub struct UserRates {
    pub cu: Vec<f64>,
    pub du: Vec<f64>,
}

impl UserRates {
    pub fn r_du(&self) -> f64 {
        self.du.iter().sum()
    }
    pub fn r_cu(&self) -> f64 {
        self.cu.iter().sum()
    }
}

pub fn user_rates(inst: &NetworkInstance, alloc: &Allocation, unit: RateUnit) -> UserRates {
    let mut cu = vec![0.0; inst.m_cus];
    let mut du = vec![0.0; inst.k_dus];
    for n in 0..inst.n_sub {
        let order = sic_order(inst, alloc, n);
        for &u in &order {
            match u {
                User::Cu(m) => cu[m] += unit.log1p(sinr_cu_in_order(inst, alloc, &order, m, n)),
                User::Du(k) => du[k] += unit.log1p(sinr_du(inst, alloc, k, n)),
            }
        }
    }
    UserRates { cu, du }
}

pub fn user_rate(inst: &NetworkInstance, alloc: &Allocation, user: User, unit: RateUnit) -> f64 {
    (0..inst.n_sub)
        .map(|n| match user {
            User::Cu(m) => unit.log1p(sinr_cu(inst, alloc, m, n)),
            User::Du(k) => unit.log1p(sinr_du(inst, alloc, k, n)),
        })
        .sum()
}

/// `(R_DU, R_CU)`.
pub fn sum_rates(inst: &NetworkInstance, alloc: &Allocation, unit: RateUnit) -> (f64, f64) {
    let r = user_rates(inst, alloc, unit);
    (r.r_du(), r.r_cu())
}

/// Slack of every constraint of the allocation problem; negative means
/// violated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// `p_max,k − Σ_n φ p` per DU.
    pub budget_du: Vec<f64>,
    /// `p_max,m − Σ_n ψ p̂` per CU.
    pub budget_cu: Vec<f64>,
    /// Indicators are stored as booleans, so binarity always holds.
    pub binarity: f64,
    /// `1 − Σ_n φ` per DU.
    pub single_du: Vec<f64>,
    /// `1 − Σ_n ψ` per CU.
    pub single_cu: Vec<f64>,
    /// `L_max − Σ φ − Σ ψ` per subchannel.
    pub l_max: Vec<f64>,
    /// `R_DU,k − R_min,k`.
    pub rate_du: Vec<f64>,
    /// `R_CU,m − R_min,m`.
    pub rate_cu: Vec<f64>,
    /// Powers are non-negative and positive power implies an active indicator.
    pub consistent: bool,
    pub feasible: bool,
}

impl ConstraintReport {
    /// Smallest slack among the linear (non-rate) constraints.
    pub fn min_linear_slack(&self) -> f64 {
        self.budget_du
            .iter()
            .chain(&self.budget_cu)
            .chain(&self.single_du)
            .chain(&self.single_cu)
            .chain(&self.l_max)
            .chain(std::iter::once(&self.binarity))
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_rate_slack(&self) -> f64 {
        self.rate_du
            .iter()
            .chain(&self.rate_cu)
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn check_constraints(inst: &NetworkInstance, alloc: &Allocation, cfg: &MoopConfig) -> ConstraintReport {
    let n_sub = inst.n_sub;
    let used = |p: &[f64], ind: &[bool]| -> f64 {
        p.iter().zip(ind).map(|(&v, &on)| if on { v } else { 0.0 }).sum()
    };
    let count = |ind: &[bool]| ind.iter().filter(|&&b| b).count() as f64;

    let budget_du = (0..inst.k_dus)
        .map(|k| cfg.p_max_du[k] - used(&alloc.p_du[k], &alloc.phi[k]))
        .collect();
    let budget_cu = (0..inst.m_cus)
        .map(|m| cfg.p_max_cu[m] - used(&alloc.p_cu[m], &alloc.psi[m]))
        .collect();
    let single_du = alloc.phi.iter().map(|r| 1.0 - count(r)).collect();
    let single_cu = alloc.psi.iter().map(|r| 1.0 - count(r)).collect();
    let l_max = (0..n_sub)
        .map(|n| {
            let on = alloc.phi.iter().filter(|r| r[n]).count() + alloc.psi.iter().filter(|r| r[n]).count();
            cfg.l_max as f64 - on as f64
        })
        .collect();
    let rates = user_rates(inst, alloc, cfg.rate_unit);
    let rate_du = rates
        .du
        .iter()
        .zip(&cfg.r_min_du)
        .map(|(r, min)| r - min)
        .collect();
    let rate_cu = rates
        .cu
        .iter()
        .zip(&cfg.r_min_cu)
        .map(|(r, min)| r - min)
        .collect();

    let mut report = ConstraintReport {
        budget_du,
        budget_cu,
        binarity: 0.0,
        single_du,
        single_cu,
        l_max,
        rate_du,
        rate_cu,
        consistent: alloc.is_consistent(),
        feasible: false,
    };
    report.feasible = report.consistent
        && report.min_linear_slack() >= -cfg.tolerances.feas_tol
        && report.min_rate_slack() >= -cfg.tolerances.rate_tol;
    report
}
