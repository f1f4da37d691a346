//! Sum rates written as differences of increasing functions of the power
//! vector.

use serde::{Deserialize, Serialize};

use crate::channel::NetworkInstance;
use crate::rates::{Allocation, User};

/// A transmit power variable: `user` on subchannel `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerVar {
    pub user: User,
    pub n: usize,
}

/// `ln(σ + Σ cᵢ xᵢ)`, stored as `ln σ + ln(1 + Σ (cᵢ/σ) xᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTerm {
    ln_noise: f64,
    coeffs: Vec<(usize, f64)>,
}

impl LogTerm {
    fn new(noise: f64, coeffs: Vec<(usize, f64)>) -> Self {
        Self {
            ln_noise: noise.ln(),
            coeffs: coeffs.into_iter().map(|(i, c)| (i, c / noise)).filter(|&(_, c)| c > 0.0).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let s: f64 = self.coeffs.iter().map(|&(i, c)| c * x[i]).sum();
        self.ln_noise + s.ln_1p()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// A rate as `plus(x) − minus(x)` in nats, both sides increasing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DmPair {
    pub plus: Vec<LogTerm>,
    pub minus: Vec<LogTerm>,
}

impl DmPair {
    pub fn plus(&self, x: &[f64]) -> f64 {
        self.plus.iter().map(|t| t.eval(x)).sum()
    }

    pub fn minus(&self, x: &[f64]) -> f64 {
        self.minus.iter().map(|t| t.eval(x)).sum()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.plus(x) - self.minus(x)
    }

    pub fn minus_is_constant(&self) -> bool {
        self.minus.iter().all(LogTerm::is_constant)
    }
}

/// Difference-of-monotonic form of both sum rates and of every user's rate,
/// for a fixed set of power variables.
///
/// On each subchannel the SIC order depends on gains only, so it is fixed by
/// the layout. A CU at position `i` (strongest first) contributes
/// `ln T_i − ln T_{i+1}` with `T_i = σ² + Σ_{j ≥ i} g_j x_j`; shared `T`
/// terms of consecutive CUs cancel in the sum.
#[derive(Debug, Clone, PartialEq)]
pub struct DmDecomposition {
    pub vars: Vec<PowerVar>,
    /// CU sum rate.
    pub cu: DmPair,
    /// DU sum rate.
    pub du: DmPair,
    /// Each user's own rate over all its variables.
    pub per_user: Vec<(User, DmPair)>,
}

fn gain_to_bs(inst: &NetworkInstance, user: User, n: usize) -> f64 {
    match user {
        User::Cu(m) => inst.g_cu_bs[m][n],
        User::Du(k) => inst.h_du_bs[k][n],
    }
}

impl DmDecomposition {
    pub fn new(inst: &NetworkInstance, vars: Vec<PowerVar>) -> Self {
        let mut cu = DmPair::default();
        let mut du = DmPair::default();
        let mut per_user: Vec<(User, DmPair)> = Vec::new();
        let mut user_pair = |u: User, plus: LogTerm, minus: LogTerm| {
            let idx = match per_user.iter().position(|(v, _)| *v == u) {
                Some(i) => i,
                None => {
                    per_user.push((u, DmPair::default()));
                    per_user.len() - 1
                }
            };
            per_user[idx].1.plus.push(plus);
            per_user[idx].1.minus.push(minus);
        };

        for n in 0..inst.n_sub {
            let mut on: Vec<usize> = (0..vars.len()).filter(|&i| vars[i].n == n).collect();
            on.sort_by(|&a, &b| {
                let (ua, ub) = (vars[a].user, vars[b].user);
                gain_to_bs(inst, ub, n)
                    .total_cmp(&gain_to_bs(inst, ua, n))
                    .then(ua.cmp(&ub))
            });
            let tail = |from: usize| -> LogTerm {
                let coeffs = on[from..].iter().map(|&i| (i, gain_to_bs(inst, vars[i].user, n))).collect();
                LogTerm::new(inst.noise_cu, coeffs)
            };

            // CU side with telescoping cancellation.
            let mut plus_pos = Vec::new();
            let mut minus_pos = Vec::new();
            for (pos, &i) in on.iter().enumerate() {
                if matches!(vars[i].user, User::Cu(_)) {
                    plus_pos.push(pos);
                    minus_pos.push(pos + 1);
                    user_pair(vars[i].user, tail(pos), tail(pos + 1));
                }
            }
            let (plus_pos, minus_pos): (Vec<_>, Vec<_>) = (
                plus_pos.iter().copied().filter(|p| !minus_pos.contains(p)).collect(),
                minus_pos.iter().copied().filter(|p| !plus_pos.contains(p)).collect(),
            );
            cu.plus.extend(plus_pos.into_iter().map(tail));
            cu.minus.extend(minus_pos.into_iter().map(tail));

            // DU side: every co-channel signal is interference.
            for &v in &on {
                let User::Du(k) = vars[v].user else { continue };
                let interference: Vec<(usize, f64)> = on
                    .iter()
                    .filter(|&&i| i != v)
                    .filter_map(|&i| match vars[i].user {
                        User::Cu(m) => Some((i, inst.g_cu_du[m][k][n])),
                        User::Du(j) if j != k => Some((i, inst.h_du_du_cross[j][k][n])),
                        User::Du(_) => None,
                    })
                    .collect();
                let mut with_signal = interference.clone();
                with_signal.push((v, inst.h_du_du_desired[k][n]));
                let plus = LogTerm::new(inst.noise_du, with_signal);
                let minus = LogTerm::new(inst.noise_du, interference);
                du.plus.push(plus.clone());
                du.minus.push(minus.clone());
                user_pair(vars[v].user, plus, minus);
            }
        }
        per_user.sort_by_key(|(u, _)| *u);
        Self { vars, cu, du, per_user }
    }

    pub fn user(&self, u: User) -> Option<&DmPair> {
        self.per_user.iter().find(|(v, _)| *v == u).map(|(_, p)| p)
    }

    /// The allocation with every variable's indicator set and its power
    /// taken from `x`.
    pub fn allocation(&self, inst: &NetworkInstance, x: &[f64]) -> Allocation {
        let mut a = Allocation::zeros(inst.dims());
        for (v, &p) in self.vars.iter().zip(x) {
            a.set(v.user, v.n, p);
        }
        a
    }
}
