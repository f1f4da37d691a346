use serde::{Deserialize, Serialize};

use crate::channel::Dims;
use crate::error::{Error, Result};
use crate::rates::User;
use crate::scalarize::MoopConfig;

/// Subchannel of every user, `None` when the user is silent. Holding one
/// optional subchannel per user makes the single-subchannel constraint hold
/// by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub cu: Vec<Option<usize>>,
    pub du: Vec<Option<usize>>,
}

impl Assignment {
    pub fn empty(dims: Dims) -> Self {
        Self {
            cu: vec![None; dims.m_cus],
            du: vec![None; dims.k_dus],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.cu.len(), self.du.len())
    }

    pub fn get(&self, user: User) -> Option<usize> {
        match user {
            User::Cu(m) => self.cu[m],
            User::Du(k) => self.du[k],
        }
    }

    pub fn set(&mut self, user: User, n: Option<usize>) {
        match user {
            User::Cu(m) => self.cu[m] = n,
            User::Du(k) => self.du[k] = n,
        }
    }

    /// All users in canonical order: CUs then DUs, by index.
    pub fn users(&self) -> impl Iterator<Item = User> + '_ {
        (0..self.cu.len())
            .map(User::Cu)
            .chain((0..self.du.len()).map(User::Du))
    }

    /// Assigned `(user, subchannel)` pairs in canonical user order.
    pub fn pairs(&self) -> Vec<(User, usize)> {
        self.users()
            .filter_map(|u| self.get(u).map(|n| (u, n)))
            .collect()
    }

    pub fn load(&self, n_sub: usize) -> Vec<usize> {
        let mut load = vec![0; n_sub];
        for (_, n) in self.pairs() {
            load[n] += 1;
        }
        load
    }

    pub fn check(&self, dims: Dims, l_max: usize) -> Result<()> {
        if self.cu.len() != dims.m_cus || self.du.len() != dims.k_dus {
            return Err(Error::Dimension(format!("assignment does not match {dims:?}")));
        }
        if let Some((u, n)) = self.pairs().into_iter().find(|&(_, n)| n >= dims.n_sub) {
            return Err(Error::Dimension(format!("{u:?} assigned to missing subchannel {n}")));
        }
        if let Some(n) = self.load(dims.n_sub).iter().position(|&l| l > l_max) {
            return Err(Error::InvalidConfig(format!("subchannel {n} carries more than {l_max} users")));
        }
        Ok(())
    }

    /// No silent user fits anywhere without breaking `L_max`.
    pub fn is_maximal(&self, n_sub: usize, l_max: usize) -> bool {
        let has_silent = self.users().any(|u| self.get(u).is_none());
        !has_silent || self.load(n_sub).iter().all(|&l| l >= l_max)
    }

    /// Indicator matrices `(phi [K][N], psi [M][N])`.
    pub fn indicators(&self, n_sub: usize) -> (Vec<Vec<bool>>, Vec<Vec<bool>>) {
        let rows = |v: &[Option<usize>]| {
            v.iter()
                .map(|a| (0..n_sub).map(|n| *a == Some(n)).collect())
                .collect()
        };
        (rows(&self.du), rows(&self.cu))
    }

    /// Inverse of [`Assignment::indicators`]; rejects users on several
    /// subchannels.
    pub fn from_indicators(phi: &[Vec<bool>], psi: &[Vec<bool>]) -> Result<Self> {
        let col = |rows: &[Vec<bool>], kind: &str| -> Result<Vec<Option<usize>>> {
            rows.iter()
                .enumerate()
                .map(|(i, r)| {
                    let mut on = r.iter().enumerate().filter(|(_, b)| **b).map(|(n, _)| n);
                    let first = on.next();
                    match on.next() {
                        Some(_) => Err(Error::InvalidConfig(format!("{kind} {i} is on several subchannels"))),
                        None => Ok(first),
                    }
                })
                .collect()
        };
        Ok(Self {
            cu: col(psi, "CU")?,
            du: col(phi, "DU")?,
        })
    }
}

struct Walker<'a> {
    dims: Dims,
    l_max: usize,
    cap: usize,
    keep: &'a dyn Fn(&Assignment, &[usize]) -> bool,
    out: Vec<Assignment>,
}

impl Walker<'_> {
    fn walk(&mut self, cur: &mut Assignment, load: &mut [usize], users: &[User], i: usize) -> Result<()> {
        if i == users.len() {
            if (self.keep)(cur, load) {
                if self.out.len() == self.cap {
                    return Err(Error::EnumerationCap {
                        count: self.cap + 1,
                        cap: self.cap,
                    });
                }
                self.out.push(cur.clone());
            }
            return Ok(());
        }
        let u = users[i];
        cur.set(u, None);
        self.walk(cur, load, users, i + 1)?;
        for n in 0..self.dims.n_sub {
            if load[n] < self.l_max {
                load[n] += 1;
                cur.set(u, Some(n));
                self.walk(cur, load, users, i + 1)?;
                load[n] -= 1;
            }
        }
        cur.set(u, None);
        Ok(())
    }
}

fn walk_all(dims: Dims, l_max: usize, cap: usize, keep: &dyn Fn(&Assignment, &[usize]) -> bool) -> Result<Vec<Assignment>> {
    let mut cur = Assignment::empty(dims);
    let users: Vec<User> = cur.users().collect();
    let mut w = Walker {
        dims,
        l_max,
        cap,
        keep,
        out: Vec::new(),
    };
    w.walk(&mut cur, &mut vec![0; dims.n_sub], &users, 0)?;
    Ok(w.out)
}

/// Every assignment with each user on at most one subchannel and at most
/// `L_max` users per subchannel, in canonical order: users in order CU₀…,
/// DU₀…, each ranging over silent, subchannel 0, 1, … (lexicographic).
pub fn enumerate_assignments(dims: Dims, cfg: &MoopConfig) -> Result<Vec<Assignment>> {
    walk_all(dims, cfg.l_max, cfg.solver.enumeration_cap, &|_, _| true)
}

/// The assignments exact mode searches: every assignment that places each
/// user with a positive rate floor, since a silent user cannot meet one.
///
/// Non-maximal assignments stay in the list. A user the optimum silences
/// would otherwise have to be driven to exactly zero power by the polyblock,
/// which converges slowly where the rate is steep near zero power.
pub fn candidate_assignments(dims: Dims, cfg: &MoopConfig) -> Result<Vec<Assignment>> {
    let keep = |a: &Assignment, _: &[usize]| {
        a.cu.iter()
            .zip(&cfg.r_min_cu)
            .chain(a.du.iter().zip(&cfg.r_min_du))
            .all(|(s, &r)| r <= 0.0 || s.is_some())
    };
    walk_all(dims, cfg.l_max, cfg.solver.enumeration_cap, &keep)
}
