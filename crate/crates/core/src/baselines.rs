//! Reference schemes: a random subchannel assignment with optimized powers,
//! and orthogonal multiple access (one user per subchannel).

use rand::SeedableRng;
use rand::seq::{IndexedRandom, SliceRandom};
use rand_chacha::ChaCha8Rng;

use crate::adapter::{Assignment, Objective, Solution, solve_over, solve_scalarized};
use crate::channel::NetworkInstance;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::rates::User;
use crate::scalarize::MoopConfig;

/// Redraws allowed when a drawn assignment cannot meet the rate floors.
pub const RANDOM_RETRIES: usize = 50;

/// Draws a maximal assignment: users arrive in random order and each joins a
/// uniformly chosen subchannel that still has room.
pub fn draw_assignment(inst: &NetworkInstance, l_max: usize, rng: &mut ChaCha8Rng) -> Assignment {
    let mut a = Assignment::empty(inst.dims());
    let mut users: Vec<User> = a.users().collect();
    users.shuffle(rng);
    let mut load = vec![0usize; inst.n_sub];
    for u in users {
        let open: Vec<usize> = (0..inst.n_sub).filter(|&n| load[n] < l_max).collect();
        if let Some(&n) = open.choose(rng) {
            load[n] += 1;
            a.set(u, Some(n));
        }
    }
    a
}

/// Random assignment, then powers optimized for it under the same
/// Tchebycheff objective. Redraws while the floors are unreachable.
pub fn baseline_random_assignment(inst: &NetworkInstance, cfg: &MoopConfig, seed: u64, exec: Execution) -> Result<Solution> {
    cfg.utopia()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_RETRIES {
        let a = draw_assignment(inst, cfg.l_max, &mut rng);
        match solve_over(inst, cfg, std::slice::from_ref(&a), Objective::Tchebycheff, exec) {
            Err(Error::Infeasible(_)) => continue,
            other => return other,
        }
    }
    Err(Error::Infeasible(format!(
        "{RANDOM_RETRIES} random assignments all miss the rate floors"
    )))
}

/// Exact search restricted to orthogonal assignments (`L_max = 1`), measured
/// against the utopia carried by `cfg`.
pub fn baseline_mc_oma(inst: &NetworkInstance, cfg: &MoopConfig, exec: Execution) -> Result<Solution> {
    let oma = MoopConfig {
        l_max: 1,
        ..cfg.clone()
    };
    solve_scalarized(inst, &oma, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Dims, GeometryConfig, generate_instance};

    #[test]
    fn draws_are_maximal_and_seeded() {
        let inst = generate_instance(&GeometryConfig::default(), Dims::new(3, 2, 2), 1).unwrap();
        let draw = |seed| draw_assignment(&inst, 2, &mut ChaCha8Rng::seed_from_u64(seed));
        for seed in 0..20 {
            let a = draw(seed);
            assert!(a.check(inst.dims(), 2).is_ok());
            assert!(a.is_maximal(2, 2));
            assert_eq!(a, draw(seed));
        }
        assert!((0..20).any(|s| draw(s) != draw(0)));
    }
}
