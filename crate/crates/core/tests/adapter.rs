use d2d_noma::adapter::{
    Assignment, DmDecomposition, Objective, PowerVar, build_problem_for_assignment, candidate_assignments,
    enumerate_assignments, solve_scalarized,
};
use d2d_noma::channel::{Dims, GeometryConfig, NetworkInstance, generate_instance};
use d2d_noma::par::Execution;
use d2d_noma::rates::{Allocation, RateUnit, User, check_constraints, sum_rates, user_rates};
use d2d_noma::scalarize::{MoopConfig, Utopia, tcheby_chi, with_utopia};
use d2d_noma::units::dbm_to_watts;
use polyblock::MonotonicProblem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEQ: Execution = Execution::Sequential;

fn instance(dims: Dims, seed: u64) -> NetworkInstance {
    generate_instance(&GeometryConfig::default(), dims, seed).unwrap()
}

fn moop(inst: &NetworkInstance, alpha: f64, r_min: f64) -> MoopConfig {
    MoopConfig::uniform(inst.dims(), alpha, dbm_to_watts(25.0), dbm_to_watts(24.0), r_min)
}

fn random_assignment(dims: Dims, l_max: usize, rng: &mut ChaCha8Rng) -> Assignment {
    let mut a = Assignment::empty(dims);
    let users: Vec<User> = a.users().collect();
    let mut load = vec![0; dims.n_sub];
    for u in users {
        let n = rng.random_range(0..=dims.n_sub);
        if n < dims.n_sub && load[n] < l_max {
            load[n] += 1;
            a.set(u, Some(n));
        }
    }
    a
}

fn vars(a: &Assignment) -> Vec<PowerVar> {
    a.pairs().into_iter().map(|(user, n)| PowerVar { user, n }).collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn dm_pairs_reproduce_rates_on_a_thousand_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut points = 0;
    for seed in 0..10 {
        let inst = instance(Dims::new(3, 2, 2), seed);
        let a = random_assignment(inst.dims(), 3, &mut rng);
        let dm = DmDecomposition::new(&inst, vars(&a));
        for _ in 0..100 {
            let x: Vec<f64> = dm.vars.iter().map(|_| rng.random_range(0.0..0.3)).collect();
            let alloc = dm.allocation(&inst, &x);
            let (r_du, r_cu) = sum_rates(&inst, &alloc, RateUnit::Nats);
            assert!(close(dm.du.value(&x), r_du, 1e-10), "DU {} vs {}", dm.du.value(&x), r_du);
            assert!(close(dm.cu.value(&x), r_cu, 1e-10), "CU {} vs {}", dm.cu.value(&x), r_cu);
            let per = user_rates(&inst, &alloc, RateUnit::Nats);
            for (u, pair) in &dm.per_user {
                let want = match u {
                    User::Cu(m) => per.cu[*m],
                    User::Du(k) => per.du[*k],
                };
                assert!(close(pair.value(&x), want, 1e-10));
            }
            points += 1;
        }
    }
    assert_eq!(points, 1000);
}

#[test]
fn dm_components_are_increasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let inst = instance(Dims::new(3, 2, 2), 4);
    let a = random_assignment(inst.dims(), 3, &mut rng);
    let dm = DmDecomposition::new(&inst, vars(&a));
    for _ in 0..500 {
        let x: Vec<f64> = dm.vars.iter().map(|_| rng.random_range(0.0..0.3)).collect();
        let y: Vec<f64> = x.iter().map(|v| v + rng.random_range(0.0..0.1)).collect();
        for pair in [&dm.cu, &dm.du].into_iter().chain(dm.per_user.iter().map(|(_, p)| p)) {
            assert!(pair.plus(&y) >= pair.plus(&x) - 1e-12);
            assert!(pair.minus(&y) >= pair.minus(&x) - 1e-12);
        }
    }
}

/// Random powers within every user's budget.
fn random_powers(prob_vars: &[PowerVar], cfg: &MoopConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    prob_vars
        .iter()
        .map(|v| {
            let cap = match v.user {
                User::Cu(m) => cfg.p_max_cu[m],
                User::Du(k) => cfg.p_max_du[k],
            };
            rng.random_range(0.0..=cap)
        })
        .collect()
}

#[test]
fn lifted_objective_equals_negative_chi_at_tight_slacks() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..10 {
        let inst = instance(Dims::new(2, 2, 2), seed);
        let cfg = MoopConfig {
            utopia: Some(Utopia {
                r_du_max: 15.0,
                r_cu_max: 25.0,
            }),
            ..moop(&inst, rng.random_range(0.0..1.0), 0.0)
        };
        let a = random_assignment(inst.dims(), 2, &mut rng);
        let prob = build_problem_for_assignment(&inst, &cfg, &a, Objective::Tchebycheff).unwrap();
        for _ in 0..50 {
            let p = random_powers(&prob.dm().vars, &cfg, &mut rng);
            let x = prob.tight_point(&p);
            let alloc = prob.dm().allocation(&inst, &p);
            let (r_du, r_cu) = sum_rates(&inst, &alloc, cfg.rate_unit);
            let chi = tcheby_chi(r_du, r_cu, &cfg).unwrap();
            assert!((prob.objective(&x) + chi).abs() <= 1e-9, "{} vs {}", prob.objective(&x), -chi);
            assert!(prob.in_normal(&x));
        }
    }
}

#[test]
fn tight_points_are_feasible_exactly_when_the_allocation_is() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut feasible, mut infeasible) = (0, 0);
    for seed in 0..10 {
        let inst = instance(Dims::new(2, 1, 2), seed);
        let cfg = MoopConfig {
            utopia: Some(Utopia {
                r_du_max: 15.0,
                r_cu_max: 25.0,
            }),
            ..moop(&inst, 0.5, 3.0)
        };
        let a = candidate_assignments(inst.dims(), &cfg).unwrap()[seed as usize % 4].clone();
        let prob = build_problem_for_assignment(&inst, &cfg, &a, Objective::Tchebycheff).unwrap();
        for _ in 0..100 {
            let p: Vec<f64> = random_powers(&prob.dm().vars, &cfg, &mut rng).iter().map(|v| v * v.sqrt()).collect();
            let x = prob.tight_point(&p);
            let report = check_constraints(&inst, &prob.dm().allocation(&inst, &p), &cfg);
            // Skip points within tolerance of a floor, where the two checks may differ.
            if report.min_rate_slack().abs() < 1e-6 {
                continue;
            }
            let lifted_ok = prob.in_normal(&x) && prob.in_conormal(&x);
            assert_eq!(lifted_ok, report.feasible, "powers {p:?}");
            if report.feasible { feasible += 1 } else { infeasible += 1 }
        }
    }
    assert!(feasible > 0 && infeasible > 0, "{feasible} feasible, {infeasible} infeasible");
}

#[test]
fn zero_power_objective_is_worst_weight() {
    let inst = instance(Dims::new(2, 1, 2), 1);
    for alpha in [0.0, 0.2, 0.5, 0.9] {
        let cfg = MoopConfig {
            utopia: Some(Utopia {
                r_du_max: 10.0,
                r_cu_max: 20.0,
            }),
            ..moop(&inst, alpha, 0.0)
        };
        let a = candidate_assignments(inst.dims(), &cfg).unwrap().remove(0);
        let prob = build_problem_for_assignment(&inst, &cfg, &a, Objective::Tchebycheff).unwrap();
        let x0 = prob.tight_point(&vec![0.0; prob.dm().vars.len()]);
        let want = alpha.max(1.0 - alpha);
        assert!((prob.objective(&x0) + want).abs() <= 1e-12);
        let chi = tcheby_chi(0.0, 0.0, &cfg).unwrap();
        assert!((chi - want).abs() <= 1e-12);
    }
}

#[test]
fn lone_cu_transmits_at_full_power() {
    let inst = instance(Dims::new(1, 1, 1), 2).subset(1, 0).unwrap();
    let cfg = with_utopia(&inst, &moop(&inst, 0.5, 0.0), SEQ).unwrap();
    assert_eq!(cfg.utopia.unwrap().r_du_max, 0.0);
    let sol = solve_scalarized(&inst, &cfg, SEQ).unwrap();
    let p = sol.allocation.p_cu[0][0];
    assert!((p - cfg.p_max_cu[0]).abs() <= 1e-3 * cfg.p_max_cu[0], "p = {p}");
    assert!(sol.chi.unwrap() <= 1e-3);
}

#[test]
fn two_cus_on_one_subchannel_match_a_fine_grid() {
    for seed in 0..3 {
        let inst = instance(Dims::new(2, 1, 1), seed).subset(2, 0).unwrap();
        for alpha in [0.3, 0.7] {
            let cfg = MoopConfig {
                utopia: Some(Utopia {
                    r_du_max: 0.0,
                    r_cu_max: 30.0,
                }),
                ..moop(&inst, alpha, 0.0)
            };
            let sol = solve_scalarized(&inst, &cfg, SEQ).unwrap();
            let pm = cfg.p_max_cu[0];
            let mut grid_best = f64::INFINITY;
            for i in 0..200 {
                for j in 0..200 {
                    let mut a = Allocation::zeros(inst.dims());
                    a.set(User::Cu(0), 0, pm * i as f64 / 199.0);
                    a.set(User::Cu(1), 0, pm * j as f64 / 199.0);
                    let (r_du, r_cu) = sum_rates(&inst, &a, RateUnit::Bits);
                    grid_best = grid_best.min(tcheby_chi(r_du, r_cu, &cfg).unwrap());
                }
            }
            let chi = sol.chi.unwrap();
            assert!(chi <= grid_best + 1e-2 && chi >= grid_best - 1e-2, "solver {chi} grid {grid_best}");
        }
    }
}

fn brute_force_count(dims: Dims, l_max: usize) -> usize {
    let users = dims.m_cus + dims.k_dus;
    let choices = dims.n_sub + 1;
    (0..choices.pow(users as u32))
        .filter(|&code| {
            let mut load = vec![0; dims.n_sub];
            let mut c = code;
            for _ in 0..users {
                let n = c % choices;
                c /= choices;
                if n < dims.n_sub {
                    load[n] += 1;
                }
            }
            load.iter().all(|&l| l <= l_max)
        })
        .count()
}

fn injective_maps(users: usize, n_sub: usize) -> usize {
    // Σ_j C(U, j) · N! / (N − j)!
    let mut total = 0;
    for j in 0..=users.min(n_sub) {
        let choose: usize = (0..j).fold(1, |acc, i| acc * (users - i) / (i + 1));
        let falling: usize = (0..j).map(|i| n_sub - i).product();
        total += choose * falling;
    }
    total
}

#[test]
fn enumeration_matches_independent_counts() {
    for (dims, l_max) in [
        (Dims::new(2, 1, 2), 2),
        (Dims::new(2, 1, 2), 1),
        (Dims::new(3, 2, 3), 2),
        (Dims::new(2, 2, 2), 3),
    ] {
        let inst = instance(dims, 0);
        let cfg = MoopConfig {
            l_max,
            ..moop(&inst, 0.5, 0.0)
        };
        let all = enumerate_assignments(dims, &cfg).unwrap();
        assert_eq!(all.len(), brute_force_count(dims, l_max), "{dims:?} L={l_max}");
        if l_max == 1 {
            assert_eq!(all.len(), injective_maps(dims.m_cus + dims.k_dus, dims.n_sub));
        }
        let mut sorted = all.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), all.len());
        assert!(all.iter().all(|a| a.check(dims, l_max).is_ok()));
    }
}

#[test]
fn exact_solution_passes_constraint_check() {
    for seed in 0..3 {
        let inst = instance(Dims::new(2, 1, 2), seed);
        let cfg = with_utopia(&inst, &moop(&inst, 0.5, 1.0), SEQ).unwrap();
        let sol = solve_scalarized(&inst, &cfg, SEQ).unwrap();
        let report = check_constraints(&inst, &sol.allocation, &cfg);
        assert!(report.feasible, "{report:?}");
        assert!(sol.allocation.is_consistent());
        let (r_du, r_cu) = sum_rates(&inst, &sol.allocation, RateUnit::Bits);
        assert_eq!((r_du, r_cu), (sol.r_du, sol.r_cu));
    }
}
