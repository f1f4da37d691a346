use d2d_noma::adapter::solve_scalarized;
use d2d_noma::baselines::{baseline_mc_oma, baseline_random_assignment};
use d2d_noma::channel::{Dims, GeometryConfig, NetworkInstance, generate_instance};
use d2d_noma::oracle::{GridSpec, oracle_pareto};
use d2d_noma::par::Execution;
use d2d_noma::rates::check_constraints;
use d2d_noma::scalarize::{MoopConfig, compute_utopia, with_utopia};
use d2d_noma::units::dbm_to_watts;

const SEQ: Execution = Execution::Sequential;

fn instance(dims: Dims, seed: u64) -> NetworkInstance {
    generate_instance(&GeometryConfig::default(), dims, seed).unwrap()
}

fn cfg(inst: &NetworkInstance, alpha: f64, r_min: f64) -> MoopConfig {
    let base = MoopConfig::uniform(inst.dims(), alpha, dbm_to_watts(25.0), dbm_to_watts(24.0), r_min);
    with_utopia(inst, &base, SEQ).unwrap()
}

#[test]
fn random_baseline_is_deterministic_and_dominated() {
    for seed in 0..4 {
        let inst = instance(Dims::new(2, 1, 2), seed);
        let c = cfg(&inst, 0.5, 0.0);
        let opt = solve_scalarized(&inst, &c, SEQ).unwrap();
        for s in 0..3 {
            let a = baseline_random_assignment(&inst, &c, s, SEQ).unwrap();
            let b = baseline_random_assignment(&inst, &c, s, SEQ).unwrap();
            assert_eq!(a, b);
            assert!(opt.chi.unwrap() <= a.chi.unwrap() + 1e-6);
            assert!(check_constraints(&inst, &a.allocation, &c).feasible);
        }
    }
}

#[test]
fn single_subchannel_with_room_for_all_leaves_nothing_to_randomize() {
    let inst = instance(Dims::new(2, 1, 1), 3);
    let c = MoopConfig { l_max: 3, ..cfg(&inst, 0.5, 0.0) };
    let opt = solve_scalarized(&inst, &c, SEQ).unwrap();
    let first = baseline_random_assignment(&inst, &c, 0, SEQ).unwrap();
    assert!(first.assignment.is_maximal(1, 3));
    for s in 1..4 {
        let r = baseline_random_assignment(&inst, &c, s, SEQ).unwrap();
        assert_eq!(r.assignment, first.assignment);
        assert_eq!(r.chi, first.chi);
    }
    // Same feasible set up to silent users, so the same optimum within the solver tolerance.
    let (o, r) = (opt.chi.unwrap(), first.chi.unwrap());
    assert!(o <= r + 1e-6 && r <= o + 1e-2, "optimal {o}, random {r}");
}

#[test]
fn oma_equals_noma_for_a_single_user() {
    let inst = instance(Dims::new(1, 1, 2), 4).subset(1, 0).unwrap();
    let c = cfg(&inst, 0.5, 0.0);
    let noma = solve_scalarized(&inst, &c, SEQ).unwrap();
    let oma = baseline_mc_oma(&inst, &c, SEQ).unwrap();
    assert_eq!(noma.allocation, oma.allocation);
    assert_eq!(noma.sum_rate(), oma.sum_rate());
}

#[test]
fn oma_never_beats_noma_in_chi() {
    for seed in 0..4 {
        let inst = instance(Dims::new(2, 1, 2), seed);
        let c = cfg(&inst, 0.5, 0.0);
        let noma = solve_scalarized(&inst, &c, SEQ).unwrap();
        let oma = baseline_mc_oma(&inst, &c, SEQ).unwrap();
        assert!(noma.chi.unwrap() <= oma.chi.unwrap() + 1e-6);
        // Orthogonal: at most one user per subchannel.
        assert!(oma.assignment.load(2).iter().all(|&l| l <= 1));
    }
}

#[test]
fn unreachable_floors_are_reported() {
    let inst = instance(Dims::new(2, 1, 2), 0);
    let base = MoopConfig::uniform(inst.dims(), 0.5, dbm_to_watts(25.0), dbm_to_watts(24.0), 200.0);
    assert!(matches!(compute_utopia(&inst, &base, SEQ), Err(d2d_noma::Error::Infeasible(_))));
}

#[test]
fn utopia_is_at_least_every_oracle_point() {
    for seed in 0..3 {
        let inst = instance(Dims::new(2, 1, 2), seed);
        let c = cfg(&inst, 0.5, 0.0);
        let u = c.utopia.unwrap();
        let front = oracle_pareto(&inst, &c, &GridSpec::new(32), SEQ).unwrap();
        let best_du = front.iter().map(|p| p.r_du).fold(0.0, f64::max);
        let best_cu = front.iter().map(|p| p.r_cu).fold(0.0, f64::max);
        assert!(u.r_du_max >= best_du - 1e-3, "{} vs {}", u.r_du_max, best_du);
        assert!(u.r_cu_max >= best_cu - 1e-3, "{} vs {}", u.r_cu_max, best_cu);
        assert!(u.r_du_max <= best_du * 1.01 && u.r_cu_max <= best_cu * 1.01);
    }
}

#[test]
fn no_dus_means_zero_du_utopia() {
    let inst = instance(Dims::new(2, 1, 2), 6).subset(2, 0).unwrap();
    let c = cfg(&inst, 0.5, 0.0);
    assert_eq!(c.utopia.unwrap().r_du_max, 0.0);
    assert!(c.utopia.unwrap().r_cu_max > 0.0);
}
