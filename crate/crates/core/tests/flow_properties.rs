use proptest::prelude::*;
use saari_core::flow::{integrate, IntegratorConfig};
use saari_core::mech::releq::{releq_lagrange, releq_trajectory, releq_two_body, RelEqSolution};
use saari_core::mech::{BodySystem, HamiltonianField};

fn period(sol: &RelEqSolution) -> f64 {
    std::f64::consts::TAU / sol.omega
}

fn verlet_position_error(sol: &RelEqSolution, steps: usize) -> f64 {
    let t = period(sol);
    let field = HamiltonianField::new(sol.system.clone());
    let traj = integrate(
        &field,
        &releq_trajectory(sol, 0.0),
        &IntegratorConfig::verlet(t / steps as f64, t),
    )
    .unwrap();
    let exact = releq_trajectory(sol, traj.t_end());
    let nd = sol.system.config_dim();
    traj.final_state()[..nd]
        .iter()
        .zip(&exact[..nd])
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn hundred_period_drift(sol: &RelEqSolution) -> f64 {
    let t = period(sol);
    let cfg = IntegratorConfig::verlet(t / 1e4, 100.0 * t).recording_every(100);
    let traj = integrate(
        &HamiltonianField::new(sol.system.clone()),
        &releq_trajectory(sol, 0.0),
        &cfg,
    )
    .unwrap();
    assert!(traj.halt.is_none());
    traj.energy_drift()
}

#[test]
fn verlet_energy_stays_bounded_over_a_hundred_periods() {
    let two = BodySystem::newtonian(vec![1.0, 2.0], 2).unwrap();
    let drift = hundred_period_drift(&releq_two_body(&two, 1.0).unwrap());
    assert!(drift < 1e-6, "two-body energy drift {drift:e}");
    // Routh's criterion: the triangle is linearly stable only with one
    // dominant mass, otherwise it breaks up within a few periods.
    let three = BodySystem::newtonian(vec![1.0, 0.01, 0.001], 2).unwrap();
    let drift = hundred_period_drift(&releq_lagrange(&three, 1.0).unwrap());
    assert!(drift < 1e-6, "Lagrange energy drift {drift:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn verlet_converges_at_second_order(m in prop::collection::vec(0.5..3.0f64, 2), r in 0.5..2.0f64) {
        let sol = releq_two_body(&BodySystem::newtonian(m, 2).unwrap(), r).unwrap();
        let coarse = verlet_position_error(&sol, 2000);
        let fine = verlet_position_error(&sol, 4000);
        let ratio = coarse / fine;
        prop_assert!((3.5..=4.5).contains(&ratio), "error ratio {ratio} ({coarse:e} -> {fine:e})");
    }

    #[test]
    fn verlet_conserves_angular_momentum(
        m in prop::collection::vec(0.5..3.0f64, 3),
        q in prop::collection::vec(-1.5..1.5f64, 6),
        p in prop::collection::vec(-0.5..0.5f64, 6),
    ) {
        let sys = BodySystem::newtonian(m, 2).unwrap();
        prop_assume!(sys.min_pair_separation(&q) > 0.3);
        let z0: Vec<f64> = q.iter().chain(&p).copied().collect();
        let traj = integrate(&HamiltonianField::new(sys), &z0, &IntegratorConfig::verlet(1e-3, 2.0)).unwrap();
        prop_assume!(traj.halt.is_none());
        prop_assume!(traj.monitors.iter().all(|r| r.min_sep > 1e-2));
        let dl = traj.monitors.iter().map(|r| (r.ang_mom - traj.monitors[0].ang_mom).abs()).fold(0.0, f64::max);
        // Round-off is relative to the size of the terms in sum q_i x p_i.
        let scale = traj
            .states
            .iter()
            .map(|z| (0..3).map(|i| z[2 * i].hypot(z[2 * i + 1]) * z[6 + 2 * i].hypot(z[7 + 2 * i])).sum::<f64>())
            .fold(0.0, f64::max);
        prop_assert!(dl <= 1e-10 * scale, "angular momentum moved by {dl:e} (scale {scale:e})");
    }
}
