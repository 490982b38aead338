use proptest::prelude::*;
use saari_core::field::FnField;
use saari_core::flow::{advance, integrate, IntegratorConfig, Trajectory};
use saari_core::lie::psi_along_flow;
use saari_core::mech::releq::{
    releq_euler, releq_lagrange, releq_two_body, rigid_rotation_defect, RelEqSolution,
};
use saari_core::mech::{BodySystem, HamiltonianField, Inertia, PotentialSpec};
use saari_core::poly::Polynomial;
use saari_core::MonomialBasis;

fn masses(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5..3.0f64, n)
}

/// Planar configuration of `n` bodies with every pair at least 0.3 apart.
fn configuration(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5..1.5f64, 2 * n).prop_filter("bodies too close", move |q| {
        (0..n)
            .all(|i| (0..i).all(|j| (q[2 * i] - q[2 * j]).hypot(q[2 * i + 1] - q[2 * j + 1]) > 0.3))
    })
}

fn potential(n: usize) -> impl Strategy<Value = PotentialSpec> {
    let bump = prop::collection::vec(-0.2..0.2f64, MonomialBasis::new(2 * n, 2).len()).prop_map(
        move |c| {
            Polynomial::new(2 * n, MonomialBasis::new(2 * n, 2).iter().cloned().zip(c)).unwrap()
        },
    );
    prop_oneof![
        Just(PotentialSpec::Newtonian {}),
        (0.5..2.0f64, 0.1..1.0f64).prop_map(|(b1, b2)| PotentialSpec::PowerLaw {
            terms: vec![(b1, -1.0), (b2, -2.5)]
        }),
        bump.prop_map(|bump| PotentialSpec::Perturbed {
            base: Box::new(PotentialSpec::Newtonian {}),
            bump
        }),
    ]
}

fn three_body() -> impl Strategy<Value = (BodySystem, Vec<f64>)> {
    (masses(3), potential(3), configuration(3))
        .prop_map(|(m, v, q)| (BodySystem::new(m, 2, v, false).unwrap(), q))
}

/// Close passes amplify local truncation error without bound; conservation
/// and agreement are asserted for runs that stay clear of them.
const WELL_SEPARATED: f64 = 1e-2;

fn closest_approach(traj: &Trajectory) -> f64 {
    traj.monitors
        .iter()
        .map(|r| r.min_sep)
        .fold(f64::INFINITY, f64::min)
}

fn check_rigid_rotation(sol: &RelEqSolution, phase: f64) {
    let period = std::f64::consts::TAU / sol.omega;
    for t in [0.0, phase * period, period] {
        let d = rigid_rotation_defect(sol, t).unwrap();
        assert!(d < 1e-8, "defect {d:e} at t = {t}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_finite_differences((sys, q) in three_body()) {
        let g = sys.grad_potential(&q).unwrap();
        for k in 0..q.len() {
            let h = 1e-5;
            let mut plus = q.clone();
            let mut minus = q.clone();
            plus[k] += h;
            minus[k] -= h;
            let fd = (sys.potential_value(&plus).unwrap() - sys.potential_value(&minus).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[k]).abs() <= 1e-7 * g[k].abs().max(1.0), "k={k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn hamiltonian_and_newtonian_forms_agree((sys, q) in three_body(), p in prop::collection::vec(-0.5..0.5f64, 6)) {
        let cfg = IntegratorConfig::dopri5(1e-13, 1e-14, 0.5);
        let hamiltonian = HamiltonianField::new(sys.clone());
        let z0: Vec<f64> = q.iter().chain(&p).copied().collect();
        let traj = integrate(&hamiltonian, &z0, &cfg).unwrap();
        prop_assume!(traj.halt.is_none() && closest_approach(&traj) > WELL_SEPARATED);
        let z1 = traj.final_state();

        // Second-order form m q'' = -grad V on (q, v).
        let m = sys.masses().to_vec();
        let newton = FnField::new(12, move |s: &[f64]| {
            let g = sys.grad_potential(&s[..6]).unwrap_or_else(|_| vec![f64::NAN; 6]);
            let mut out = s[6..].to_vec();
            out.extend(g.iter().enumerate().map(|(k, gk)| -gk / m[k / 2]));
            out
        });
        let v0: Vec<f64> = p.iter().enumerate().map(|(k, pk)| pk / hamiltonian.system().masses()[k / 2]).collect();
        let s0: Vec<f64> = q.iter().chain(&v0).copied().collect();
        let s1 = advance(&newton, &s0, 0.5, &cfg).unwrap();
        for k in 0..6 {
            prop_assert!((z1[k] - s1[k]).abs() < 1e-10, "q{k}: {} vs {}", z1[k], s1[k]);
        }
    }

    #[test]
    fn relative_equilibria_rotate_rigidly(m2 in masses(2), m3 in masses(3), r in 0.3..3.0f64, phase in 0.0..1.0f64, perm in 0usize..6) {
        let two = BodySystem::newtonian(m2, 2).unwrap();
        check_rigid_rotation(&releq_two_body(&two, r).unwrap(), phase);
        let three = BodySystem::newtonian(m3.clone(), 2).unwrap();
        check_rigid_rotation(&releq_lagrange(&three, r).unwrap(), phase);
        let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        check_rigid_rotation(&releq_euler(&three, orders[perm], r).unwrap(), phase);
        let power = BodySystem::new(m3, 2, PotentialSpec::PowerLaw { terms: vec![(1.0, -1.0), (0.3, -2.0)] }, false).unwrap();
        check_rigid_rotation(&releq_lagrange(&power, r).unwrap(), phase);
    }

    #[test]
    fn energy_and_angular_momentum_are_conserved(m in masses(3), q in configuration(3), p in prop::collection::vec(-0.5..0.5f64, 6)) {
        let sys = BodySystem::newtonian(m, 2).unwrap();
        let z0: Vec<f64> = q.iter().chain(&p).copied().collect();
        let traj = integrate(&HamiltonianField::new(sys), &z0, &IntegratorConfig::dopri5(1e-12, 1e-13, 2.0)).unwrap();
        prop_assume!(traj.halt.is_none());
        prop_assume!(closest_approach(&traj) > WELL_SEPARATED);
        prop_assert!(traj.energy_drift() < 1e-8, "energy drift {:e}", traj.energy_drift());
        prop_assert!(traj.ang_mom_drift() < 1e-8, "angular momentum drift {:e}", traj.ang_mom_drift());
    }

    #[test]
    fn first_derivative_of_inertia_is_the_virial(m in masses(3), q in configuration(3), p in prop::collection::vec(-1.0..1.0f64, 6)) {
        let sys = BodySystem::newtonian(m.clone(), 2).unwrap();
        let z: Vec<f64> = q.iter().chain(&p).copied().collect();
        let psi = psi_along_flow(&Inertia(sys.clone()), &HamiltonianField::new(sys.clone()), &z, 1).unwrap();
        // dI/dt = 2 sum m_i (q_i - c) . (qdot_i - cdot), qdot_i = p_i / m_i.
        let c = sys.centre_of_mass(&q);
        let total: f64 = m.iter().sum();
        let cdot: Vec<f64> = (0..2).map(|k| (0..3).map(|i| p[2 * i + k]).sum::<f64>() / total).collect();
        let direct: f64 = (0..3)
            .flat_map(|i| (0..2).map(move |k| (i, k)))
            .map(|(i, k)| 2.0 * m[i] * (q[2 * i + k] - c[k]) * (p[2 * i + k] / m[i] - cdot[k]))
            .sum();
        prop_assert!((psi.values[0] - direct).abs() <= 1e-10 * direct.abs().max(1.0), "{} vs {direct}", psi.values[0]);
    }
}
