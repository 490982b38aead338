use proptest::prelude::*;
use saari_core::field::{Coordinate, Observable, Oscillator, PolynomialObservable, VectorField};
use saari_core::genericity::{
    obstruction_scan, scan_subject, SampleOutcome, Sampler, ScanTolerances, Subject,
};
use saari_core::lie::{obstruction_at, ObstructionTolerances};
use saari_core::mech::BodySystem;
use saari_core::model::{ObservableSpec, SystemSpec};
use saari_core::poly::Polynomial;
use saari_core::MultiIndex;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn two_body() -> BodySystem {
    BodySystem::newtonian(vec![1.0, 1.0], 2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scans_do_not_depend_on_the_thread_count(seed in any::<u64>()) {
        let subject = Subject {
            system: SystemSpec::Nbody { system: two_body() },
            observable: ObservableSpec::Inertia {},
        };
        let sampler = Sampler::Nbody {
            position_scale: 1.0,
            momentum_scale: 1.0,
            min_separation: 0.1,
            count: 64,
            seed,
        };
        let tol = ScanTolerances::default();
        let one = in_pool(1, || scan_subject(&subject, &sampler, None, &tol).unwrap());
        let many = in_pool(4, || scan_subject(&subject, &sampler, None, &tol).unwrap());
        prop_assert_eq!(&one, &many);
        prop_assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&many).unwrap());
    }

    #[test]
    fn exclusions_respect_their_tolerances(
        points in prop::collection::vec(prop::collection::vec(-1e-8..1e-8f64, 2), 1..20),
        tol_eq in 1e-10..1e-8f64,
        tol_crit in 1e-10..1e-8f64,
    ) {
        // Oscillator with F = (q - 1e-9)^2 / 2: equilibria and F-critical
        // points both cluster near the origin.
        let f = PolynomialObservable(
            Polynomial::new(2, [
                (MultiIndex::new(vec![2, 0]), 0.5),
                (MultiIndex::new(vec![1, 0]), -1e-9),
            ]).unwrap(),
        );
        let tol = ScanTolerances { tol_eq, tol_crit, ..ScanTolerances::default() };
        let (report, outcomes) = obstruction_scan(&f, &Oscillator, &points, 3, &tol);
        for (z, o) in points.iter().zip(&outcomes) {
            let x = Oscillator.eval(z).unwrap();
            let g = f.gradient(z).unwrap();
            match o {
                SampleOutcome::Equilibrium => prop_assert!(x[0].hypot(x[1]) < tol_eq),
                SampleOutcome::FCritical => {
                    prop_assert!(x[0].hypot(x[1]) >= tol_eq);
                    prop_assert!(g[0].hypot(g[1]) < tol_crit);
                }
                _ => prop_assert!(x[0].hypot(x[1]) >= tol_eq && g[0].hypot(g[1]) >= tol_crit),
            }
        }
        prop_assert_eq!(
            report.n_excluded_equilibrium + report.n_excluded_f_critical + report.n_obstruction_zero
                + report.n_obstruction_nonzero + report.n_errors,
            points.len()
        );
    }

    #[test]
    fn oscillator_obstruction_is_bounded_by_the_box(lo in 0.1..1.0f64, width in 0.1..2.0f64, seed in any::<u64>()) {
        // For F = q, Psi = (p, -q, -p, q, ...), so |Psi|_inf >= max(|q|, |p|) >= lo.
        let sampler = Sampler::Box { lower: vec![lo, lo], upper: vec![lo + width, lo + width], count: 50, seed };
        let samples: Vec<Vec<f64>> = (0..50).map(|i| sampler.draw(0, i, 2, None).unwrap()).collect();
        let f = Coordinate { dim: 2, index: 0 };
        let (report, _) = obstruction_scan(&f, &Oscillator, &samples, 3, &ScanTolerances::default());
        prop_assert_eq!(report.n_obstruction_nonzero, 50);
        prop_assert!(report.min_nonexcluded_norm.unwrap() >= lo);
    }

    #[test]
    fn circular_two_body_orbits_have_zero_tower(seed in any::<u64>(), index in 0usize..1000) {
        let sys = two_body();
        let circular = Sampler::CircularOrbits { r_min: 0.2, r_max: 2.0, count: 1000, seed };
        let z = circular.draw(0, index, sys.state_dim(), Some(&sys)).unwrap();
        let model = SystemSpec::Nbody { system: sys.clone() }.build().unwrap();
        let f = ObservableSpec::Inertia {}.build(&SystemSpec::Nbody { system: sys }).unwrap();
        let s = obstruction_at(f.as_ref(), model.field.as_ref(), &z, 5, &ObstructionTolerances::default()).unwrap();
        prop_assert!(s.norm_inf < 1e-9, "{:e}", s.norm_inf);
    }
}
