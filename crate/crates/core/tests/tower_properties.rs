use proptest::prelude::*;
use saari_core::field::{Observable, PolynomialField, PolynomialObservable, VectorField};
use saari_core::jet::{JetField, MonomialBasis, MultiIndex, TruncatedJet};
use saari_core::lie::{
    dpsi_wrt_f, dpsi_wrt_x, dpsi_wrt_x_with, psi_along_flow, psi_along_flow_extended, psi_tower,
    FieldJacobianOptions,
};
use saari_core::poly::Polynomial;

fn jet(d: usize, z: &[f64], c: &[f64]) -> TruncatedJet {
    let mut j = TruncatedJet::zero(d, z).unwrap();
    j.coeffs_mut().copy_from_slice(c);
    j
}

fn coeffs(n: usize, d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, MonomialBasis::new(n, d).len())
}

/// `(F1, F2, X)` jets at a common point with tower order `m`.
fn tower_inputs() -> impl Strategy<Value = (TruncatedJet, TruncatedJet, JetField, usize)> {
    (1usize..=3, 1usize..=4).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-1.0..1.0f64, n),
            coeffs(n, m),
            coeffs(n, m),
            prop::collection::vec(coeffs(n, m - 1), n),
        )
            .prop_map(move |(z, f1, f2, xs)| {
                let x = JetField::new(xs.iter().map(|c| jet(m - 1, &z, c)).collect()).unwrap();
                (jet(m, &z, &f1), jet(m, &z, &f2), x, m)
            })
    })
}

fn polynomial(n: usize, d: usize) -> impl Strategy<Value = Polynomial> {
    coeffs(n, d).prop_map(move |c| {
        Polynomial::new(n, MonomialBasis::new(n, d).iter().cloned().zip(c)).unwrap()
    })
}

/// A random polynomial system `(F, X, z)` with `n <= 3` and degrees `<= 4`.
fn polynomial_system() -> impl Strategy<Value = (Polynomial, Vec<Polynomial>, Vec<f64>)> {
    (1usize..=3, 1usize..=4, 1usize..=3).prop_flat_map(|(n, df, dx)| {
        (
            polynomial(n, df),
            prop::collection::vec(polynomial(n, dx), n),
            prop::collection::vec(-1.0..1.0f64, n),
        )
    })
}

proptest! {
    #[test]
    fn tower_is_linear_in_the_observable((f1, f2, x, m) in tower_inputs(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let combined = psi_tower(&(f1.scale(a) + f2.scale(b)), &x, m).unwrap();
        let p1 = psi_tower(&f1, &x, m).unwrap();
        let p2 = psi_tower(&f2, &x, m).unwrap();
        for k in 0..m {
            let want = a * p1.values[k] + b * p2.values[k];
            let scale = (a * p1.values[k]).abs().max((b * p2.values[k]).abs()).max(1.0);
            prop_assert!((combined.values[k] - want).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn tower_vanishes_at_equilibria((f, _, mut x, m) in tower_inputs()) {
        for c in x.components_mut() {
            c.coeffs_mut()[0] = 0.0;
        }
        let psi = psi_tower(&f, &x, m).unwrap();
        prop_assert!(psi.values.iter().all(|&v| v == 0.0), "{:?}", psi.values);
    }

    #[test]
    fn structural_jacobian_identities((f, _, x, m) in tower_inputs()) {
        let n = f.dim();
        let xz = x.value();
        let fz = f.gradient();
        let jf = dpsi_wrt_f(&x, m, m).unwrap();
        let jx = dpsi_wrt_x(&f, &x, m).unwrap();
        for k in 1..=m {
            for (j, &xj) in xz.iter().enumerate() {
                let alpha = MultiIndex::pure(n, j, k as u32);
                let got = jf.entry(k, None, alpha.exponents()).unwrap();
                let want = xj.powi(k as i32);
                prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "F k={k} j={j}: {got} vs {want}");
                let alpha = MultiIndex::pure(n, j, (k - 1) as u32);
                for (i, &fi) in fz.iter().enumerate() {
                    let got = jx.entry(k, Some(i), alpha.exponents()).unwrap();
                    let want = fi * xj.powi(k as i32 - 1);
                    prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "X k={k} i={i} j={j}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn jet_and_taylor_routes_agree((f, xs, z) in polynomial_system(), m in 1usize..=4) {
        let f = PolynomialObservable(f);
        let x = PolynomialField::new(xs).unwrap();
        let by_jets = psi_tower(&f.jet(&z, m).unwrap(), &x.jet(&z, m - 1).unwrap(), m).unwrap();
        let by_flow = psi_along_flow(&f, &x, &z, m).unwrap();
        let extended = psi_along_flow_extended(&f, &x, &z, m).unwrap();
        for k in 0..m {
            let want = by_jets.values[k];
            let tol = 1e-10 * want.abs().max(1.0);
            prop_assert!((by_flow.values[k] - want).abs() <= tol, "k={}: {} vs {want}", k + 1, by_flow.values[k]);
            prop_assert!((extended.values[k] - want).abs() <= tol, "k={}: {} vs {want}", k + 1, extended.values[k]);
        }
    }

    #[test]
    fn observable_jacobian_columns_are_towers_of_monomials((_, _, x, m) in tower_inputs()) {
        let jf = dpsi_wrt_f(&x, m, m).unwrap();
        let z = x.base_point().to_vec();
        for (col, c) in jf.columns.iter().enumerate() {
            let mut mono = TruncatedJet::zero(m, &z).unwrap();
            mono.set_coeff(c.alpha.exponents(), 1.0 / c.alpha.factorial()).unwrap();
            let psi = psi_tower(&mono, &x, m).unwrap();
            for k in 0..m {
                let (got, want) = (jf.rows[k][col], psi.values[k]);
                prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{:?} k={}: {got} vs {want}", c.alpha, k + 1);
            }
        }
    }

    #[test]
    fn field_jacobian_matches_the_exact_stencil((f, _, x, m) in tower_inputs()) {
        let adjoint = dpsi_wrt_x(&f, &x, m).unwrap();
        let stencil = dpsi_wrt_x_with(&f, &x, m, &FieldJacobianOptions::polynomial_exact()).unwrap();
        prop_assert_eq!(&adjoint.columns, &stencil.columns);
        for (a, b) in adjoint.rows.iter().flatten().zip(stencil.rows.iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
        prop_assert_eq!(adjoint.report.numerical_rank, stencil.report.numerical_rank);
    }
}
