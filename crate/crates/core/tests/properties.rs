use std::sync::Arc;

use dboson_core::aso::{AsoElement, SigmaCoeffs};
use dboson_core::classical::{jacobi_sum, poisson_bracket, quantize_bracket, ClassicalFunction, PhasePoly};
use dboson_core::deformation::{build_ladder_table, DeformationSpec};
use dboson_core::eigenstate::{star, EigenElement};
use dboson_core::equivalence::build_map;
use dboson_core::exact::{self, ExactTable};
use dboson_core::phase_space::{evolve_density, DensitySpec};
use dboson_core::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dyadic() -> impl Strategy<Value = f64> {
    (-32i32..=32).prop_map(|k| k as f64 / 8.0)
}

fn series_spec(d: usize) -> impl Strategy<Value = DeformationSpec> {
    (0.25f64..2.0, prop::collection::vec(0.0f64..0.2, 0..3))
        .prop_map(move |(c0, rest)| {
            let mut coeffs = vec![c0];
            coeffs.extend(rest);
            DeformationSpec::series(1.0, coeffs, d).unwrap()
        })
}

fn element(d: usize) -> impl Strategy<Value = Vec<(usize, usize, f64, f64)>> {
    prop::collection::vec((0..d, 0..d, dyadic(), dyadic()), 0..12)
}

fn build(t: &Arc<dboson_core::LadderTable>, terms: &[(usize, usize, f64, f64)]) -> EigenElement {
    let mut x = EigenElement::zero(t);
    for &(n, m, a, b) in terms {
        x.add_term(n, m, Complex64::new(a, b)).unwrap();
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spec_json_round_trip(spec in series_spec(16)) {
        let back = DeformationSpec::from_json(&spec.to_json()).unwrap();
        prop_assert_eq!(back, spec);
    }

    #[test]
    fn star_is_associative_on_dyadics(x in element(10), y in element(10), z in element(10)) {
        let t = Arc::new(build_ladder_table(&DeformationSpec::qp(1.0, 2.0, 1.0, 10).unwrap()));
        let (x, y, z) = (build(&t, &x), build(&t, &y), build(&t, &z));
        let l = star(&star(&x, &y).unwrap(), &z).unwrap();
        let r = star(&x, &star(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn float_round_trip_on_series(spec in series_spec(16), n in 0usize..=6, m in 0usize..=6) {
        let t = Arc::new(build_ladder_table(&spec));
        let coeffs = SigmaCoeffs::new(&t);
        let x = AsoElement::monomial(&t, n, m).unwrap();
        let back = coeffs.sigma_inverse(&coeffs.sigma(&x).unwrap()).unwrap();
        prop_assert!(back.sub(&x).unwrap().restrict(6).max_abs() < 1e-10);
        let o = EigenElement::basis(&t, n, m).unwrap();
        let back = coeffs.sigma(&coeffs.sigma_inverse(&o).unwrap()).unwrap();
        prop_assert!(back.sub(&o).unwrap().restrict(6).max_abs() < 1e-10);
    }

    #[test]
    fn rational_round_trip_is_exact(
        c0 in 1i32..8, c1 in 0i32..8, c2 in 0i32..4, n in 0usize..8, m in 0usize..8,
    ) {
        let coeffs = vec![c0 as f64 / 4.0, c1 as f64 / 8.0, c2 as f64 / 16.0];
        let et = ExactTable::new(&DeformationSpec::series(1.0, coeffs, 12).unwrap()).unwrap();
        let o = exact::unit_term(n, m);
        prop_assert_eq!(exact::sigma(&et, &exact::sigma_inverse(&et, &o).unwrap()), o.clone());
        prop_assert_eq!(exact::sigma_inverse(&et, &exact::sigma(&et, &o)).unwrap(), o);
    }

    #[test]
    fn map_composed_with_reverse_is_identity(a in series_spec(12), b in series_spec(12)) {
        let (ta, tb) = (Arc::new(build_ladder_table(&a)), Arc::new(build_ladder_table(&b)));
        let there = build_map(&ta, &tb).unwrap();
        let back = build_map(&tb, &ta).unwrap();
        let id = there.compose(&back).unwrap();
        for k in id.k_values() {
            prop_assert!((k - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn evolution_keeps_hermitian_unit_trace(seed in any::<u64>(), t in -50.0f64..50.0) {
        let table = Arc::new(build_ladder_table(&DeformationSpec::q_symmetric(1.0, 1.2, 6).unwrap()));
        let rho0 = DensitySpec::random(&table, &mut ChaCha8Rng::seed_from_u64(seed));
        let rho = evolve_density(&rho0, t);
        let c = rho.coeffs();
        prop_assert_eq!(c, &c.adjoint());
        prop_assert_eq!(rho.trace(), rho0.trace());
        prop_assert!((rho.purity() - rho0.purity()).abs() < 1e-14);
    }

    #[test]
    fn weighted_bracket_is_antisymmetric(i in 0usize..4, j in 0usize..4, k in 0usize..4, l in 0usize..4) {
        let f = PhasePoly::monomial(i, j, Complex64::new(1.0, 0.0));
        let g = PhasePoly::monomial(k, l, Complex64::new(0.0, 1.0));
        let w = ClassicalFunction::Polynomial(vec![1.0, 0.5]);
        let fg = poisson_bracket(&f, &g, &w).to_poly().unwrap();
        let gf = poisson_bracket(&g, &f, &w).to_poly().unwrap();
        prop_assert!(fg.add(&gf).is_zero());
    }

    #[test]
    fn jacobi_holds_for_polynomial_weights(w0 in dyadic(), w1 in dyadic(), i in 0usize..3, j in 0usize..3) {
        let f = PhasePoly::monomial(i, j, Complex64::new(1.0, 0.0));
        let g = PhasePoly::q();
        let h = PhasePoly::p().mul(&PhasePoly::p());
        prop_assert!(jacobi_sum(&f, &g, &h, &[w0, w1]).terms().all(|(_, _, c)| c.norm() < 1e-12));
    }

    #[test]
    fn quadrature_matches_difference_for_polynomials(
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..6), h0 in 0.5f64..2.0, hbar in 0.01f64..1.0,
    ) {
        let big_f = ClassicalFunction::Polynomial(coeffs);
        let (integral, _) = quantize_bracket(&big_f.differentiate(), h0, hbar).unwrap();
        let want = big_f.eval(h0 + hbar / 2.0) - big_f.eval(h0 - hbar / 2.0);
        prop_assert!((integral - want).abs() < 1e-12);
    }
}
