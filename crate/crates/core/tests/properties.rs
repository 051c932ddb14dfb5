use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sepscope::criteria::{ky_fan_chain, run_all};
use sepscope::duality::{choi_reconstruct, kraus_from_ensemble, spectral_kraus, term_reductions, transform};
use sepscope::factorize::rank_theorem_data;
use sepscope::states::{random_separable, random_state, spectral_ensemble, to_density, DEFAULT_EIG_TOL};
use sepscope::{Mixing, State};

fn dims() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((2, 2)), Just((2, 3)), Just((3, 2)), Just((3, 3)), Just((2, 4))]
}

fn any_state() -> impl Strategy<Value = State> {
    (dims(), 1usize..=12, any::<u64>()).prop_map(|((m, n), rank, seed)| random_state(m, n, rank.min(m * n), seed))
}

fn separable_state() -> impl Strategy<Value = State> {
    (dims(), 1usize..=10, any::<u64>()).prop_map(|((m, n), k, seed)| random_separable(m, n, k, seed).0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn choi_round_trip(rho in any_state()) {
        let back = choi_reconstruct(&spectral_kraus(&rho));
        prop_assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn mixing_leaves_the_state_unchanged(rho in any_state(), extra in 0usize..3, seed in any::<u64>()) {
        let k = spectral_kraus(&rho);
        let v = Mixing::random(&mut ChaCha8Rng::seed_from_u64(seed), k.len() + extra, k.len());
        let n = transform(&k, &v).unwrap();
        prop_assert_eq!(n.len(), k.len() + extra);
        prop_assert!(choi_reconstruct(&n).matrix().max_abs_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn term_reductions_average_to_the_marginals(rho in any_state(), seed in any::<u64>()) {
        let k = spectral_kraus(&rho);
        let v = Mixing::random(&mut ChaCha8Rng::seed_from_u64(seed), k.len() + 1, k.len());
        let terms = term_reductions(&transform(&k, &v).unwrap());
        let (m, n) = (rho.dim_a(), rho.dim_b());
        let mut sum_a = sepscope::Matrix::zeros(m, m);
        let mut sum_b = sepscope::Matrix::zeros(n, n);
        for t in &terms {
            prop_assert!((t.rho_a.trace().re - 1.0).abs() < 1e-10);
            prop_assert!((t.rho_b.trace().re - 1.0).abs() < 1e-10);
            sum_a = &sum_a + &t.rho_a.scale_real(t.p);
            sum_b = &sum_b + &t.rho_b.scale_real(t.p);
        }
        prop_assert!(sum_a.max_abs_diff(&rho.reduced_a()) < 1e-10);
        prop_assert!(sum_b.max_abs_diff(&rho.reduced_b()) < 1e-10);
    }

    #[test]
    fn ky_fan_chain_on_separable_states(rho in separable_state()) {
        let (p1, la, weighted) = ky_fan_chain(&rho);
        prop_assert!(p1 <= la + 1e-9, "p1 = {p1}, lambda_1(rho_A) = {la}");
        prop_assert!(la <= weighted + 1e-9, "lambda_1(rho_A) = {la}, weighted = {weighted}");
    }

    #[test]
    fn separable_states_are_never_flagged(rho in separable_state()) {
        for v in run_all(&rho) {
            prop_assert!(!v.is_entangled(), "{} fired: {:?}", v.criterion, v.witness);
        }
        prop_assert!(rank_theorem_data(&rho).inequality_holds);
    }

    #[test]
    fn phases_do_not_change_anything(rho in any_state(), seed in 0.0f64..std::f64::consts::TAU) {
        let e = spectral_ensemble(&rho, DEFAULT_EIG_TOL);
        let phases: Vec<f64> = (0..e.len()).map(|i| seed * (i + 1) as f64).collect();
        let shifted = e.with_phases(&phases);
        prop_assert!(to_density(&shifted).matrix().max_abs_diff(rho.matrix()) < 1e-10);
        let (a, b) = (term_reductions(&kraus_from_ensemble(&e)), term_reductions(&kraus_from_ensemble(&shifted)));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(x.rho_a.max_abs_diff(&y.rho_a) < 1e-12 && x.rho_b.max_abs_diff(&y.rho_b) < 1e-12);
        }
        let verdicts = |s: &State| run_all(s).into_iter().map(|v| v.result).collect::<Vec<_>>();
        prop_assert_eq!(verdicts(&rho), verdicts(&to_density(&shifted)));
    }
}
