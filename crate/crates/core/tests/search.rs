use sepscope::decompose::{rank_one_search, verify_decomposition, SearchConfig};
use sepscope::states::{named_state, random_separable, NamedState, Sign};
use sepscope::State;

fn pm(p: f64) -> State {
    named_state::<f64>(&NamedState::PmMixture { p, sign: Sign::Plus }).unwrap().state
}

fn cfg(seed: u64) -> SearchConfig {
    SearchConfig { seed, restarts: 64, ..Default::default() }
}

// No mixing matrix makes every operator rank one, so the best residual stays
// bounded away from zero. p/4 holds at p = 0.7; at p = 0.3 the search reaches
// 0.046 < p/4, and p²/2 is the bound that survives.
#[test]
fn entangled_mixture_keeps_a_residual_floor() {
    let hi = rank_one_search(&pm(0.7), &cfg(7)).unwrap();
    assert!(!hi.found());
    assert!(hi.residual >= 0.7 / 4.0, "{}", hi.residual);

    let lo = rank_one_search(&pm(0.3), &cfg(7)).unwrap();
    assert!(!lo.found());
    assert!(lo.residual >= 0.3 * 0.3 / 2.0, "{}", lo.residual);
}

#[test]
fn found_decompositions_verify_independently() {
    for seed in 0..4 {
        let (rho, _) = random_separable::<f64>(2, 2, 3, 100 + seed);
        let r = rank_one_search(&rho, &cfg(seed)).unwrap();
        if let Some(dec) = r.decomposition() {
            assert!(verify_decomposition(&rho, dec, 1e-8).pass);
            assert!(r.residual < 1e-10);
        }
    }
}

#[test]
fn same_seed_same_report() {
    let rho = named_state::<f64>(&NamedState::BellMixture { p: 0.7 }).unwrap().state;
    let small = SearchConfig { seed: 3, restarts: 8, max_iters: 300, ..Default::default() };
    let a = rank_one_search(&rho, &SearchConfig { threads: Some(1), ..small.clone() }).unwrap();
    let b = rank_one_search(&rho, &SearchConfig { threads: Some(3), ..small }).unwrap();
    assert_eq!(a, b);
}

#[test]
fn tiny_restart_budget_is_still_sound() {
    let rho = pm(0.5);
    let r = rank_one_search(&rho, &SearchConfig { restarts: 1, max_iters: 10, ..Default::default() }).unwrap();
    assert!(!r.found());
    assert!(r.residual > 0.0);
}
