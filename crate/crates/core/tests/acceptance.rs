use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sepscope::criteria::bounds::{frobenius_perturbation, trace_singular_bound, weyl_lower, weyl_upper};
use sepscope::criteria::{
    ppt_check, run_all, spectral_criterion_1, spectral_criterion_2, verify_transformed_bounds, InequalityCheck, Outcome,
};
use sepscope::decompose::{
    isotropic_decomposition, isotropic_mixing_matrix, rank_one_search, upb_entanglement_certificate,
    verify_decomposition, SearchConfig,
};
use sepscope::duality::{choi_reconstruct, kraus_from_ensemble, recover_mixing, spectral_kraus, term_reductions, transform};
use sepscope::linalg::{hs_inner, isometry_deviation, singular_values, vectorize, CMatrix};
use sepscope::states::{
    named_state, partial_trace_a, partial_trace_b, random_product_vector, random_state, spectral_ensemble,
    to_density, Ensemble, IsotropicParam, NamedState, Sign, DEFAULT_EIG_TOL,
};
use sepscope::{Complex64, Matrix, Mixing, State, StateEnsemble};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn named(s: NamedState) -> State {
    named_state::<f64>(&s).expect("valid named state").state
}

fn isotropic(d: usize, f: f64) -> State {
    named(NamedState::Isotropic { d, param: IsotropicParam::Fidelity(f) })
}

fn random_corpus() -> Vec<State> {
    let dims = [(2, 2), (2, 3), (3, 3)];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..500)
        .map(|i| {
            let (m, n) = dims[i % 3];
            let rank = rng.random_range(1..=m * n);
            random_state::<f64>(m, n, rank, 1000 + i as u64)
        })
        .collect()
}

fn choi_round_trip() -> Check {
    let start = Instant::now();
    let corpus = random_corpus();
    let mut worst = 0.0f64;
    for rho in &corpus {
        let back = choi_reconstruct(&spectral_kraus(rho));
        worst = worst.max(back.matrix().max_abs_diff(rho.matrix()));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    ensure(secs < 10.0, || format!("took {secs:.2} s"))?;
    Ok(format!("{} states, max deviation {worst:.1e}", corpus.len()))
}

fn reduced_state_identities() -> Check {
    let mut worst = 0.0f64;
    for rho in random_corpus() {
        let (m, n) = (rho.dim_a(), rho.dim_b());
        let e = spectral_ensemble(&rho, DEFAULT_EIG_TOL);
        let k = kraus_from_ensemble(&e);
        let mf = m as f64;
        for (a, (t, op)) in e.terms().iter().zip(k.ops()).enumerate() {
            let psi = CMatrix::projector(&vectorize(&t.c));
            let rho_a = partial_trace_b(&psi, m, n);
            let rho_b = partial_trace_a(&psi, m, n);
            let w = Complex64::new(mf * t.p, 0.0);
            worst = worst.max(op.gram().max_abs_diff(&rho_a.transpose().scale(w)));
            worst = worst.max(op.gram_rows().max_abs_diff(&rho_b.scale(w)));

            let mut lambdas: Vec<f64> = sepscope::linalg::hermitian_eig(&rho_a).unwrap().values.clone();
            lambdas.sort_by(|x, y| y.total_cmp(x));
            for (s, l) in singular_values(op).iter().zip(&lambdas) {
                worst = worst.max((s - (mf * t.p * l.max(0.0)).sqrt()).abs());
            }
            for (b, other) in k.ops().iter().enumerate() {
                let expect = if a == b { mf * t.p } else { 0.0 };
                worst = worst.max((hs_inner(op, other).unwrap() - Complex64::new(expect, 0.0)).norm());
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn fidelity_grid(lo: f64, hi: f64, threshold: f64) -> Vec<f64> {
    let mut g: Vec<f64> = (0..200).map(|i| lo + (hi - lo) * i as f64 / 199.0).collect();
    g.extend([threshold - 1e-6, threshold + 1e-6]);
    g
}

fn isotropic_thresholds() -> Check {
    for f in fidelity_grid(0.25, 1.0, 0.5) {
        let rho = isotropic(2, f);
        let above = f > 0.5;
        let c1 = spectral_criterion_1(&rho).is_entangled();
        let ppt = ppt_check(&rho).is_entangled();
        ensure(c1 == above && ppt == above, || format!("d=2 F={f}: criterion 1 {c1}, ppt {ppt}"))?;
        if f <= 0.5 {
            let report = verify_decomposition(&rho, &isotropic_decomposition(f).map_err(|e| e.to_string())?, 1e-10);
            ensure(report.pass, || format!("d=2 F={f}: decomposition residual {:e}", report.residual))?;
        }
    }
    for f in fidelity_grid(1.0 / 9.0, 1.0, 1.0 / 3.0) {
        let c1 = spectral_criterion_1(&isotropic(3, f)).is_entangled();
        ensure(c1 == (f > 1.0 / 3.0), || format!("d=3 F={f}: criterion 1 {c1}"))?;
    }
    Ok("202 + 202 fidelities".into())
}

/// The printed radicals for the F = 2/5 product states.
fn printed_radicals(f: f64) -> [f64; 4] {
    let r = (3.0 - 12.0 * f * f).sqrt();
    let t = 2.0 * 3.0f64.sqrt() * ((1.0 - f) * f).sqrt();
    [
        ((3.0 - r - t) / 6.0).sqrt(),
        ((r + t + 3.0) / 6.0).sqrt(),
        ((r - t + 3.0) / 6.0).sqrt(),
        ((3.0 - r + t) / 6.0).sqrt(),
    ]
}

fn printed_states(f: f64) -> Vec<(Matrix, Matrix)> {
    let [a, b, c, d] = printed_radicals(f);
    let z = Complex64::new;
    let pairs = [
        ([z(a, 0.), z(-b, 0.)], [z(c, 0.), z(-d, 0.)]),
        ([z(b, 0.), z(0., -a)], [z(d, 0.), z(0., c)]),
        ([z(a, 0.), z(b, 0.)], [z(c, 0.), z(d, 0.)]),
        ([z(b, 0.), z(0., a)], [z(d, 0.), z(0., -c)]),
    ];
    pairs.iter().map(|(x, y)| (CMatrix::projector(x), CMatrix::projector(y))).collect()
}

fn isotropic_mixing() -> Check {
    for f in fidelity_grid(0.25, 0.5, 0.5).into_iter().filter(|&f| f <= 0.5) {
        let v: Mixing = isotropic_mixing_matrix(f).map_err(|e| e.to_string())?;
        let dev = isometry_deviation(v.matrix());
        ensure(dev <= 1e-12, || format!("F={f}: unitarity deviation {dev:e}"))?;
        let (_, e) = sepscope::states::isotropic::<f64>(2, IsotropicParam::Fidelity(f)).unwrap();
        let n = transform(&kraus_from_ensemble(&e), &v).map_err(|e| e.to_string())?;
        for op in n.ops() {
            let s2 = singular_values(op)[1];
            ensure(s2 <= 1e-10, || format!("F={f}: sigma_2 = {s2:e}"))?;
        }
    }

    let f = 0.4;
    let (_, e) = sepscope::states::isotropic::<f64>(2, IsotropicParam::Fidelity(f)).unwrap();
    let n = transform(&kraus_from_ensemble(&e), &isotropic_mixing_matrix(f).unwrap()).unwrap();
    let found = term_reductions(&n);
    ensure(found.len() == 4, || format!("{} nonzero transformed operators", found.len()))?;
    for (k, (pa, pb)) in printed_states(f).iter().enumerate() {
        let hit = found.iter().any(|t| {
            (t.p - 0.25).abs() < 1e-10 && t.rho_a.max_abs_diff(pa) < 1e-10 && t.rho_b.max_abs_diff(pb) < 1e-10
        });
        ensure(hit, || format!("printed product state {} not produced", k + 1))?;
    }
    Ok("V unitary, ranks one, F = 2/5 states match".into())
}

fn timed(label: &str, f: impl FnOnce() -> Result<(), String>) -> Result<(), String> {
    let start = Instant::now();
    f()?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 1.0, || format!("{label} took {secs:.2} s"))
}

fn entangled_by(rho: &State, name: &str) -> bool {
    run_all(rho).iter().any(|v| v.criterion == name && v.is_entangled())
}

fn verdict_table() -> Check {
    timed("bell-mixture", || {
        for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let ppt = entangled_by(&named(NamedState::BellMixture { p }), "ppt");
            ensure(ppt == (p != 0.5), || format!("bell-mixture p={p}: ppt {ppt}"))?;
        }
        let rho = named(NamedState::BellMixture { p: 0.5 });
        let report = rank_one_search(&rho, &SearchConfig { seed: 7, ..Default::default() }).map_err(|e| e.to_string())?;
        ensure(report.found(), || format!("bell-mixture p=0.5 not found, residual {:e}", report.residual))
    })?;
    timed("example-2", || {
        for i in 1..=9 {
            let p = i as f64 / 10.0;
            let rho = named(NamedState::PmMixture { p, sign: Sign::Plus });
            ensure(run_all(&rho).iter().any(|v| v.is_entangled()), || format!("example-2 p={p} not detected"))?;
        }
        Ok(())
    })?;
    timed("pm-mixture", || {
        for sign in [Sign::Plus, Sign::Minus] {
            for i in 1..=19 {
                let p = i as f64 / 20.0;
                if i == 10 {
                    continue;
                }
                let c1 = spectral_criterion_1(&named(NamedState::PmMixture { p, sign })).is_entangled();
                ensure(c1 == (p > 0.5), || format!("pm-mixture {sign:?} p={p}: criterion 1 {c1}"))?;
            }
        }
        Ok(())
    })?;
    timed("five-by-five", || {
        let rho = named(NamedState::FiveByFive);
        let (c1, c2) = (spectral_criterion_1(&rho).is_entangled(), spectral_criterion_2(&rho).is_entangled());
        ensure(!c1 && c2, || format!("five-by-five: criterion 1 {c1}, criterion 2 {c2}"))
    })?;
    timed("upb-tiles", || {
        let ppt = ppt_check(&named(NamedState::UpbTiles));
        ensure(ppt.result == Outcome::Inconclusive, || "upb-tiles: ppt fired".into())?;
        let cert = upb_entanglement_certificate().map_err(|e| e.to_string())?;
        ensure(cert.entangled, || "upb-tiles: certificate failed".into())
    })?;
    Ok("5 rows".into())
}

fn upb_certificate() -> Check {
    let cert = upb_entanglement_certificate().map_err(|e| e.to_string())?;
    ensure(cert.steps.iter().all(|s| s.zero && s.residual == "0"), || "nonzero residual".into())?;
    ensure(cert.points >= 20, || format!("only {} points", cert.points))?;
    let worst = cert.proportionality.iter().map(|p| p.max_relative_deviation).fold(0.0, f64::max);
    ensure(worst <= 1e-9, || format!("proportionality deviation {worst:e}"))?;
    Ok(format!("{} steps exact, proportionality {worst:.1e}", cert.steps.len()))
}

fn separable_soundness() -> Check {
    let start = Instant::now();
    let dims = [(2, 2), (2, 3), (3, 3)];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut flagged = Vec::new();
    let count = 1200;
    for i in 0..count {
        let (m, n) = dims[i % 3];
        let k = rng.random_range(1..=2 * m * n);
        let (rho, _) = sepscope::states::random_separable::<f64>(m, n, k, 5000 + i as u64);
        for v in run_all(&rho).iter().filter(|v| v.is_entangled()) {
            flagged.push(format!("state {i}: {}", v.criterion));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(flagged.is_empty(), || format!("{} false positives, first {}", flagged.len(), flagged[0]))?;
    ensure(secs < 60.0, || format!("took {secs:.2} s"))?;
    Ok(format!("{count} separable states, no verdicts"))
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    CMatrix::from_fn(r, c, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn product_ensemble(rng: &mut ChaCha8Rng, m: usize, n: usize, k: usize) -> StateEnsemble {
    let terms: Vec<(f64, Vec<Complex64>)> = (0..k)
        .map(|_| {
            let (a, b) = random_product_vector::<f64, _>(rng, m, n);
            let v = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
            (rng.random_range(0.05..1.0), v)
        })
        .collect();
    let total: f64 = terms.iter().map(|t| t.0).sum();
    let terms: Vec<_> = terms.into_iter().map(|(p, v)| (p / total, v)).collect();
    Ensemble::from_vectors(m, n, &terms).unwrap()
}

fn inequality_battery() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checks: Vec<InequalityCheck> = Vec::new();
    for _ in 0..100 {
        let (r, c) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let (a, b) = (random_matrix(&mut rng, r, c), random_matrix(&mut rng, r, c));
        checks.push(trace_singular_bound(&a, &b).unwrap());
        checks.push(frobenius_perturbation(&a, &b).unwrap());
        checks.extend(weyl_upper(&a, &b).unwrap());
        checks.extend(weyl_lower(&a, &b).unwrap());
    }
    let dims = [(2, 2), (2, 3), (3, 3)];
    for i in 0..120 {
        let (m, n) = dims[i % 3];
        let rho = random_state::<f64>(m, n, rng.random_range(1..=m * n), 9000 + i as u64);
        let source = spectral_ensemble(&rho, DEFAULT_EIG_TOL);
        let d = source.len();
        let rows = rng.random_range(d..=d + 3);
        let v = Mixing::random(&mut rng, rows, d);
        checks.extend(verify_transformed_bounds(&source, &v).map_err(|e| e.to_string())?.checks);
    }
    for i in 0..120 {
        let (m, n) = dims[i % 3];
        let target = product_ensemble(&mut rng, m, n, m * n + 1);
        let source = spectral_ensemble(&to_density(&target), DEFAULT_EIG_TOL);
        let v = recover_mixing(&kraus_from_ensemble(&source), &kraus_from_ensemble(&target)).map_err(|e| e.to_string())?;
        let report = verify_transformed_bounds(&source, &v).map_err(|e| e.to_string())?;
        ensure(report.rank_one_target, || "product target not recognized as rank one".into())?;
        checks.extend(report.checks);
    }

    let kinds = [
        "trace_singular",
        "frobenius_perturbation",
        "weyl_upper",
        "weyl_lower",
        "bound_v",
        "probability_bound",
        "unit_bound",
        "weyl_corollary_1",
        "weyl_corollary_2",
        "schmidt_lower",
    ];
    for kind in kinds {
        let n = checks.iter().filter(|c| c.name == kind).count();
        ensure(n >= 100, || format!("{kind}: only {n} instances"))?;
    }
    let worst = checks.iter().min_by(|x, y| x.slack.total_cmp(&y.slack)).unwrap();
    ensure(worst.slack >= -1e-8, || format!("{} {:?} slack {:e}", worst.name, worst.index, worst.slack))?;
    Ok(format!("{} instances, min slack {:.1e}", checks.len(), worst.slack))
}

fn search_regression() -> Check {
    let start = Instant::now();
    let cfg = SearchConfig { seed: 7, restarts: 64, ..Default::default() };
    let found = [
        ("bell-mixture p=0.5", named(NamedState::BellMixture { p: 0.5 })),
        ("isotropic F=0.3", isotropic(2, 0.3)),
        ("isotropic F=0.4", isotropic(2, 0.4)),
        ("isotropic F=0.5", isotropic(2, 0.5)),
    ];
    for (label, rho) in &found {
        let r = rank_one_search(rho, &cfg).map_err(|e| e.to_string())?;
        ensure(r.found() && r.residual < 1e-10, || format!("{label}: residual {:e}", r.residual))?;
        let check = verify_decomposition(rho, r.decomposition().unwrap(), 1e-8);
        ensure(check.pass, || format!("{label}: independent check failed: {:?}", check.failures))?;
    }
    let missed = [
        ("bell-mixture p=0.7", named(NamedState::BellMixture { p: 0.7 }), 0.08),
        ("example-2 p=0.5", named(NamedState::PmMixture { p: 0.5, sign: Sign::Plus }), 0.13),
    ];
    for (label, rho, floor) in &missed {
        let r = rank_one_search(rho, &cfg).map_err(|e| e.to_string())?;
        ensure(!r.found() && r.residual >= *floor, || format!("{label}: found {}, residual {:e}", r.found(), r.residual))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.2} s"))?;
    Ok(format!("4 found, 2 not found, {secs:.1} s"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("spectral Kraus set reproduces the state", choi_round_trip),
        ("reduced states and singular values of Kraus operators", reduced_state_identities),
        ("isotropic thresholds and closed-form decomposition", isotropic_thresholds),
        ("isotropic mixing matrix and product states", isotropic_mixing),
        ("named-state verdict table", verdict_table),
        ("Tiles state certificate", upb_certificate),
        ("no false positives on separable states", separable_soundness),
        ("singular-value and mixing inequalities", inequality_battery),
        ("rank-one search regression", search_regression),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail}; {secs:.2} s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({why}; {secs:.2} s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
