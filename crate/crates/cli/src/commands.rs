use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use sepscope::criteria::{isotropic_analytic_verdict, run_all, Verdict};
use sepscope::decompose::{
    bell_mixture_decomposition, isotropic_decomposition, rank_one_search, upb_entanglement_certificate,
    verify_decomposition, SearchConfig,
};
use sepscope::duality::{channel_properties, kraus_from_ensemble, spectral_kraus};
use sepscope::factorize::rank_theorem_data;
use sepscope::io;
use sepscope::states::{named_state, IsotropicParam, NamedState, StateParams, NAMED_STATES};
use sepscope::{Decomposition, State, StateEnsemble};

use crate::{Command, Family, Source};

const CLOSED_FORM_TOL: f64 = 1e-10;

/// JSON for stdout and the exit code.
pub fn run(cmd: Command) -> Result<(String, u8)> {
    let start = Instant::now();
    let out = match cmd {
        Command::Analyze { source, criteria, search_seed } => (analyze(&source, criteria.as_deref(), search_seed)?, 0),
        Command::Kraus { source, spectral } => kraus(&source, spectral)?,
        Command::Decompose { family, fidelity } => (decompose(family, fidelity)?, 0),
        Command::Search { source, terms, restarts, seed, tol, max_iters } => {
            let cfg = SearchConfig { target_terms: terms, restarts, seed, tol, max_iters, threads: None };
            search(&source, &cfg)?
        }
        Command::Verify { source, decomposition, tol } => verify(&source, &decomposition, tol)?,
        Command::ListStates => (list_states()?, 0),
    };
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    Ok(out)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

struct Loaded {
    label: String,
    named: Option<NamedState>,
    state: State,
    ensemble: Option<StateEnsemble>,
}

fn load(source: &Source) -> Result<Loaded> {
    match (&source.state, &source.input) {
        (Some(name), None) => {
            let params = StateParams {
                p: source.p,
                d: source.d,
                fidelity: source.fidelity,
                alpha: source.alpha,
                sign: source.sign.as_deref().map(str::parse).transpose()?,
                dim_a: source.dim_a,
                dim_b: source.dim_b,
            };
            let named = NamedState::from_name(name, &params)?;
            let out = named_state::<f64>(&named)?;
            Ok(Loaded { label: named.label(), named: Some(named), state: out.state, ensemble: out.ensemble })
        }
        (None, Some(path)) => {
            let text = read(path)?;
            let input = io::parse_input(&text).with_context(|| format!("reading {}", path.display()))?;
            let ensemble = match &input {
                io::Input::Ensemble(e) => Some(e.clone()),
                io::Input::State(_) => None,
            };
            Ok(Loaded { label: path.display().to_string(), named: None, state: input.state(), ensemble })
        }
        _ => bail!("give exactly one of --state NAME or --input FILE"),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// A closed-form decomposition known for this named state, if any.
fn closed_form(named: &NamedState) -> Option<(&'static str, Decomposition)> {
    match named {
        NamedState::Isotropic { d: 2, param } => {
            let f = match *param {
                IsotropicParam::Fidelity(f) => f,
                IsotropicParam::Alpha(a) => sepscope::states::isotropic_fidelity(2, a),
            };
            isotropic_decomposition(f).ok().map(|d| ("isotropic closed form", d))
        }
        NamedState::BellMixture { p } if *p == 0.5 => Some(("bell-mixture closed form", bell_mixture_decomposition())),
        _ => None,
    }
}

fn analyze(source: &Source, criteria: Option<&[String]>, search_seed: Option<u64>) -> Result<String> {
    let loaded = load(source)?;
    let rho = &loaded.state;
    let mut verdicts: Vec<Verdict> = run_all(rho);
    if let Some(NamedState::Isotropic { d, param }) = &loaded.named {
        let f = match *param {
            IsotropicParam::Fidelity(f) => f,
            IsotropicParam::Alpha(a) => sepscope::states::isotropic_fidelity(*d, a),
        };
        verdicts.push(isotropic_analytic_verdict(*d, f)?);
    }
    if let Some(keep) = criteria {
        let known: Vec<&str> = verdicts.iter().map(|v| v.criterion.as_str()).collect();
        if let Some(bad) = keep.iter().find(|k| !known.contains(&k.as_str())) {
            bail!("unknown criterion {bad:?}; available: {}", known.join(", "));
        }
        verdicts.retain(|v| keep.contains(&v.criterion));
    }
    let mut entangled_by: Vec<String> = verdicts.iter().filter(|v| v.is_entangled()).map(|v| v.criterion.clone()).collect();

    let certificate = if matches!(loaded.named, Some(NamedState::UpbTiles)) {
        let cert = upb_entanglement_certificate()?;
        if cert.entangled {
            entangled_by.push("upb_certificate".into());
        }
        Some(json!({
            "name": "upb_elimination",
            "result": if cert.entangled { "Entangled" } else { "Inconclusive" },
            "steps": cert.steps.len(),
            "all_residuals_zero": cert.steps.iter().all(|s| s.zero),
        }))
    } else {
        None
    };

    let mut decomposition = None;
    if let Some((name, dec)) = loaded.named.as_ref().and_then(closed_form) {
        let report = verify_decomposition(rho, &dec, CLOSED_FORM_TOL);
        decomposition = Some(json!({ "source": name, "verified": report.pass, "residual": report.residual }));
    }
    if decomposition.is_none() {
        if let Some(seed) = search_seed {
            let report = rank_one_search(rho, &SearchConfig { seed, ..Default::default() })?;
            decomposition = Some(json!({
                "source": "rank-one search",
                "verified": report.found(),
                "residual": report.residual,
                "seed": seed,
            }));
        }
    }
    let separable = decomposition.as_ref().is_some_and(|d| d["verified"] == json!(true));
    let classification = if !entangled_by.is_empty() {
        "Entangled"
    } else if separable {
        "Separable"
    } else {
        "Unknown"
    };
    let report = json!({
        "state": { "label": loaded.label, "dim_a": rho.dim_a(), "dim_b": rho.dim_b() },
        "classification": classification,
        "entangled_by": entangled_by,
        "verdicts": verdicts,
        "certificate": certificate,
        "decomposition": decomposition,
        "channel_properties": channel_properties(&spectral_kraus(rho)),
        "rank": rank_theorem_data(rho),
    });
    to_json(&report)
}

fn kraus(source: &Source, spectral: bool) -> Result<(String, u8)> {
    let loaded = load(source)?;
    let k = match (&loaded.ensemble, spectral) {
        (Some(e), false) => kraus_from_ensemble(e),
        _ => spectral_kraus(&loaded.state),
    };
    Ok((to_json(&io::kraus_to_json(&k))?, 0))
}

fn decompose(family: Family, fidelity: Option<f64>) -> Result<String> {
    let dec = match family {
        Family::Isotropic => {
            let f = fidelity.context("--family isotropic requires --F")?;
            isotropic_decomposition::<f64>(f)?
        }
        Family::BellMixture => {
            if fidelity.is_some() {
                bail!("--F applies only to the isotropic family");
            }
            bell_mixture_decomposition::<f64>()
        }
    };
    to_json(&io::decomposition_to_json(&dec))
}

fn search(source: &Source, cfg: &SearchConfig) -> Result<(String, u8)> {
    let loaded = load(source)?;
    let report = rank_one_search(&loaded.state, cfg)?;
    Ok((to_json(&io::search_report_to_json(&report))?, 0))
}

fn verify(source: &Source, path: &Path, tol: f64) -> Result<(String, u8)> {
    let loaded = load(source)?;
    let text = read(path)?;
    let dec_json: io::DecompositionJson = io::parse(&text).with_context(|| format!("reading {}", path.display()))?;
    let dec = io::decomposition_from_json(&dec_json)?;
    let report = verify_decomposition(&loaded.state, &dec, tol);
    let out = json!({
        "result": if report.pass { "PASS" } else { "FAIL" },
        "state": loaded.label,
        "tol": tol,
        "report": report,
    });
    Ok((to_json(&out)?, if report.pass { 0 } else { 1 }))
}

fn list_states() -> Result<String> {
    let list: Vec<Value> = NAMED_STATES.iter().map(|(n, d)| json!({ "name": n, "description": d })).collect();
    to_json(&list)
}
