//! Necessary separability criteria and the reporting types around them.
//!
//! Every comparison uses an absolute slack of [`DECISION_SLACK`]; a state that
//! violates an inequality by less than that is reported as inconclusive.

pub mod bounds;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::factorize::rank_theorem_data;
use crate::linalg::{hermitian_eig, singular_values, CMatrix};
use crate::scalar::Real;
use crate::states::{has_degenerate_terms, isotropic_alpha, spectral_ensemble, DensityMatrix, Ensemble, DEFAULT_EIG_TOL};

pub use bounds::{verify_mixing_bounds, verify_transformed_bounds, InequalityCheck, MixingBoundsReport};

pub const DECISION_SLACK: f64 = 1e-10;
/// `λ_2` at or below this counts as zero for criterion 2.
pub const LAMBDA2_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Entangled,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion: String,
    pub result: Outcome,
    pub witness: Map<String, Value>,
}

impl Verdict {
    fn new(criterion: &str, result: Outcome, witness: Value) -> Self {
        let witness = match witness {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("value".into(), other);
                m
            }
        };
        Self { criterion: criterion.to_string(), result, witness }
    }

    pub fn is_entangled(&self) -> bool {
        self.result == Outcome::Entangled
    }
}

/// Weight and Schmidt spectrum of one spectral term.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTerm<T: Real> {
    pub p: T,
    /// Eigenvalues of the term's reduced state on A, non-increasing, length `dim_a`.
    pub lambdas: Vec<T>,
}

impl<T: Real> SpectralTerm<T> {
    pub fn lambda(&self, i: usize) -> T {
        self.lambdas.get(i).copied().unwrap_or_else(T::zero)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData<T: Real> {
    pub terms: Vec<SpectralTerm<T>>,
    /// Some kept eigenvalues of ρ coincide, so the term partition is basis dependent.
    pub degenerate: bool,
}

/// Eigenvalues of `c c†` padded with zeros to `dim_a` entries.
pub fn schmidt_lambdas<T: Real>(c: &CMatrix<T>) -> Vec<T> {
    let mut l: Vec<T> = singular_values(c).into_iter().map(|s| s * s).collect();
    l.resize(c.rows(), T::zero());
    l
}

pub fn ensemble_spectral_data<T: Real>(e: &Ensemble<T>) -> SpectralData<T> {
    SpectralData {
        terms: e.terms().iter().map(|t| SpectralTerm { p: t.p, lambdas: schmidt_lambdas(&t.c) }).collect(),
        degenerate: has_degenerate_terms(e),
    }
}

pub fn spectral_data<T: Real>(rho: &DensityMatrix<T>) -> SpectralData<T> {
    ensemble_spectral_data(&spectral_ensemble(rho, T::lit(DEFAULT_EIG_TOL)))
}

fn f(x: impl Real) -> f64 {
    x.as_f64()
}

/// `λ_1^(a) ≥ p_a` for every spectral term.
pub fn spectral_criterion_1<T: Real>(rho: &DensityMatrix<T>) -> Verdict {
    criterion_1_on(&spectral_data(rho))
}

pub fn criterion_1_on<T: Real>(data: &SpectralData<T>) -> Verdict {
    let mut worst: Option<(usize, f64)> = None;
    for (a, t) in data.terms.iter().enumerate() {
        let margin = f(t.p) - f(t.lambda(0));
        if margin > DECISION_SLACK && worst.is_none_or(|(_, w)| margin > w) {
            worst = Some((a, margin));
        }
    }
    match worst {
        Some((a, margin)) => Verdict::new(
            "criterion_1",
            Outcome::Entangled,
            json!({
                "term": a,
                "lambda_1": f(data.terms[a].lambda(0)),
                "p": f(data.terms[a].p),
                "margin": margin,
                "degenerate_spectrum": data.degenerate,
            }),
        ),
        None => {
            let min_slack =
                data.terms.iter().map(|t| f(t.lambda(0)) - f(t.p)).fold(f64::INFINITY, f64::min);
            Verdict::new(
                "criterion_1",
                Outcome::Inconclusive,
                json!({ "min_slack": min_slack, "degenerate_spectrum": data.degenerate }),
            )
        }
    }
}

/// `(Σ_{a≠k} λ_1^(a))² ≥ p_k λ_2^(k)` for every `k` with `λ_2^(k) > 0` and `Σ_{a≠k} λ_1^(a) < 1`.
pub fn spectral_criterion_2<T: Real>(rho: &DensityMatrix<T>) -> Verdict {
    criterion_2_on(&spectral_data(rho))
}

pub fn criterion_2_on<T: Real>(data: &SpectralData<T>) -> Verdict {
    let total: f64 = data.terms.iter().map(|t| f(t.lambda(0))).sum();
    let mut worst: Option<(usize, f64, f64, f64)> = None;
    let mut applicable = Vec::new();
    for (k, t) in data.terms.iter().enumerate() {
        let l2 = f(t.lambda(1));
        if l2 <= LAMBDA2_CUTOFF {
            continue;
        }
        let others = total - f(t.lambda(0));
        if others >= 1.0 {
            continue;
        }
        applicable.push(k);
        let left = others * others;
        let right = f(t.p) * l2;
        let margin = right - left;
        if margin > DECISION_SLACK && worst.is_none_or(|(_, _, _, w)| margin > w) {
            worst = Some((k, left, right, margin));
        }
    }
    match worst {
        Some((k, left, right, margin)) => Verdict::new(
            "criterion_2",
            Outcome::Entangled,
            json!({
                "term": k,
                "left": left,
                "right": right,
                "sum_other_lambda_1": total - f(data.terms[k].lambda(0)),
                "p": f(data.terms[k].p),
                "lambda_2": f(data.terms[k].lambda(1)),
                "margin": margin,
                "degenerate_spectrum": data.degenerate,
            }),
        ),
        None => Verdict::new(
            "criterion_2",
            Outcome::Inconclusive,
            json!({ "applicable_terms": applicable, "degenerate_spectrum": data.degenerate }),
        ),
    }
}

/// `Σ_a λ_1^(a) ≥ 1`.
pub fn eigenvalue_sum_check<T: Real>(rho: &DensityMatrix<T>) -> Verdict {
    let data = spectral_data(rho);
    let sum: f64 = data.terms.iter().map(|t| f(t.lambda(0))).sum();
    let result = if sum < 1.0 - DECISION_SLACK { Outcome::Entangled } else { Outcome::Inconclusive };
    Verdict::new(
        "eigenvalue_sum",
        result,
        json!({ "sum_lambda_1": sum, "margin": 1.0 - sum, "degenerate_spectrum": data.degenerate }),
    )
}

fn sorted_eigenvalues<T: Real>(m: &CMatrix<T>) -> Vec<f64> {
    hermitian_eig(m).expect("Hermitian").values.iter().map(|x| x.as_f64()).collect()
}

/// `ρ_AB ≺ ρ_A` and `ρ_AB ≺ ρ_B`, compared through partial sums of sorted spectra.
pub fn majorization_check<T: Real>(rho: &DensityMatrix<T>) -> Verdict {
    let whole = sorted_eigenvalues(rho.matrix());
    let mut worst: Option<(&str, usize, f64, f64)> = None;
    for (name, red) in [("A", rho.reduced_a()), ("B", rho.reduced_b())] {
        let part = sorted_eigenvalues(&red);
        let (mut s_ab, mut s_red) = (0.0, 0.0);
        for k in 0..whole.len() {
            s_ab += whole[k];
            s_red += part.get(k).copied().unwrap_or(0.0);
            let margin = s_ab - s_red;
            if margin > DECISION_SLACK && worst.is_none_or(|(_, _, l, r)| margin > l - r) {
                worst = Some((name, k + 1, s_ab, s_red));
            }
        }
    }
    match worst {
        Some((name, k, l, r)) => Verdict::new(
            "majorization",
            Outcome::Entangled,
            json!({ "reduction": name, "k": k, "partial_sum_ab": l, "partial_sum_reduced": r, "margin": l - r }),
        ),
        None => Verdict::new("majorization", Outcome::Inconclusive, json!({})),
    }
}

/// Positivity of the partial transpose on B.
pub fn ppt_check<T: Real>(rho: &DensityMatrix<T>) -> Verdict {
    let min = hermitian_eig(&rho.partial_transpose_b()).expect("Hermitian").min().as_f64();
    let result = if min < -DECISION_SLACK { Outcome::Entangled } else { Outcome::Inconclusive };
    Verdict::new("ppt", result, json!({ "min_eigenvalue": min }))
}

/// `rank ρ_AB ≥ max(rank ρ_A, rank ρ_B)`.
pub fn rank_inequality_check<T: Real>(rho: &DensityMatrix<T>) -> Verdict {
    let r = rank_theorem_data(rho);
    let result = if r.inequality_holds { Outcome::Inconclusive } else { Outcome::Entangled };
    Verdict::new(
        "rank_inequality",
        result,
        json!({ "rank_ab": r.rank_ab, "rank_a": r.rank_a, "rank_b": r.rank_b }),
    )
}

/// All necessary criteria, in a fixed order.
pub fn run_all<T: Real>(rho: &DensityMatrix<T>) -> Vec<Verdict> {
    let data = spectral_data(rho);
    vec![
        criterion_1_on(&data),
        criterion_2_on(&data),
        eigenvalue_sum_check(rho),
        majorization_check(rho),
        ppt_check(rho),
        rank_inequality_check(rho),
    ]
}

/// Closed-form verdict for isotropic states.
///
/// Fires for `F > 1/d`. For `d = 2` the complement is separable, which is
/// recorded as a note since only a decomposition can certify it.
pub fn isotropic_analytic_verdict(d: usize, fidelity: f64) -> Result<Verdict> {
    if d < 2 {
        return Err(Error::DomainError(format!("isotropic states need d >= 2, got {d}")));
    }
    let alpha = isotropic_alpha(d, fidelity);
    if !(-1e-12..=1.0 + 1e-12).contains(&alpha) {
        return Err(Error::DomainError(format!("F = {fidelity} outside [1/d², 1] for d = {d}")));
    }
    let threshold = 1.0 / d as f64;
    let margin = fidelity - threshold;
    if margin > DECISION_SLACK {
        return Ok(Verdict::new(
            "isotropic_analytic",
            Outcome::Entangled,
            json!({ "d": d, "F": fidelity, "threshold": threshold, "margin": margin }),
        ));
    }
    let mut w = json!({ "d": d, "F": fidelity, "threshold": threshold });
    if d == 2 {
        w["note"] = json!("separable, see decompose module");
    }
    Ok(Verdict::new("isotropic_analytic", Outcome::Inconclusive, w))
}

/// One row of the criterion-2 regime report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeEntry {
    pub k: usize,
    pub p: f64,
    pub lambda_2: f64,
    pub sum_other_lambda_1: f64,
    /// `1 - p_k ≥ λ_2^(k)`.
    pub upper: bool,
    /// `λ_2^(k) > (Σ_{a≠k} λ_1^(a))² / p_k`.
    pub fires: bool,
    /// `(Σ_{a≠k} λ_1^(a))² / p_k ≥ (1 - p_k)² / p_k`.
    pub lower: bool,
    pub p_above_half: bool,
    pub chain_holds: bool,
}

pub fn criterion2_regime_check<T: Real>(rho: &DensityMatrix<T>) -> Vec<RegimeEntry> {
    let data = spectral_data(rho);
    let total: f64 = data.terms.iter().map(|t| f(t.lambda(0))).sum();
    data.terms
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let p = f(t.p);
            let l2 = f(t.lambda(1));
            let s = total - f(t.lambda(0));
            let upper = 1.0 - p >= l2 - DECISION_SLACK;
            let fires = l2 > LAMBDA2_CUTOFF && s < 1.0 && l2 - s * s / p > DECISION_SLACK;
            let lower = s * s / p >= (1.0 - p) * (1.0 - p) / p - DECISION_SLACK;
            RegimeEntry {
                k,
                p,
                lambda_2: l2,
                sum_other_lambda_1: s,
                upper,
                fires,
                lower,
                p_above_half: p > 0.5,
                chain_holds: upper && fires && lower,
            }
        })
        .collect()
}

/// `(p_1, λ_1(ρ_A), Σ_a p_a λ_1^(a))`, which satisfy `p_1 ≤ λ_1(ρ_A) ≤ Σ_a p_a λ_1^(a)`
/// whenever ρ is majorized by its reduction on A.
pub fn ky_fan_chain<T: Real>(rho: &DensityMatrix<T>) -> (f64, f64, f64) {
    let data = spectral_data(rho);
    let p1 = data.terms.first().map(|t| f(t.p)).unwrap_or(0.0);
    let la = sorted_eigenvalues(&rho.reduced_a())[0];
    let weighted = data.terms.iter().map(|t| f(t.p) * f(t.lambda(0))).sum();
    (p1, la, weighted)
}
