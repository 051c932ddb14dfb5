//! Singular-value inequalities and the mixing-matrix bounds derived from them.
//!
//! These are theorems: a negative slack beyond [`THEOREM_TOL`] means a bug,
//! and [`verify_mixing_bounds`] reports it as an internal inconsistency.

use serde::Serialize;

use super::schmidt_lambdas;
use crate::duality::{kraus_from_ensemble, transform, MixingMatrix};
use crate::error::{Error, Result};
use crate::linalg::{hs_inner, singular_values, CMatrix};
use crate::scalar::Real;
use crate::states::Ensemble;

pub const THEOREM_TOL: f64 = 1e-8;
const ZERO_WEIGHT: f64 = 1e-14;
const RANK_ONE_CUTOFF: f64 = 1e-10;

/// `lesser ≤ greater` with `slack = greater - lesser`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub index: Vec<usize>,
    pub lesser: f64,
    pub greater: f64,
    pub slack: f64,
}

impl InequalityCheck {
    pub fn new(name: &str, index: Vec<usize>, lesser: f64, greater: f64) -> Self {
        Self { name: name.to_string(), index, lesser, greater, slack: greater - lesser }
    }
}

fn min_slack(checks: &[InequalityCheck]) -> f64 {
    checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min)
}

fn sv<T: Real>(a: &CMatrix<T>) -> Vec<f64> {
    singular_values(a).into_iter().map(|x| x.as_f64()).collect()
}

/// `|Tr(A†B)| ≤ Σ_i σ_i(A) σ_i(B)`.
pub fn trace_singular_bound<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<InequalityCheck> {
    let lhs = hs_inner(a, b)?.norm().as_f64();
    let rhs = sv(a).iter().zip(sv(b)).map(|(x, y)| x * y).sum();
    Ok(InequalityCheck::new("trace_singular", vec![], lhs, rhs))
}

/// `[Σ_i (σ_i(A) - σ_i(B))²]^½ ≤ ‖A - B‖_F`.
pub fn frobenius_perturbation<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<InequalityCheck> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch("perturbation bound needs equal shapes".into()));
    }
    let lhs = sv(a).iter().zip(sv(b)).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let rhs = (a - b).frobenius_norm().as_f64();
    Ok(InequalityCheck::new("frobenius_perturbation", vec![], lhs, rhs))
}

/// `σ_{i+j-1}(A + B) ≤ σ_i(A) + σ_j(B)` for all admissible `i, j` (1-based in the index).
pub fn weyl_upper<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<Vec<InequalityCheck>> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch("Weyl bound needs equal shapes".into()));
    }
    let (sa, sb, ss) = (sv(a), sv(b), sv(&(a + b)));
    let q = sa.len();
    let mut out = Vec::new();
    for i in 1..=q {
        for j in 1..=q + 1 - i {
            out.push(InequalityCheck::new("weyl_upper", vec![i, j], ss[i + j - 2], sa[i - 1] + sb[j - 1]));
        }
    }
    Ok(out)
}

/// `σ_i(A + B) ≥ σ_i(A) - σ_1(B)`.
pub fn weyl_lower<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<Vec<InequalityCheck>> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch("Weyl bound needs equal shapes".into()));
    }
    let (sa, sb, ss) = (sv(a), sv(b), sv(&(a + b)));
    Ok((0..sa.len()).map(|i| InequalityCheck::new("weyl_lower", vec![i + 1], sa[i] - sb[0], ss[i])).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingBoundsReport {
    pub checks: Vec<InequalityCheck>,
    pub min_slack: f64,
    /// All transformed operators are rank one, so the Schmidt-type lower bound was checked.
    pub rank_one_target: bool,
}

/// Checks the mixing bounds for `target = transform(source, v)`.
///
/// `source` must be a spectral ensemble. Fails with `NotSameState` when the
/// transformed Kraus operators differ from the target's by more than 1e-8.
pub fn verify_mixing_bounds<T: Real>(
    source: &Ensemble<T>,
    target: &Ensemble<T>,
    v: &MixingMatrix<T>,
) -> Result<MixingBoundsReport> {
    let n = transform(&kraus_from_ensemble(source), v)?;
    let t = kraus_from_ensemble(target);
    if n.len() != t.len() {
        return Err(Error::ShapeMismatch(format!(
            "mixing matrix yields {} operators, target has {}",
            n.len(),
            t.len()
        )));
    }
    let dev = n
        .ops()
        .iter()
        .zip(t.ops())
        .map(|(x, y)| x.max_abs_diff(y).as_f64())
        .fold(0.0, f64::max);
    if dev > 1e-8 {
        return Err(Error::NotSameState { deviation: dev });
    }
    verify_transformed_bounds(source, v)
}

/// Same bounds with the target taken to be whatever `v` produces; rows of `v`
/// that yield a zero operator take part with `q_μ = 0`.
pub fn verify_transformed_bounds<T: Real>(source: &Ensemble<T>, v: &MixingMatrix<T>) -> Result<MixingBoundsReport> {
    let m = source.dim_a();
    let mf = m as f64;
    let n = transform(&kraus_from_ensemble(source), v)?;
    let p: Vec<f64> = source.terms().iter().map(|t| t.p.as_f64()).collect();
    let lam: Vec<Vec<f64>> = source.terms().iter().map(|t| schmidt_lambdas(&t.c).iter().map(|x| x.as_f64()).collect()).collect();
    let mut q = Vec::with_capacity(n.len());
    let mut lt: Vec<Vec<f64>> = Vec::with_capacity(n.len());
    for op in n.ops() {
        let s = sv(op);
        let qm = s.iter().map(|x| x * x).sum::<f64>() / mf;
        let mut l: Vec<f64> = if qm > ZERO_WEIGHT { s.iter().map(|x| x * x / (mf * qm)).collect() } else { vec![0.0; s.len()] };
        l.resize(m, 0.0);
        q.push(qm);
        lt.push(l);
    }
    let vm = v.matrix();
    let vabs = |mu: usize, a: usize| vm[(mu, a)].norm().as_f64();
    let overlap = |a: usize, mu: usize| -> f64 { (0..m).map(|i| (lam[a][i] * lt[mu][i]).sqrt()).sum() };
    let (dp, d) = (n.len(), source.len());
    let mut checks = Vec::new();

    for mu in 0..dp {
        for a in 0..d {
            let rhs = (q[mu] / p[a]).sqrt() * overlap(a, mu);
            checks.push(InequalityCheck::new("bound_v", vec![mu, a], vabs(mu, a), rhs));
        }
    }

    for k in 0..d {
        let rhs: f64 = (0..dp).map(|mu| q[mu] * overlap(k, mu).powi(2)).sum();
        checks.push(InequalityCheck::new("probability_bound", vec![k], p[k], rhs));
    }

    for mu in (0..dp).filter(|&mu| q[mu] > ZERO_WEIGHT) {
        let rhs: f64 = (0..d).map(|a| overlap(a, mu).powi(2)).sum();
        checks.push(InequalityCheck::new("unit_bound", vec![mu], 1.0, rhs));
    }

    for mu in 0..dp {
        for k in 0..d {
            let others: f64 = (0..d).filter(|&a| a != k).map(|a| vabs(mu, a) * (p[a] * lam[a][0]).sqrt()).sum();
            for i in 0..m {
                let lesser = vabs(mu, k) * (p[k] * lam[k][i]).sqrt() - others;
                checks.push(InequalityCheck::new("weyl_corollary_1", vec![mu, k, i], lesser, (q[mu] * lt[mu][i]).sqrt()));
            }
            if q[mu] <= ZERO_WEIGHT {
                continue;
            }
            let others: f64 = (0..d).filter(|&a| a != k).map(|a| lam[a][0].sqrt() * overlap(a, mu)).sum();
            for i in 0..m {
                let lesser = vabs(mu, k) * (lam[k][i] * p[k] / q[mu]).sqrt() - others;
                checks.push(InequalityCheck::new("weyl_corollary_2", vec![mu, k, i], lesser, lt[mu][i].sqrt()));
            }
        }
    }

    let rank_one_target = (0..dp).all(|mu| q[mu] <= ZERO_WEIGHT || lt[mu].get(1).copied().unwrap_or(0.0) <= RANK_ONE_CUTOFF);
    if rank_one_target {
        for k in 0..d {
            let s: f64 = (0..dp).map(|mu| vabs(mu, k) * q[mu].sqrt()).sum();
            checks.push(InequalityCheck::new("schmidt_lower", vec![k], p[k] / (s * s), lam[k][0]));
        }
    }

    let min = min_slack(&checks);
    if min < -THEOREM_TOL {
        let bad = checks.iter().find(|c| c.slack == min).expect("minimum is attained");
        return Err(Error::InternalInconsistency(format!(
            "{} at {:?} violated: {} > {}",
            bad.name, bad.index, bad.lesser, bad.greater
        )));
    }
    Ok(MixingBoundsReport { checks, min_slack: min, rank_one_target })
}
