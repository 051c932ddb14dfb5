//! Separable decompositions: closed forms, numerical rank-one search, minor
//! systems and the Tiles elimination certificate.

use num_traits::Zero;
use serde::Serialize;

use crate::linalg::{hermitian_eig, numeric_rank, CMatrix, DEFAULT_RANK_TOL};
use crate::scalar::Real;
use crate::states::DensityMatrix;

mod closed;
mod minors;
mod search;
mod upb;

pub use closed::{
    bell_mixture_decomposition, bell_mixture_mixing_matrix, isotropic_alpha_beta, isotropic_decomposition,
    isotropic_mixing_matrix, isotropic_product_states, isotropic_radicals,
};
pub use minors::{minor_system, ExactMinors, MinorPolynomial, MinorSystem};
pub use search::{
    rank_one_objective, rank_one_search, search_threads, SearchConfig, SearchOutcome, SearchReport, DEFAULT_MAX_ITERS,
    DEFAULT_RESTARTS, DEFAULT_TOL,
};
pub use upb::{upb_entanglement_certificate, upb_equations, CertificateStep, ProportionalityCheck, UpbCertificate};

const WEIGHT_TOL: f64 = 1e-9;
const FACTOR_TOL: f64 = 1e-9;

/// One product term `q · (a ⊗ b)` with rank-one unit-trace factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTerm<T: Real> {
    pub q: T,
    pub a: CMatrix<T>,
    pub b: CMatrix<T>,
}

/// `ρ = Σ_μ q_μ a_μ ⊗ b_μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableDecomposition<T: Real> {
    pub terms: Vec<ProductTerm<T>>,
}

impl<T: Real> SeparableDecomposition<T> {
    pub fn new(terms: Vec<ProductTerm<T>>) -> Self {
        Self { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(dim_a, dim_b)` read off the first term.
    pub fn dims(&self) -> Option<(usize, usize)> {
        self.terms.first().map(|t| (t.a.rows(), t.b.rows()))
    }

    pub fn total_weight(&self) -> T {
        self.terms.iter().fold(T::zero(), |acc, t| acc + t.q)
    }

    pub fn reconstruct(&self) -> CMatrix<T> {
        let Some((m, n)) = self.dims() else {
            return CMatrix::zeros(0, 0);
        };
        let mut out = CMatrix::zeros(m * n, m * n);
        for t in &self.terms {
            let k = t.a.kron(&t.b);
            for (o, x) in out.as_mut_slice().iter_mut().zip(k.as_slice()) {
                if !x.is_zero() {
                    *o = *o + *x * t.q;
                }
            }
        }
        out
    }
}

/// Outcome of [`verify_decomposition`]; `failures` is empty exactly when `pass`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub pass: bool,
    pub residual: f64,
    pub weight_error: f64,
    pub terms: usize,
    pub failures: Vec<String>,
}

/// Independent check of `ρ ≈ Σ q a⊗b`: reconstruction within `tol`, weights
/// nonnegative and summing to one, every factor a unit-trace rank-one projector.
pub fn verify_decomposition<T: Real>(rho: &DensityMatrix<T>, dec: &SeparableDecomposition<T>, tol: f64) -> DecompositionReport {
    let mut failures = Vec::new();
    let (m, n) = (rho.dim_a(), rho.dim_b());
    for (i, t) in dec.terms.iter().enumerate() {
        if t.a.shape() != (m, m) || t.b.shape() != (n, n) {
            failures.push(format!("term {i}: factor shapes {:?} and {:?}, expected {m}x{m} and {n}x{n}", t.a.shape(), t.b.shape()));
            continue;
        }
        if t.q < T::lit(-FACTOR_TOL) {
            failures.push(format!("term {i}: negative weight {}", t.q));
        }
        for (name, f) in [("a", &t.a), ("b", &t.b)] {
            if let Some(msg) = factor_problem(f) {
                failures.push(format!("term {i}: factor {name} {msg}"));
            }
        }
    }
    let weight_error = (dec.total_weight().as_f64() - 1.0).abs();
    if weight_error > WEIGHT_TOL {
        failures.push(format!("weights sum to {}", dec.total_weight()));
    }
    let residual = if dec.is_empty() {
        failures.push("no terms".into());
        f64::INFINITY
    } else if !failures.iter().any(|f| f.contains("shapes")) {
        dec.reconstruct().max_abs_diff(rho.matrix()).as_f64()
    } else {
        f64::INFINITY
    };
    if residual > tol {
        failures.push(format!("reconstruction residual {residual:e} exceeds {tol:e}"));
    }
    DecompositionReport { pass: failures.is_empty(), residual, weight_error, terms: dec.len(), failures }
}

fn factor_problem<T: Real>(f: &CMatrix<T>) -> Option<String> {
    let tr = f.trace();
    if (tr.re - T::one()).abs() > T::lit(FACTOR_TOL) || tr.im.abs() > T::lit(FACTOR_TOL) {
        return Some(format!("has trace {tr}"));
    }
    let spec = match hermitian_eig(f) {
        Ok(s) => s,
        Err(e) => return Some(e.to_string()),
    };
    if spec.min() < T::lit(-FACTOR_TOL) {
        return Some(format!("has negative eigenvalue {}", spec.min()));
    }
    let rank = numeric_rank(f, T::lit(DEFAULT_RANK_TOL));
    (rank != 1).then(|| format!("has rank {rank}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{isotropic, named_state, random_separable, IsotropicParam, NamedState};

    #[test]
    fn isotropic_decomposition_verifies() {
        let (rho, _) = isotropic::<f64>(2, IsotropicParam::Fidelity(0.3)).unwrap();
        let r = verify_decomposition(&rho, &isotropic_decomposition(0.3).unwrap(), 1e-10);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn bell_mixture_decomposition_rejects_wrong_state() {
        let rho = named_state::<f64>(&NamedState::BellMixture { p: 0.6 }).unwrap().state;
        let r = verify_decomposition(&rho, &bell_mixture_decomposition(), 1e-8);
        assert!(!r.pass);
        assert!(r.residual > 1e-2);
    }

    #[test]
    fn random_separable_round_trip() {
        let (rho, dec) = random_separable::<f64>(3, 2, 5, 11);
        assert!(verify_decomposition(&rho, &dec, 1e-12).pass);
    }

    #[test]
    fn mixed_factor_is_rejected() {
        let rho = DensityMatrix::<f64>::maximally_mixed(2, 2);
        let half = CMatrix::<f64>::identity(2).scale_real(0.5);
        let dec = SeparableDecomposition::new(vec![ProductTerm { q: 1.0, a: half.clone(), b: half }]);
        let r = verify_decomposition(&rho, &dec, 1e-10);
        assert!(!r.pass);
        assert!(r.residual < 1e-15);
        assert!(r.failures.iter().any(|f| f.contains("rank 2")));
    }
}
