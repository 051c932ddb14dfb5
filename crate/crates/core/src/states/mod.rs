//! Bipartite density matrices, pure-state ensembles, and the concrete state
//! families used throughout the toolkit.
//!
//! Basis ordering is `|i>_A ⊗ |j>_B ↦ i·n + j` with `m = dim_a`, `n = dim_b`.
//! No `m <= n` convention is imposed: anything indexed by subsystem A uses
//! `dim_a`.

mod named;
mod random;

use std::cmp::Ordering;

use num_traits::Zero;

pub use named::{
    isotropic, isotropic_alpha, isotropic_auxiliary_states, isotropic_fidelity, named_state, upb_tiles, IsotropicParam,
    NamedOutput, NamedState, Sign, StateParams, UpbTiles, NAMED_STATES,
};
pub use random::{random_product_vector, random_separable, random_state, random_unit_vector};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, matricize, vectorize, CMatrix, Spectrum};
use crate::scalar::{Complex, Real};

/// Tolerance for the density-matrix invariants (Hermiticity, trace, positivity).
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues at or below this are treated as absent from the spectral ensemble.
pub const DEFAULT_EIG_TOL: f64 = 1e-10;
const TIE_TOL: f64 = 1e-12;

/// Hermitian, positive semidefinite, unit-trace operator on `C^m ⊗ C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    dim_a: usize,
    dim_b: usize,
    matrix: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates the invariants and stores the Hermitian part of `matrix`.
    pub fn new(dim_a: usize, dim_b: usize, matrix: CMatrix<T>) -> Result<Self> {
        let dim = dim_a * dim_b;
        if dim == 0 || matrix.shape() != (dim, dim) {
            return Err(Error::ShapeMismatch(format!(
                "state on {dim_a}x{dim_b} needs a {dim}x{dim} matrix, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let tol = T::lit(STATE_TOL);
        let dev = matrix.hermitian_deviation().expect("square");
        if dev > tol {
            return Err(Error::NotHermitian { deviation: dev.as_f64() });
        }
        let matrix = matrix.hermitian_part();
        let tr = matrix.trace();
        if (tr.re - T::one()).abs() > tol {
            return Err(Error::TraceNotOne { trace: tr.re.as_f64() });
        }
        let min = hermitian_eig(&matrix)?.min();
        if min < -tol {
            return Err(Error::NotPsd { min_eigenvalue: min.as_f64() });
        }
        Ok(Self { dim_a, dim_b, matrix })
    }

    /// For matrices that are valid by construction (sums of weighted projectors).
    pub(crate) fn from_parts_unchecked(dim_a: usize, dim_b: usize, matrix: CMatrix<T>) -> Self {
        debug_assert_eq!(matrix.shape(), (dim_a * dim_b, dim_a * dim_b));
        Self { dim_a, dim_b, matrix }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    /// `ρ_A = Tr_B ρ`.
    pub fn reduced_a(&self) -> CMatrix<T> {
        partial_trace_b(&self.matrix, self.dim_a, self.dim_b)
    }

    /// `ρ_B = Tr_A ρ`.
    pub fn reduced_b(&self) -> CMatrix<T> {
        partial_trace_a(&self.matrix, self.dim_a, self.dim_b)
    }

    /// Partial transpose on subsystem B.
    pub fn partial_transpose_b(&self) -> CMatrix<T> {
        partial_transpose_b(&self.matrix, self.dim_a, self.dim_b)
    }

    pub fn spectrum(&self) -> Spectrum<T> {
        hermitian_eig(&self.matrix).expect("density matrix is Hermitian")
    }

    pub fn maximally_mixed(dim_a: usize, dim_b: usize) -> Self {
        let n = dim_a * dim_b;
        let w = T::one() / T::lit(n as f64);
        Self::from_parts_unchecked(dim_a, dim_b, CMatrix::identity(n).scale_real(w))
    }

    /// Projector onto a normalized pure state.
    pub fn pure(dim_a: usize, dim_b: usize, psi: &[Complex<T>]) -> Result<Self> {
        Self::new(dim_a, dim_b, CMatrix::projector(psi))
    }
}

/// `Tr_B` of an `(mn)x(mn)` matrix.
pub fn partial_trace_b<T: Real>(rho: &CMatrix<T>, m: usize, n: usize) -> CMatrix<T> {
    CMatrix::from_fn(m, m, |i, k| (0..n).fold(Complex::zero(), |acc, j| acc + rho[(i * n + j, k * n + j)]))
}

/// `Tr_A` of an `(mn)x(mn)` matrix.
pub fn partial_trace_a<T: Real>(rho: &CMatrix<T>, m: usize, n: usize) -> CMatrix<T> {
    CMatrix::from_fn(n, n, |j, l| (0..m).fold(Complex::zero(), |acc, i| acc + rho[(i * n + j, i * n + l)]))
}

/// `(I ⊗ T) ρ`: transposes the B indices.
pub fn partial_transpose_b<T: Real>(rho: &CMatrix<T>, m: usize, n: usize) -> CMatrix<T> {
    CMatrix::from_fn(m * n, m * n, |r, s| {
        let (i, j) = (r / n, r % n);
        let (k, l) = (s / n, s % n);
        rho[(i * n + l, k * n + j)]
    })
}

/// One weighted pure state of an ensemble: `|Ψ> = Σ c_ij |i>|j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleTerm<T: Real> {
    pub p: T,
    /// `dim_a x dim_b` coefficient matrix.
    pub c: CMatrix<T>,
}

/// Ensemble realization `ρ = Σ_a p_a |Ψ_a><Ψ_a|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<T: Real> {
    dim_a: usize,
    dim_b: usize,
    terms: Vec<EnsembleTerm<T>>,
}

impl<T: Real> Ensemble<T> {
    pub fn new(dim_a: usize, dim_b: usize, terms: Vec<EnsembleTerm<T>>) -> Result<Self> {
        let tol = T::lit(STATE_TOL);
        if terms.is_empty() {
            return Err(Error::InvalidEnsemble("no terms".into()));
        }
        let mut total = T::zero();
        for (a, t) in terms.iter().enumerate() {
            if t.c.shape() != (dim_a, dim_b) {
                return Err(Error::ShapeMismatch(format!(
                    "term {a}: coefficient matrix is {}x{}, expected {dim_a}x{dim_b}",
                    t.c.rows(),
                    t.c.cols()
                )));
            }
            if !(t.p > T::zero()) {
                return Err(Error::InvalidEnsemble(format!("term {a}: probability {} is not positive", t.p)));
            }
            let norm = t.c.frobenius_norm();
            if (norm - T::one()).abs() > tol {
                return Err(Error::InvalidEnsemble(format!("term {a}: coefficient norm {norm} != 1")));
            }
            total = total + t.p;
        }
        if (total - T::one()).abs() > tol {
            return Err(Error::InvalidEnsemble(format!("probabilities sum to {total}")));
        }
        Ok(Self { dim_a, dim_b, terms })
    }

    /// Builds terms from `(p, |Ψ>)` pairs with `|Ψ>` in the product basis.
    pub fn from_vectors(dim_a: usize, dim_b: usize, terms: &[(T, Vec<Complex<T>>)]) -> Result<Self> {
        let terms = terms
            .iter()
            .map(|(p, v)| Ok(EnsembleTerm { p: *p, c: matricize(v, dim_a, dim_b)? }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim_a, dim_b, terms)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn terms(&self) -> &[EnsembleTerm<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.terms.iter().map(|t| t.p).collect()
    }

    /// Multiplies each coefficient matrix by a unit phase; the realized state is unchanged.
    pub fn with_phases(&self, phases: &[T]) -> Self {
        assert_eq!(phases.len(), self.terms.len());
        let terms = self
            .terms
            .iter()
            .zip(phases)
            .map(|(t, th)| EnsembleTerm { p: t.p, c: t.c.scale(Complex::from_polar(T::one(), *th)) })
            .collect();
        Self { dim_a: self.dim_a, dim_b: self.dim_b, terms }
    }
}

/// `ρ_{kl,mn} = Σ_a p_a c^(a)_{kl} (c^(a)_{mn})^*`.
pub fn to_density<T: Real>(e: &Ensemble<T>) -> DensityMatrix<T> {
    let dim = e.dim_a * e.dim_b;
    let mut rho = CMatrix::zeros(dim, dim);
    for t in &e.terms {
        let v = vectorize(&t.c);
        for r in 0..dim {
            let vr = v[r] * t.p;
            if vr.is_zero() {
                continue;
            }
            for s in 0..dim {
                rho[(r, s)] = rho[(r, s)] + vr * v[s].conj();
            }
        }
    }
    DensityMatrix::from_parts_unchecked(e.dim_a, e.dim_b, rho)
}

/// Spectral decomposition of `ρ` as an ensemble.
///
/// Keeps eigenpairs with eigenvalue above `eig_tol` and renormalizes their
/// weights to sum to one. Terms come in non-increasing `p`; eigenvalues within
/// 1e-12 of each other are ordered by lexicographic comparison of their
/// (phase-fixed) eigenvectors.
pub fn spectral_ensemble<T: Real>(rho: &DensityMatrix<T>, eig_tol: T) -> Ensemble<T> {
    let spec = rho.spectrum();
    let mut kept: Vec<(T, Vec<Complex<T>>)> = spec
        .values
        .iter()
        .enumerate()
        .filter(|(_, &lam)| lam > eig_tol)
        .map(|(i, &lam)| (lam, spec.vector(i)))
        .collect();
    order_ties(&mut kept);
    let total: T = kept.iter().map(|(p, _)| *p).sum();
    let terms = kept
        .into_iter()
        .map(|(p, v)| EnsembleTerm { p: p / total, c: matricize(&v, rho.dim_a, rho.dim_b).expect("length mn") })
        .collect();
    Ensemble { dim_a: rho.dim_a, dim_b: rho.dim_b, terms }
}

fn order_ties<T: Real>(kept: &mut [(T, Vec<Complex<T>>)]) {
    let tie = T::lit(TIE_TOL);
    let mut start = 0;
    while start < kept.len() {
        let mut end = start + 1;
        while end < kept.len() && (kept[end - 1].0 - kept[end].0).abs() <= tie {
            end += 1;
        }
        kept[start..end].sort_by(|x, y| lexicographic(&x.1, &y.1));
        start = end;
    }
}

fn lexicographic<T: Real>(u: &[Complex<T>], v: &[Complex<T>]) -> Ordering {
    for (a, b) in u.iter().zip(v) {
        let o = a.re.as_f64().total_cmp(&b.re.as_f64()).then(a.im.as_f64().total_cmp(&b.im.as_f64()));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// True when two eigenvalues kept in the spectral ensemble coincide within
/// 1e-12, i.e. the term partition depends on the eigensolver's basis choice.
pub fn has_degenerate_terms<T: Real>(e: &Ensemble<T>) -> bool {
    let tie = T::lit(TIE_TOL);
    e.terms.windows(2).any(|w| (w[0].p - w[1].p).abs() <= tie)
}
