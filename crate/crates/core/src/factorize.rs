//! Gram factorization `ρ = 𝔐𝔐†`, where column `a` of `𝔐` is `√p_a vec(c^(a))`.

use serde::Serialize;

use crate::decompose::{ProductTerm, SeparableDecomposition};
use crate::duality::{MixingMatrix, ISOMETRY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{fix_phase, isometry_deviation, matricize, numeric_rank, svd, vectorize, CMatrix, DEFAULT_RANK_TOL};
use crate::scalar::Real;
use crate::states::{DensityMatrix, Ensemble, EnsembleTerm};

const ZERO_COLUMN: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct GramFactor<T: Real> {
    dim_a: usize,
    dim_b: usize,
    matrix: CMatrix<T>,
}

impl<T: Real> GramFactor<T> {
    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    /// `𝔐𝔐†`.
    pub fn density(&self) -> CMatrix<T> {
        self.matrix.gram_rows()
    }

    /// Matricized columns as an ensemble; zero columns are dropped.
    pub fn to_ensemble(&self) -> Result<Ensemble<T>> {
        let terms = self
            .columns()
            .into_iter()
            .map(|(p, c)| EnsembleTerm { p, c: c.scale_real(T::one() / p.sqrt()) })
            .collect();
        Ensemble::new(self.dim_a, self.dim_b, terms)
    }

    /// `(‖col‖², matricized col)` for each nonzero column.
    fn columns(&self) -> Vec<(T, CMatrix<T>)> {
        (0..self.matrix.cols())
            .filter_map(|j| {
                let col = self.matrix.column(j);
                let p: T = col.iter().map(|x| x.norm_sqr()).sum();
                (p > T::lit(ZERO_COLUMN)).then(|| (p, matricize(&col, self.dim_a, self.dim_b).expect("mn rows")))
            })
            .collect()
    }
}

pub fn gram_from_ensemble<T: Real>(e: &Ensemble<T>) -> GramFactor<T> {
    let cols: Vec<_> = e
        .terms()
        .iter()
        .map(|t| vectorize(&t.c).into_iter().map(|x| x * t.p.sqrt()).collect())
        .collect();
    GramFactor { dim_a: e.dim_a(), dim_b: e.dim_b(), matrix: CMatrix::from_columns(e.dim_a() * e.dim_b(), &cols) }
}

/// `𝔐 → 𝔐 V^T`, so that column `μ` corresponds to `N_μ = Σ_a V_μa M_a`.
///
/// With `zero_pad`, a `𝔐` with fewer columns than `V` has is padded with zero columns first.
pub fn apply_mixing_to_gram<T: Real>(g: &GramFactor<T>, v: &MixingMatrix<T>, zero_pad: bool) -> Result<GramFactor<T>> {
    let dev = isometry_deviation(v.matrix());
    if dev > T::lit(ISOMETRY_TOL) {
        return Err(Error::NotIsometry { deviation: dev.as_f64() });
    }
    let have = g.matrix.cols();
    let mut base = g.matrix.clone();
    if v.cols() != have {
        if !(zero_pad && v.cols() > have) {
            return Err(Error::ShapeMismatch(format!("mixing matrix has {} columns, factor has {have}", v.cols())));
        }
        let rows = base.rows();
        base = CMatrix::from_fn(rows, v.cols(), |i, j| if j < have { g.matrix[(i, j)] } else { Default::default() });
    }
    Ok(GramFactor { dim_a: g.dim_a, dim_b: g.dim_b, matrix: base.matmul(&v.matrix().transpose()) })
}

#[derive(Debug, Clone, PartialEq)]
pub enum GramCertificate<T: Real> {
    Certified(SeparableDecomposition<T>),
    /// Column `column` matricizes to a matrix of rank `rank`.
    NotCertified { column: usize, rank: usize },
}

/// Every nonzero column `√p ξη†` of rank one yields the term `p, ξξ†, η̄η̄†`.
pub fn separability_certificate_from_gram<T: Real>(g: &GramFactor<T>) -> GramCertificate<T> {
    let mut terms = Vec::new();
    for j in 0..g.matrix.cols() {
        let col = g.matrix.column(j);
        let p: T = col.iter().map(|x| x.norm_sqr()).sum();
        if p <= T::lit(ZERO_COLUMN) {
            continue;
        }
        let a = matricize(&col, g.dim_a, g.dim_b).expect("mn rows");
        let rank = numeric_rank(&a, T::lit(DEFAULT_RANK_TOL));
        if rank != 1 {
            return GramCertificate::NotCertified { column: j, rank };
        }
        let s = svd(&a);
        let mut xi = s.u.column(0);
        let mut eta: Vec<_> = s.w.column(0).into_iter().map(|x| x.conj()).collect();
        fix_phase(&mut xi);
        fix_phase(&mut eta);
        terms.push(ProductTerm { q: p, a: CMatrix::projector(&xi), b: CMatrix::projector(&eta) });
    }
    GramCertificate::Certified(SeparableDecomposition::new(terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankData {
    pub rank_ab: usize,
    pub rank_a: usize,
    pub rank_b: usize,
    pub inequality_holds: bool,
}

pub fn rank_theorem_data<T: Real>(rho: &DensityMatrix<T>) -> RankData {
    let tol = T::lit(DEFAULT_RANK_TOL);
    let rank_ab = numeric_rank(rho.matrix(), tol);
    let rank_a = numeric_rank(&rho.reduced_a(), tol);
    let rank_b = numeric_rank(&rho.reduced_b(), tol);
    RankData { rank_ab, rank_a, rank_b, inequality_holds: rank_ab >= rank_a.max(rank_b) }
}
