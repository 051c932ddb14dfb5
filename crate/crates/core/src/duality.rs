//! State/channel duality: Kraus operators built from ensembles, the Choi
//! reconstruction, and ensemble mixing.
//!
//! Kraus operators are `n x m` (rows in B, columns in A) with
//! `(M_a)_{ji} = √(m p_a) c^(a)_{ij}`.

use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hs_inner, isometry_deviation, vec_dot, vec_norm, vectorize, CMatrix};
use crate::scalar::{Complex, Real};
use crate::states::{to_density, DensityMatrix, Ensemble};

pub const KRAUS_TOL: f64 = 1e-9;
pub const ISOMETRY_TOL: f64 = 1e-8;
pub const SAME_STATE_TOL: f64 = 1e-8;

/// Operators `M_a: C^m → C^n` with `Σ_a Tr M_a†M_a = m`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet<T: Real> {
    dim_a: usize,
    dim_b: usize,
    ops: Vec<CMatrix<T>>,
}

impl<T: Real> KrausSet<T> {
    pub fn new(dim_a: usize, dim_b: usize, ops: Vec<CMatrix<T>>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidKraus("no operators".into()));
        }
        for (a, op) in ops.iter().enumerate() {
            if op.shape() != (dim_b, dim_a) {
                return Err(Error::ShapeMismatch(format!(
                    "operator {a} is {}x{}, expected {dim_b}x{dim_a}",
                    op.rows(),
                    op.cols()
                )));
            }
        }
        let total: T = ops.iter().map(|m| m.frobenius_norm_sqr()).sum();
        if (total - T::lit(dim_a as f64)).abs() > T::lit(KRAUS_TOL) {
            return Err(Error::InvalidKraus(format!("Σ Tr M†M = {total}, expected {dim_a}")));
        }
        Ok(Self { dim_a, dim_b, ops })
    }

    pub(crate) fn from_parts_unchecked(dim_a: usize, dim_b: usize, ops: Vec<CMatrix<T>>) -> Self {
        Self { dim_a, dim_b, ops }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn ops(&self) -> &[CMatrix<T>] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// `p_a = Tr(M_a†M_a)/m` for every operator, zeros included.
    pub fn probabilities(&self) -> Vec<T> {
        let m = T::lit(self.dim_a as f64);
        self.ops.iter().map(|op| op.frobenius_norm_sqr() / m).collect()
    }
}

/// `d' x d` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> MixingMatrix<T> {
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        let dev = isometry_deviation(&matrix);
        if matrix.rows() < matrix.cols() || dev > T::lit(ISOMETRY_TOL) {
            return Err(Error::NotIsometry { deviation: dev.as_f64() });
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix<T>) -> Self {
        Self { matrix }
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: CMatrix::identity(d) }
    }

    /// Haar-distributed isometry: Gram-Schmidt on a complex Gaussian matrix.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Self {
        assert!(rows >= cols, "isometry needs rows >= cols");
        loop {
            let g = CMatrix::<T>::from_fn(rows, cols, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::lit(re), T::lit(im))
            });
            if let Some(q) = orthonormalize_columns(&g) {
                return Self { matrix: q };
            }
        }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }
}

/// Modified Gram-Schmidt; `None` when the columns are numerically dependent.
pub(crate) fn orthonormalize_columns<T: Real>(a: &CMatrix<T>) -> Option<CMatrix<T>> {
    let mut cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(a.cols());
    for j in 0..a.cols() {
        let mut v = a.column(j);
        for _ in 0..2 {
            for u in &cols {
                let proj = vec_dot(u, &v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x = *x - *y * proj;
                }
            }
        }
        let norm = vec_norm(&v);
        if norm < T::lit(1e-8) {
            return None;
        }
        cols.push(v.into_iter().map(|x| x / norm).collect());
    }
    Some(CMatrix::from_columns(a.rows(), &cols))
}

pub fn kraus_from_ensemble<T: Real>(e: &Ensemble<T>) -> KrausSet<T> {
    let m = T::lit(e.dim_a() as f64);
    let ops = e.terms().iter().map(|t| t.c.transpose().scale_real((m * t.p).sqrt())).collect();
    KrausSet::from_parts_unchecked(e.dim_a(), e.dim_b(), ops)
}

/// `Λ[σ] = Σ_a M_a σ M_a†` for an `m x m` input.
pub fn apply_channel<T: Real>(k: &KrausSet<T>, sigma: &CMatrix<T>) -> Result<CMatrix<T>> {
    if sigma.shape() != (k.dim_a, k.dim_a) {
        return Err(Error::ShapeMismatch(format!(
            "channel input must be {0}x{0}, got {1}x{2}",
            k.dim_a,
            sigma.rows(),
            sigma.cols()
        )));
    }
    let mut out = CMatrix::zeros(k.dim_b, k.dim_b);
    for op in &k.ops {
        out = &out + &op.matmul(sigma).matmul(&op.adjoint());
    }
    Ok(out)
}

/// The same map computed from the state: `Λ[σ] = m Tr_A{(σ^T ⊗ I) ρ}`.
pub fn apply_state_channel<T: Real>(rho: &DensityMatrix<T>, sigma: &CMatrix<T>) -> Result<CMatrix<T>> {
    let (m, n) = (rho.dim_a(), rho.dim_b());
    if sigma.shape() != (m, m) {
        return Err(Error::ShapeMismatch(format!(
            "channel input must be {m}x{m}, got {}x{}",
            sigma.rows(),
            sigma.cols()
        )));
    }
    let r = rho.matrix();
    let scale = T::lit(m as f64);
    Ok(CMatrix::from_fn(n, n, |j, l| {
        let mut acc = Complex::zero();
        for i in 0..m {
            for k in 0..m {
                acc = acc + sigma[(k, i)] * r[(k * n + j, i * n + l)];
            }
        }
        acc * scale
    }))
}

/// `(I ⊗ Λ)|Γ><Γ|` with `|Γ> = Σ_i |ii>/√m`.
pub fn choi_reconstruct<T: Real>(k: &KrausSet<T>) -> DensityMatrix<T> {
    let dim = k.dim_a * k.dim_b;
    let inv_m = T::one() / T::lit(k.dim_a as f64);
    let mut rho = CMatrix::zeros(dim, dim);
    for op in &k.ops {
        let v = vectorize(&op.transpose());
        for r in 0..dim {
            if v[r].is_zero() {
                continue;
            }
            let vr = v[r] * inv_m;
            for s in 0..dim {
                rho[(r, s)] = rho[(r, s)] + vr * v[s].conj();
            }
        }
    }
    DensityMatrix::from_parts_unchecked(k.dim_a, k.dim_b, rho)
}

/// `N_μ = Σ_a V_μa M_a`.
pub fn transform<T: Real>(k: &KrausSet<T>, v: &MixingMatrix<T>) -> Result<KrausSet<T>> {
    if v.cols() != k.len() {
        return Err(Error::ShapeMismatch(format!(
            "mixing matrix has {} columns for {} operators",
            v.cols(),
            k.len()
        )));
    }
    let dev = isometry_deviation(&v.matrix);
    if dev > T::lit(ISOMETRY_TOL) {
        return Err(Error::NotIsometry { deviation: dev.as_f64() });
    }
    Ok(KrausSet::from_parts_unchecked(k.dim_a, k.dim_b, mix_ops(&k.ops, &v.matrix)))
}

pub(crate) fn mix_ops<T: Real>(ops: &[CMatrix<T>], v: &CMatrix<T>) -> Vec<CMatrix<T>> {
    let (rows, cols) = ops[0].shape();
    (0..v.rows())
        .map(|mu| {
            let mut n = CMatrix::zeros(rows, cols);
            for (a, op) in ops.iter().enumerate() {
                let w = v[(mu, a)];
                if w.is_zero() {
                    continue;
                }
                for (x, y) in n.as_mut_slice().iter_mut().zip(op.as_slice()) {
                    *x = *x + w * *y;
                }
            }
            n
        })
        .collect()
}

/// Weight and reduced states of one ensemble term, read off its Kraus operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TermReduction<T: Real> {
    /// Position of the operator in the Kraus set.
    pub index: usize,
    pub p: T,
    /// `(M†M)^T / (m p)`.
    pub rho_a: CMatrix<T>,
    /// `MM† / (m p)`.
    pub rho_b: CMatrix<T>,
}

/// Operators with `p <= 1e-15` have no reduced states and are skipped.
pub fn term_reductions<T: Real>(k: &KrausSet<T>) -> Vec<TermReduction<T>> {
    let m = T::lit(k.dim_a as f64);
    k.ops
        .iter()
        .enumerate()
        .filter_map(|(index, op)| {
            let p = op.frobenius_norm_sqr() / m;
            if p <= T::lit(1e-15) {
                return None;
            }
            let w = T::one() / (m * p);
            Some(TermReduction {
                index,
                p,
                rho_a: op.gram().transpose().scale_real(w).hermitian_part(),
                rho_b: op.gram_rows().scale_real(w).hermitian_part(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelProperties {
    /// `Σ M†M = I_A`.
    pub trace_preserving: bool,
    /// `ρ_A = I/m`; equivalent to trace preservation.
    pub rho_a_maximally_mixed: bool,
    /// `Σ MM† = I_B`; requires `m = n`.
    pub unital: bool,
    /// `ρ_B = I/n`.
    pub rho_b_maximally_mixed: bool,
}

pub fn channel_properties<T: Real>(k: &KrausSet<T>) -> ChannelProperties {
    let (m, n) = (k.dim_a, k.dim_b);
    let tol = T::lit(KRAUS_TOL);
    let mut sum_mm = CMatrix::zeros(m, m);
    let mut sum_nn = CMatrix::zeros(n, n);
    for op in &k.ops {
        sum_mm = &sum_mm + &op.gram();
        sum_nn = &sum_nn + &op.gram_rows();
    }
    let rho = choi_reconstruct(k);
    let mixed_a = CMatrix::identity(m).scale_real(T::one() / T::lit(m as f64));
    let mixed_b = CMatrix::identity(n).scale_real(T::one() / T::lit(n as f64));
    ChannelProperties {
        trace_preserving: (&sum_mm - &CMatrix::identity(m)).frobenius_norm() <= tol,
        rho_a_maximally_mixed: (&rho.reduced_a() - &mixed_a).frobenius_norm() <= tol,
        unital: (&sum_nn - &CMatrix::identity(n)).frobenius_norm() <= tol,
        rho_b_maximally_mixed: (&rho.reduced_b() - &mixed_b).frobenius_norm() <= tol,
    }
}

/// `V_μa = Tr(M_a†N_μ) / (m p_a)` for a source with Hilbert-Schmidt orthogonal operators.
pub fn recover_mixing<T: Real>(source: &KrausSet<T>, target: &KrausSet<T>) -> Result<MixingMatrix<T>> {
    if (source.dim_a, source.dim_b) != (target.dim_a, target.dim_b) {
        return Err(Error::ShapeMismatch(format!(
            "source is {}x{}, target is {}x{}",
            source.dim_a, source.dim_b, target.dim_a, target.dim_b
        )));
    }
    let dev = choi_reconstruct(source).matrix().max_abs_diff(choi_reconstruct(target).matrix());
    if dev > T::lit(SAME_STATE_TOL) {
        return Err(Error::NotSameState { deviation: dev.as_f64() });
    }
    let probs = source.probabilities();
    let m = T::lit(source.dim_a as f64);
    let mut v = CMatrix::zeros(target.len(), source.len());
    for (mu, n) in target.ops.iter().enumerate() {
        for (a, op) in source.ops.iter().enumerate() {
            v[(mu, a)] = hs_inner(op, n).expect("same shape") / (m * probs[a]);
        }
    }
    MixingMatrix::new(v)
}

/// Kraus set of the ensemble that realizes `ρ` spectrally.
pub fn spectral_kraus<T: Real>(rho: &DensityMatrix<T>) -> KrausSet<T> {
    kraus_from_ensemble(&crate::states::spectral_ensemble(rho, T::lit(crate::states::DEFAULT_EIG_TOL)))
}

/// True when every operator of the set is Hilbert-Schmidt orthogonal to the others.
pub fn is_hs_orthogonal<T: Real>(k: &KrausSet<T>, tol: T) -> bool {
    k.ops.iter().enumerate().all(|(a, x)| {
        k.ops.iter().skip(a + 1).all(|y| hs_inner(x, y).expect("same shape").norm() <= tol)
    })
}

/// Consistency check used in tests and the CLI: does the Kraus set realize `e`?
pub fn realizes<T: Real>(k: &KrausSet<T>, e: &Ensemble<T>, tol: T) -> bool {
    choi_reconstruct(k).matrix().max_abs_diff(to_density(e).matrix()) <= tol
}

impl<T: Real> KrausSet<T> {
    /// The single-operator set `{I}` on `C^d`.
    pub fn identity_channel(d: usize) -> Self {
        Self::from_parts_unchecked(d, d, vec![CMatrix::identity(d)])
    }
}
