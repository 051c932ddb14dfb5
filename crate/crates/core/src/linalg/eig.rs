use num_traits::{One, Zero};

use super::{fix_phase, vec_dot, vec_norm, CMatrix};
use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};

/// Relative singular-value cut used by [`numeric_rank`] unless overridden.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

const HERMITIAN_INPUT_TOL: f64 = 1e-8;
const JACOBI_REL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a Hermitian matrix.
///
/// `values` are sorted non-increasing; column `i` of `vectors` is the unit
/// eigenvector for `values[i]`, with its largest-modulus component made
/// real and positive.
#[derive(Debug, Clone)]
pub struct Spectrum<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn vector(&self, i: usize) -> Vec<Complex<T>> {
        self.vectors.column(i)
    }

    /// `V diag(values) V^dagger`.
    pub fn reconstruct(&self) -> CMatrix<T> {
        let n = self.values.len();
        let scaled = CMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * self.values[j]);
        scaled.matmul(&self.vectors.adjoint())
    }

    pub fn max(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn min(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// Fails with [`Error::NotHermitian`] when some entry of `A - A^dagger`
/// exceeds 1e-8 in modulus; smaller asymmetries are averaged away.
pub fn hermitian_eig<T: Real>(a: &CMatrix<T>) -> Result<Spectrum<T>> {
    let deviation = a
        .hermitian_deviation()
        .ok_or_else(|| Error::ShapeMismatch(format!("hermitian_eig needs a square matrix, got {}x{}", a.rows(), a.cols())))?;
    if deviation > T::lit(HERMITIAN_INPUT_TOL) {
        return Err(Error::NotHermitian { deviation: deviation.as_f64() });
    }
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = CMatrix::<T>::identity(n);

    let norm = m.frobenius_norm();
    let tol = norm * T::lit(JACOBI_REL_TOL).max(T::epsilon() * T::lit(4.0));
    if norm > T::zero() {
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_norm(&m) <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut m, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| m[(i, i)].re).collect();
    // stable: equal eigenvalues keep solver order
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap_or(std::cmp::Ordering::Equal));

    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = v.column(i);
        fix_phase(&mut col);
        vectors.set_column(k, &col);
        values.push(diag[i]);
    }
    Ok(Spectrum { values, vectors })
}

fn off_diagonal_norm<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One unitary rotation `A <- R^dagger A R`, `V <- V R` zeroing `A[p][q]`.
fn rotate<T: Real>(m: &mut CMatrix<T>, v: &mut CMatrix<T>, p: usize, q: usize) {
    let b = m[(p, q)];
    let babs = b.norm();
    if babs == T::zero() {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // negligible relative to both diagonal entries: the rotation would be lost in round-off
    let eps = T::epsilon();
    if babs <= eps * eps * (app.abs() + aqq.abs()) {
        m[(p, q)] = Complex::zero();
        m[(q, p)] = Complex::zero();
        return;
    }
    let phase = b / babs; // e^{i phi}
    let theta = (aqq - app) / (T::lit(2.0) * babs);
    let t = if theta.abs() > T::lit(1e150) {
        T::one() / (T::lit(2.0) * theta)
    } else {
        let s = if theta >= T::zero() { T::one() } else { -T::one() };
        s / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;

    let emi = phase.conj();
    let r_pp = Complex::new(c, T::zero());
    let r_pq = Complex::new(s, T::zero());
    let r_qp = emi * (-s);
    let r_qq = emi * c;

    let n = m.rows();
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * r_pp + akq * r_qp;
        m[(k, q)] = akp * r_pq + akq * r_qq;
    }
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = r_pp.conj() * apk + r_qp.conj() * aqk;
        m[(q, k)] = r_pq.conj() * apk + r_qq.conj() * aqk;
    }
    m[(p, q)] = Complex::zero();
    m[(q, p)] = Complex::zero();
    m[(p, p)] = Complex::new(m[(p, p)].re, T::zero());
    m[(q, q)] = Complex::new(m[(q, q)].re, T::zero());

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * r_pp + vkq * r_qp;
        v[(k, q)] = vkp * r_pq + vkq * r_qq;
    }
}

/// Thin singular value decomposition `A = U diag(values) W^dagger`.
#[derive(Debug, Clone)]
pub struct Svd<T: Real> {
    /// Non-increasing, length `min(rows, cols)`.
    pub values: Vec<T>,
    /// `rows x q`, orthonormal columns.
    pub u: CMatrix<T>,
    /// `cols x q`, orthonormal columns.
    pub w: CMatrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn reconstruct(&self) -> CMatrix<T> {
        let q = self.values.len();
        let us = CMatrix::from_fn(self.u.rows(), q, |i, j| self.u[(i, j)] * self.values[j]);
        us.matmul(&self.w.adjoint())
    }
}

/// Singular value decomposition through the Hermitian eigensolver applied to
/// the smaller Gram matrix. Singular values are recomputed as `|A w_i|`,
/// which keeps zero singular values at round-off level instead of `sqrt(eps)`.
pub fn svd<T: Real>(a: &CMatrix<T>) -> Svd<T> {
    if a.cols() > a.rows() {
        let t = svd_tall(&a.adjoint());
        return Svd { values: t.values, u: t.w, w: t.u };
    }
    svd_tall(a)
}

fn svd_tall<T: Real>(a: &CMatrix<T>) -> Svd<T> {
    let (rows, cols) = a.shape();
    let q = cols;
    if q == 0 {
        return Svd { values: vec![], u: CMatrix::zeros(rows, 0), w: CMatrix::zeros(0, 0) };
    }
    let spec = hermitian_eig(&a.gram()).expect("Gram matrix is Hermitian");
    let mut pairs: Vec<(T, Vec<Complex<T>>, Vec<Complex<T>>)> = (0..q)
        .map(|i| {
            let w = spec.vector(i);
            let aw = a.mul_vec(&w);
            (vec_norm(&aw), w, aw)
        })
        .collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));

    let sigma1 = pairs[0].0;
    let floor = sigma1 * T::epsilon() * T::lit(100.0);
    let mut us: Vec<Vec<Complex<T>>> = Vec::with_capacity(q);
    let mut pending = Vec::new();
    for (k, (_, _, aw)) in pairs.iter().enumerate() {
        let mut u = aw.clone();
        orthogonalize(&mut u, &us);
        let nrm = vec_norm(&u);
        if nrm > floor && nrm > T::zero() {
            us.push(u.iter().map(|z| *z / nrm).collect());
        } else {
            us.push(vec![Complex::zero(); rows]);
            pending.push(k);
        }
    }
    // orthonormal completion for (numerically) null directions
    let mut basis_idx = 0;
    for k in pending {
        loop {
            assert!(basis_idx < rows, "orthonormal completion ran out of basis vectors");
            let mut e = vec![Complex::zero(); rows];
            e[basis_idx] = Complex::one();
            basis_idx += 1;
            let others: Vec<Vec<Complex<T>>> =
                us.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, u)| u.clone()).collect();
            orthogonalize(&mut e, &others);
            orthogonalize(&mut e, &others);
            let nrm = vec_norm(&e);
            if nrm > T::lit(1e-3) {
                us[k] = e.iter().map(|z| *z / nrm).collect();
                break;
            }
        }
    }
    let values = pairs.iter().map(|p| p.0).collect();
    let w = CMatrix::from_columns(cols, &pairs.iter().map(|p| p.1.clone()).collect::<Vec<_>>());
    let u = CMatrix::from_columns(rows, &us);
    Svd { values, u, w }
}

fn orthogonalize<T: Real>(v: &mut [Complex<T>], basis: &[Vec<Complex<T>>]) {
    for b in basis {
        let proj = vec_dot(b, v);
        if proj.is_zero() {
            continue;
        }
        for (x, y) in v.iter_mut().zip(b) {
            *x = *x - *y * proj;
        }
    }
}

/// Singular values only, non-increasing.
pub fn singular_values<T: Real>(a: &CMatrix<T>) -> Vec<T> {
    svd(a).values
}

/// Number of singular values above `rel_tol * sigma_1`; zero for the zero matrix.
pub fn numeric_rank<T: Real>(a: &CMatrix<T>, rel_tol: T) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&s1) if s1 > T::zero() => s.iter().filter(|&&x| x > rel_tol * s1).count(),
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::isometry_deviation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix<f64> {
        CMatrix::from_fn(r, c, |_, _| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn identity_and_diagonal() {
        let s = hermitian_eig(&CMatrix::<f64>::identity(2)).unwrap();
        assert_eq!(s.values, vec![1.0, 1.0]);
        let d = CMatrix::<f64>::diag_real(&[0.25, 0.75]);
        let s = hermitian_eig(&d).unwrap();
        assert_eq!(s.values, vec![0.75, 0.25]);
    }

    #[test]
    fn reduced_state_of_unequal_superposition() {
        // Tr_B of sqrt(2/3)|00> + sqrt(1/3)|11>
        let rho_a = CMatrix::<f64>::diag_real(&[2.0 / 3.0, 1.0 / 3.0]);
        let s = hermitian_eig(&rho_a).unwrap();
        assert!((s.values[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.values[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = CMatrix::<f64>::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(hermitian_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn random_hermitian_reconstruction_up_to_25() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 3, 5, 9, 16, 25] {
            for _ in 0..4 {
                let g = random_matrix(&mut rng, n, n);
                let h = &g + &g.adjoint();
                let s = hermitian_eig(&h).unwrap();
                assert!(s.reconstruct().max_abs_diff(&h) < 1e-10, "n={n}");
                assert!(isometry_deviation(&s.vectors) < 1e-10);
                assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let h = CMatrix::<f64>::from_real_rows(&[&[2.0, 0.0, 0.0], &[0.0, 1.0, 1.0], &[0.0, 1.0, 1.0]]);
        let s = hermitian_eig(&h).unwrap();
        assert!((s.values[0] - 2.0).abs() < 1e-14 && (s.values[1] - 2.0).abs() < 1e-14);
        assert!(s.values[2].abs() < 1e-14);
        assert!(s.reconstruct().max_abs_diff(&h) < 1e-13);
    }

    #[test]
    fn svd_examples() {
        let z = CMatrix::<f64>::zeros(3, 2);
        let s = svd(&z);
        assert_eq!(s.values, vec![0.0, 0.0]);
        assert!(isometry_deviation(&s.u) < 1e-14);

        let h = 1.0 / 2f64.sqrt();
        let u = CMatrix::<f64>::new(2, 2, vec![
            Complex::new(h, 0.0), Complex::new(0.0, h),
            Complex::new(0.0, h), Complex::new(h, 0.0),
        ])
        .unwrap();
        let s = svd(&u);
        assert!((s.values[0] - 1.0).abs() < 1e-14 && (s.values[1] - 1.0).abs() < 1e-14);

        // sqrt(p) * flip with p = 1/2; oracle: eigenvalues of M^dagger M = diag(1/2, 1/2)
        let m = CMatrix::<f64>::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).scale_real(0.5f64.sqrt());
        let oracle = hermitian_eig(&m.gram()).unwrap();
        let s = svd(&m);
        for (sv, ev) in s.values.iter().zip(&oracle.values) {
            assert!((sv - ev.sqrt()).abs() < 1e-15);
            assert!((sv - 0.5f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn svd_reconstructs_rectangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (r, c) in [(3, 2), (2, 3), (4, 4), (9, 3), (1, 5), (5, 1)] {
            let a = random_matrix(&mut rng, r, c);
            let s = svd(&a);
            assert_eq!(s.values.len(), r.min(c));
            assert!(s.reconstruct().max_abs_diff(&a) < 1e-12, "{r}x{c}");
            assert!(isometry_deviation(&s.u) < 1e-12);
            assert!(isometry_deviation(&s.w) < 1e-12);
        }
    }

    #[test]
    fn svd_rank_deficient_keeps_zero_singular_values_small() {
        let u = vec![Complex::new(0.3, 0.1), Complex::new(-0.2, 0.5), Complex::new(0.7, 0.0)];
        let v = vec![Complex::new(1.0, -0.4), Complex::new(0.2, 0.2), Complex::new(0.0, 0.9)];
        let a = CMatrix::<f64>::outer(&u, &v);
        let s = svd(&a);
        assert!(s.values[1] < 1e-14 && s.values[2] < 1e-14);
        assert!(s.reconstruct().max_abs_diff(&a) < 1e-14);
        assert_eq!(numeric_rank(&a, DEFAULT_RANK_TOL), 1);
    }

    #[test]
    fn numeric_rank_examples() {
        let p0 = CMatrix::<f64>::diag_real(&[1.0, 0.0]);
        assert_eq!(numeric_rank(&p0, 1e-8), 1);
        assert_eq!(numeric_rank(&CMatrix::<f64>::identity(3), 1e-8), 3);
        assert_eq!(numeric_rank(&CMatrix::<f64>::zeros(2, 2), 1e-8), 0);
    }

    #[test]
    fn works_in_single_precision() {
        let h = CMatrix::<f32>::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let s = hermitian_eig(&h).unwrap();
        assert!((s.values[0] - 3.0).abs() < 1e-5 && (s.values[1] - 1.0).abs() < 1e-5);
        let sv = svd(&h);
        assert!(sv.reconstruct().max_abs_diff(&h) < 1e-5);
    }
}
