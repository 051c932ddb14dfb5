use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use super::DensityMatrix;
use crate::decompose::{ProductTerm, SeparableDecomposition};
use crate::linalg::{vec_norm, CMatrix};
use crate::scalar::{Complex, Real};

/// Haar-random unit vector in `C^dim`.
pub fn random_unit_vector<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Complex<T>> {
    loop {
        let v: Vec<Complex<T>> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::lit(re), T::lit(im))
            })
            .collect();
        let norm = vec_norm(&v);
        if norm > T::lit(1e-6) {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn random_product_vector<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    n: usize,
) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let a = random_unit_vector(rng, m);
    let b = random_unit_vector(rng, n);
    (a, b)
}

/// Random state of rank at most `rank`: `GG†/Tr(GG†)` with Gaussian `G`.
pub fn random_state<T: Real>(m: usize, n: usize, rank: usize, seed: u64) -> DensityMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = m * n;
    let g = CMatrix::from_fn(dim, rank.max(1), |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(T::lit(re), T::lit(im))
    });
    let rho = g.gram_rows();
    let tr = rho.trace().re;
    DensityMatrix::from_parts_unchecked(m, n, rho.scale_real(T::one() / tr).hermitian_part())
}

/// Convex mixture of `k` random product projectors with weights drawn
/// uniformly from the simplex, together with the decomposition that built it.
pub fn random_separable<T: Real>(
    m: usize,
    n: usize,
    k: usize,
    seed: u64,
) -> (DensityMatrix<T>, SeparableDecomposition<T>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = k.max(1);
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1) + 1e-12).collect();
    let total: f64 = raw.iter().sum();
    let terms: Vec<ProductTerm<T>> = raw
        .iter()
        .map(|w| {
            let (a, b) = random_product_vector::<T, _>(&mut rng, m, n);
            ProductTerm { q: T::lit(w / total), a: CMatrix::projector(&a), b: CMatrix::projector(&b) }
        })
        .collect();
    let dec = SeparableDecomposition::new(terms);
    let rho = dec.reconstruct().hermitian_part();
    (DensityMatrix::from_parts_unchecked(m, n, rho), dec)
}
