use super::{ProductTerm, SeparableDecomposition};
use crate::duality::MixingMatrix;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{c, Complex, Real};

fn check_fidelity(f: f64) -> Result<()> {
    if !(0.25..=0.5).contains(&f) {
        return Err(Error::DomainError(format!("closed form needs 1/4 <= F <= 1/2, got {f}")));
    }
    Ok(())
}

/// Unitary that turns the two-qubit isotropic Kraus set (ordered Φ+_0, Φ+_1,
/// Ψ+_01, Ψ-_01) into four rank-one operators.
pub fn isotropic_mixing_matrix<T: Real>(f: f64) -> Result<MixingMatrix<T>> {
    check_fidelity(f)?;
    let (alpha, beta) = isotropic_alpha_beta(f);
    let h = 0.5;
    let rows: [[Complex<T>; 4]; 4] = [
        [c(h, 0.), c(-h, 0.), c(-h * alpha, 0.), c(h * beta, 0.)],
        [c(h, 0.), c(h, 0.), c(0., h * beta), c(0., h * alpha)],
        [c(h, 0.), c(-h, 0.), c(h * alpha, 0.), c(-h * beta, 0.)],
        [c(h, 0.), c(h, 0.), c(0., -h * beta), c(0., -h * alpha)],
    ];
    MixingMatrix::new(CMatrix::from_fn(4, 4, |i, j| rows[i][j]))
}

/// `(α, β)` with `α² + β² = 2`.
pub fn isotropic_alpha_beta(f: f64) -> (f64, f64) {
    let den = 2.0 - 2.0 * f;
    (((2.0 * f + 1.0) / den).sqrt(), ((3.0 - 6.0 * f).max(0.0) / den).sqrt())
}

/// The radicals `a, b, c, d` of the product states.
pub fn isotropic_radicals(f: f64) -> [f64; 4] {
    let r = (3.0 - 12.0 * f * f).max(0.0).sqrt();
    let t = 2.0 * 3.0f64.sqrt() * ((1.0 - f) * f).sqrt();
    let s = |x: f64| (x.max(0.0) / 6.0).sqrt();
    // 3 - r - t cancels near F = 1/4; (3 - r - t)(3 + r + t) = 36(4F - 1)² / (u + 2rt).
    let u = 6.0 - 12.0 * f + 24.0 * f * f;
    let a = 6.0 * (4.0 * f - 1.0).abs() / (6.0 * (u + 2.0 * r * t) * (3.0 + r + t)).sqrt();
    [a, s(r + t + 3.0), s(r - t + 3.0), s(3.0 - r + t)]
}

/// The four product vector pairs `(ψ_A, ψ_B)` of the closed-form decomposition.
pub fn isotropic_product_states<T: Real>(f: f64) -> Result<[(Vec<Complex<T>>, Vec<Complex<T>>); 4]> {
    check_fidelity(f)?;
    let [a, b, cc, d] = isotropic_radicals(f);
    Ok([
        (vec![c(a, 0.), c(-b, 0.)], vec![c(cc, 0.), c(-d, 0.)]),
        (vec![c(b, 0.), c(0., -a)], vec![c(d, 0.), c(0., cc)]),
        (vec![c(a, 0.), c(b, 0.)], vec![c(cc, 0.), c(d, 0.)]),
        (vec![c(b, 0.), c(0., a)], vec![c(d, 0.), c(0., -cc)]),
    ])
}

/// Separable decomposition of the two-qubit isotropic state, four terms of weight 1/4.
pub fn isotropic_decomposition<T: Real>(f: f64) -> Result<SeparableDecomposition<T>> {
    let q = T::lit(0.25);
    let terms = isotropic_product_states::<T>(f)?
        .iter()
        .map(|(a, b)| ProductTerm { q, a: CMatrix::projector(a), b: CMatrix::projector(b) })
        .collect();
    Ok(SeparableDecomposition::new(terms))
}

/// Mixing matrix `(1/√2)[[1, i], [1, -i]]` for the equal Bell mixture.
pub fn bell_mixture_mixing_matrix<T: Real>() -> MixingMatrix<T> {
    let h = 0.5f64.sqrt();
    MixingMatrix::new(CMatrix::new(2, 2, vec![c(h, 0.), c(0., h), c(h, 0.), c(0., -h)]).expect("2x2"))
        .expect("unitary")
}

/// `½ ρ1 ⊗ ρ1 + ½ ρ2 ⊗ ρ2` with `ρ1 = ½[[1, i], [-i, 1]]` and `ρ2` its conjugate.
pub fn bell_mixture_decomposition<T: Real>() -> SeparableDecomposition<T> {
    let rho1 = CMatrix::new(2, 2, vec![c(0.5, 0.), c(0., 0.5), c(0., -0.5), c(0.5, 0.)]).expect("2x2");
    let rho2 = rho1.conj();
    let q = T::lit(0.5);
    SeparableDecomposition::new(vec![
        ProductTerm { q, a: rho1.clone(), b: rho1 },
        ProductTerm { q, a: rho2.clone(), b: rho2 },
    ])
}
