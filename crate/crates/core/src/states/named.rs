use num_traits::Zero;

use super::{to_density, DensityMatrix, Ensemble, EnsembleTerm};
use crate::error::{Error, Result};
use crate::linalg::{matricize, CMatrix};
use crate::scalar::{c, Complex, Real};

/// Names accepted by [`NamedState::from_name`], with a one-line description.
pub const NAMED_STATES: &[(&str, &str)] = &[
    ("bell", "|Φ+> = (|00> + |11>)/√2 on 2x2"),
    ("bell-mixture", "p|ψ+><ψ+| + (1-p)|φ-><φ-| on 2x2; needs p"),
    ("pm-mixture", "p|Ψ±><Ψ±| + (1-p)|00><00| on 2x2; needs p, sign"),
    ("example-2", "alias for pm-mixture with sign plus; needs p"),
    ("isotropic", "α|Φ+><Φ+| + (1-α)/d² I on dxd; needs F or alpha, d defaults to 2"),
    ("five-by-five", "2/3|ψ1><ψ1| + 1/3|ψ2><ψ2| on 5x5"),
    ("upb-tiles", "bound entangled Tiles state on 3x3"),
    ("maximally-mixed", "I/(mn); dim_a and dim_b default to 2"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            other => Err(Error::Parse(format!("sign must be plus or minus, got {other:?}"))),
        }
    }
}

/// Isotropic-family parameter: mixing weight α or fidelity F.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IsotropicParam {
    Alpha(f64),
    Fidelity(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum NamedState {
    Bell,
    BellMixture { p: f64 },
    PmMixture { p: f64, sign: Sign },
    Isotropic { d: usize, param: IsotropicParam },
    FiveByFive,
    UpbTiles,
    MaximallyMixed { dim_a: usize, dim_b: usize },
}

/// Loose parameter bag, filled from CLI flags or code.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StateParams {
    pub p: Option<f64>,
    pub d: Option<usize>,
    pub fidelity: Option<f64>,
    pub alpha: Option<f64>,
    pub sign: Option<Sign>,
    pub dim_a: Option<usize>,
    pub dim_b: Option<usize>,
}

impl NamedState {
    pub fn from_name(name: &str, params: &StateParams) -> Result<Self> {
        let need_p = |what: &str| params.p.ok_or_else(|| Error::DomainError(format!("{what} requires p")));
        Ok(match name {
            "bell" => NamedState::Bell,
            "bell-mixture" => NamedState::BellMixture { p: need_p(name)? },
            "pm-mixture" => NamedState::PmMixture { p: need_p(name)?, sign: params.sign.unwrap_or(Sign::Plus) },
            "example-2" => NamedState::PmMixture { p: need_p(name)?, sign: Sign::Plus },
            "isotropic" => {
                let param = match (params.fidelity, params.alpha) {
                    (Some(f), None) => IsotropicParam::Fidelity(f),
                    (None, Some(a)) => IsotropicParam::Alpha(a),
                    (Some(_), Some(_)) => return Err(Error::DomainError("give either F or alpha, not both".into())),
                    (None, None) => return Err(Error::DomainError("isotropic requires F or alpha".into())),
                };
                NamedState::Isotropic { d: params.d.unwrap_or(2), param }
            }
            "five-by-five" => NamedState::FiveByFive,
            "upb-tiles" => NamedState::UpbTiles,
            "maximally-mixed" => {
                NamedState::MaximallyMixed { dim_a: params.dim_a.unwrap_or(2), dim_b: params.dim_b.unwrap_or(2) }
            }
            other => return Err(Error::UnknownState(other.to_string())),
        })
    }

    /// Short label with parameters, used in reports.
    pub fn label(&self) -> String {
        match self {
            NamedState::Bell => "bell".into(),
            NamedState::BellMixture { p } => format!("bell-mixture(p={p})"),
            NamedState::PmMixture { p, sign } => {
                format!("pm-mixture(p={p},sign={})", if *sign == Sign::Plus { "plus" } else { "minus" })
            }
            NamedState::Isotropic { d, param: IsotropicParam::Fidelity(f) } => format!("isotropic(d={d},F={f})"),
            NamedState::Isotropic { d, param: IsotropicParam::Alpha(a) } => format!("isotropic(d={d},alpha={a})"),
            NamedState::FiveByFive => "five-by-five".into(),
            NamedState::UpbTiles => "upb-tiles".into(),
            NamedState::MaximallyMixed { dim_a, dim_b } => format!("maximally-mixed({dim_a}x{dim_b})"),
        }
    }
}

/// A named state together with the ensemble it is defined by, when there is one.
#[derive(Debug, Clone)]
pub struct NamedOutput<T: Real> {
    pub state: DensityMatrix<T>,
    pub ensemble: Option<Ensemble<T>>,
}

pub fn named_state<T: Real>(s: &NamedState) -> Result<NamedOutput<T>> {
    match *s {
        NamedState::Bell => {
            let e = Ensemble::from_vectors(2, 2, &[(T::one(), phi_plus(2))])?;
            Ok(NamedOutput { state: projector_sum(2, 2, &[(T::one(), phi_plus(2))]), ensemble: Some(e) })
        }
        NamedState::BellMixture { p } => {
            check_probability(p)?;
            let h = 0.5f64.sqrt();
            let psi_plus = basis_combo::<T>(4, &[(1, h), (2, h)]);
            let phi_minus = basis_combo::<T>(4, &[(0, h), (3, -h)]);
            two_term(2, 2, p, psi_plus, phi_minus)
        }
        NamedState::PmMixture { p, sign } => {
            check_probability(p)?;
            let h = 0.5f64.sqrt();
            let psi = basis_combo::<T>(4, &[(1, h), (2, sign.factor() * h)]);
            let zero = basis_combo::<T>(4, &[(0, 1.0)]);
            two_term(2, 2, p, psi, zero)
        }
        NamedState::Isotropic { d, param } => {
            let (state, e) = isotropic(d, param)?;
            Ok(NamedOutput { state, ensemble: Some(e) })
        }
        NamedState::FiveByFive => {
            let psi1 = basis_combo::<T>(25, &[(0, (2.0f64 / 3.0).sqrt()), (6, (1.0f64 / 3.0).sqrt())]);
            let t = (1.0f64 / 3.0).sqrt();
            let psi2 = basis_combo::<T>(25, &[(12, t), (18, t), (24, t)]);
            two_term(5, 5, 2.0 / 3.0, psi1, psi2)
        }
        NamedState::UpbTiles => {
            let u = upb_tiles::<T>();
            Ok(NamedOutput { state: u.state(), ensemble: Some(u.ensemble()) })
        }
        NamedState::MaximallyMixed { dim_a, dim_b } => {
            if dim_a == 0 || dim_b == 0 {
                return Err(Error::DomainError("dimensions must be positive".into()));
            }
            Ok(NamedOutput { state: DensityMatrix::maximally_mixed(dim_a, dim_b), ensemble: None })
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::DomainError(format!("p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// `p|u><u| + (1-p)|v><v|`; zero-weight terms are left out of the ensemble.
fn two_term<T: Real>(m: usize, n: usize, p: f64, u: Vec<Complex<T>>, v: Vec<Complex<T>>) -> Result<NamedOutput<T>> {
    let p = T::lit(p);
    let q = T::one() - p;
    let weighted = [(p, u), (q, v)];
    let state = projector_sum(m, n, &weighted);
    let kept: Vec<_> = weighted.into_iter().filter(|(w, _)| *w > T::zero()).collect();
    let ensemble = Ensemble::from_vectors(m, n, &kept)?;
    Ok(NamedOutput { state, ensemble: Some(ensemble) })
}

fn projector_sum<T: Real>(m: usize, n: usize, terms: &[(T, Vec<Complex<T>>)]) -> DensityMatrix<T> {
    let mut rho = CMatrix::zeros(m * n, m * n);
    for (w, v) in terms {
        rho = &rho + &CMatrix::projector(v).scale_real(*w);
    }
    DensityMatrix::from_parts_unchecked(m, n, rho)
}

fn basis_combo<T: Real>(dim: usize, entries: &[(usize, f64)]) -> Vec<Complex<T>> {
    let mut v = vec![Complex::zero(); dim];
    for &(i, x) in entries {
        v[i] = c(x, 0.0);
    }
    v
}

fn phi_plus<T: Real>(d: usize) -> Vec<Complex<T>> {
    let w = T::one() / T::lit(d as f64).sqrt();
    let mut v = vec![Complex::zero(); d * d];
    for j in 0..d {
        v[j * d + j] = Complex::new(w, T::zero());
    }
    v
}

pub fn isotropic_fidelity(d: usize, alpha: f64) -> f64 {
    let d2 = (d * d) as f64;
    (alpha * (d2 - 1.0) + 1.0) / d2
}

pub fn isotropic_alpha(d: usize, fidelity: f64) -> f64 {
    let d2 = (d * d) as f64;
    (d2 * fidelity - 1.0) / (d2 - 1.0)
}

/// The `d²` mutually orthogonal states `Φ+_k` (k = 0..d-1), then `Ψ+_ij, Ψ-_ij`
/// for each pair `i < j` in lexicographic order.
pub fn isotropic_auxiliary_states<T: Real>(d: usize) -> Vec<Vec<Complex<T>>> {
    let w = T::one() / T::lit(d as f64).sqrt();
    let h = T::lit(0.5).sqrt();
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        let mut v = vec![Complex::zero(); d * d];
        for j in 0..d {
            let th = T::lit(2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64);
            v[j * d + j] = Complex::from_polar(w, th);
        }
        out.push(v);
    }
    for i in 0..d {
        for j in i + 1..d {
            for s in [T::one(), -T::one()] {
                let mut v = vec![Complex::zero(); d * d];
                v[i * d + j] = Complex::new(h, T::zero());
                v[j * d + i] = Complex::new(s * h, T::zero());
                out.push(v);
            }
        }
    }
    out
}

/// Isotropic state on `d x d` and its `d²`-term ensemble over the auxiliary states.
///
/// Terms with zero weight (only at F = 1) are dropped from the ensemble.
pub fn isotropic<T: Real>(d: usize, param: IsotropicParam) -> Result<(DensityMatrix<T>, Ensemble<T>)> {
    if d < 2 {
        return Err(Error::DomainError(format!("isotropic states need d >= 2, got {d}")));
    }
    let alpha = match param {
        IsotropicParam::Alpha(a) => a,
        IsotropicParam::Fidelity(f) => isotropic_alpha(d, f),
    };
    const EDGE: f64 = 1e-12;
    if !(-EDGE..=1.0 + EDGE).contains(&alpha) {
        return Err(Error::DomainError(match param {
            IsotropicParam::Alpha(a) => format!("alpha = {a} outside [0, 1]"),
            IsotropicParam::Fidelity(f) => format!("F = {f} outside [1/d², 1] for d = {d}"),
        }));
    }
    let alpha = alpha.clamp(0.0, 1.0);
    let fid = match param {
        IsotropicParam::Fidelity(f) => f.clamp(1.0 / (d * d) as f64, 1.0),
        IsotropicParam::Alpha(_) => isotropic_fidelity(d, alpha),
    };

    let dd = d * d;
    let a = T::lit(alpha);
    let noise = (T::one() - a) / T::lit(dd as f64);
    let matrix = &CMatrix::projector(&phi_plus::<T>(d)).scale_real(a) + &CMatrix::identity(dd).scale_real(noise);
    let state = DensityMatrix::from_parts_unchecked(d, d, matrix);

    let f = T::lit(fid);
    let rest = (T::one() - f) / T::lit((dd - 1) as f64);
    let terms = isotropic_auxiliary_states::<T>(d)
        .into_iter()
        .enumerate()
        .map(|(k, v)| (if k == 0 { f } else { rest }, v))
        .filter(|(p, _)| *p > T::zero())
        .map(|(p, v)| EnsembleTerm { p, c: matricize(&v, d, d).expect("d² entries") })
        .collect();
    let ensemble = Ensemble::new(d, d, terms)?;
    Ok((state, ensemble))
}

/// A product vector `|a>|b>`.
pub type ProductVector<T> = (Vec<Complex<T>>, Vec<Complex<T>>);

/// The Tiles unextendible product basis on 3x3 and its orthogonal complement.
#[derive(Debug, Clone)]
pub struct UpbTiles<T: Real> {
    /// ψ1..ψ4.
    pub tiles: [ProductVector<T>; 4],
    /// S, the uniform superposition.
    pub stopper: ProductVector<T>,
    /// ψ5..ψ9, completing ψ1..ψ4 to an orthogonal product basis.
    pub complement: [ProductVector<T>; 5],
}

pub fn upb_tiles<T: Real>() -> UpbTiles<T> {
    let h = 0.5f64.sqrt();
    let e = |i: usize| basis_combo::<T>(3, &[(i, 1.0)]);
    let diff = |i: usize, j: usize| basis_combo::<T>(3, &[(i, h), (j, -h)]);
    let sum = |i: usize, j: usize| basis_combo::<T>(3, &[(i, h), (j, h)]);
    let t = (1.0f64 / 3.0).sqrt();
    let uniform = basis_combo::<T>(3, &[(0, t), (1, t), (2, t)]);
    UpbTiles {
        tiles: [(e(0), diff(0, 1)), (e(2), diff(1, 2)), (diff(0, 1), e(2)), (diff(1, 2), e(0))],
        stopper: (uniform.clone(), uniform),
        complement: [(e(0), sum(0, 1)), (e(2), sum(1, 2)), (sum(0, 1), e(2)), (sum(1, 2), e(0)), (e(1), e(1))],
    }
}

fn kron_vec<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    a.iter().flat_map(|x| b.iter().map(move |y| *x * *y)).collect()
}

impl<T: Real> UpbTiles<T> {
    /// All nine vectors of the product basis ψ1..ψ9.
    pub fn product_basis(&self) -> Vec<Vec<Complex<T>>> {
        self.tiles.iter().chain(self.complement.iter()).map(|(a, b)| kron_vec(a, b)).collect()
    }

    /// `¼(I - Σ_i |ψ_i><ψ_i| - |S><S|)`.
    pub fn state(&self) -> DensityMatrix<T> {
        let mut m = CMatrix::identity(9);
        for (a, b) in self.tiles.iter().chain(std::iter::once(&self.stopper)) {
            m = &m - &CMatrix::projector(&kron_vec(a, b));
        }
        DensityMatrix::from_parts_unchecked(3, 3, m.scale_real(T::lit(0.25)))
    }

    /// φ1..φ4, each with weight 1/4.
    pub fn ensemble_vectors(&self) -> [Vec<Complex<T>>; 4] {
        let psi: Vec<Vec<Complex<T>>> = self.complement.iter().map(|(a, b)| kron_vec(a, b)).collect();
        let combo = |w: [f64; 5]| -> Vec<Complex<T>> {
            (0..9).map(|r| (0..5).fold(Complex::zero(), |acc, k| acc + psi[k][r] * T::lit(w[k]))).collect()
        };
        let s = 2.0 * 2.0f64.sqrt() / 3.0;
        let x = 1.0 / 6.0;
        [
            combo([0.5, 0.5, -0.5, -0.5, 0.0]),
            combo([0.5, -0.5, 0.5, -0.5, 0.0]),
            combo([0.5, -0.5, -0.5, 0.5, 0.0]),
            combo([x, x, x, x, -s]),
        ]
    }

    pub fn ensemble(&self) -> Ensemble<T> {
        let q = T::lit(0.25);
        let terms: Vec<_> = self.ensemble_vectors().into_iter().map(|v| (q, v)).collect();
        Ensemble::from_vectors(3, 3, &terms).expect("Tiles ensemble is normalized")
    }

    /// Consistency helper: the state realized by the ensemble.
    pub fn ensemble_state(&self) -> DensityMatrix<T> {
        to_density(&self.ensemble())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eig, numeric_rank, vec_dot};

    #[test]
    fn isotropic_fidelity_examples() {
        assert!((isotropic_fidelity(2, 1.0) - 1.0).abs() < 1e-15);
        assert!((isotropic_fidelity(2, 0.0) - 0.25).abs() < 1e-15);
        assert!((isotropic_fidelity(3, 0.25) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn isotropic_alpha_zero_is_maximally_mixed() {
        let (rho, e) = isotropic::<f64>(2, IsotropicParam::Alpha(0.0)).unwrap();
        assert!(rho.matrix().max_abs_diff(&CMatrix::identity(4).scale_real(0.25)) < 1e-15);
        assert_eq!(e.len(), 4);
    }

    #[test]
    fn isotropic_f1_is_bell_projector() {
        let (rho, e) = isotropic::<f64>(2, IsotropicParam::Fidelity(1.0)).unwrap();
        assert_eq!(e.len(), 1);
        assert!(to_density(&e).matrix().max_abs_diff(&CMatrix::projector(&phi_plus(2))) < 1e-15);
        assert!(rho.matrix().max_abs_diff(&CMatrix::projector(&phi_plus(2))) < 1e-15);
    }

    #[test]
    fn isotropic_domain() {
        assert!(matches!(isotropic::<f64>(2, IsotropicParam::Alpha(1.1)), Err(Error::DomainError(_))));
        assert!(matches!(isotropic::<f64>(2, IsotropicParam::Fidelity(0.2)), Err(Error::DomainError(_))));
        assert!(matches!(isotropic::<f64>(1, IsotropicParam::Alpha(0.5)), Err(Error::DomainError(_))));
    }

    #[test]
    fn auxiliary_states_resolve_identity() {
        for d in 2..=4 {
            let states = isotropic_auxiliary_states::<f64>(d);
            assert_eq!(states.len(), d * d);
            let mut sum = CMatrix::zeros(d * d, d * d);
            for v in &states {
                sum = &sum + &CMatrix::projector(v);
            }
            assert!(sum.max_abs_diff(&CMatrix::identity(d * d)) < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn upb_tiles_basis_is_orthonormal() {
        let u = upb_tiles::<f64>();
        let basis = u.product_basis();
        for (i, x) in basis.iter().enumerate() {
            for (j, y) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((vec_dot(x, y).re - expected).abs() < 1e-15 && vec_dot(x, y).im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn upb_tiles_state_has_rank_four() {
        let u = upb_tiles::<f64>();
        let rho = u.state();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-14);
        assert_eq!(numeric_rank(rho.matrix(), 1e-8), 4);
        assert!(rho.matrix().max_abs_diff(u.ensemble_state().matrix()) < 1e-12);
        let spec = hermitian_eig(rho.matrix()).unwrap();
        for k in 0..4 {
            assert!((spec.values[k] - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn named_states_match_their_ensembles() {
        let names = [
            NamedState::Bell,
            NamedState::BellMixture { p: 0.3 },
            NamedState::PmMixture { p: 0.6, sign: Sign::Minus },
            NamedState::PmMixture { p: 0.0, sign: Sign::Plus },
            NamedState::Isotropic { d: 3, param: IsotropicParam::Fidelity(0.5) },
            NamedState::FiveByFive,
            NamedState::UpbTiles,
        ];
        for s in &names {
            let out = named_state::<f64>(s).unwrap();
            let e = out.ensemble.unwrap();
            assert!(to_density(&e).matrix().max_abs_diff(out.state.matrix()) < 1e-12, "{s:?}");
            let m = out.state.matrix().clone();
            assert!(DensityMatrix::new(out.state.dim_a(), out.state.dim_b(), m).is_ok());
        }
    }

    #[test]
    fn from_name_errors() {
        let none = StateParams::default();
        assert!(matches!(NamedState::from_name("nope", &none), Err(Error::UnknownState(_))));
        assert!(matches!(NamedState::from_name("bell-mixture", &none), Err(Error::DomainError(_))));
        let p = StateParams { p: Some(1.5), ..Default::default() };
        let s = NamedState::from_name("bell-mixture", &p).unwrap();
        assert!(matches!(named_state::<f64>(&s), Err(Error::DomainError(_))));
    }
}
