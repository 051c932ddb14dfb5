//! 2×2 minors of `N = Σ_a x_a M_a` as quadratic forms in the mixing coefficients.

use num_complex::Complex64;
use num_bigint::BigInt;
use num_rational::BigRational;

use crate::duality::KrausSet;
use crate::poly::{Polynomial, RationalPolynomial};

const ZERO_ENTRY: f64 = 1e-13;
const MAX_DENOMINATOR: i64 = 1000;
const RATIONAL_TOL: f64 = 1e-9;

/// Minor on rows `(r1, r2)` and columns `(c1, c2)` of `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorPolynomial {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
    pub numeric: Polynomial<Complex64>,
}

/// Exact form of the system: `numeric = scale² · polynomials[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMinors {
    pub scale: f64,
    pub polynomials: Vec<RationalPolynomial>,
}

/// Minors for one row `μ` of the mixing matrix; variable `a` is `V_μa`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorSystem {
    pub num_vars: usize,
    pub minors: Vec<MinorPolynomial>,
    pub exact: Option<ExactMinors>,
    pub scale_note: String,
}

/// Minors ordered by row pair, then column pair, both lexicographic.
pub fn minor_system(k: &KrausSet<f64>) -> MinorSystem {
    let d = k.len();
    let ops = k.ops();
    let (rows, cols) = (k.dim_b(), k.dim_a());
    let pairs = |n: usize| -> Vec<(usize, usize)> { (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect() };
    let exact_entries = rationalize_all(k);

    let mut minors = Vec::new();
    let mut exact_polys = Vec::new();
    for &(r1, r2) in &pairs(rows) {
        for &(c1, c2) in &pairs(cols) {
            let mut numeric = Polynomial::zero(d);
            let mut exact = RationalPolynomial::zero(d);
            for a in 0..d {
                for b in 0..d {
                    let mut e = vec![0u32; d];
                    e[a] += 1;
                    e[b] += 1;
                    let coef = ops[a][(r1, c1)] * ops[b][(r2, c2)] - ops[a][(r1, c2)] * ops[b][(r2, c1)];
                    numeric = &numeric + &Polynomial::monomial(d, e.clone(), coef);
                    if let Some((_, q)) = &exact_entries {
                        let c = &q[a][r1 * cols + c1] * &q[b][r2 * cols + c2] - &q[a][r1 * cols + c2] * &q[b][r2 * cols + c1];
                        exact = &exact + &RationalPolynomial::monomial(d, e, c);
                    }
                }
            }
            minors.push(MinorPolynomial { rows: (r1, r2), cols: (c1, c2), numeric });
            exact_polys.push(exact);
        }
    }

    let (exact, scale_note) = match exact_entries {
        Some((scale, _)) => (
            Some(ExactMinors { scale, polynomials: exact_polys }),
            format!("Kraus entries are rational multiples of {scale:e}; exact coefficients have scale^2 = {:e} factored out", scale * scale),
        ),
        None => (None, "Kraus entries are not rational multiples of a common real scale; numeric coefficients only".into()),
    };
    MinorSystem { num_vars: d, minors, exact, scale_note }
}

/// Common scale and per-operator entries divided by it, when every entry is real
/// and a small-denominator rational multiple of the smallest nonzero entry.
fn rationalize_all(k: &KrausSet<f64>) -> Option<(f64, Vec<Vec<BigRational>>)> {
    let entries = || k.ops().iter().flat_map(|op| op.as_slice().iter());
    if entries().any(|z| z.im.abs() > ZERO_ENTRY) {
        return None;
    }
    let scale = entries().map(|z| z.re.abs()).filter(|&x| x > ZERO_ENTRY).fold(f64::INFINITY, f64::min);
    if !scale.is_finite() {
        return None;
    }
    let mut out = Vec::with_capacity(k.len());
    for op in k.ops() {
        let mut row = Vec::with_capacity(op.as_slice().len());
        for z in op.as_slice() {
            let x = if z.re.abs() > ZERO_ENTRY { z.re / scale } else { 0.0 };
            let (num, den) = rationalize(x)?;
            row.push(BigRational::new(BigInt::from(num), BigInt::from(den)));
        }
        out.push(row);
    }
    Some((scale, out))
}

/// Continued-fraction approximation with denominator at most 1000.
fn rationalize(x: f64) -> Option<(i64, i64)> {
    let sign = if x < 0.0 { -1 } else { 1 };
    let ax = x.abs();
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut y = ax;
    for _ in 0..64 {
        let a = y.floor();
        let ai = a as i64;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > MAX_DENOMINATOR {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (ax - h1 as f64 / k1 as f64).abs() <= RATIONAL_TOL * ax.max(1.0) {
            return Some((sign * h1, k1));
        }
        let frac = y - a;
        if frac < 1e-15 {
            break;
        }
        y = 1.0 / frac;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::kraus_from_ensemble;
    use crate::states::{named_state, NamedState};

    #[test]
    fn continued_fractions() {
        assert_eq!(rationalize(0.75), Some((3, 4)));
        assert_eq!(rationalize(-8.0), Some((-8, 1)));
        assert_eq!(rationalize(1.0 / 3.0), Some((1, 3)));
        assert_eq!(rationalize(std::f64::consts::SQRT_2), None);
    }

    #[test]
    fn bell_mixture_single_minor() {
        let p = 0.3;
        let e = named_state::<f64>(&NamedState::BellMixture { p }).unwrap().ensemble.unwrap();
        let sys = minor_system(&kraus_from_ensemble(&e));
        assert_eq!(sys.minors.len(), 1);
        let poly = &sys.minors[0].numeric;
        assert!(poly.is_homogeneous(2));
        let c11 = poly.coefficient(&[2, 0]);
        let c22 = poly.coefficient(&[0, 2]);
        assert!(poly.coefficient(&[1, 1]).norm() < 1e-14);
        // proportional to p x1² + (1-p) x2²
        assert!((c22 / c11 - (1.0 - p) / p).norm() < 1e-12);
    }

    #[test]
    fn upb_system_is_exact() {
        let e = named_state::<f64>(&NamedState::UpbTiles).unwrap().ensemble.unwrap();
        let sys = minor_system(&kraus_from_ensemble(&e));
        assert_eq!(sys.minors.len(), 9);
        let exact = sys.exact.expect("rational entries");
        for (m, q) in sys.minors.iter().zip(&exact.polynomials) {
            assert!(q.is_homogeneous(2));
            let x = [0.3, -1.1, 0.7, 2.0];
            let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let xr: Vec<BigRational> = x.iter().map(|&v| BigRational::from_float(v).unwrap()).collect();
            let exact_val: f64 = num_traits::ToPrimitive::to_f64(&q.eval(&xr)).unwrap();
            let num = m.numeric.eval(&xc);
            assert!((num.re - exact.scale * exact.scale * exact_val).abs() < 1e-12);
        }
        assert_ne!(exact.polynomials[4], RationalPolynomial::zero(4));
    }
}
