//! Entanglement certificate for the Tiles UPB state: the rank-one conditions on
//! `N_μ = Σ_a x_a M_a` force `x = 0`, so no rank-one mixing exists.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::minors::minor_system;
use crate::duality::kraus_from_ensemble;
use crate::error::{Error, Result};
use crate::poly::{rational, RationalPolynomial};
use crate::states::upb_tiles;

const POINTS: usize = 20;
const POINT_SEED: u64 = 20;
const PROPORTIONALITY_TOL: f64 = 1e-9;

pub const EQUATION_LABELS: [char; 9] = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i'];

/// Index into the generated minor list (row pair major, column pair minor)
/// matching each labelled equation.
const MINOR_OF_EQUATION: [usize; 9] = [0, 2, 1, 6, 8, 7, 3, 5, 4];

fn poly(terms: &[(i64, [u32; 4])]) -> RationalPolynomial {
    RationalPolynomial::from_terms(4, terms.iter().map(|(c, e)| (rational(*c), e.to_vec())))
}

/// The nine rank-one conditions (a)-(i) in `x1..x4`, each set equal to zero.
pub fn upb_equations() -> [RationalPolynomial; 9] {
    [
        poly(&[(-3, [0, 0, 0, 2]), (-10, [0, 0, 1, 1]), (-8, [0, 1, 0, 1]), (-8, [1, 0, 0, 1]), (-3, [0, 0, 2, 0]), (3, [0, 2, 0, 0]), (6, [1, 1, 0, 0]), (3, [2, 0, 0, 0])]),
        poly(&[(3, [0, 0, 0, 2]), (8, [0, 0, 1, 1]), (-10, [0, 1, 0, 1]), (-8, [1, 0, 0, 1]), (-3, [0, 0, 2, 0]), (6, [1, 0, 1, 0]), (3, [0, 2, 0, 0]), (-3, [2, 0, 0, 0])]),
        poly(&[(-1, [0, 0, 1, 1]), (1, [1, 0, 0, 1]), (-3, [0, 0, 2, 0]), (-3, [0, 1, 1, 0]), (3, [1, 1, 0, 0]), (3, [2, 0, 0, 0])]),
        poly(&[(3, [0, 0, 0, 2]), (-8, [0, 0, 1, 1]), (10, [0, 1, 0, 1]), (-8, [1, 0, 0, 1]), (-3, [0, 0, 2, 0]), (-6, [1, 0, 1, 0]), (3, [0, 2, 0, 0]), (-3, [2, 0, 0, 0])]),
        poly(&[(-3, [0, 0, 0, 2]), (10, [0, 0, 1, 1]), (8, [0, 1, 0, 1]), (-8, [1, 0, 0, 1]), (-3, [0, 0, 2, 0]), (3, [0, 2, 0, 0]), (-6, [1, 1, 0, 0]), (3, [2, 0, 0, 0])]),
        poly(&[(1, [0, 0, 1, 1]), (1, [1, 0, 0, 1]), (-3, [0, 0, 2, 0]), (-3, [0, 1, 1, 0]), (-3, [1, 1, 0, 0]), (3, [2, 0, 0, 0])]),
        poly(&[(1, [0, 1, 0, 1]), (1, [1, 0, 0, 1]), (-3, [0, 1, 1, 0]), (-3, [1, 0, 1, 0]), (3, [0, 2, 0, 0]), (-3, [2, 0, 0, 0])]),
        poly(&[(-1, [0, 1, 0, 1]), (1, [1, 0, 0, 1]), (-3, [0, 1, 1, 0]), (3, [1, 0, 1, 0]), (3, [0, 2, 0, 0]), (-3, [2, 0, 0, 0])]),
        poly(&[(1, [1, 0, 0, 1]), (-3, [0, 1, 1, 0])]),
    ]
}

/// `lhs = rhs` as a polynomial identity; `residual` is `lhs - rhs` printed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateStep {
    pub label: String,
    pub lhs: String,
    pub rhs: String,
    pub residual: String,
    pub zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionalityCheck {
    pub equation: char,
    pub minor: usize,
    /// Exact `equation / minor` ratio after factoring the Kraus scale.
    pub exact_ratio: Option<String>,
    pub max_relative_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpbCertificate {
    pub equations: Vec<String>,
    pub steps: Vec<CertificateStep>,
    pub proportionality: Vec<ProportionalityCheck>,
    pub points: usize,
    pub conclusion: String,
    pub entangled: bool,
}

/// Replays the elimination in exact arithmetic and checks the equations
/// against the minors generated from the state's Kraus operators.
pub fn upb_entanglement_certificate() -> Result<UpbCertificate> {
    let eqs = upb_equations();
    let [a, b, c, d, e, f, g, h, i] = &eqs;
    let x = |k: usize| RationalPolynomial::var(4, k);
    let k = |n: i64| RationalPolynomial::constant(4, rational(n));
    let (x1, x2, x3, x4) = (x(0), x(1), x(2), x(3));
    let sq = |p: &RationalPolynomial| p * p;

    let d1 = &sq(&x2) - &sq(&x1);
    let d2 = &sq(&x3) - &sq(&x1);
    let p = &(&(&k(3) * &sq(&x4)) - &(&k(8) * &(&x1 * &x4))) - &(&k(3) * &sq(&x3));
    let q = &(&(&k(-3) * &sq(&x4)) - &(&k(8) * &(&x1 * &x4))) + &(&k(3) * &sq(&x1));
    let e14 = &x1 * &x4;
    let f23 = &x2 * &x3;
    let x1_4 = sq(&sq(&x1));

    let steps = vec![
        step("(g) + (h) - 2(i): x2^2 - x1^2 lies in the ideal", &k(6) * &d1, &(g + h) - &(&k(2) * i)),
        step("(c) + (f) - 2(i): x3^2 - x1^2 lies in the ideal", &k(-6) * &d2, &(c + f) - &(&k(2) * i)),
        step("(b) + (d): 3x4^2 - 8x1x4 - 3x3^2 lies in the ideal", &k(2) * &p, &(b + d) - &(&k(6) * &d1)),
        step(
            "(a) + (e): -3x4^2 - 8x1x4 + 3x1^2 lies in the ideal",
            &k(2) * &q,
            &(&(a + e) - &(&k(6) * &d1)) + &(&k(6) * &d2),
        ),
        step("sum of the two reductions: x1x4 lies in the ideal", &k(-16) * &e14, &(&p + &q) + &(&k(3) * &d2)),
        step("with (i): x2x3 lies in the ideal", &k(3) * &f23, &e14 - i),
        step("x1^4 lies in the ideal", x1_4.clone(), &(&sq(&f23) - &(&d1 * &sq(&x3))) - &(&sq(&x1) * &d2)),
        step("x2^4 lies in the ideal", sq(&sq(&x2)), &x1_4 + &(&d1 * &(&sq(&x2) + &sq(&x1)))),
        step("x3^4 lies in the ideal", sq(&sq(&x3)), &x1_4 + &(&d2 * &(&sq(&x3) + &sq(&x1)))),
        step(
            "x4^4 lies in the ideal",
            &k(9) * &sq(&sq(&x4)),
            &(&(&(&k(3) * &(&sq(&x4) * &p)) + &(&k(24) * &(&sq(&x4) * &e14))) + &(&k(9) * &(&sq(&x4) * &d2)))
                + &(&k(9) * &sq(&e14)),
        ),
    ];
    if let Some(bad) = steps.iter().find(|s| !s.zero) {
        return Err(Error::CertificateFailure(format!("{}: residual {}", bad.label, bad.residual)));
    }

    let proportionality = proportionality_checks(&eqs)?;
    Ok(UpbCertificate {
        equations: EQUATION_LABELS.iter().zip(&eqs).map(|(l, p)| format!("({l}) {} = 0", p.display_with("x"))).collect(),
        steps,
        proportionality,
        points: POINTS,
        conclusion: "x1^4, x2^4, x3^4 and x4^4 lie in the ideal of the rank-one conditions, so every row of a \
                     rank-one mixing matrix vanishes; this contradicts the unit-norm columns of an isometry, \
                     hence no separable decomposition exists and the state is entangled"
            .into(),
        entangled: true,
    })
}

fn step(label: &str, lhs: RationalPolynomial, rhs: RationalPolynomial) -> CertificateStep {
    let residual = &lhs - &rhs;
    CertificateStep {
        label: label.into(),
        lhs: lhs.display_with("x"),
        rhs: rhs.display_with("x"),
        zero: residual.is_zero(),
        residual: residual.display_with("x"),
    }
}

fn proportionality_checks(eqs: &[RationalPolynomial; 9]) -> Result<Vec<ProportionalityCheck>> {
    let sys = minor_system(&kraus_from_ensemble(&upb_tiles::<f64>().ensemble()));
    if sys.minors.len() != 9 {
        return Err(Error::CertificateFailure(format!("expected 9 minors, got {}", sys.minors.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(POINT_SEED);
    let points: Vec<[f64; 4]> = (0..POINTS).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();

    let mut out = Vec::with_capacity(9);
    for (j, eq) in eqs.iter().enumerate() {
        let minor = MINOR_OF_EQUATION[j];
        let numeric = &sys.minors[minor].numeric;
        let ratios: Vec<f64> = points
            .iter()
            .map(|x| {
                let xr: Vec<BigRational> = x.iter().map(|&v| BigRational::from_float(v).expect("finite")).collect();
                let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                let lhs = eq.eval(&xr).to_f64().unwrap_or(f64::NAN);
                let rhs = numeric.eval(&xc);
                lhs / rhs.re
            })
            .collect();
        let kappa = ratios[0];
        let dev = ratios.iter().map(|r| ((r - kappa) / kappa).abs()).fold(0.0, f64::max);
        let exact_ratio = sys.exact.as_ref().and_then(|ex| exact_ratio(eq, &ex.polynomials[minor]));
        if !(dev <= PROPORTIONALITY_TOL) {
            return Err(Error::CertificateFailure(format!(
                "equation ({}) is not proportional to minor {minor}: deviation {dev:e}",
                EQUATION_LABELS[j]
            )));
        }
        out.push(ProportionalityCheck { equation: EQUATION_LABELS[j], minor, exact_ratio, max_relative_deviation: dev });
    }
    Ok(out)
}

/// `κ` with `eq = κ · minor` exactly, if one exists.
fn exact_ratio(eq: &RationalPolynomial, minor: &RationalPolynomial) -> Option<String> {
    let (e, c) = minor.terms().next()?;
    if c.is_zero() {
        return None;
    }
    let kappa = eq.coefficient(e) / c.clone();
    (eq - &minor.scale(&kappa)).is_zero().then(|| kappa.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate_holds() {
        let cert = upb_entanglement_certificate().unwrap();
        assert!(cert.entangled);
        assert!(cert.steps.iter().all(|s| s.zero && s.residual == "0"));
        assert_eq!(cert.steps[2].lhs, "-16*x1*x4 - 6*x3^2 + 6*x4^2");
        assert_eq!(cert.proportionality.len(), 9);
        for p in &cert.proportionality {
            assert!(p.max_relative_deviation <= 1e-9);
            assert!(p.exact_ratio.is_some(), "{p:?}");
        }
    }

    #[test]
    fn corrupted_equation_is_not_proportional() {
        let mut eqs = upb_equations();
        eqs[8] = &eqs[8] + &RationalPolynomial::monomial(4, vec![2, 0, 0, 0], rational(1));
        assert!(proportionality_checks(&eqs).is_err());
    }
}
