//! Sparse multivariate polynomials over an arbitrary coefficient ring.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed};

/// Polynomial in `nvars` variables; monomials are exponent vectors.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial<C> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, C>,
}

pub type RationalPolynomial = Polynomial<BigRational>;

impl<C: Clone + Num> Polynomial<C> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    /// The variable `x_i` (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, C::one())
    }

    pub fn monomial(nvars: usize, exponents: Vec<u32>, c: C) -> Self {
        assert_eq!(exponents.len(), nvars);
        let mut p = Self::zero(nvars);
        p.add_term(exponents, c);
        p
    }

    /// Builds from `(coefficient, exponents)` pairs; like terms are combined.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (C, Vec<u32>)>) -> Self {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            assert_eq!(e.len(), nvars);
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &C)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn coefficient(&self, exponents: &[u32]) -> C {
        self.terms.get(exponents).cloned().unwrap_or_else(C::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self, degree: u32) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() == degree)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(e, v)| (v.clone() * c.clone(), e.clone())))
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(self.nvars, C::one()), |acc, _| &acc * self)
    }

    pub fn eval(&self, x: &[C]) -> C {
        assert_eq!(x.len(), self.nvars);
        self.terms.iter().fold(C::zero(), |acc, (e, c)| {
            let mono = e.iter().zip(x).fold(C::one(), |m, (&k, xi)| (0..k).fold(m, |m, _| m * xi.clone()));
            acc + c.clone() * mono
        })
    }

    pub fn map_coefficients<D: Clone + Num>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        Polynomial::from_terms(self.nvars, self.terms.iter().map(|(e, c)| (f(c), e.clone())))
    }
}

impl<C: Clone + Num> Add for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: Self) -> Polynomial<C> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<C: Clone + Num> Sub for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: Self) -> Polynomial<C> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), C::zero() - c.clone());
        }
        out
    }
}

impl<C: Clone + Num> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        &Polynomial::zero(self.nvars) - self
    }
}

impl<C: Clone + Num> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Polynomial::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<C: Clone + Num> Add for Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: Self) -> Polynomial<C> {
        &self + &rhs
    }
}

impl<C: Clone + Num> Sub for Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: Self) -> Polynomial<C> {
        &self - &rhs
    }
}

impl<C: Clone + Num> Mul for Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        &self * &rhs
    }
}

pub fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl RationalPolynomial {
    /// Integer-coefficient polynomial from `(coefficient, exponents)` pairs.
    pub fn from_integers(nvars: usize, terms: &[(i64, &[u32])]) -> Self {
        Self::from_terms(nvars, terms.iter().map(|(c, e)| (rational(*c), e.to_vec())))
    }

    /// Variables printed as `x1, x2, ...`; highest-degree monomials in `x1` first.
    pub fn display_with(&self, name: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| if k == 1 { format!("{name}{}", v + 1) } else { format!("{name}{}^{k}", v + 1) })
                .collect();
            if mono.is_empty() || !mag.is_one() {
                out.push_str(&mag.to_string());
                if !mono.is_empty() {
                    out.push('*');
                }
            }
            out.push_str(&mono.join("*"));
        }
        out
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("x"))
    }
}

impl<C: fmt::Debug> fmt::Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_cancellation() {
        let x = RationalPolynomial::var(2, 0);
        let y = RationalPolynomial::var(2, 1);
        let sq = &(&x + &y) * &(&x - &y);
        let expected = &x.pow(2) - &y.pow(2);
        assert_eq!(sq, expected);
        assert!((&sq - &expected).is_zero());
        assert!(sq.is_homogeneous(2));
        assert_eq!(sq.to_string(), "x1^2 - x2^2");
    }

    #[test]
    fn evaluation() {
        let p = RationalPolynomial::from_integers(2, &[(3, &[2, 0]), (-8, &[1, 1]), (1, &[0, 0])]);
        assert_eq!(p.eval(&[rational(2), rational(1)]), rational(12 - 16 + 1));
        assert_eq!(p.to_string(), "3*x1^2 - 8*x1*x2 + 1");
    }
}
