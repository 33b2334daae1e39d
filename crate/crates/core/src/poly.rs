//! Dense univariate polynomials in `u` with exact rational coefficients.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use rug::{Assign, Float, Rational};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("exact division left a nonzero remainder of degree {remainder_degree}")]
    NonzeroRemainder { remainder_degree: usize },
    #[error("polynomial of degree {degree} does not belong to P_{index}")]
    DegreeExceedsIndex { degree: usize, index: usize },
}

/// A polynomial `Σ c_k u^k`. Trailing zero coefficients are never stored, so
/// the zero polynomial has an empty coefficient vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Rational::from(1))
    }

    /// The polynomial `u`.
    pub fn u() -> Self {
        Poly::monomial(Rational::from(1), 1)
    }

    pub fn constant(c: impl Into<Rational>) -> Self {
        Poly::from_coeffs(vec![c.into()])
    }

    pub fn monomial(c: impl Into<Rational>, power: usize) -> Self {
        let mut coeffs = vec![Rational::new(); power + 1];
        coeffs[power] = c.into();
        Poly::from_coeffs(coeffs)
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    /// Builds a polynomial from `(numerator, denominator)` pairs indexed by power.
    pub fn from_ratios(pairs: &[(i64, i64)]) -> Self {
        Poly::from_coeffs(
            pairs
                .iter()
                .map(|&(n, d)| Rational::from((n, d)))
                .collect(),
        )
    }

    /// Builds a polynomial from `(power, numerator, denominator)` terms.
    pub fn from_terms(terms: &[(usize, i64, i64)]) -> Self {
        let mut p = Poly::zero();
        for &(k, n, d) in terms {
            p += &Poly::monomial(Rational::from((n, d)), k);
        }
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| *c == 0) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    /// Coefficient of `u^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    /// `p(−u) = −p(u)`. The zero polynomial is both odd and even.
    pub fn is_odd(&self) -> bool {
        self.coeffs.iter().step_by(2).all(|c| *c == 0)
    }

    /// `p(−u) = p(u)`.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|c| *c == 0)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if *c == 0 {
            return Poly::zero();
        }
        Poly {
            coeffs: self.coeffs.iter().map(|a| Rational::from(a * c)).collect(),
        }
    }

    pub fn derivative(&self) -> Poly {
        Poly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| Rational::from(c * k as u64))
                .collect(),
        )
    }

    /// Antiderivative `P` with `P(a) = 0`.
    pub fn integrate_from(&self, a: &Rational) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Rational::new());
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(Rational::from(c / (k as u64 + 1)));
        }
        let mut p = Poly::from_coeffs(coeffs);
        let at_a = p.eval(a);
        if !p.is_zero() {
            p.coeffs[0] -= at_a;
            p.trim();
        }
        p
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// Horner evaluation at a multiprecision float; coefficients are rounded
    /// to the precision of `x`.
    pub fn eval_float(&self, x: &Float) -> Float {
        let prec = x.prec();
        let mut acc = Float::with_val(prec, 0);
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += Float::with_val(prec, c);
        }
        acc
    }

    /// The operator `D = (1 − u²) ∂/∂u`.
    pub fn apply_d(&self) -> Poly {
        let dp = self.derivative();
        if dp.is_zero() {
            return dp;
        }
        let mut coeffs = vec![Rational::new(); dp.coeffs.len() + 2];
        for (k, c) in dp.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            coeffs[k] += c;
            coeffs[k + 2] -= c;
        }
        Poly::from_coeffs(coeffs)
    }

    /// Quotient `self / q`, which must be exact.
    pub fn exact_div(&self, q: &Poly) -> Result<Poly, PolyError> {
        let lead = q.leading_coeff().ok_or(PolyError::DivisionByZero)?;
        let qdeg = q.coeffs.len() - 1;
        if self.is_zero() {
            return Ok(Poly::zero());
        }
        let mut rem = self.coeffs.clone();
        if rem.len() <= qdeg {
            return Err(PolyError::NonzeroRemainder {
                remainder_degree: rem.len() - 1,
            });
        }
        let mut quot = vec![Rational::new(); rem.len() - qdeg];
        for k in (0..quot.len()).rev() {
            let top = &rem[k + qdeg];
            if *top == 0 {
                continue;
            }
            let factor = Rational::from(top / lead);
            for (j, qc) in q.coeffs.iter().enumerate() {
                if *qc != 0 {
                    rem[k + j] -= Rational::from(&factor * qc);
                }
            }
            quot[k] = factor;
        }
        if let Some(pos) = rem.iter().rposition(|c| *c != 0) {
            return Err(PolyError::NonzeroRemainder {
                remainder_degree: pos,
            });
        }
        Ok(Poly::from_coeffs(quot))
    }

    /// `p(−u)`.
    pub fn reflect(&self) -> Poly {
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { Rational::from(-c) } else { c.clone() })
                .collect(),
        }
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &'a Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        if self.coeffs.len() < rhs.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), Rational::new());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            if *b != 0 {
                *a += b;
            }
        }
        self.trim();
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &'a Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        if self.coeffs.len() < rhs.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), Rational::new());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            if *b != 0 {
                *a -= b;
            }
        }
        self.trim();
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &'a Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rational::new(); self.coeffs.len() + rhs.coeffs.len() - 1];
        let mut tmp = Rational::new();
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if *b == 0 {
                    continue;
                }
                tmp.assign(a * b);
                coeffs[i + j] += &tmp;
            }
        }
        Poly::from_coeffs(coeffs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| Rational::from(-c)).collect(),
        }
    }
}

impl fmt::Display for Poly {
    /// Highest power first, e.g. `91/864 u^3 - 47/576 u`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let negative = *c < 0;
            let mag = Rational::from(c.abs_ref());
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            first = false;
            let unit = mag == 1;
            match k {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !unit {
                        write!(f, "{mag} ")?;
                    }
                    if k == 1 {
                        write!(f, "u")?;
                    } else {
                        write!(f, "u^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn ring_basics() {
        let u = Poly::u();
        assert_eq!(&u * &u, Poly::monomial(1, 2));
        assert_eq!(Poly::monomial(1, 3).derivative(), Poly::monomial(3, 2));
        assert!((&u - &u).is_zero());
        assert_eq!((&u - &u).degree(), None);
    }

    #[test]
    fn integrate_from_one() {
        // u^3 - u  ->  u^4/4 - u^2/2 + 1/4
        let p = Poly::from_terms(&[(3, 1, 1), (1, -1, 1)]);
        let big = p.integrate_from(&r(1, 1));
        assert_eq!(big, Poly::from_terms(&[(4, 1, 4), (2, -1, 2), (0, 1, 4)]));
        assert_eq!(big.eval(&r(1, 1)), 0);
        assert_eq!(big.derivative(), p);
    }

    #[test]
    fn d_operator_examples() {
        assert!(Poly::one().apply_d().is_zero());
        assert_eq!(Poly::u().apply_d(), Poly::from_terms(&[(0, 1, 1), (2, -1, 1)]));
        assert_eq!(
            Poly::monomial(1, 2).apply_d(),
            Poly::from_terms(&[(1, 2, 1), (3, -2, 1)])
        );
    }

    #[test]
    fn exact_division() {
        let one_minus_u2 = Poly::from_terms(&[(0, 1, 1), (2, -1, 1)]);
        let sq = &one_minus_u2 * &one_minus_u2;
        assert_eq!(sq.exact_div(&one_minus_u2).unwrap(), one_minus_u2);
        let cubic = Poly::from_terms(&[(3, 1, 1), (1, -1, 1)]);
        assert_eq!(cubic.exact_div(&one_minus_u2).unwrap(), -&Poly::u());
        let one_minus_u = Poly::from_terms(&[(0, 1, 1), (1, -1, 1)]);
        assert!(matches!(
            Poly::monomial(1, 2).exact_div(&one_minus_u),
            Err(PolyError::NonzeroRemainder { .. })
        ));
        assert_eq!(
            Poly::u().exact_div(&Poly::zero()),
            Err(PolyError::DivisionByZero)
        );
    }

    #[test]
    fn parity_and_display() {
        let p = Poly::from_terms(&[(3, 91, 864), (1, -47, 576)]);
        assert!(p.is_odd());
        assert!(!p.is_even());
        assert_eq!(p.to_string(), "91/864 u^3 - 47/576 u");
        assert_eq!(Poly::from_terms(&[(1, -1, 4)]).to_string(), "-1/4 u");
        assert_eq!(p.reflect(), -&p);
    }
}
