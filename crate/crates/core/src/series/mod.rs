//! Truncated power series in `d` whose coefficients are polynomials in `u`,
//! together with the operator calculus `f(dD)` acting on them.

mod constants;
mod evaluate;
mod kernel;
mod recurrence;

use std::fmt;

use rug::Rational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{Poly, PolyError};

pub use constants::{
    decompose, alpha_from_leading_coefficients, compute_j, extract_constants, gevrey_profile, fixed_series,
    ConstantEstimates, Decomposition, LeadingConstants, FixedSeries, Richardson, MIN_J_ORDER,
};
pub use evaluate::{eval_series, optimal_index, Truncation};
pub use kernel::{apply_f_of_dd, op_c, op_c1, op_j, op_s, op_s1, Kernel, KernelKind};
pub use recurrence::{
    eps_squared_series, formal_solution, i_poly, residual, solve_step, trig_compose,
    FormalSolution, TrigKind,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("series division needs a nonzero constant d^0 coefficient")]
    NonUnitDivisor,
    #[error("composition needs vanishing d^0 and d^1 coefficients")]
    LowOrderTerms,
    #[error("coefficient of d^{index} violates the declared {what}")]
    Parity { index: usize, what: &'static str },
    #[error("coefficient of d^{index} has degree {degree} above the allowed {allowed}")]
    Degree { index: usize, degree: usize, allowed: usize },
    #[error("residual condition failed: {0}")]
    Residual(String),
    #[error("expected lowest order {expected}, found {found:?}")]
    Valuation { expected: usize, found: Option<usize> },
    #[error("order {have} is too low; at least {need} is required")]
    InsufficientOrder { have: usize, need: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Parity {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Declared parities in `d` and in `u`; `None` means "not claimed".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Parities {
    pub d: Option<Parity>,
    pub u: Option<Parity>,
}

impl Parities {
    pub const NONE: Parities = Parities { d: None, u: None };

    pub fn new(d: Parity, u: Parity) -> Self {
        Parities {
            d: Some(d),
            u: Some(u),
        }
    }

    fn meet(self, other: Parities) -> Parities {
        Parities {
            d: if self.d == other.d { self.d } else { None },
            u: if self.u == other.u { self.u } else { None },
        }
    }

    fn product(self, other: Parities) -> Parities {
        Parities {
            d: self.d.zip(other.d).map(|(a, b)| a.combine(b)),
            u: self.u.zip(other.u).map(|(a, b)| a.combine(b)),
        }
    }
}

/// `Σ_{n=0}^{order} c_n(u) d^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DSeries {
    coeffs: Vec<Poly>,
    parity: Parities,
}

impl DSeries {
    pub fn zero(order: usize) -> Self {
        DSeries {
            coeffs: vec![Poly::zero(); order + 1],
            parity: Parities::NONE,
        }
    }

    pub fn one(order: usize) -> Self {
        DSeries::from_poly(Poly::one(), 0, order)
    }

    /// `p(u)·d^power`, truncated at `order`.
    pub fn from_poly(p: Poly, power: usize, order: usize) -> Self {
        let mut s = DSeries::zero(order);
        if power <= order {
            s.coeffs[power] = p;
        }
        s
    }

    /// Coefficients for `d^0..`; the order is `len − 1`.
    pub fn from_coeffs(coeffs: Vec<Poly>) -> Self {
        assert!(!coeffs.is_empty(), "a series carries at least d^0");
        DSeries {
            coeffs,
            parity: Parities::NONE,
        }
    }

    /// Embeds a finite list of coefficients, padding with zeros or truncating.
    pub fn from_finite(mut coeffs: Vec<Poly>, order: usize) -> Self {
        coeffs.resize(order + 1, Poly::zero());
        DSeries::from_coeffs(coeffs)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &Poly {
        &self.coeffs[n]
    }

    pub fn set_coeff(&mut self, n: usize, p: Poly) {
        self.coeffs[n] = p;
    }

    pub fn parity(&self) -> Parities {
        self.parity
    }

    /// Declares parities after checking every coefficient against them.
    pub fn with_parity(mut self, parity: Parities) -> Result<Self, SeriesError> {
        self.parity = parity;
        self.verify_parity()?;
        Ok(self)
    }

    fn assume_parity(mut self, parity: Parities) -> Self {
        self.parity = parity;
        self
    }

    pub fn verify_parity(&self) -> Result<(), SeriesError> {
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if let Some(pd) = self.parity.d {
                if Parity::of(n) != pd {
                    return Err(SeriesError::Parity { index: n, what: "parity in d" });
                }
            }
            let ok = match self.parity.u {
                Some(Parity::Even) => c.is_even(),
                Some(Parity::Odd) => c.is_odd(),
                None => true,
            };
            if !ok {
                return Err(SeriesError::Parity { index: n, what: "parity in u" });
            }
        }
        Ok(())
    }

    /// Checks `deg c_n ≤ n − shift` for every nonzero coefficient.
    pub fn check_degrees(&self, shift: usize) -> Result<(), SeriesError> {
        for (n, c) in self.coeffs.iter().enumerate() {
            if let Some(degree) = c.degree() {
                if degree + shift > n {
                    return Err(SeriesError::Degree {
                        index: n,
                        degree,
                        allowed: n.saturating_sub(shift),
                    });
                }
            }
        }
        Ok(())
    }

    /// Membership in the class where `c_n ∈ P_n`.
    pub fn in_q_class(&self) -> bool {
        self.check_degrees(0).is_ok()
    }

    /// Index of the lowest nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    pub fn truncate(&self, order: usize) -> DSeries {
        let mut out = self.clone();
        out.coeffs.truncate(order.min(self.order()) + 1);
        out
    }

    /// Extends the series with zero coefficients; only sound when the
    /// series is known to be exact (e.g. a polynomial in `d`).
    pub fn pad(&self, order: usize) -> DSeries {
        let mut out = self.clone();
        if order > out.order() {
            out.coeffs.resize(order + 1, Poly::zero());
        }
        out
    }

    /// Multiplication by `d^k`; the order grows by `k`.
    pub fn shift_up(&self, k: usize) -> DSeries {
        let mut coeffs = vec![Poly::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        let parity = Parities {
            d: self.parity.d.map(|p| if k % 2 == 1 { p.flip() } else { p }),
            u: self.parity.u,
        };
        DSeries { coeffs, parity }
    }

    /// Division by `d^k`; the first `k` coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Result<DSeries, SeriesError> {
        if k > self.order() {
            return Err(SeriesError::InsufficientOrder { have: self.order(), need: k });
        }
        if let Some(v) = self.valuation() {
            if v < k {
                return Err(SeriesError::Valuation { expected: k, found: Some(v) });
            }
        }
        let parity = Parities {
            d: self.parity.d.map(|p| if k % 2 == 1 { p.flip() } else { p }),
            u: self.parity.u,
        };
        Ok(DSeries {
            coeffs: self.coeffs[k..].to_vec(),
            parity,
        })
    }

    pub fn add(&self, other: &DSeries) -> DSeries {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|n| &self.coeffs[n] + &other.coeffs[n])
            .collect();
        DSeries {
            coeffs,
            parity: self.parity.meet(other.parity),
        }
    }

    pub fn sub(&self, other: &DSeries) -> DSeries {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|n| &self.coeffs[n] - &other.coeffs[n])
            .collect();
        DSeries {
            coeffs,
            parity: self.parity.meet(other.parity),
        }
    }

    pub fn neg(&self) -> DSeries {
        DSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            parity: self.parity,
        }
    }

    pub fn scale(&self, c: &Rational) -> DSeries {
        DSeries {
            coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect(),
            parity: self.parity,
        }
    }

    /// Multiplication by a polynomial in `u` (constant in `d`).
    pub fn mul_poly(&self, p: &Poly) -> DSeries {
        let u_parity = if p.is_zero() {
            None
        } else if p.is_even() {
            Some(Parity::Even)
        } else if p.is_odd() {
            Some(Parity::Odd)
        } else {
            None
        };
        DSeries {
            coeffs: self.coeffs.iter().map(|c| c * p).collect(),
            parity: Parities {
                d: self.parity.d,
                u: self.parity.u.zip(u_parity).map(|(a, b)| a.combine(b)),
            },
        }
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &DSeries) -> DSeries {
        let order = self.order().min(other.order());
        let mut coeffs = vec![Poly::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] += &(a * b);
            }
        }
        DSeries {
            coeffs,
            parity: self.parity.product(other.parity),
        }
    }

    /// `self / divisor`; the divisor's `d^0` coefficient must be a nonzero constant.
    pub fn div(&self, divisor: &DSeries) -> Result<DSeries, SeriesError> {
        let lead = divisor.coeffs[0]
            .degree()
            .filter(|&deg| deg == 0)
            .map(|_| divisor.coeffs[0].coeff(0))
            .ok_or(SeriesError::NonUnitDivisor)?;
        let inv_lead = Rational::from(lead.recip_ref());
        let order = self.order().min(divisor.order());
        let mut quot: Vec<Poly> = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut acc = self.coeffs[n].clone();
            for k in 1..=n {
                let b = &divisor.coeffs[k];
                if b.is_zero() || quot[n - k].is_zero() {
                    continue;
                }
                acc -= &(b * &quot[n - k]);
            }
            quot.push(acc.scale(&inv_lead));
        }
        let parity = Parities {
            d: self.parity.d.zip(divisor.parity.d).map(|(a, b)| a.combine(b)),
            u: self.parity.u.zip(divisor.parity.u).map(|(a, b)| a.combine(b)),
        };
        Ok(DSeries {
            coeffs: quot,
            parity,
        })
    }

    /// `S(−d)`.
    pub fn reflect_d(&self) -> DSeries {
        DSeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| if n % 2 == 1 { -c } else { c.clone() })
                .collect(),
            parity: self.parity,
        }
    }

    /// The series `d·D S`, whose `n`-th coefficient is `D c_{n−1}`.
    pub fn d_times_d_operator(&self) -> DSeries {
        let mut coeffs = vec![Poly::zero()];
        coeffs.extend(self.coeffs.iter().map(Poly::apply_d));
        let parity = Parities {
            d: self.parity.d.map(Parity::flip),
            u: self.parity.u.map(Parity::flip),
        };
        DSeries { coeffs, parity }
    }
}

impl fmt::Display for DSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c}) d^{n}")?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(d^{})", self.order() + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_series(terms: &[(usize, Poly)], order: usize) -> DSeries {
        let mut s = DSeries::zero(order);
        for (n, p) in terms {
            s.set_coeff(*n, p.clone());
        }
        s
    }

    #[test]
    fn product_examples() {
        let one = Poly::one();
        let a = poly_series(&[(0, one.clone()), (1, one.clone())], 2);
        let b = poly_series(&[(0, one.clone()), (1, -&one)], 2);
        let c = a.mul(&b);
        assert_eq!(c, poly_series(&[(0, one.clone()), (2, -&one)], 2));

        let x = DSeries::from_poly(Poly::u(), 2, 8);
        let y = DSeries::from_poly(Poly::u(), 3, 8);
        assert_eq!(x.mul(&y), DSeries::from_poly(Poly::monomial(1, 2), 5, 8));
    }

    #[test]
    fn unit_division() {
        let x = poly_series(
            &[(0, Poly::constant(3)), (1, Poly::u()), (3, Poly::monomial(2, 2))],
            6,
        );
        let q = x.div(&x).unwrap();
        assert_eq!(q, DSeries::one(6));
        let bad = DSeries::from_poly(Poly::u(), 1, 4);
        assert_eq!(x.div(&bad), Err(SeriesError::NonUnitDivisor));
        let nonconst = DSeries::from_poly(Poly::u(), 0, 4);
        assert_eq!(x.div(&nonconst), Err(SeriesError::NonUnitDivisor));
    }

    #[test]
    fn parity_propagation_and_checks() {
        let a = DSeries::from_poly(Poly::u(), 2, 6)
            .with_parity(Parities::new(Parity::Even, Parity::Odd))
            .unwrap();
        let b = DSeries::from_poly(Poly::u(), 1, 6)
            .with_parity(Parities::new(Parity::Odd, Parity::Odd))
            .unwrap();
        let p = a.mul(&b);
        assert_eq!(p.parity(), Parities::new(Parity::Odd, Parity::Even));
        p.verify_parity().unwrap();
        let wrong = DSeries::from_poly(Poly::u(), 1, 6)
            .with_parity(Parities::new(Parity::Even, Parity::Odd));
        assert!(matches!(wrong, Err(SeriesError::Parity { index: 1, .. })));
    }

    #[test]
    fn shifts() {
        let a = DSeries::from_poly(Poly::u(), 3, 6);
        let down = a.shift_down(2).unwrap();
        assert_eq!(down.order(), 4);
        assert_eq!(down.coeff(1), &Poly::u());
        assert_eq!(down.shift_up(2), a);
        assert!(a.shift_down(4).is_err());
    }
}
