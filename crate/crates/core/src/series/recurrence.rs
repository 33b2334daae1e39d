//! The difference equation in the variable `u = tanh(dt/ε)` and the
//! order-by-order construction of its odd formal solution
//! `A_d(u) = Σ_{n≥1} A_{2n−1}(u) d^{2n}`.

use rug::{Integer, Rational};

use super::kernel::Kernel;
use super::{DSeries, Parities, Parity, SeriesError};
use crate::poly::Poly;

fn one_minus_u2() -> Poly {
    Poly::from_terms(&[(0, 1, 1), (2, -1, 1)])
}

fn inv_factorial(n: usize) -> Rational {
    Rational::from((Integer::from(1), Integer::from(Integer::factorial(n as u32))))
}

/// `ε² = 2 cosh d − 2 = Σ_{k≥1} 2 d^{2k}/(2k)!`.
pub fn eps_squared_series(order: usize) -> DSeries {
    let mut s = DSeries::zero(order);
    for n in (2..=order).step_by(2) {
        s.set_coeff(n, Poly::constant(inv_factorial(n) * 2u32));
    }
    s.assume_parity(Parities::new(Parity::Even, Parity::Even))
}

/// `I_{2n−1}(u) = (2/(2n)!) E^{2n−1}(−2)` with `E(P) = (1−u²)P' − uP`, i.e.
/// the `2n`-th derivative of `4 arctan(e^{−τ})` divided by `√(1−u²)`.
pub fn i_poly(n: usize) -> Poly {
    assert!(n >= 1, "I-polynomials start at n = 1");
    i_polys(n).pop().expect("nonempty")
}

/// `I_1, I_3, …, I_{2count−1}`.
pub(crate) fn i_polys(count: usize) -> Vec<Poly> {
    let e_step = |p: &Poly| &p.apply_d() - &(p * &Poly::u());
    let mut current = Poly::constant(-2);
    let mut out = Vec::with_capacity(count);
    for n in 1..=count {
        // E^{2n−1}(−2): one step for the first, then two per index.
        let steps = if n == 1 { 1 } else { 2 };
        for _ in 0..steps {
            current = e_step(&current);
        }
        out.push(current.scale(&(inv_factorial(2 * n) * 2u32)));
    }
    out
}

/// Which trigonometric composite of `A√(1−u²)` to form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrigKind {
    /// `cos(A√(1−u²))`
    CosW,
    /// `sin(A√(1−u²))/√(1−u²)`
    SincW,
}

/// Both composites as polynomial series in `(1−u²)` and `A`.
pub(crate) fn trig_pair(a: &DSeries) -> Result<(DSeries, DSeries), SeriesError> {
    let order = a.order();
    let v = a.valuation();
    if matches!(v, Some(0) | Some(1)) {
        return Err(SeriesError::LowOrderTerms);
    }
    let mut cos_w = DSeries::one(order);
    let mut sin_sum = DSeries::one(order);
    let Some(v) = v else {
        return Ok((cos_w, DSeries::zero(order)));
    };
    // B = −(1−u²)A², so cos_w = Σ B^k/(2k)! and sinc_w = A Σ B^k/(2k+1)!.
    let b = a.mul(a).mul_poly(&one_minus_u2()).neg();
    let mut power = DSeries::one(order);
    let mut k = 1;
    while 2 * v * k <= order {
        power = power.mul(&b);
        cos_w = cos_w.add(&power.scale(&inv_factorial(2 * k)));
        sin_sum = sin_sum.add(&power.scale(&inv_factorial(2 * k + 1)));
        k += 1;
    }
    Ok((cos_w, a.mul(&sin_sum)))
}

pub fn trig_compose(a: &DSeries, which: TrigKind) -> Result<DSeries, SeriesError> {
    let (c, s) = trig_pair(a)?;
    Ok(match which {
        TrigKind::CosW => c,
        TrigKind::SincW => s,
    })
}

/// `(cosh d + u sinh d)^{−1}` as a unit series.
fn inv_shift_denominator(order: usize) -> DSeries {
    let mut den = DSeries::zero(order);
    for n in 0..=order {
        let c = inv_factorial(n);
        let p = if n % 2 == 0 {
            Poly::constant(c)
        } else {
            Poly::monomial(c, 1)
        };
        den.set_coeff(n, p);
    }
    DSeries::one(order)
        .div(&den)
        .expect("cosh d + u sinh d is a unit")
}

/// The residual
///
/// ```text
/// Z(T⁺)/(cosh d + u sinh d) + Z(T⁻)/(cosh d − u sinh d) − 2Z − f(ε, u, Z)
/// ```
///
/// through `d^order`, where `ε = 2 sinh(d/2)` and
/// `f = ε²(2u cos_w(Z) + (2u²−1) sinc_w(Z)) − Σ I_{2n−1} d^{2n}`.
pub fn residual(z: &DSeries, order: usize) -> Result<DSeries, SeriesError> {
    if z.order() < order {
        return Err(SeriesError::InsufficientOrder {
            have: z.order(),
            need: order,
        });
    }
    let z = z
        .truncate(order)
        .with_parity(Parities { d: Some(Parity::Even), u: None })
        .map_err(|_| SeriesError::Invalid("residual needs a series even in d".into()))?;

    // Z(d, T⁺) = exp(dD)Z. Because Z is even in d, the T⁻ term is the
    // image of the T⁺ term under d → −d.
    let shifted = Kernel::exp(&Rational::from(1), order).apply(&z);
    let plus = shifted.mul(&inv_shift_denominator(order));
    let lhs = plus.add(&plus.reflect_d()).sub(&z.scale(&Rational::from(2)));

    let (cos_w, sinc_w) = trig_pair(&z)?;
    let two_u = Poly::monomial(2, 1);
    let two_u2_minus_one = Poly::from_terms(&[(2, 2, 1), (0, -1, 1)]);
    let bracket = cos_w.mul_poly(&two_u).add(&sinc_w.mul_poly(&two_u2_minus_one));
    let mut f = eps_squared_series(order).mul(&bracket);
    for (k, ip) in i_polys(order / 2).into_iter().enumerate() {
        let n = 2 * (k + 1);
        let c = f.coeff(n) - &ip;
        f.set_coeff(n, c);
    }
    Ok(lhs.sub(&f))
}

/// Solves `[(1−u²)² A']' + R = 0` for the odd polynomial vanishing at `u = 0`:
/// `A(u) = −∫₀^u (∫₁^t R) / (1−t²)² dt`.
pub fn solve_step(r: &Poly) -> Result<Poly, SeriesError> {
    if !r.is_odd() {
        return Err(SeriesError::Residual("R is not odd in u".into()));
    }
    if r.eval(&Rational::from(1)) != 0 {
        return Err(SeriesError::Residual("R(1) ≠ 0".into()));
    }
    let inner = r.integrate_from(&Rational::from(1));
    let w = one_minus_u2();
    let quotient = inner.exact_div(&(&w * &w))?;
    Ok(-&quotient.integrate_from(&Rational::new()))
}

/// The formal separatrix series through `d^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSolution {
    order: usize,
    a: DSeries,
    odd_polys: Vec<Poly>,
}

impl FormalSolution {
    /// Truncation order in `d` (even).
    pub fn order(&self) -> usize {
        self.order
    }

    /// `A_d(u) = Σ A_{2n−1} d^{2n}`, exact through `d^{order+1}`.
    pub fn series(&self) -> &DSeries {
        &self.a
    }

    /// `A_1, A_3, …`.
    pub fn odd_polys(&self) -> &[Poly] {
        &self.odd_polys
    }

    /// `A_{2n−1}` for `n ≥ 1`.
    pub fn a_poly(&self, n: usize) -> Option<&Poly> {
        n.checked_sub(1).and_then(|i| self.odd_polys.get(i))
    }

    pub(crate) fn from_parts(order: usize, odd_polys: Vec<Poly>) -> Result<Self, SeriesError> {
        let mut a = DSeries::zero(order + 1);
        for (k, p) in odd_polys.iter().enumerate() {
            a.set_coeff(2 * k + 2, p.clone());
        }
        let a = a.with_parity(Parities::new(Parity::Even, Parity::Odd))?;
        Ok(FormalSolution { order, a, odd_polys })
    }
}

/// Runs the recurrence until `A` is known through `d^order`.
pub fn formal_solution(order: usize) -> Result<FormalSolution, SeriesError> {
    if order < 4 || order % 2 == 1 {
        return Err(SeriesError::Invalid(format!(
            "formal solution order must be even and ≥ 4, got {order}"
        )));
    }
    let mut z = DSeries::zero(order + 2);
    let mut odd_polys = Vec::new();
    let mut power = 2;
    while power <= order {
        // The residual of Z_n starts at d^{2n+4} = d^{power+2}.
        let target = power + 2;
        let r = residual(&z.truncate(target), target)?;
        if let Some(v) = r.valuation() {
            if v < target {
                return Err(SeriesError::Residual(format!(
                    "residual has a nonzero d^{v} coefficient before d^{target}"
                )));
            }
        }
        let a = solve_step(r.coeff(target))?;
        let allowed = power - 1;
        if let Some(degree) = a.degree() {
            if degree > allowed {
                return Err(SeriesError::Degree { index: power, degree, allowed });
            }
        }
        if !a.is_odd() || a.coeff(0) != 0 {
            return Err(SeriesError::Parity { index: power, what: "oddness of A" });
        }
        z.set_coeff(power, a.clone());
        odd_polys.push(a);
        power += 2;
    }
    FormalSolution::from_parts(order, odd_polys)
}
