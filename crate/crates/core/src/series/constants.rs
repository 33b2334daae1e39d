//! The auxiliary series `U, Q, Q₁, V₁`, the series `J = Q₁·𝒮(G)` and the
//! splitting constants read off its asymptotics.

use rug::ops::Pow;
use rug::{Float, Rational};

use super::kernel::op_s;
use super::recurrence::FormalSolution;
use super::{DSeries, Parities, Parity, SeriesError};
use crate::mp;
use crate::poly::Poly;
use crate::tau::TauBasis;

/// Hard-coded rational polynomial series used to split the formal solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedSeries {
    /// Initial part `A_1 d² + A_3 d⁴ + A_5 d⁶` of the formal solution.
    pub u: DSeries,
    pub q: DSeries,
    pub q1: DSeries,
    pub v1: DSeries,
}

fn one_minus_u2() -> Poly {
    Poly::from_terms(&[(0, 1, 1), (2, -1, 1)])
}

/// The four series, embedded at the requested truncation order.
pub fn fixed_series(order: usize) -> FixedSeries {
    let u = DSeries::from_finite(
        vec![
            Poly::zero(),
            Poly::zero(),
            Poly::from_terms(&[(1, -1, 4)]),
            Poly::zero(),
            Poly::from_terms(&[(3, 91, 864), (1, -47, 576)]),
            Poly::zero(),
            Poly::from_terms(&[(5, -319, 2880), (3, 185, 1152), (1, -3703, 69120)]),
        ],
        order,
    );
    let q = DSeries::from_finite(
        vec![
            Poly::one(),
            Poly::zero(),
            one_minus_u2().scale(&Rational::from((1, 4))),
            Poly::zero(),
            Poly::from_terms(&[(4, 91, 432), (2, -13, 48), (0, 13, 216)]),
            Poly::zero(),
            Poly::from_terms(&[(6, -319, 960), (4, 1079, 1728), (2, -937, 2880), (0, 287, 8640)]),
        ],
        order,
    );
    let q1 = DSeries::from_finite(
        vec![
            Poly::zero(),
            Poly::zero(),
            Poly::from_terms(&[(2, 1, 1), (0, -1, 1)]),
            Poly::zero(),
            Poly::from_terms(&[(0, 1, 4), (4, -1, 4)]),
            Poly::zero(),
            &one_minus_u2() * &Poly::from_terms(&[(4, -5 * 4, 48 * 9), (2, -5, 48), (0, -5, 48)]),
            Poly::zero(),
            &one_minus_u2() * &Poly::from_terms(&[(6, -367, 2160), (4, 185, 432), (2, -997, 4320)]),
        ],
        order,
    );
    let v1 = DSeries::from_finite(
        vec![
            Poly::one(),
            Poly::zero(),
            one_minus_u2(),
            Poly::zero(),
            Poly::from_terms(&[(4, -71, 432), (2, -1, 12), (0, 107, 432)]),
            Poly::zero(),
            Poly::from_terms(&[(6, 1351, 2160), (4, -193, 144), (2, 49, 60), (0, -11, 108)]),
        ],
        order,
    );
    let even_odd = Parities::new(Parity::Even, Parity::Odd);
    let even_even = Parities::new(Parity::Even, Parity::Even);
    FixedSeries {
        u: u.with_parity(even_odd).expect("U is odd in u"),
        q: q.with_parity(even_even).expect("Q is even in u"),
        q1: q1.with_parity(even_even).expect("Q1 is even in u"),
        v1: v1.with_parity(even_even).expect("V1 is even in u"),
    }
}

/// `F = A − U`, `G = F/Q` and `J = Q₁·𝒮(G)`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub f: DSeries,
    pub g: DSeries,
    pub j: DSeries,
}

pub fn decompose(sol: &FormalSolution) -> Result<Decomposition, SeriesError> {
    let a = sol.series();
    if sol.order() < 14 {
        return Err(SeriesError::InsufficientOrder { have: sol.order(), need: 14 });
    }
    let order = a.order();
    let pc = fixed_series(order + 2);
    let f = a.sub(&pc.u.truncate(order));
    if f.valuation() != Some(8) {
        return Err(SeriesError::Valuation { expected: 8, found: f.valuation() });
    }
    let g = f.div(&pc.q.truncate(order))?;
    if g.valuation() != Some(8) {
        return Err(SeriesError::Valuation { expected: 8, found: g.valuation() });
    }
    // Q₁ = O(d²), so J is known two orders beyond 𝒮(G).
    let q1_reduced = pc.q1.shift_down(2)?;
    let j = op_s(&g).mul(&q1_reduced).shift_up(2);
    let j = j.with_parity(Parities::new(Parity::Odd, Parity::Even))?;
    if j.valuation() != Some(11) {
        return Err(SeriesError::Valuation { expected: 11, found: j.valuation() });
    }
    j.check_degrees(1)?;
    Ok(Decomposition { f, g, j })
}

/// `J = Q₁·𝒮((A − U)/Q)`, exact through `d^{order+3}`.
pub fn compute_j(sol: &FormalSolution) -> Result<DSeries, SeriesError> {
    decompose(sol).map(|d| d.j)
}

/// Partial sums of a slowly converging series and their Richardson tableau.
#[derive(Clone, Debug)]
pub struct Richardson {
    /// `(m, S_m)` pairs; `m` is the last summed index.
    pub partial_sums: Vec<(usize, Float)>,
    /// Level `k` removes an error term `c·m^{−(p+k−1)}`.
    pub levels: Vec<Vec<Float>>,
    pub estimate: Float,
    pub error: Float,
}

impl Richardson {
    /// Builds the tableau assuming `S − S_m ≈ c₁ m^{−p} + c₂ m^{−(p+1)} + …`.
    pub fn from_partial_sums(partial_sums: Vec<(usize, Float)>, p: u32, levels: usize) -> Self {
        let prec = partial_sums
            .first()
            .map(|(_, s)| s.prec())
            .unwrap_or(64);
        let mut table: Vec<Vec<Float>> = vec![partial_sums.iter().map(|(_, s)| s.clone()).collect()];
        let ms: Vec<usize> = partial_sums.iter().map(|(m, _)| *m).collect();
        for level in 0..levels {
            let prev = table.last().expect("level 0 present");
            if prev.len() < 2 {
                break;
            }
            let exponent = p + level as u32;
            let offset = level + 1;
            let next: Vec<Float> = (1..prev.len())
                .map(|i| {
                    let m1 = Float::with_val(prec, ms[i - 1 + offset - 1] as u32).pow(exponent);
                    let m2 = Float::with_val(prec, ms[i + offset - 1] as u32).pow(exponent);
                    let num = m2.clone() * &prev[i] - m1.clone() * &prev[i - 1];
                    num / (m2 - m1)
                })
                .collect();
            table.push(next);
        }
        let last = table.last().expect("level 0 present");
        let estimate = last.last().cloned().unwrap_or_else(|| Float::with_val(prec, 0));
        let error = if table.len() >= 2 {
            let prev = &table[table.len() - 2];
            (estimate.clone() - prev.last().expect("nonempty")).abs()
        } else if last.len() >= 2 {
            (estimate.clone() - &last[last.len() - 2]).abs()
        } else {
            Float::with_val(prec, f64::INFINITY)
        };
        Richardson {
            partial_sums,
            levels: table,
            estimate,
            error,
        }
    }
}

/// Direct reading of the leading asymptotics of `J`:
/// `J_n ≈ α (n−2)! (i/2π)^{n−1} τ_{n−1} + β (n−4)! … τ_{n−3} + γ (n−6)! … τ_{n−5}`.
#[derive(Clone, Debug)]
pub struct LeadingConstants {
    /// `(n, α̂_n, β̂_n, γ̂_n)` for odd `n`, raw signs.
    pub rows: Vec<(usize, Float, Float, Float)>,
}

impl LeadingConstants {
    fn column(&self, k: usize, sign: i32) -> Vec<(usize, Float)> {
        self.rows
            .iter()
            .map(|row| {
                let v = match k {
                    0 => &row.1,
                    1 => &row.2,
                    _ => &row.3,
                };
                (row.0, v.clone() * sign)
            })
            .collect()
    }
}

pub fn alpha_from_leading_coefficients(j: &DSeries, prec: u32) -> LeadingConstants {
    let basis = TauBasis::global();
    let rows = (13..=j.order())
        .step_by(2)
        .map(|n| {
            let expansion = basis.to_tau(j.coeff(n));
            let read = |k: usize| {
                mp::from_rational(prec, &expansion.coeff(k)) / template_scale(k + 1, prec) * (k as u32)
            };
            (n, read(n - 1), read(n - 3), read(n - 5))
        })
        .collect();
    LeadingConstants { rows }
}

/// Splitting constants of the formal solution.
///
/// `alpha`, `beta`, `gamma` come from the leading coefficients of `J_n`,
/// extrapolated in `n` and oriented so that `α > 0`; `orientation` is the
/// sign that was applied. The `*_seq` fields and `*_sum` tableaux hold the
/// summation route `(4/π) Σ α_n` read off `E = 𝒮(J/d)`, which converges to
/// `orientation·α/π`.
#[derive(Clone, Debug)]
pub struct ConstantEstimates {
    pub precision: u32,
    pub alpha_seq: Vec<(usize, Float)>,
    pub beta_seq: Vec<(usize, Float)>,
    pub gamma_seq: Vec<(usize, Float)>,
    pub alpha_sum: Richardson,
    pub beta_sum: Richardson,
    pub gamma_sum: Richardson,
    pub leading: LeadingConstants,
    pub orientation: i32,
    pub alpha: Richardson,
    pub beta: Richardson,
    pub gamma: Richardson,
}

/// `(n−1)! (2π)^{−(n−1)} (−1)^{(n−1)/2}` for odd `n`, the real value of
/// `(n−1)! (i/2π)^{n−1}`.
fn template_scale(n: usize, prec: u32) -> Float {
    let two_pi = mp::pi(prec) * 2u32;
    let fact = Float::with_val(prec, mp::factorial((n - 1) as u32));
    let mut v = fact / two_pi.pow((n - 1) as u32);
    if ((n - 1) / 2) % 2 == 1 {
        v = -v;
    }
    v
}

fn partial_sums(seq: &[(usize, Float)], prec: u32) -> Vec<(usize, Float)> {
    let factor = Float::with_val(prec, 4u32) / mp::pi(prec);
    let mut acc = Float::with_val(prec, 0);
    seq.iter()
        .map(|(n, v)| {
            acc += v;
            (*n, acc.clone() * &factor)
        })
        .collect()
}

/// Minimum order of `J` accepted by [`extract_constants`].
pub const MIN_J_ORDER: usize = 25;

/// Decay exponents of the α, β and γ corrections; also the Richardson
/// exponents of both routes.
const DECAY: [u32; 3] = [6, 4, 2];

pub fn extract_constants(j: &DSeries, prec: u32) -> Result<ConstantEstimates, SeriesError> {
    if j.order() < MIN_J_ORDER {
        return Err(SeriesError::InsufficientOrder { have: j.order(), need: MIN_J_ORDER });
    }
    let e = op_s(&j.shift_down(1)?);
    let basis = TauBasis::global();
    let mut alpha_seq = Vec::new();
    let mut beta_seq = Vec::new();
    let mut gamma_seq = Vec::new();
    for n in (11..=e.order()).step_by(2) {
        let expansion = basis.to_tau(e.coeff(n));
        let read = |k: usize| mp::from_rational(prec, &expansion.coeff(k)) / template_scale(k, prec);
        alpha_seq.push((n, read(n)));
        beta_seq.push((n - 2, read(n - 2)));
        gamma_seq.push((n - 4, read(n - 4)));
    }
    let alpha_sum = Richardson::from_partial_sums(partial_sums(&alpha_seq, prec), DECAY[0], 2);
    let beta_sum = Richardson::from_partial_sums(partial_sums(&beta_seq, prec), DECAY[1], 2);
    let gamma_sum = Richardson::from_partial_sums(partial_sums(&gamma_seq, prec), DECAY[2], 2);

    let leading = alpha_from_leading_coefficients(j, prec);
    let orientation = match leading.rows.last() {
        Some((_, a, _, _)) if a.is_sign_negative() => -1,
        _ => 1,
    };
    let alpha = Richardson::from_partial_sums(leading.column(0, orientation), DECAY[0], 2);
    let beta = Richardson::from_partial_sums(leading.column(1, orientation), DECAY[1], 2);
    let gamma = Richardson::from_partial_sums(leading.column(2, orientation), DECAY[2], 2);
    Ok(ConstantEstimates {
        precision: prec,
        alpha_seq,
        beta_seq,
        gamma_seq,
        alpha_sum,
        beta_sum,
        gamma_sum,
        leading,
        orientation,
        alpha,
        beta,
        gamma,
    })
}

/// `g_n = ‖S_n‖_n (2π)^n / n!`.
pub fn gevrey_profile(s: &DSeries, prec: u32) -> Vec<Float> {
    let basis = TauBasis::global();
    let two_pi = mp::pi(prec) * 2u32;
    s.coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let index = c.degree().map_or(n, |d| d.max(n));
            let norm = basis.to_tau(c).weighted_norm(index, prec);
            norm * two_pi.clone().pow(n as u32) / Float::with_val(prec, mp::factorial(n as u32))
        })
        .collect()
}
