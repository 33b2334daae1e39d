use std::sync::OnceLock;

use proptest::prelude::*;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};
use splitting_lab::mp;
use splitting_lab::series::*;
use splitting_lab::tau::{self, TauBasis};
use splitting_lab::{DSeries, Poly, TauExpansion};

const PREC: u32 = 256;

fn sol40() -> &'static FormalSolution {
    static S: OnceLock<FormalSolution> = OnceLock::new();
    S.get_or_init(|| formal_solution(40).unwrap())
}

fn j40() -> &'static DSeries {
    static J: OnceLock<DSeries> = OnceLock::new();
    J.get_or_init(|| compute_j(sol40()).unwrap())
}

fn constants40() -> &'static ConstantEstimates {
    static C: OnceLock<ConstantEstimates> = OnceLock::new();
    C.get_or_init(|| extract_constants(j40(), PREC).unwrap())
}

fn q_series(order: usize) -> impl Strategy<Value = DSeries> {
    let coeff = |n: usize| {
        prop::collection::vec((-20i64..=20, 1i64..=8), n + 1)
            .prop_map(|c| Poly::from_coeffs(c.into_iter().map(|(a, b)| Rational::from((a, b))).collect()))
    };
    (0..=order).map(coeff).collect::<Vec<_>>().prop_map(DSeries::from_coeffs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn full_step_from_half_step(q in q_series(16)) {
        let two = Rational::from(2);
        prop_assert_eq!(op_c1(&q), op_s(&op_s(&q)).scale(&two).add(&q));
        prop_assert_eq!(op_s1(&q), op_s(&op_c(&q)).scale(&two));
    }

    #[test]
    fn product_rules(q in q_series(16), g in q_series(16)) {
        let qg = q.mul(&g);
        prop_assert_eq!(op_c(&qg), op_c(&q).mul(&op_c(&g)).add(&op_s(&q).mul(&op_s(&g))));
        prop_assert_eq!(op_s(&qg), op_c(&q).mul(&op_s(&g)).add(&op_s(&q).mul(&op_c(&g))));
        prop_assert_eq!(op_c1(&qg), op_c1(&q).mul(&op_c1(&g)).add(&op_s1(&q).mul(&op_s1(&g))));
        prop_assert_eq!(op_s1(&qg), op_c1(&q).mul(&op_s1(&g)).add(&op_s1(&q).mul(&op_c1(&g))));
    }

    #[test]
    fn entire_kernel_split(q in q_series(16)) {
        let rhs = op_j(&q).scale(&Rational::from(2))
            .add(&apply_f_of_dd(&Kernel::entire_remainder(16), &q.d_times_d_operator()));
        prop_assert_eq!(rhs, q);
    }

    #[test]
    fn kernels_preserve_q_class(q in q_series(12)) {
        prop_assert!(q.in_q_class());
        prop_assert!(op_c(&q).in_q_class());
        prop_assert!(op_s1(&q).in_q_class());
    }
}

#[test]
fn shifted_tanh_from_exp_kernel() {
    let order = 10;
    let s = DSeries::from_poly(Poly::u(), 0, order);
    let out = apply_f_of_dd(&Kernel::exp(&Rational::from(1), order), &s);
    for n in 0..=order {
        assert_eq!(out.coeff(n), &tau::tau(n + 1));
    }
}

#[test]
fn residual_vanishes_through_next_order() {
    for n in [8, 16, 24] {
        let sol = formal_solution(n).unwrap();
        let r = residual(sol.series(), n + 1).unwrap();
        assert!(r.is_zero(), "order {n}: lowest surviving power {:?}", r.valuation());
    }
}

#[test]
fn solution_structure() {
    let a = sol40().series();
    for n in 0..=40 {
        let c = a.coeff(n);
        if n % 2 == 1 {
            assert!(c.is_zero(), "odd power d^{n}");
            continue;
        }
        if n == 0 {
            assert!(c.is_zero());
            continue;
        }
        assert!(c.is_odd(), "A at d^{n} not odd");
        assert_eq!(c.coeff(0), Rational::new());
        assert!(c.degree().unwrap() < n, "degree bound at d^{n}");
    }
}

#[test]
fn higher_order_rerun_is_bit_identical() {
    let low = formal_solution(20).unwrap();
    for (k, p) in low.odd_polys().iter().enumerate() {
        assert_eq!(p, &sol40().odd_polys()[k]);
    }
}

#[test]
fn j_shape() {
    let j = j40();
    assert_eq!(j.valuation(), Some(11));
    for n in 0..=j.order() {
        let c = j.coeff(n);
        if c.is_zero() {
            continue;
        }
        assert_eq!(n % 2, 1, "J has an even power d^{n}");
        assert!(c.is_even(), "J_{n} not even in u");
        assert!(c.degree().unwrap() < n, "deg J_{n}");
    }
    let dec = decompose(sol40()).unwrap();
    assert_eq!(dec.g.valuation(), Some(8));
}

#[test]
fn hard_coded_series() {
    let c = fixed_series(12);
    assert_eq!(c.u.coeff(2), &Poly::from_terms(&[(1, -1, 4)]));
    assert_eq!(c.q.coeff(0), &Poly::one());
    assert_eq!(c.q.coeff(2), &Poly::from_terms(&[(0, 1, 4), (2, -1, 4)]));
    assert_eq!(c.q1.coeff(2), &Poly::from_terms(&[(0, -1, 1), (2, 1, 1)]));
}

#[test]
fn gevrey_profile_fixture() {
    let g = gevrey_profile(sol40().series(), PREC);
    let pi = Float::with_val(PREC, Constant::Pi);
    let g2 = pi.pow(3u32) / 4u32;
    assert!((g[2].clone() - &g2).abs() < 1e-60);
    let fixture = [
        (10, 41.031667231243),
        (20, 79.778724286786),
        (30, 118.468893558868),
        (40, 157.047208666446),
    ];
    for (n, v) in fixture {
        assert!((g[n].to_f64() - v).abs() < 1e-9, "g_{n} = {}", g[n].to_f64());
    }
}

#[test]
fn gevrey_profile_controls() {
    let finite = DSeries::from_poly(Poly::u(), 1, 10);
    let g = gevrey_profile(&finite, PREC);
    assert!(g[2..].iter().all(|x| x.is_zero()));

    let wild = DSeries::from_coeffs((0..30u32).map(|n| Poly::monomial(mp::factorial(n), 1)).collect());
    let g = gevrey_profile(&wild, PREC);
    assert!(g[29] > g[20].clone() * 1e6);
}

fn j_ratio(n: usize) -> f64 {
    let two_pi = Float::with_val(PREC, Constant::Pi) * 2u32;
    let norm = tau::norm(j40().coeff(n), n, PREC).unwrap();
    let r = norm * two_pi.pow(n as u32) / Float::with_val(PREC, mp::factorial(n as u32 - 2));
    r.to_f64()
}

#[test]
fn j_profile_grows_at_most_polynomially() {
    let ratios: Vec<(usize, f64)> = (11..=j40().order()).step_by(2).map(|n| (n, j_ratio(n))).collect();
    for (i, &(m, rm)) in ratios.iter().enumerate() {
        for &(n, rn) in &ratios[i + 1..] {
            let exponent = (rn / rm).ln() / (n as f64 / m as f64).ln();
            assert!(exponent < 3.0, "ratio from n = {m} to {n} grows like n^{exponent:.2}");
        }
    }
}

#[test]
fn alpha_tail_decays_like_n_to_minus_seven() {
    let seq = &constants40().alpha_seq;
    let scaled: Vec<f64> = seq.iter().map(|(n, a)| a.to_f64().abs() * (*n as f64).powi(7)).collect();
    let head = scaled[..scaled.len() / 2].iter().cloned().fold(0.0, f64::max);
    let tail = scaled[scaled.len() / 2..].iter().cloned().fold(0.0, f64::max);
    assert!(scaled.iter().all(|x| x.is_finite()));
    assert!(tail <= head, "tail {tail:e} exceeds head {head:e}");
}

#[test]
fn richardson_levels_converge() {
    let a = &constants40().alpha;
    let last = |l: &Vec<Float>| l.last().unwrap().to_f64();
    let gaps: Vec<f64> = a.levels.windows(2).map(|w| (last(&w[1]) - last(&w[0])).abs()).collect();
    assert!(gaps.windows(2).all(|g| g[1] < g[0]), "{gaps:?}");
    let rel = a.error.to_f64() / a.estimate.to_f64().abs();
    assert!(rel < 1e-4, "only {rel:e} relative");
}

#[test]
fn sum_route_is_consistent_with_leading_route() {
    let c = constants40();
    let pi = std::f64::consts::PI;
    let ratio = c.alpha_sum.estimate.to_f64() * pi / c.alpha.estimate.to_f64();
    assert!((ratio.abs() - 1.0).abs() < 1e-3, "{ratio}");
}

fn synthetic_j(c: f64, order: usize) -> DSeries {
    let basis = TauBasis::global();
    let inv_two_pi = Float::with_val(PREC + 64, Constant::Pi).recip() / 2u32;
    let mut coeffs = vec![Poly::zero(); order + 1];
    for n in (11..=order).step_by(2) {
        let k = (n - 1) as u32;
        let sign = if (k / 2).is_multiple_of(2) { 1 } else { -1 };
        let power: Float = inv_two_pi.clone().pow(k);
        let scale: Float = Float::with_val(PREC + 64, mp::factorial(n as u32 - 2)) * power * c * sign;
        let q = scale.to_rational().unwrap();
        let mut a = vec![Rational::new(); n];
        a[n - 1] = q;
        coeffs[n] = basis.from_tau(&TauExpansion::new(a));
    }
    DSeries::from_coeffs(coeffs)
}

#[test]
fn template_round_trip_recovers_constant() {
    for c in [3.5, -89.0] {
        let j = synthetic_j(c, 41);
        let est = extract_constants(&j, PREC).unwrap();
        for (n, a, _, _) in &est.leading.rows {
            assert!((a.to_f64() - c).abs() < 1e-12, "n = {n}: {}", a.to_f64());
        }
        assert_eq!(est.orientation, if c < 0.0 { -1 } else { 1 });
        assert!((est.alpha.estimate.to_f64() - c.abs()).abs() < 1e-12);
    }
}

#[test]
fn insufficient_order_is_reported() {
    let j = compute_j(&formal_solution(16).unwrap()).unwrap();
    assert!(matches!(extract_constants(&j, PREC), Err(SeriesError::InsufficientOrder { .. })));
}

#[test]
fn evaluation_at_the_midpoint() {
    let a = sol40().series();
    let d = Float::with_val(PREC, 0.3);
    let zero = Float::with_val(PREC, 0);
    assert_eq!(eval_series(a, &d, &zero, Truncation::Optimal).unwrap(), 0);
}

/// `q_d(t) − q_0(t)` with `q_0(t) = 4 atan(e^{−t})`.
fn q_gap(eps: f64, t: f64) -> f64 {
    let e = Float::with_val(PREC, eps);
    let d = Float::with_val(PREC, &e / 2u32).asinh() * 2u32;
    let x = Float::with_val(PREC, &d * t) / &e;
    let u = x.clone().tanh();
    let a = eval_series(sol40().series(), &d, &u, Truncation::Optimal).unwrap();
    let root = (Float::with_val(PREC, 1) - u.square()).sqrt();
    let q0d = (-x).exp().atan() * 4u32;
    let q0 = Float::with_val(PREC, -t).exp().atan() * 4u32;
    (root * a + q0d - q0).to_f64()
}

#[test]
fn series_approaches_the_pendulum_at_rate_eps_squared() {
    let gap = |eps: f64| [-1.0, -0.5, 0.25, 0.5, 1.0].iter().fold(0.0f64, |m, &t| m.max(q_gap(eps, t).abs()));
    let slope = (gap(0.1) / gap(0.05)).ln() / 2f64.ln();
    assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
    assert!(q_gap(0.1, 0.0).abs() < 1e-70);
}
