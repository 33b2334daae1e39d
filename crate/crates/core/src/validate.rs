//! The invariant suite behind `splitting-lab validate`.
//!
//! Every property is checked exactly where the objects are exact (rational
//! series identities, residuals, basis algebra) and against independent
//! float oracles otherwise. The τ table is injectable so that a corrupted
//! cache is caught.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Rational};

use crate::dynamics::{self, fixed_point_data, manifold_series, map_backward, map_forward, Branch, PhasePoint, PrecisionConfig};
use crate::mp;
use crate::poly::Poly;
use crate::series::{
    formal_solution, op_c, op_c1, op_s, op_s1, residual, DSeries, Kernel,
};
use crate::tau::TauBasis;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub results: Vec<PropertyResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    fn push(&mut self, name: &'static str, outcome: Result<String, String>) {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.results.push(PropertyResult { name, passed, detail });
    }
}

#[derive(Clone, Debug)]
pub struct ValidationOptions {
    pub seed: u64,
    pub random_series: usize,
    pub series_order: usize,
    pub residual_orders: Vec<usize>,
    pub tau_max: usize,
    pub round_trip_degree: usize,
    pub bits: u32,
    pub eps: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            seed: 0x5eed,
            random_series: 20,
            series_order: 16,
            residual_orders: vec![8, 16, 24],
            tau_max: 40,
            round_trip_degree: 60,
            bits: 256,
            eps: 0.4,
        }
    }
}

fn small_rational(rng: &mut impl Rng) -> Rational {
    Rational::from((rng.gen_range(-9i64..=9), rng.gen_range(1i64..=6)))
}

/// A polynomial of degree at most `deg` with small random coefficients.
pub fn random_poly(rng: &mut impl Rng, deg: usize) -> Poly {
    Poly::from_coeffs((0..=deg).map(|_| small_rational(rng)).collect())
}

/// A random element of `𝒬`: `Q_n ∈ P_n` for `n ≤ order`.
pub fn random_q_series(rng: &mut impl Rng, order: usize) -> DSeries {
    DSeries::from_coeffs((0..=order).map(|n| random_poly(rng, n)).collect())
}

/// Taylor coefficients `[h^k] tanh(z + h)` for `k < len`, built from the
/// addition formula and the exponential series only.
pub fn tanh_taylor(z: &Float, len: usize) -> Vec<Float> {
    let prec = z.prec();
    let zero = Float::with_val(prec, 0);
    // sinh h and cosh h.
    let mut sh = vec![zero.clone(); len];
    let mut ch = vec![zero.clone(); len];
    let mut fact = Float::with_val(prec, 1);
    for k in 0..len {
        if k > 0 {
            fact *= k as u32;
        }
        let inv = Float::with_val(prec, 1u32) / &fact;
        if k % 2 == 0 {
            ch[k] = inv;
        } else {
            sh[k] = inv;
        }
    }
    let div = |num: &[Float], den: &[Float]| -> Vec<Float> {
        let mut out = vec![zero.clone(); len];
        for k in 0..len {
            let mut acc = num[k].clone();
            for j in 1..=k {
                acc -= Float::with_val(prec, &den[j] * &out[k - j]);
            }
            out[k] = acc / &den[0];
        }
        out
    };
    let th = div(&sh, &ch);
    let t = z.clone().tanh();
    // (t + th) / (1 + t·th)
    let mut num = th.clone();
    num[0] += &t;
    let mut den: Vec<Float> = th.iter().map(|c| Float::with_val(prec, c * &t)).collect();
    den[0] += 1u32;
    div(&num, &den)
}

fn check_tau_identity(basis: &TauBasis, opts: &ValidationOptions, rng: &mut impl Rng) -> Result<String, String> {
    let prec = opts.bits;
    let tol = Float::with_val(prec, 10u32).pow_(-(prec as i32) / 4);
    let mut worst = Float::with_val(prec, 0);
    for _ in 0..4 {
        let z = Float::with_val(prec, rng.gen_range(-2.0..2.0));
        let taylor = tanh_taylor(&z, opts.tau_max + 1);
        let u = z.clone().tanh();
        for n in 1..=opts.tau_max {
            let tau = basis.try_tau(n).ok_or_else(|| format!("table has no τ_{n}"))?;
            let err = (tau.eval_float(&u) - &taylor[n - 1]).abs();
            if err > tol {
                return Err(format!("τ_{n}(tanh {:.4}) off by {:.3e}", z.to_f64(), err.to_f64()));
            }
            if err > worst {
                worst = err;
            }
        }
    }
    Ok(format!("n ≤ {}, max error {:.3e}", opts.tau_max, worst.to_f64()))
}

trait PowI {
    fn pow_(self, k: i32) -> Float;
}

impl PowI for Float {
    fn pow_(self, k: i32) -> Float {
        use rug::ops::Pow;
        self.pow(k)
    }
}

fn check_d_raises(basis: &TauBasis, opts: &ValidationOptions) -> Result<String, String> {
    for n in 1..opts.tau_max {
        let (a, b) = match (basis.try_tau(n), basis.try_tau(n + 1)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(format!("table has no τ_{}", n + 1)),
        };
        if a.apply_d() != b.scale(&Rational::from(n)) {
            return Err(format!("D τ_{n} ≠ {n} τ_{}", n + 1));
        }
    }
    Ok(format!("1 ≤ n < {}", opts.tau_max))
}

fn check_round_trip(basis: &TauBasis, opts: &ValidationOptions, rng: &mut impl Rng) -> Result<String, String> {
    if !basis.covers(opts.round_trip_degree) {
        return Err(format!("table does not reach degree {}", opts.round_trip_degree));
    }
    for trial in 0..10 {
        let deg = rng.gen_range(0..=opts.round_trip_degree);
        let p = random_poly(rng, deg);
        if basis.from_tau(&basis.to_tau(&p)) != p {
            return Err(format!("trial {trial}: from_tau(to_tau(p)) ≠ p at degree {deg}"));
        }
    }
    Ok(format!("degrees ≤ {}", opts.round_trip_degree))
}

fn check_operator_identities(opts: &ValidationOptions, rng: &mut impl Rng) -> Result<String, String> {
    for i in 0..opts.random_series {
        let q = random_q_series(rng, opts.series_order);
        let s = op_s(&q);
        if op_c1(&q) != op_s(&s).scale(&Rational::from(2)).add(&q) {
            return Err(format!("series {i}: 𝒞₁ ≠ 2𝒮² + Id"));
        }
        if op_s1(&q) != op_s(&op_c(&q)).scale(&Rational::from(2)) {
            return Err(format!("series {i}: 𝒮₁ ≠ 2𝒮𝒞"));
        }
    }
    Ok(format!("{} random series to order {}", opts.random_series, opts.series_order))
}

type Operator = fn(&DSeries) -> DSeries;

fn check_product_rules(opts: &ValidationOptions, rng: &mut impl Rng) -> Result<String, String> {
    for i in 0..opts.random_series {
        let q = random_q_series(rng, opts.series_order);
        let g = random_q_series(rng, opts.series_order);
        let qg = q.mul(&g);
        let pairs: [(&str, Operator, Operator); 2] =
            [("full step", op_c1, op_s1), ("half step", op_c, op_s)];
        for (label, c, s) in pairs {
            let (cq, sq, cg, sg) = (c(&q), s(&q), c(&g), s(&g));
            if c(&qg) != cq.mul(&cg).add(&sq.mul(&sg)) {
                return Err(format!("series {i}: cosine product rule fails ({label})"));
            }
            if s(&qg) != cq.mul(&sg).add(&sq.mul(&cg)) {
                return Err(format!("series {i}: sine product rule fails ({label})"));
            }
        }
    }
    Ok(format!("{} random pairs, both step sizes", opts.random_series))
}

fn check_identity_with_entire_kernel(opts: &ValidationOptions, rng: &mut impl Rng) -> Result<String, String> {
    let order = opts.series_order;
    let j = Kernel::sinh_half_over_z(order);
    let f = Kernel::entire_remainder(order);
    for i in 0..opts.random_series {
        let q = random_q_series(rng, order);
        let rhs = j.apply(&q).scale(&Rational::from(2)).add(&f.apply(&q.d_times_d_operator()));
        if rhs != q {
            return Err(format!("series {i}: Q ≠ 2𝒥Q + F(dD)dDQ"));
        }
    }
    Ok(format!("{} random series to order {order}", opts.random_series))
}

fn check_residuals(opts: &ValidationOptions) -> Result<String, String> {
    for &n in &opts.residual_orders {
        let sol = formal_solution(n).map_err(|e| format!("order {n}: {e}"))?;
        let r = residual(sol.series(), n + 1).map_err(|e| format!("order {n}: {e}"))?;
        if let Some(v) = r.valuation() {
            return Err(format!("order {n}: residual has a nonzero d^{v} coefficient"));
        }
    }
    Ok(format!("orders {:?}", opts.residual_orders))
}

fn random_point(rng: &mut impl Rng, prec: u32) -> PhasePoint {
    PhasePoint::from_f64(prec, rng.gen_range(-7.0..7.0), rng.gen_range(-3.0..3.0))
}

fn check_symplectic(opts: &ValidationOptions, rng: &mut impl Rng) -> Result<String, String> {
    let prec = opts.bits;
    let eps = Float::with_val(prec, opts.eps);
    let h = mp::pow2_neg(prec, prec / 3);
    let tol = mp::pow2_neg(prec, prec / 2);
    let mut worst = Float::with_val(prec, 0);
    for _ in 0..16 {
        let z = random_point(rng, prec);
        let shifted = |dq: i32, dp: i32| {
            let w = PhasePoint::new(z.q.clone() + Float::with_val(prec, &h * dq), z.p.clone() + Float::with_val(prec, &h * dp));
            map_forward(&w, &eps)
        };
        let (qp, qm) = (shifted(1, 0), shifted(-1, 0));
        let (pp, pm) = (shifted(0, 1), shifted(0, -1));
        let two_h = Float::with_val(prec, &h * 2u32);
        let a = (qp.q - qm.q) / &two_h;
        let c = (qp.p - qm.p) / &two_h;
        let b = (pp.q - pm.q) / &two_h;
        let d = (pp.p - pm.p) / &two_h;
        let det = a * d - b * c;
        let err = (det - 1u32).abs();
        if err > tol {
            return Err(format!("det J − 1 = {:.3e} at ({:.3}, {:.3})", err.to_f64(), z.q.to_f64(), z.p.to_f64()));
        }
        if err > worst {
            worst = err;
        }
    }
    Ok(format!("16 points, max |det − 1| = {:.3e}", worst.to_f64()))
}

fn check_map_round_trip(opts: &ValidationOptions, rng: &mut impl Rng) -> Result<String, String> {
    let prec = opts.bits;
    let eps = Float::with_val(prec, opts.eps);
    for _ in 0..16 {
        let z = random_point(rng, prec);
        let back = map_backward(&map_forward(&z, &eps), &eps);
        let scale = z.q.clone().abs().max(&z.p.clone().abs()).max(&Float::with_val(prec, 1));
        let tol = mp::pow2_neg(prec, prec - 8) * scale;
        if (back.q - &z.q).abs() > tol || (back.p - &z.p).abs() > tol {
            return Err(format!("round trip drifted at ({:.3}, {:.3})", z.q.to_f64(), z.p.to_f64()));
        }
    }
    Ok("16 points".into())
}

fn check_eigenvalues(opts: &ValidationOptions) -> Result<String, String> {
    let prec = opts.bits;
    let eps = Float::with_val(prec, opts.eps);
    let tol = mp::pow2_neg(prec, prec - 8);
    for saddle in [dynamics::Saddle::A, dynamics::Saddle::B] {
        let fp = fixed_point_data(&eps, saddle).map_err(|e| e.to_string())?;
        let sum = fp.lambda_unstable.clone() + &fp.lambda_stable;
        let target = Float::with_val(prec, eps.square_ref()) + 2u32;
        let prod = fp.lambda_unstable.clone() * &fp.lambda_stable;
        if (sum - &target).abs() > tol || (prod - 1u32).abs() > tol || (fp.trace() - &target).abs() > tol {
            return Err(format!("multiplier identities fail at {saddle:?}"));
        }
    }
    Ok(format!("ε = {}", opts.eps))
}

fn check_conjugacy_scaling(opts: &ValidationOptions) -> Result<String, String> {
    let cfg = PrecisionConfig::new(opts.bits, 40).map_err(|e| e.to_string())?;
    let prec = opts.bits;
    let eps = Float::with_val(prec, opts.eps);
    for branch in [Branch::UnstableAtB, Branch::StableAtA] {
        let ms = manifold_series(&eps, branch, &cfg).map_err(|e| e.to_string())?;
        let s1 = Float::with_val(prec, &ms.seed * 4u32);
        let s2 = Float::with_val(prec, &ms.seed * 8u32);
        let ratio = ms.conjugacy_residual(&s2) / ms.conjugacy_residual(&s1);
        let expect = 2f64.powi(ms.order() as i32 + 1);
        let r = ratio.to_f64();
        if !(r > expect / 4.0 && r < expect * 4.0) {
            return Err(format!("{branch:?}: doubling s scaled the residual by {r:.3e}, expected ≈ {expect:.3e}"));
        }
    }
    Ok(format!("ratio ≈ 2^{} on both branches", 41))
}

/// Runs every property with `basis` as the τ table.
pub fn run_validation(basis: &TauBasis, opts: &ValidationOptions) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = ValidationReport::default();
    report.push("tau identity", check_tau_identity(basis, opts, &mut rng));
    report.push("D raises tau index", check_d_raises(basis, opts));
    report.push("tau basis round trip", check_round_trip(basis, opts, &mut rng));
    report.push("half/full step operator identities", check_operator_identities(opts, &mut rng));
    report.push("product rules", check_product_rules(opts, &mut rng));
    report.push("entire-kernel decomposition", check_identity_with_entire_kernel(opts, &mut rng));
    report.push("residual vanishing", check_residuals(opts));
    report.push("symplecticity", check_symplectic(opts, &mut rng));
    report.push("map round trip", check_map_round_trip(opts, &mut rng));
    report.push("saddle multipliers", check_eigenvalues(opts));
    report.push("conjugacy residual scaling", check_conjugacy_scaling(opts));
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_basis_passes() {
        let report = run_validation(&TauBasis::new(), &ValidationOptions::default());
        for r in &report.results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn corrupted_table_fails() {
        let clean = TauBasis::new();
        let mut table: Vec<Poly> = (0..=70).map(|n| clean.tau(n)).collect();
        table[7] = table[7].scale(&Rational::from((101, 100)));
        let report = run_validation(&TauBasis::from_table(table), &ValidationOptions::default());
        assert!(!report.all_passed());
        let failed: Vec<_> = report.results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
        assert!(failed.contains(&"tau identity"));
        assert!(failed.contains(&"D raises tau index"));
    }

    #[test]
    fn oracle_matches_known_derivatives() {
        // tanh' = sech², tanh'' = −2 tanh sech².
        let z = Float::with_val(128, 0.7);
        let c = tanh_taylor(&z, 3);
        let t = 0.7f64.tanh();
        assert!((c[1].to_f64() - (1.0 - t * t)).abs() < 1e-15);
        assert!((c[2].to_f64() - (-t * (1.0 - t * t))).abs() < 1e-15);
    }
}
