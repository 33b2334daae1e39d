use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use super::{check_eps, fixed_point_data, map_backward, map_forward, DynamicsError, PhasePoint, PrecisionConfig, Saddle};
use crate::mp;

/// The two manifold branches bounding the primary heteroclinic connection,
/// both on the side `p < 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// Leaves `B = (2π, 0)` towards decreasing `q`; multiplier `e^d`.
    UnstableAtB,
    /// Enters `A = (0, 0)` from `q > 0`; multiplier `e^{−d}`.
    StableAtA,
}

impl Branch {
    pub fn saddle(self) -> Saddle {
        match self {
            Branch::UnstableAtB => Saddle::B,
            Branch::StableAtA => Saddle::A,
        }
    }

    /// `+1` when `q` increases along the branch away from its saddle.
    fn direction(self) -> i32 {
        match self {
            Branch::UnstableAtB => -1,
            Branch::StableAtA => 1,
        }
    }
}

/// Truncated parameterization `σ(s) = z* + Σ_{k=1}^{M} c_k s^k` with
/// `Φ(σ(s)) = σ(λ s)`. The parameter is positive along the `p < 0` branch.
#[derive(Clone, Debug)]
pub struct ManifoldSeries {
    pub branch: Branch,
    pub eps: Float,
    pub fixed_point: PhasePoint,
    pub lambda: Float,
    /// `coeffs[k − 1] = c_k = (q_k, p_k)`.
    pub coeffs: Vec<[Float; 2]>,
    /// Parameter at which the series is trusted to the working precision.
    pub seed: Float,
}

/// A manifold point reached from the seed, with its parameter and the
/// number of map steps taken from `σ(s)`.
#[derive(Clone, Debug)]
pub struct ManifoldPoint {
    pub point: PhasePoint,
    pub s: Float,
    pub steps: usize,
}

pub fn manifold_series(eps: &Float, branch: Branch, cfg: &PrecisionConfig) -> Result<ManifoldSeries, DynamicsError> {
    cfg.validate()?;
    check_eps(eps)?;
    let prec = cfg.bits;
    let eps = Float::with_val(prec, eps);
    let fp = fixed_point_data(&eps, branch.saddle())?;
    let (lambda, c1) = match branch {
        Branch::UnstableAtB => (fp.lambda_unstable, [-fp.v_unstable[0].clone(), -fp.v_unstable[1].clone()]),
        Branch::StableAtA => (fp.lambda_stable, fp.v_stable.clone()),
    };
    let m = cfg.manifold_order;
    let eps2 = Float::with_val(prec, eps.square_ref());
    let zero = Float::with_val(prec, 0);
    let mut x = vec![zero.clone(), c1[0].clone()];
    let mut y = vec![zero.clone(), c1[1].clone()];
    // Taylor coefficients of sin and cos of the q-deviation h(s) = Σ x_k s^k.
    let mut sn = vec![zero.clone(), c1[0].clone()];
    let mut cs = vec![Float::with_val(prec, 1), zero.clone()];
    let singular_tol = mp::pow2_neg(prec, prec / 2);
    for k in 2..=m {
        let mut acc = zero.clone();
        for j in 1..k {
            acc += Float::with_val(prec, &x[j] * &cs[k - j]) * (j as u32);
        }
        let s_hat = acc / (k as u32);
        let mu = lambda.clone().pow(k as u32);
        let a11 = Float::with_val(prec, 1u32) + &eps2 - &mu;
        let a22 = Float::with_val(prec, 1u32) - &mu;
        let det = Float::with_val(prec, &a11 * &a22) - &eps2;
        if det.clone().abs() < singular_tol {
            return Err(DynamicsError::Singular { order: k });
        }
        let r1 = -Float::with_val(prec, &eps2 * &s_hat);
        let r2 = -Float::with_val(prec, &eps * &s_hat);
        let xk = (Float::with_val(prec, &r1 * &a22) - Float::with_val(prec, &eps * &r2)) / &det;
        let yk = (Float::with_val(prec, &a11 * &r2) - Float::with_val(prec, &eps * &r1)) / &det;
        sn.push(xk.clone() + &s_hat);
        x.push(xk);
        y.push(yk);
        let mut acc = zero.clone();
        for j in 1..k {
            acc += Float::with_val(prec, &x[j] * &sn[k - j]) * (j as u32);
        }
        cs.push(-acc / (k as u32));
    }
    let coeffs: Vec<[Float; 2]> = x.into_iter().zip(y).skip(1).map(|(a, b)| [a, b]).collect();
    let seed = match cfg.seed_magnitude {
        Some(s) => Float::with_val(prec, s),
        None => auto_seed(&coeffs, prec),
    };
    Ok(ManifoldSeries {
        branch,
        eps,
        fixed_point: fp.saddle.point(prec),
        lambda,
        coeffs,
        seed,
    })
}

/// Largest `s` with `|c_k| s^k < 2^{16−bits}` over the last four orders.
fn auto_seed(coeffs: &[[Float; 2]], prec: u32) -> Float {
    let tol = mp::pow2_neg(prec, prec - 16);
    let m = coeffs.len();
    let mut best: Option<Float> = None;
    for k in m.saturating_sub(3).max(1)..=m {
        let c = &coeffs[k - 1];
        let mag = c[0].clone().abs().max(&c[1].clone().abs());
        if mag.is_zero() {
            continue;
        }
        let s = (tol.clone() / mag).pow(Float::with_val(prec, 1u32) / (k as u32));
        best = Some(match best {
            Some(b) if b < s => b,
            _ => s,
        });
    }
    best.unwrap_or_else(|| Float::with_val(prec, 0.5f64))
}

impl ManifoldSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn prec(&self) -> u32 {
        self.eps.prec()
    }

    pub fn eval(&self, s: &Float) -> PhasePoint {
        let prec = self.prec();
        let mut q = Float::with_val(prec, 0);
        let mut p = Float::with_val(prec, 0);
        for c in self.coeffs.iter().rev() {
            q += &c[0];
            q *= s;
            p += &c[1];
            p *= s;
        }
        PhasePoint::new(q + &self.fixed_point.q, p + &self.fixed_point.p)
    }

    /// `max |σ(λs) − Φ(σ(s))|` over both components.
    pub fn conjugacy_residual(&self, s: &Float) -> Float {
        let lhs = self.eval(&Float::with_val(self.prec(), &self.lambda * s));
        let rhs = map_forward(&self.eval(s), &self.eps);
        let dq = (lhs.q - rhs.q).abs();
        let dp = (lhs.p - rhs.p).abs();
        dq.max(&dp)
    }

    /// One step moving away from the saddle, which multiplies `s` by
    /// [`Self::expansion`].
    pub fn step(&self, z: &PhasePoint) -> PhasePoint {
        match self.branch {
            Branch::UnstableAtB => map_forward(z, &self.eps),
            Branch::StableAtA => map_backward(z, &self.eps),
        }
    }

    pub fn expansion(&self) -> Float {
        match self.branch {
            Branch::UnstableAtB => self.lambda.clone(),
            Branch::StableAtA => Float::with_val(self.prec(), 1u32) / &self.lambda,
        }
    }

    /// Signed progress past `q_target`: negative before the crossing.
    fn progress(&self, z: &PhasePoint, q_target: &Float) -> Float {
        let diff = z.q.clone() - q_target;
        if self.branch.direction() > 0 {
            diff
        } else {
            -diff
        }
    }

    fn point_after(&self, s: &Float, steps: usize) -> PhasePoint {
        let mut z = self.eval(s);
        for _ in 0..steps {
            z = self.step(&z);
        }
        z
    }

    /// Orbit `σ(seed), Φ^{±1}σ(seed), …` up to and including the first point
    /// past `q_target`.
    pub fn orbit_to(&self, q_target: &Float, max_steps: usize) -> Result<Vec<PhasePoint>, DynamicsError> {
        let mut z = self.eval(&self.seed);
        let mut orbit = vec![z.clone()];
        while self.progress(&z, q_target) < 0 {
            if orbit.len() > max_steps {
                return Err(DynamicsError::NoCrossing { q: q_target.to_f64(), steps: max_steps });
            }
            z = self.step(&z);
            orbit.push(z.clone());
        }
        Ok(orbit)
    }

    /// The manifold point with first coordinate `q_target`.
    pub fn locate(&self, q_target: &Float) -> Result<ManifoldPoint, DynamicsError> {
        let prec = self.prec();
        let two_pi = mp::pi(prec) * 2u32;
        if !(*q_target > 0 && *q_target < two_pi) {
            return Err(DynamicsError::OutOfRange { q: q_target.to_f64() });
        }
        let max_steps = (200.0 / self.eps.to_f64()).ceil() as usize + 1000;
        let seed_point = self.eval(&self.seed);
        let (mut lo, mut hi, steps) = if self.progress(&seed_point, q_target) >= 0 {
            (Float::with_val(prec, 0), self.seed.clone(), 0)
        } else {
            let orbit = self.orbit_to(q_target, max_steps)?;
            let lo = self.seed.clone() / self.expansion();
            (lo, self.seed.clone(), orbit.len() - 1)
        };
        let f_lo = self.progress(&self.point_after(&lo, steps), q_target);
        let f_hi = self.progress(&self.point_after(&hi, steps), q_target);
        if !(f_lo < 0 && f_hi >= 0) {
            return Err(DynamicsError::NonMonotone);
        }
        for _ in 0..(prec + 8) {
            let mid = Float::with_val(prec, &lo + &hi) / 2u32;
            if mid == lo || mid == hi {
                break;
            }
            if self.progress(&self.point_after(&mid, steps), q_target) < 0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = self.point_after(&lo, steps);
        let b = self.point_after(&hi, steps);
        // Linear interpolation across the final bracket.
        let dq = b.q.clone() - &a.q;
        let p = if dq.is_zero() {
            b.p.clone()
        } else {
            let w = (q_target.clone() - &a.q) / dq;
            a.p.clone() + w * (b.p.clone() - &a.p)
        };
        Ok(ManifoldPoint {
            point: PhasePoint::new(q_target.clone(), p),
            s: hi,
            steps,
        })
    }

    /// `max |H − 1|` along the orbit from the seed to the crossing of `q_target`.
    pub fn energy_drift(&self, q_target: &Float) -> Result<Float, DynamicsError> {
        self.drift_of(q_target, super::energy)
    }

    /// As [`Self::energy_drift`] for [`super::modified_energy`].
    pub fn modified_energy_drift(&self, q_target: &Float) -> Result<Float, DynamicsError> {
        self.drift_of(q_target, |z| super::modified_energy(z, &self.eps))
    }

    fn drift_of(&self, q_target: &Float, h: impl Fn(&PhasePoint) -> Float) -> Result<Float, DynamicsError> {
        let orbit = self.orbit_to(q_target, (200.0 / self.eps.to_f64()).ceil() as usize + 1000)?;
        let mut worst = Float::with_val(self.prec(), 0);
        for z in &orbit {
            let dev = (h(z) - 1u32).abs();
            if dev > worst {
                worst = dev;
            }
        }
        Ok(worst)
    }
}

/// Momentum of the branch `ms` at first coordinate `q_target`.
pub fn p_on_manifold_at_q(ms: &ManifoldSeries, q_target: &Float) -> Result<Float, DynamicsError> {
    Ok(ms.locate(q_target)?.point.p)
}
