//! The symplectic map `p' = p + ε sin q`, `q' = q + ε p'`, its saddles,
//! their invariant manifolds and the vertical distance between them.

mod manifold;
mod splitting;

use rug::float::Constant;
use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::SeriesError;

pub use manifold::{manifold_series, p_on_manifold_at_q, Branch, ManifoldPoint, ManifoldSeries};
pub use splitting::{crossing_near_pi, series_vs_manifold_with, 
    required_bits, series_vs_manifold, splitting_scan, vertical_distance, ScanOptions, Sample,
    SplittingReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("ε must be positive and finite")]
    InvalidEpsilon,
    #[error("invalid precision configuration: {0}")]
    Config(String),
    #[error("order {order} linear solve is singular")]
    Singular { order: usize },
    #[error("target q = {q} is outside the open range between the saddles")]
    OutOfRange { q: f64 },
    #[error("manifold is not monotone in q on the bracketing interval")]
    NonMonotone,
    #[error("orbit failed to cross q = {q} within {steps} steps")]
    NoCrossing { q: f64, steps: usize },
    #[error("ε = {eps} needs {required} bits but only {have} are configured")]
    PrecisionGuard { eps: f64, required: u32, have: u32 },
    #[error("Δ has no sign change in the bracket")]
    NoZero,
    #[error("|t| must not exceed 4/3, got {0}")]
    TimeOutOfRange(f64),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Working precision and manifold truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    pub bits: u32,
    pub manifold_order: usize,
    /// Parameter magnitude at which the manifold series is evaluated;
    /// derived from the truncation tolerance when absent.
    pub seed_magnitude: Option<f64>,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig {
            bits: 256,
            manifold_order: 40,
            seed_magnitude: None,
        }
    }
}

impl PrecisionConfig {
    pub fn new(bits: u32, manifold_order: usize) -> Result<Self, DynamicsError> {
        let cfg = PrecisionConfig {
            bits,
            manifold_order,
            seed_magnitude: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.bits < 128 {
            return Err(DynamicsError::Config(format!("bits = {} is below 128", self.bits)));
        }
        if self.manifold_order < 10 {
            return Err(DynamicsError::Config(format!(
                "manifold order {} is below 10",
                self.manifold_order
            )));
        }
        if let Some(s) = self.seed_magnitude {
            if !(s.is_finite() && s > 0.0) {
                return Err(DynamicsError::Config(format!("seed magnitude {s} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub q: Float,
    pub p: Float,
}

impl PhasePoint {
    pub fn new(q: Float, p: Float) -> Self {
        PhasePoint { q, p }
    }

    pub fn from_f64(prec: u32, q: f64, p: f64) -> Self {
        PhasePoint {
            q: Float::with_val(prec, q),
            p: Float::with_val(prec, p),
        }
    }

    pub fn prec(&self) -> u32 {
        self.q.prec().max(self.p.prec())
    }
}

pub fn map_forward(z: &PhasePoint, eps: &Float) -> PhasePoint {
    let p = Float::with_val(z.prec(), eps * z.q.clone().sin()) + &z.p;
    let q = Float::with_val(z.prec(), eps * &p) + &z.q;
    PhasePoint { q, p }
}

pub fn map_backward(z: &PhasePoint, eps: &Float) -> PhasePoint {
    let q = z.q.clone() - Float::with_val(z.prec(), eps * &z.p);
    let p = z.p.clone() - Float::with_val(z.prec(), eps * q.clone().sin());
    PhasePoint { q, p }
}

/// `H = p²/2 + cos q`; equal to 1 at both saddles and on the ODE separatrix.
pub fn energy(z: &PhasePoint) -> Float {
    let half_p2 = Float::with_val(z.prec(), z.p.square_ref()) / 2u32;
    half_p2 + z.q.clone().cos()
}

/// `H + (ε/2) p sin q`, conserved by the map to `O(ε²)`.
pub fn modified_energy(z: &PhasePoint, eps: &Float) -> Float {
    let corr = Float::with_val(z.prec(), &z.p * z.q.clone().sin()) * eps / 2u32;
    energy(z) + corr
}

/// `d = 2 arcsinh(ε/2)`.
pub fn d_of_eps(eps: &Float) -> Float {
    let half = Float::with_val(eps.prec(), eps / 2u32);
    half.asinh() * 2u32
}

pub fn check_eps(eps: &Float) -> Result<(), DynamicsError> {
    if eps.is_finite() && *eps > 0 {
        Ok(())
    } else {
        Err(DynamicsError::InvalidEpsilon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Saddle {
    /// `(0, 0)`
    A,
    /// `(2π, 0)`
    B,
}

impl Saddle {
    pub fn point(self, prec: u32) -> PhasePoint {
        let q = match self {
            Saddle::A => Float::with_val(prec, 0),
            Saddle::B => Float::with_val(prec, Constant::Pi) * 2u32,
        };
        PhasePoint::new(q, Float::with_val(prec, 0))
    }
}

/// Linearization at a saddle, with rows and columns ordered `(q, p)`.
#[derive(Clone, Debug)]
pub struct FixedPointData {
    pub saddle: Saddle,
    pub jacobian: [[Float; 2]; 2],
    pub lambda_unstable: Float,
    pub lambda_stable: Float,
    /// Unit eigenvectors with positive q-component.
    pub v_unstable: [Float; 2],
    pub v_stable: [Float; 2],
}

impl FixedPointData {
    pub fn trace(&self) -> Float {
        self.jacobian[0][0].clone() + &self.jacobian[1][1]
    }

    pub fn determinant(&self) -> Float {
        let a = Float::with_val(self.jacobian[0][0].prec(), &self.jacobian[0][0] * &self.jacobian[1][1]);
        let b = Float::with_val(self.jacobian[0][0].prec(), &self.jacobian[0][1] * &self.jacobian[1][0]);
        a - b
    }
}

fn unit_eigenvector(lambda: &Float, eps: &Float) -> [Float; 2] {
    // (J − λ)v = 0 has the solution (λ − 1, ε).
    let mut v = [lambda.clone() - 1u32, eps.clone()];
    let norm = (v[0].clone().square() + v[1].clone().square()).sqrt();
    for c in v.iter_mut() {
        *c /= &norm;
    }
    if v[0].is_sign_negative() {
        for c in v.iter_mut() {
            *c = -c.clone();
        }
    }
    v
}

pub fn fixed_point_data(eps: &Float, saddle: Saddle) -> Result<FixedPointData, DynamicsError> {
    check_eps(eps)?;
    let prec = eps.prec();
    let z = saddle.point(prec);
    // sin q' = ε cos q at the saddle; cos q = 1 at both.
    let dp_dq = Float::with_val(prec, eps * z.q.clone().cos());
    let one = Float::with_val(prec, 1);
    let dq_dq = one.clone() + Float::with_val(prec, eps * &dp_dq);
    let dq_dp = eps.clone();
    let jacobian = [[dq_dq, dq_dp], [dp_dq, one]];
    let d = d_of_eps(eps);
    let lambda_unstable = d.clone().exp();
    let lambda_stable = (-d).exp();
    Ok(FixedPointData {
        saddle,
        v_unstable: unit_eigenvector(&lambda_unstable, eps),
        v_stable: unit_eigenvector(&lambda_stable, eps),
        jacobian,
        lambda_unstable,
        lambda_stable,
    })
}


#[cfg(test)]
mod tests {
    use super::*;

    const PREC: u32 = 256;

    fn f(x: f64) -> Float {
        Float::with_val(PREC, x)
    }

    #[test]
    fn fixed_points_are_fixed() {
        let eps = f(0.4);
        for z in [Saddle::A.point(PREC), Saddle::B.point(PREC), PhasePoint::new(mp_pi(), f(0.0))] {
            let w = map_forward(&z, &eps);
            assert!((w.q.clone() - &z.q).abs() < 1e-70);
            assert!(w.p.clone().abs() < 1e-70);
            let w = map_backward(&z, &eps);
            assert!((w.q.clone() - &z.q).abs() < 1e-70);
        }
    }

    fn mp_pi() -> Float {
        Float::with_val(PREC, Constant::Pi)
    }

    #[test]
    fn inverse_round_trip() {
        let eps = f(0.4);
        let z = PhasePoint::from_f64(PREC, 1.0, 0.3);
        let back = map_backward(&map_forward(&z, &eps), &eps);
        let tol = crate::mp::pow2_neg(PREC, PREC - 8);
        assert!((back.q - &z.q).abs() < tol);
        assert!((back.p - &z.p).abs() < tol);
    }

    #[test]
    fn d_of_eps_values() {
        let e = Float::with_val(PREC, 0.5f64).sinh() * 2u32;
        assert!((d_of_eps(&e) - 1u32).abs() < 1e-70);
        let oracle = 2.0 * (0.25f64 + (1.0f64 + 0.0625).sqrt()).ln();
        assert!((d_of_eps(&f(0.5)).to_f64() - oracle).abs() < 1e-15);
        assert!((oracle - 0.494933).abs() < 1e-6);
        let small = f(1e-20);
        assert!((d_of_eps(&small) / &small - 1u32).abs() < 1e-30);
    }

    #[test]
    fn saddle_linearization() {
        let eps = f(0.5);
        for saddle in [Saddle::A, Saddle::B] {
            let fp = fixed_point_data(&eps, saddle).unwrap();
            let two_plus = f(2.0) + f(0.25);
            assert!((fp.trace() - &two_plus).abs() < 1e-70);
            assert!((fp.determinant() - 1u32).abs() < 1e-70);
            let sum = fp.lambda_unstable.clone() + &fp.lambda_stable;
            assert!((sum - &two_plus).abs() < 1e-70);
            let prod = fp.lambda_unstable.clone() * &fp.lambda_stable;
            assert!((prod - 1u32).abs() < 1e-70);
            assert!((fp.lambda_unstable.to_f64() - 0.494933f64.exp()).abs() < 1e-5);
            for (v, l) in [(&fp.v_unstable, &fp.lambda_unstable), (&fp.v_stable, &fp.lambda_stable)] {
                assert!(v[0].is_sign_positive());
                let jv0 = Float::with_val(PREC, &fp.jacobian[0][0] * &v[0])
                    + Float::with_val(PREC, &fp.jacobian[0][1] * &v[1]);
                let jv1 = Float::with_val(PREC, &fp.jacobian[1][0] * &v[0])
                    + Float::with_val(PREC, &fp.jacobian[1][1] * &v[1]);
                assert!((jv0 - Float::with_val(PREC, l * &v[0])).abs() < 1e-70);
                assert!((jv1 - Float::with_val(PREC, l * &v[1])).abs() < 1e-70);
            }
        }
    }

    #[test]
    fn config_bounds() {
        assert!(PrecisionConfig::new(127, 40).is_err());
        assert!(PrecisionConfig::new(128, 9).is_err());
        assert!(PrecisionConfig::new(128, 10).is_ok());
    }
}
