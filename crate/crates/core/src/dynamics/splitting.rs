use rayon::prelude::*;
use rug::Float;

use super::manifold::{manifold_series, Branch, ManifoldSeries};
use super::{check_eps, d_of_eps, DynamicsError, PrecisionConfig};
use crate::mp;
use crate::series::{eval_series, FormalSolution, Truncation};

/// Bits needed to resolve `e^{−π²/ε}` with 64 bits to spare.
pub fn required_bits(eps: f64) -> u32 {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    (3.5 * pi2 / (eps * std::f64::consts::LN_2)).ceil() as u32 + 64
}

fn check_time(t: &Float) -> Result<(), DynamicsError> {
    if t.clone().abs() > Float::with_val(t.prec(), 4u32) / 3u32 {
        Err(DynamicsError::TimeOutOfRange(t.to_f64()))
    } else {
        Ok(())
    }
}

/// `q_0(t) = 4 arctan(e^{−t})`.
pub(crate) fn q0(t: &Float) -> Float {
    let e = (-t.clone()).exp();
    e.atan() * 4u32
}

/// Both branches at one `ε`, built once and shared across samples.
struct ManifoldPair {
    unstable: ManifoldSeries,
    stable: ManifoldSeries,
}

impl ManifoldPair {
    fn new(eps: &Float, cfg: &PrecisionConfig) -> Result<Self, DynamicsError> {
        Ok(ManifoldPair {
            unstable: manifold_series(eps, Branch::UnstableAtB, cfg)?,
            stable: manifold_series(eps, Branch::StableAtA, cfg)?,
        })
    }

    fn delta(&self, t: &Float) -> Result<Float, DynamicsError> {
        let q = q0(t);
        let pu = self.unstable.locate(&q)?.point.p;
        let ps = self.stable.locate(&q)?.point.p;
        Ok(pu - ps)
    }
}

/// `Δ(t) = p_u(q_0(t)) − p_s(q_0(t))` between the unstable branch of `B`
/// and the stable branch of `A`.
pub fn vertical_distance(eps: &Float, t: &Float, cfg: &PrecisionConfig) -> Result<Float, DynamicsError> {
    check_eps(eps)?;
    check_time(t)?;
    let t = Float::with_val(cfg.bits, t);
    ManifoldPair::new(eps, cfg)?.delta(&t)
}

/// Zero of `Δ` in `|t| ≤ ε/4`, the manifold intersection next to `q = π`.
/// Returns `(t*, q_0(t*))`.
pub fn crossing_near_pi(eps: &Float, cfg: &PrecisionConfig) -> Result<(Float, Float), DynamicsError> {
    check_eps(eps)?;
    let prec = cfg.bits;
    let eps = Float::with_val(prec, eps);
    let pair = ManifoldPair::new(&eps, cfg)?;
    let mut lo = -Float::with_val(prec, &eps / 4u32);
    let mut hi = Float::with_val(prec, &eps / 4u32);
    let f_lo = pair.delta(&lo)?;
    let f_hi = pair.delta(&hi)?;
    if f_lo.is_sign_negative() == f_hi.is_sign_negative() {
        return Err(DynamicsError::NoZero);
    }
    let lo_negative = f_lo.is_sign_negative();
    for _ in 0..96 {
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        let f = pair.delta(&mid)?;
        if f.is_zero() {
            lo = mid.clone();
            hi = mid;
            break;
        }
        if f.is_sign_negative() == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = Float::with_val(prec, &lo + &hi) / 2u32;
    let q = q0(&t);
    Ok((t, q))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOptions {
    /// Sample points per period `ε` of the oscillation; at least 16.
    pub samples_per_period: usize,
    /// Refuse to run when `bits` is below [`required_bits`].
    pub enforce_precision: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            samples_per_period: 24,
            enforce_precision: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub t: Float,
    pub delta: Float,
    pub delta_over_cosh: Float,
    /// `Δ/cosh t − C sin(2πt/ε + φ)`.
    pub fit_residual: Float,
}

/// Vertical splitting over `t ∈ [−ε, ε]` fitted to
/// `Δ(t)/cosh t ≈ C sin(2πt/ε + φ)`.
#[derive(Clone, Debug)]
pub struct SplittingReport {
    pub epsilon: Float,
    pub d: Float,
    pub bits: u32,
    pub manifold_order: usize,
    pub required_bits: u32,
    pub samples: Vec<Sample>,
    /// Coefficients of `sin(2πt/ε)` and `cos(2πt/ε)`.
    pub sin_coeff: Float,
    pub cos_coeff: Float,
    pub amplitude: Float,
    pub phase: Float,
    /// RMS fit residual relative to `C`.
    pub relative_residual: Float,
    /// `C ε² e^{π²/ε} / 4π`.
    pub implied_alpha_eps: Float,
    /// `C ε² e^{π²/d} / 4π`.
    pub implied_alpha_d: Float,
    pub zeros: Vec<Float>,
    pub zero_spacing: Option<Float>,
    pub warnings: Vec<String>,
}

impl SplittingReport {
    pub fn max_abs_delta(&self) -> Float {
        let mut m = Float::with_val(self.bits, 0);
        for s in &self.samples {
            let a = s.delta.clone().abs();
            if a > m {
                m = a;
            }
        }
        m
    }
}

pub fn splitting_scan(eps: &Float, cfg: &PrecisionConfig, opts: &ScanOptions) -> Result<SplittingReport, DynamicsError> {
    check_eps(eps)?;
    cfg.validate()?;
    if opts.samples_per_period < 16 {
        return Err(DynamicsError::Config("at least 16 samples per period are required".into()));
    }
    let required = required_bits(eps.to_f64());
    if opts.enforce_precision && cfg.bits < required {
        return Err(DynamicsError::PrecisionGuard {
            eps: eps.to_f64(),
            required,
            have: cfg.bits,
        });
    }
    let prec = cfg.bits;
    let eps = Float::with_val(prec, eps);
    let d = d_of_eps(&eps);
    let pair = ManifoldPair::new(&eps, cfg)?;

    let n = 2 * opts.samples_per_period;
    let ts: Vec<Float> = (0..=n)
        .map(|i| {
            let frac = Float::with_val(prec, 2 * i as i64 - n as i64) / (n as u32);
            frac * &eps
        })
        .collect();
    let deltas: Vec<Float> = ts
        .par_iter()
        .map(|t| pair.delta(t))
        .collect::<Result<_, _>>()?;

    let omega = mp::pi(prec) * 2u32 / &eps;
    let ys: Vec<Float> = ts
        .iter()
        .zip(&deltas)
        .map(|(t, dl)| dl.clone() / t.clone().cosh())
        .collect();
    let basis: Vec<(Float, Float)> = ts
        .iter()
        .map(|t| {
            let w = Float::with_val(prec, &omega * t);
            (w.clone().sin(), w.cos())
        })
        .collect();
    let zero = Float::with_val(prec, 0);
    let (mut sss, mut ssc, mut scc, mut sys, mut syc) = (zero.clone(), zero.clone(), zero.clone(), zero.clone(), zero.clone());
    for ((s, c), y) in basis.iter().zip(&ys) {
        sss += Float::with_val(prec, s * s);
        ssc += Float::with_val(prec, s * c);
        scc += Float::with_val(prec, c * c);
        sys += Float::with_val(prec, y * s);
        syc += Float::with_val(prec, y * c);
    }
    let det = Float::with_val(prec, &sss * &scc) - Float::with_val(prec, &ssc * &ssc);
    let a = (Float::with_val(prec, &sys * &scc) - Float::with_val(prec, &syc * &ssc)) / &det;
    let b = (Float::with_val(prec, &syc * &sss) - Float::with_val(prec, &sys * &ssc)) / &det;
    let amplitude = (Float::with_val(prec, a.square_ref()) + Float::with_val(prec, b.square_ref())).sqrt();
    let phase = Float::with_val(prec, b.atan2_ref(&a));

    let mut sq = zero.clone();
    let samples: Vec<Sample> = ts
        .into_iter()
        .zip(deltas)
        .zip(ys)
        .zip(&basis)
        .map(|(((t, delta), y), (s, c))| {
            let fit = Float::with_val(prec, &a * s) + Float::with_val(prec, &b * c);
            let fit_residual = y.clone() - fit;
            sq += Float::with_val(prec, fit_residual.square_ref());
            Sample {
                t,
                delta,
                delta_over_cosh: y,
                fit_residual,
            }
        })
        .collect();
    let rms = (sq / (samples.len() as u32)).sqrt();
    let relative_residual = if amplitude.is_zero() {
        Float::with_val(prec, f64::INFINITY)
    } else {
        rms / &amplitude
    };

    let pi = mp::pi(prec);
    let pi2 = Float::with_val(prec, pi.square_ref());
    let base = Float::with_val(prec, &amplitude * Float::with_val(prec, eps.square_ref())) / (pi * 4u32);
    let implied_alpha_eps = base.clone() * Float::with_val(prec, &pi2 / &eps).exp();
    let implied_alpha_d = base * Float::with_val(prec, &pi2 / &d).exp();

    let zeros = sign_changes(&samples);
    let zero_spacing = if zeros.len() >= 2 {
        let span = zeros[zeros.len() - 1].clone() - &zeros[0];
        Some(span / ((zeros.len() - 1) as u32))
    } else {
        None
    };

    let mut warnings = Vec::new();
    if relative_residual > 0.2 {
        warnings.push(format!(
            "degraded fit: RMS residual is {:.3} of the amplitude",
            relative_residual.to_f64()
        ));
    }
    if !(implied_alpha_eps.is_finite() && implied_alpha_eps > 0) {
        warnings.push("fit produced no positive amplitude".into());
    }
    if zero_spacing.is_none() {
        warnings.push("fewer than two sign changes in the sampled window".into());
    }
    Ok(SplittingReport {
        epsilon: eps,
        d,
        bits: prec,
        manifold_order: cfg.manifold_order,
        required_bits: required,
        samples,
        sin_coeff: a,
        cos_coeff: b,
        amplitude,
        phase,
        relative_residual,
        implied_alpha_eps,
        implied_alpha_d,
        zeros,
        zero_spacing,
        warnings,
    })
}

/// Zeros of `Δ` by linear interpolation between sign changes.
fn sign_changes(samples: &[Sample]) -> Vec<Float> {
    let mut zeros = Vec::new();
    for w in samples.windows(2) {
        let (l, r) = (&w[0], &w[1]);
        if l.delta.is_zero() {
            zeros.push(l.t.clone());
            continue;
        }
        if l.delta.is_sign_negative() != r.delta.is_sign_negative() && !r.delta.is_zero() {
            let frac = l.delta.clone() / (l.delta.clone() - &r.delta);
            zeros.push(l.t.clone() + frac * (r.t.clone() - &l.t));
        }
    }
    if let Some(last) = samples.last() {
        if last.delta.is_zero() {
            zeros.push(last.t.clone());
        }
    }
    zeros
}

/// `ξ(t) = sech(dt/ε) A(d, tanh(dt/ε)) + 4 arctan(e^{−dt/ε})`, the formal
/// stable-manifold coordinate.
fn xi(sol: &FormalSolution, d: &Float, eps: &Float, t: &Float, truncation: Truncation) -> Result<Float, DynamicsError> {
    let x = Float::with_val(d.prec(), d * t) / eps;
    let u = x.clone().tanh();
    let a = eval_series(sol.series(), d, &u, truncation)?;
    let sech = Float::with_val(d.prec(), 1u32) / x.clone().cosh();
    Ok(a * sech + q0(&x))
}

/// `|φ(t') − p_s(q_0(t))|` where `ξ(t') = q_0(t)` and
/// `φ(t') = (ξ(t') − ξ(t' − ε))/ε` is the momentum predicted by the formal
/// series at least-term truncation.
pub fn series_vs_manifold(eps: &Float, t: &Float, sol: &FormalSolution, cfg: &PrecisionConfig) -> Result<Float, DynamicsError> {
    series_vs_manifold_with(eps, t, sol, cfg, Truncation::Optimal)
}

pub fn series_vs_manifold_with(
    eps: &Float,
    t: &Float,
    sol: &FormalSolution,
    cfg: &PrecisionConfig,
    truncation: Truncation,
) -> Result<Float, DynamicsError> {
    check_eps(eps)?;
    check_time(t)?;
    cfg.validate()?;
    let prec = cfg.bits;
    let eps = Float::with_val(prec, eps);
    let t = Float::with_val(prec, t);
    let d = d_of_eps(&eps);
    let target = q0(&t);

    let guess = Float::with_val(prec, &eps * &t) / &d;
    // ξ decreases in t.
    let width = Float::with_val(prec, 0.25f64);
    let mut lo = guess.clone() - &width;
    let mut hi = guess.clone() + &width;
    for _ in 0..8 {
        if xi(sol, &d, &eps, &lo, truncation)? >= target {
            break;
        }
        lo -= &width;
    }
    for _ in 0..8 {
        if xi(sol, &d, &eps, &hi, truncation)? <= target {
            break;
        }
        hi += &width;
    }
    for _ in 0..(prec + 8) {
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        if mid == lo || mid == hi {
            break;
        }
        if xi(sol, &d, &eps, &mid, truncation)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = Float::with_val(prec, &lo + &hi) / 2u32;
    let here = xi(sol, &d, &eps, &root, truncation)?;
    let back = root.clone() - &eps;
    let there = xi(sol, &d, &eps, &back, truncation)?;
    let p_series = (here - there) / &eps;

    let stable = manifold_series(&eps, Branch::StableAtA, cfg)?;
    let p_numeric = stable.locate(&target)?.point.p;
    Ok((p_series - p_numeric).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_formula() {
        assert_eq!(required_bits(0.3), 231);
        assert!(required_bits(0.25) > 256);
    }

    #[test]
    fn guard_refuses_low_precision() {
        let cfg = PrecisionConfig::new(128, 20).unwrap();
        let r = splitting_scan(&Float::with_val(128, 0.3), &cfg, &ScanOptions::default());
        assert!(matches!(r, Err(DynamicsError::PrecisionGuard { required: 231, .. })));
    }

    #[test]
    fn time_window() {
        let cfg = PrecisionConfig::default();
        let r = vertical_distance(&Float::with_val(256, 0.5), &Float::with_val(256, 1.5), &cfg);
        assert!(matches!(r, Err(DynamicsError::TimeOutOfRange(_))));
    }
}
