use rug::Float;

use super::{DSeries, SeriesError};

/// How many terms of a divergent series to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    /// Keep `d^0..=d^n`.
    Fixed(usize),
    /// Least-term rule: stop at the smallest nonzero term.
    Optimal,
}

fn terms(s: &DSeries, d: &Float, u: &Float) -> Vec<Float> {
    let prec = d.prec().max(u.prec());
    let mut power = Float::with_val(prec, 1);
    s.coeffs()
        .iter()
        .map(|c| {
            let t = if c.is_zero() {
                Float::with_val(prec, 0)
            } else {
                c.eval_float(u) * &power
            };
            power *= d;
            t
        })
        .collect()
}

/// Index of the smallest nonzero term `|S_n(u) d^n|`, or the last index when
/// every term vanishes.
pub fn optimal_index(s: &DSeries, d: &Float, u: &Float) -> usize {
    let ts = terms(s, d, u);
    let mut best: Option<(usize, Float)> = None;
    for (n, t) in ts.iter().enumerate() {
        if t.is_zero() {
            continue;
        }
        let mag = t.clone().abs();
        if best.as_ref().is_none_or(|(_, b)| mag < *b) {
            best = Some((n, mag));
        }
    }
    best.map_or(s.order(), |(n, _)| n)
}

/// `Σ_{n ≤ N} S_n(u) d^n` with `N` chosen by `truncation`.
pub fn eval_series(s: &DSeries, d: &Float, u: &Float, truncation: Truncation) -> Result<Float, SeriesError> {
    if u.clone().abs() >= 1 {
        return Err(SeriesError::Invalid("evaluation needs |u| < 1".into()));
    }
    if *d <= 0 {
        return Err(SeriesError::Invalid("evaluation needs d > 0".into()));
    }
    let last = match truncation {
        Truncation::Fixed(n) => n.min(s.order()),
        Truncation::Optimal => optimal_index(s, d, u),
    };
    let prec = d.prec().max(u.prec());
    let mut acc = Float::with_val(prec, 0);
    for c in s.coeffs()[..=last].iter().rev() {
        acc *= d;
        if !c.is_zero() {
            acc += c.eval_float(u);
        }
    }
    Ok(acc)
}
