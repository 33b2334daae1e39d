//! Versioned JSON documents: `splitting-lab/series.v1` for exact series and
//! splitting constants, `splitting-lab/report.v1` for splitting scans.
//!
//! Rationals are `[numerator, denominator]` decimal string pairs keyed by the
//! power of `u`. Floats are decimal strings carrying the number of
//! significant digits given by the document's `precision_bits`.

use std::collections::BTreeMap;

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::SplittingReport;
use crate::mp;
use crate::poly::Poly;
use crate::series::{ConstantEstimates, DSeries, FormalSolution, Richardson};

pub const SERIES_FORMAT: &str = "splitting-lab/series.v1";
pub const REPORT_FORMAT: &str = "splitting-lab/report.v1";

#[derive(Debug, Error)]
pub enum JsonError {
    #[error(transparent)]
    Serde(#[from] serde_json::Error),
    #[error("unexpected format tag {found:?}, expected {expected:?}")]
    Format { expected: &'static str, found: String },
    #[error("malformed field {field}: {reason}")]
    Field { field: String, reason: String },
}

fn field_err(field: impl Into<String>, reason: impl Into<String>) -> JsonError {
    JsonError::Field {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Polynomial as `{power: [num, den]}` over its nonzero coefficients.
pub type PolyTerms = BTreeMap<usize, [String; 2]>;

pub fn poly_terms(p: &Poly) -> PolyTerms {
    p.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0)
        .map(|(k, c)| (k, [c.numer().to_string(), c.denom().to_string()]))
        .collect()
}

pub fn poly_from_terms(terms: &PolyTerms, field: &str) -> Result<Poly, JsonError> {
    let len = terms.keys().next_back().map_or(0, |k| k + 1);
    let mut coeffs = vec![Rational::new(); len];
    for (k, [n, d]) in terms {
        let n: Integer = n.parse().map_err(|_| field_err(field, format!("numerator {n:?}")))?;
        let d: Integer = d.parse().map_err(|_| field_err(field, format!("denominator {d:?}")))?;
        if d <= 0 {
            return Err(field_err(field, "denominator must be positive"));
        }
        let r = Rational::from((n, d));
        if r == 0 {
            return Err(field_err(field, format!("zero coefficient listed at u^{k}")));
        }
        coeffs[*k] = r;
    }
    Ok(Poly::from_coeffs(coeffs))
}

fn float_str(x: &Float, bits: u32) -> String {
    mp::to_decimal(x, mp::decimal_digits(bits))
}

fn check_float(s: &str, field: &str) -> Result<(), JsonError> {
    match Float::parse(s) {
        Ok(_) => Ok(()),
        Err(_) => Err(field_err(field, format!("{s:?} is not a decimal float"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesEntry {
    /// Power of `d`.
    pub power: usize,
    pub terms: PolyTerms,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OddPolyEntry {
    /// `k` in `A_k`.
    pub index: usize,
    pub power: usize,
    pub terms: PolyTerms,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Estimate {
    pub value: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexedValue {
    pub n: usize,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsDoc {
    pub precision_bits: u32,
    pub alpha: Estimate,
    pub beta: Estimate,
    pub gamma: Estimate,
    pub orientation: i32,
    pub summation: SummationDoc,
    pub leading: Vec<LeadingRow>,
}

/// The `(4/π) Σ α_n` route, raw signs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummationDoc {
    pub alpha: Estimate,
    pub beta: Estimate,
    pub gamma: Estimate,
    pub alpha_seq: Vec<IndexedValue>,
    pub beta_seq: Vec<IndexedValue>,
    pub gamma_seq: Vec<IndexedValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadingRow {
    pub n: usize,
    pub alpha: String,
    pub beta: String,
    pub gamma: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesDocument {
    pub format: String,
    pub order: usize,
    pub odd_polys: Vec<OddPolyEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<Vec<SeriesEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsDoc>,
}

fn estimate(r: &Richardson, bits: u32) -> Estimate {
    Estimate {
        value: float_str(&r.estimate, bits),
        error: float_str(&r.error, bits),
    }
}

fn indexed(seq: &[(usize, Float)], bits: u32) -> Vec<IndexedValue> {
    seq.iter()
        .map(|(n, v)| IndexedValue {
            n: *n,
            value: float_str(v, bits),
        })
        .collect()
}

pub fn constants_doc(c: &ConstantEstimates) -> ConstantsDoc {
    let bits = c.precision;
    ConstantsDoc {
        precision_bits: bits,
        alpha: estimate(&c.alpha, bits),
        beta: estimate(&c.beta, bits),
        gamma: estimate(&c.gamma, bits),
        orientation: c.orientation,
        summation: SummationDoc {
            alpha: estimate(&c.alpha_sum, bits),
            beta: estimate(&c.beta_sum, bits),
            gamma: estimate(&c.gamma_sum, bits),
            alpha_seq: indexed(&c.alpha_seq, bits),
            beta_seq: indexed(&c.beta_seq, bits),
            gamma_seq: indexed(&c.gamma_seq, bits),
        },
        leading: c
            .leading
            .rows
            .iter()
            .map(|(n, a, b, g)| LeadingRow {
                n: *n,
                alpha: float_str(a, bits),
                beta: float_str(b, bits),
                gamma: float_str(g, bits),
            })
            .collect(),
    }
}

impl SeriesDocument {
    pub fn new(sol: &FormalSolution, j: Option<&DSeries>, constants: Option<&ConstantEstimates>) -> Self {
        let odd_polys = sol
            .odd_polys()
            .iter()
            .enumerate()
            .map(|(i, p)| OddPolyEntry {
                index: 2 * i + 1,
                power: 2 * i + 2,
                terms: poly_terms(p),
            })
            .collect();
        let j = j.map(|j| {
            j.coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(power, c)| SeriesEntry {
                    power,
                    terms: poly_terms(c),
                })
                .collect()
        });
        SeriesDocument {
            format: SERIES_FORMAT.into(),
            order: sol.order(),
            odd_polys,
            j,
            constants: constants.map(constants_doc),
        }
    }

    pub fn to_json(&self) -> Result<String, JsonError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Parses and validates a document.
    pub fn from_json(s: &str) -> Result<Self, JsonError> {
        let doc: SeriesDocument = serde_json::from_str(s)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<(), JsonError> {
        if self.format != SERIES_FORMAT {
            return Err(JsonError::Format {
                expected: SERIES_FORMAT,
                found: self.format.clone(),
            });
        }
        for (i, e) in self.odd_polys.iter().enumerate() {
            let field = format!("odd_polys[{i}]");
            if e.index != 2 * i + 1 || e.power != e.index + 1 {
                return Err(field_err(field, "entries must be A_1, A_3, … at d^2, d^4, …"));
            }
            let p = poly_from_terms(&e.terms, &field)?;
            if !p.is_odd() || p.degree().is_some_and(|d| d > e.index) {
                return Err(field_err(field, "polynomial must be odd with degree ≤ index"));
            }
        }
        if let Some(j) = &self.j {
            for e in j {
                poly_from_terms(&e.terms, &format!("j[d^{}]", e.power))?;
            }
        }
        if let Some(c) = &self.constants {
            for (name, e) in [("alpha", &c.alpha), ("beta", &c.beta), ("gamma", &c.gamma)] {
                check_float(&e.value, name)?;
                check_float(&e.error, name)?;
            }
            if c.orientation.abs() != 1 {
                return Err(field_err("orientation", "must be ±1"));
            }
        }
        Ok(())
    }

    pub fn odd_polys(&self) -> Result<Vec<Poly>, JsonError> {
        self.odd_polys
            .iter()
            .enumerate()
            .map(|(i, e)| poly_from_terms(&e.terms, &format!("odd_polys[{i}]")))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitDoc {
    pub amplitude: String,
    pub phase: String,
    pub sin_coeff: String,
    pub cos_coeff: String,
    pub relative_residual: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpliedAlphaDoc {
    pub eps_normalization: String,
    pub d_normalization: String,
}

/// Samples as parallel arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplesDoc {
    pub t: Vec<String>,
    pub delta: Vec<String>,
    pub delta_over_cosh: Vec<String>,
    pub fit_residual: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub format: String,
    pub precision_bits: u32,
    pub epsilon: String,
    pub d: String,
    pub manifold_order: usize,
    pub required_bits: u32,
    pub fit: FitDoc,
    pub implied_alpha: ImpliedAlphaDoc,
    pub zero_spacing: Option<String>,
    pub zeros: Vec<String>,
    pub samples: SamplesDoc,
    pub warnings: Vec<String>,
}

impl ReportDocument {
    pub fn new(r: &SplittingReport) -> Self {
        let b = r.bits;
        let col = |f: &dyn Fn(&crate::dynamics::Sample) -> &Float| -> Vec<String> {
            r.samples.iter().map(|s| float_str(f(s), b)).collect()
        };
        ReportDocument {
            format: REPORT_FORMAT.into(),
            precision_bits: b,
            epsilon: float_str(&r.epsilon, b),
            d: float_str(&r.d, b),
            manifold_order: r.manifold_order,
            required_bits: r.required_bits,
            fit: FitDoc {
                amplitude: float_str(&r.amplitude, b),
                phase: float_str(&r.phase, b),
                sin_coeff: float_str(&r.sin_coeff, b),
                cos_coeff: float_str(&r.cos_coeff, b),
                relative_residual: float_str(&r.relative_residual, b),
            },
            implied_alpha: ImpliedAlphaDoc {
                eps_normalization: float_str(&r.implied_alpha_eps, b),
                d_normalization: float_str(&r.implied_alpha_d, b),
            },
            zero_spacing: r.zero_spacing.as_ref().map(|z| float_str(z, b)),
            zeros: r.zeros.iter().map(|z| float_str(z, b)).collect(),
            samples: SamplesDoc {
                t: col(&|s| &s.t),
                delta: col(&|s| &s.delta),
                delta_over_cosh: col(&|s| &s.delta_over_cosh),
                fit_residual: col(&|s| &s.fit_residual),
            },
            warnings: r.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String, JsonError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self, JsonError> {
        let doc: ReportDocument = serde_json::from_str(s)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<(), JsonError> {
        if self.format != REPORT_FORMAT {
            return Err(JsonError::Format {
                expected: REPORT_FORMAT,
                found: self.format.clone(),
            });
        }
        let n = self.samples.t.len();
        let s = &self.samples;
        for (name, col) in [
            ("samples.t", &s.t),
            ("samples.delta", &s.delta),
            ("samples.delta_over_cosh", &s.delta_over_cosh),
            ("samples.fit_residual", &s.fit_residual),
        ] {
            if col.len() != n {
                return Err(field_err(name, "sample arrays must have equal length"));
            }
            for v in col {
                check_float(v, name)?;
            }
        }
        for (name, v) in [
            ("epsilon", &self.epsilon),
            ("d", &self.d),
            ("fit.amplitude", &self.fit.amplitude),
            ("fit.phase", &self.fit.phase),
            ("fit.sin_coeff", &self.fit.sin_coeff),
            ("fit.cos_coeff", &self.fit.cos_coeff),
            ("fit.relative_residual", &self.fit.relative_residual),
            ("implied_alpha.eps_normalization", &self.implied_alpha.eps_normalization),
            ("implied_alpha.d_normalization", &self.implied_alpha.d_normalization),
        ] {
            check_float(v, name)?;
        }
        if let Some(z) = &self.zero_spacing {
            check_float(z, "zero_spacing")?;
        }
        Ok(())
    }
}
