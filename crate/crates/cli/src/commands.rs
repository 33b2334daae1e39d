use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Rational};
use serde_json::json;
use splitting_lab::dynamics::{splitting_scan, PrecisionConfig, ScanOptions, SplittingReport};
use splitting_lab::json::{poly_terms, ReportDocument, SeriesDocument};
use splitting_lab::mp;
use splitting_lab::series::{compute_j, extract_constants, formal_solution, ConstantEstimates};
use splitting_lab::tau::TauBasis;
use splitting_lab::validate::{run_validation, ValidationOptions};
use splitting_lab::{FormalSolution, Poly};

use crate::config::{CliError, Command, Format, RunConfig};

/// The reference value the `compare` table is measured against.
pub const ALPHA_REFERENCE: f64 = 89.0334;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    ConfigError,
    ValidationFailure,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::ConfigError => 1,
            Status::ValidationFailure => 2,
        }
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub stdout: String,
    /// `(file name, contents)`, written under `--out`.
    pub files: Vec<(String, String)>,
    pub diagnostics: Vec<String>,
    pub status: Status,
}

impl RunOutput {
    fn ok(stdout: String, files: Vec<(String, String)>) -> Self {
        RunOutput { stdout, files, diagnostics: Vec::new(), status: Status::Success }
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    match cfg.command {
        Command::Series => series(cfg),
        Command::Alpha => alpha(cfg),
        Command::Tau => tau(cfg),
        Command::Splitting => splitting(cfg),
        Command::Compare => compare(cfg),
        Command::Validate => validate(cfg),
    }
}

fn pick(format: Format, text: &str, csv: &str, json: &str) -> String {
    match format {
        Format::Text => text,
        Format::Csv => csv,
        Format::Json => json,
    }
    .to_owned()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn dec(x: &Float, digits: usize) -> String {
    mp::to_decimal(x, digits)
}

fn eps_tag(e: f64) -> String {
    format!("eps{e}")
}

fn series_text(sol: &FormalSolution) -> String {
    let mut out = format!("# formal solution A_d(u) = sum A_(2n-1)(u) d^(2n), order {}\n", sol.order());
    for (k, p) in sol.odd_polys().iter().enumerate() {
        out.push_str(&format!("A_{} = {}\n", 2 * k + 1, p));
    }
    out
}

fn poly_rows(out: &mut String, prefix: &str, p: &Poly) {
    for (power, c) in p.coeffs().iter().enumerate() {
        if *c != 0 {
            out.push_str(&format!("{prefix},{power},{},{}\n", c.numer(), c.denom()));
        }
    }
}

fn series(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let sol = formal_solution(cfg.series_order)?;
    let text = series_text(&sol);
    let json = SeriesDocument::new(&sol, None, None).to_json()?;
    let mut csv = String::from("index,power,numerator,denominator\n");
    for (k, p) in sol.odd_polys().iter().enumerate() {
        poly_rows(&mut csv, &(2 * k + 1).to_string(), p);
    }
    let stdout = pick(cfg.format, &text, &csv, &json);
    Ok(RunOutput::ok(stdout, vec![("series.json".into(), json), ("series.txt".into(), text)]))
}

fn constants(cfg: &RunConfig) -> Result<(FormalSolution, splitting_lab::DSeries, ConstantEstimates), CliError> {
    let sol = formal_solution(cfg.series_order)?;
    let j = compute_j(&sol)?;
    let c = extract_constants(&j, cfg.precision_bits)?;
    Ok((sol, j, c))
}

fn alpha_text(c: &ConstantEstimates) -> String {
    let four_pi = Float::with_val(c.precision, &c.alpha.estimate * &mp::pi(c.precision)) * 4u32;
    let mut out = String::new();
    out.push_str(&format!("alpha = {} +/- {}\n", dec(&c.alpha.estimate, 12), dec(&c.alpha.error, 3)));
    out.push_str(&format!("beta  = {} +/- {}\n", dec(&c.beta.estimate, 12), dec(&c.beta.error, 3)));
    out.push_str(&format!("gamma = {} +/- {}\n", dec(&c.gamma.estimate, 12), dec(&c.gamma.error, 3)));
    out.push_str(&format!("4 pi alpha = {}\n", dec(&four_pi, 12)));
    out.push_str(&format!("orientation = {}\n", c.orientation));
    out.push_str(&format!(
        "summed route (4/pi) sum alpha_n = {} +/- {}\n",
        dec(&c.alpha_sum.estimate, 12),
        dec(&c.alpha_sum.error, 3)
    ));
    out.push_str("\n# leading estimates by order of J\n# n  alpha  beta  gamma\n");
    for (n, a, b, g) in &c.leading.rows {
        out.push_str(&format!("{n:3}  {}  {}  {}\n", dec(a, 10), dec(b, 10), dec(g, 10)));
    }
    out.push_str("\n# decay profile of the summands\n# n  alpha_n  |alpha_n| n^7\n");
    for (n, a) in &c.alpha_seq {
        let scaled = Float::with_val(c.precision, a.abs_ref()) * Float::with_val(c.precision, *n as u32).pow(7u32);
        out.push_str(&format!("{n:3}  {}  {}\n", dec(a, 10), dec(&scaled, 6)));
    }
    out
}

fn alpha(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let (sol, j, c) = constants(cfg)?;
    let text = alpha_text(&c);
    let json = SeriesDocument::new(&sol, Some(&j), Some(&c)).to_json()?;
    let mut csv = String::from("n,alpha_leading,beta_leading,gamma_leading\n");
    let digits = mp::decimal_digits(c.precision);
    for (n, a, b, g) in &c.leading.rows {
        csv.push_str(&format!("{n},{},{},{}\n", dec(a, digits), dec(b, digits), dec(g, digits)));
    }
    let stdout = pick(cfg.format, &text, &csv, &json);
    Ok(RunOutput::ok(
        stdout,
        vec![("alpha.json".into(), json), ("alpha.txt".into(), text), ("alpha.csv".into(), csv)],
    ))
}

/// `(n−1)! τ_n`, the polynomial `P` with `(d/dz)^{n−1} tanh z = P(tanh z)`.
fn derivative_form(n: usize, p: &Poly) -> Poly {
    if n == 0 {
        return p.clone();
    }
    p.scale(&Rational::from(mp::factorial(n as u32 - 1)))
}

fn tau(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let basis = TauBasis::global();
    let n_max = cfg.series_order;
    let mut text = String::from("# tau_n in monomials, then (n-1)! tau_n\n");
    let mut csv = String::from("n,form,power,numerator,denominator\n");
    let mut entries = Vec::new();
    for n in 0..=n_max {
        let p = basis.tau(n);
        let dform = derivative_form(n, &p);
        text.push_str(&format!("tau_{n} = {p}\n"));
        if n > 0 {
            text.push_str(&format!("  ({}! tau_{n}) = {dform}\n", n - 1));
        }
        poly_rows(&mut csv, &format!("{n},monomial"), &p);
        poly_rows(&mut csv, &format!("{n},derivative"), &dform);
        entries.push(json!({ "n": n, "monomial": poly_terms(&p), "derivative": poly_terms(&dform) }));
    }
    let doc = json!({ "format": "splitting-lab/tau.v1", "order": n_max, "tau": entries });
    let json = serde_json::to_string_pretty(&doc).map_err(splitting_lab::json::JsonError::from)? + "\n";
    let stdout = pick(cfg.format, &text, &csv, &json);
    Ok(RunOutput::ok(stdout, vec![("tau.json".into(), json), ("tau.txt".into(), text), ("tau.csv".into(), csv)]))
}

fn precision(cfg: &RunConfig) -> Result<PrecisionConfig, CliError> {
    Ok(PrecisionConfig::new(cfg.precision_bits, cfg.manifold_order)?)
}

type ScanResults = Vec<(f64, Result<SplittingReport, CliError>)>;

/// Scans in ε order; each failure stays attached to its ε.
fn scans(cfg: &RunConfig) -> Result<ScanResults, CliError> {
    let pc = precision(cfg)?;
    let opts = ScanOptions::default();
    Ok(cfg
        .epsilon_list
        .par_iter()
        .map(|&e| {
            let eps = eps_float(e, cfg.precision_bits);
            (e, splitting_scan(&eps, &pc, &opts).map_err(CliError::from))
        })
        .collect())
}

/// `ε` from its shortest decimal form, so `0.4` means 4/10 and not the
/// nearest double.
fn eps_float(e: f64, prec: u32) -> Float {
    mp::parse_decimal(prec, &e.to_string()).unwrap_or_else(|| Float::with_val(prec, e))
}

fn samples_csv(doc: &ReportDocument) -> String {
    let s = &doc.samples;
    let mut out = String::from("t,delta,delta_over_cosh,fit_residual\n");
    for i in 0..s.t.len() {
        out.push_str(&format!("{},{},{},{}\n", s.t[i], s.delta[i], s.delta_over_cosh[i], s.fit_residual[i]));
    }
    out
}

fn report_text(e: f64, r: &SplittingReport) -> String {
    let spacing = r.zero_spacing.as_ref().map_or("none".to_owned(), |z| dec(z, 10));
    let mut out = format!(
        "eps = {e}\n  d = {}\n  bits = {} (required {}), manifold order {}\n  amplitude C = {}\n  phase = {}\n  relative residual = {}\n  implied alpha (exp(pi^2/eps)) = {}\n  implied alpha (exp(pi^2/d)) = {}\n  zero spacing = {spacing}\n  max |delta| = {}\n",
        dec(&r.d, 12),
        r.bits,
        r.required_bits,
        r.manifold_order,
        dec(&r.amplitude, 12),
        dec(&r.phase, 6),
        dec(&r.relative_residual, 6),
        dec(&r.implied_alpha_eps, 10),
        dec(&r.implied_alpha_d, 10),
        dec(&r.max_abs_delta(), 10),
    );
    for w in &r.warnings {
        out.push_str(&format!("  warning: {w}\n"));
    }
    out
}

fn splitting(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    if cfg.format == Format::Csv && cfg.output_path.is_none() && cfg.epsilon_list.len() > 1 {
        return Err(CliError::Config("CSV on stdout takes a single --eps; use --out for several".into()));
    }
    let mut text = String::new();
    let mut csv = String::new();
    let mut docs = Vec::new();
    let mut files = Vec::new();
    let mut diagnostics = Vec::new();
    for (e, result) in scans(cfg)? {
        match result {
            Ok(r) => {
                let doc = ReportDocument::new(&r);
                let json = doc.to_json()?;
                let c = samples_csv(&doc);
                text.push_str(&report_text(e, &r));
                csv.push_str(&c);
                files.push((format!("splitting_{}.json", eps_tag(e)), json));
                files.push((format!("splitting_{}.csv", eps_tag(e)), c));
                docs.push(doc);
            }
            Err(err) => {
                text.push_str(&format!("eps = {e}\n  failed: {err}\n"));
                diagnostics.push(format!("eps = {e}: {err}"));
            }
        }
    }
    let json = if docs.len() == 1 {
        docs[0].to_json()?
    } else {
        serde_json::to_string_pretty(&docs).map_err(splitting_lab::json::JsonError::from)? + "\n"
    };
    let status = if diagnostics.is_empty() { Status::Success } else { Status::ConfigError };
    Ok(RunOutput { stdout: pick(cfg.format, &text, &csv, &json), files, diagnostics, status })
}

struct CompareRow {
    eps: f64,
    report: Result<SplittingReport, String>,
}

/// Relative error bands by ε, matching the trend-plus-bracket acceptance.
fn band(eps: f64) -> Option<f64> {
    if eps <= 0.3 + 1e-12 {
        Some(0.15)
    } else if eps <= 0.4 + 1e-12 {
        Some(0.30)
    } else {
        None
    }
}

fn rel(x: &Float, alpha: f64) -> f64 {
    (x.to_f64() - alpha).abs() / alpha
}

fn verdict(rows: &[CompareRow], alpha: f64) -> (bool, String) {
    let mut ok: Vec<(f64, &SplittingReport)> = rows.iter().filter_map(|r| r.report.as_ref().ok().map(|rep| (r.eps, rep))).collect();
    ok.sort_by(|a, b| b.0.total_cmp(&a.0));
    if ok.len() < 2 {
        return (false, "fewer than two successful scans; no trend to test".into());
    }
    let mut reasons = Vec::new();
    for (label, pick) in [("eps", 0), ("d", 1)] {
        let errs: Vec<(f64, f64)> = ok
            .iter()
            .map(|(e, r)| (*e, rel(if pick == 0 { &r.implied_alpha_eps } else { &r.implied_alpha_d }, alpha)))
            .collect();
        if !errs.windows(2).all(|w| w[1].1 < w[0].1) {
            reasons.push(format!("{label}-normalized error does not decrease with eps"));
        }
        for (e, x) in &errs {
            if let Some(b) = band(*e) {
                if *x > b {
                    reasons.push(format!("{label}-normalized error {:.2}% above {:.0}% at eps = {e}", 100.0 * x, 100.0 * b));
                }
            }
        }
    }
    if reasons.is_empty() {
        (true, "consistent: implied alpha converges to the series alpha under both normalizations".into())
    } else {
        (false, format!("inconsistent: {}", reasons.join("; ")))
    }
}

fn compare(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let (constants, scanned) = rayon::join(|| constants(cfg), || scans(cfg));
    let (_, _, c) = constants?;
    let alpha = c.alpha.estimate.to_f64();
    let rows: Vec<CompareRow> = scanned?
        .into_iter()
        .map(|(eps, r)| CompareRow { eps, report: r.map_err(|e| e.to_string()) })
        .collect();
    let (pass, summary) = verdict(&rows, alpha);

    let mut text = format!(
        "series alpha = {} +/- {} (reference {ALPHA_REFERENCE})\n\n{:>6} {:>12} {:>14} {:>14} {:>9} {:>9} {:>9}\n",
        dec(&c.alpha.estimate, 10),
        dec(&c.alpha.error, 3),
        "eps",
        "amplitude",
        "alpha(eps)",
        "alpha(d)",
        "err(eps)",
        "err(d)",
        "d vs ref"
    );
    let mut csv = String::from("epsilon,d,amplitude,implied_alpha_eps,implied_alpha_d,rel_error_eps,rel_error_d,rel_error_reference_d,status\n");
    let mut json_rows = Vec::new();
    let mut diagnostics = Vec::new();
    for row in &rows {
        match &row.report {
            Ok(r) => {
                let (ee, ed) = (rel(&r.implied_alpha_eps, alpha), rel(&r.implied_alpha_d, alpha));
                let eref = rel(&r.implied_alpha_d, ALPHA_REFERENCE);
                text.push_str(&format!(
                    "{:>6} {:>12} {:>14} {:>14} {:>8.2}% {:>8.2}% {:>8.2}%\n",
                    row.eps,
                    dec(&r.amplitude, 6),
                    dec(&r.implied_alpha_eps, 10),
                    dec(&r.implied_alpha_d, 10),
                    100.0 * ee,
                    100.0 * ed,
                    100.0 * eref
                ));
                csv.push_str(&format!(
                    "{},{},{},{},{},{:.6e},{:.6e},{:.6e},ok\n",
                    row.eps,
                    dec(&r.d, 20),
                    dec(&r.amplitude, 20),
                    dec(&r.implied_alpha_eps, 20),
                    dec(&r.implied_alpha_d, 20),
                    ee,
                    ed,
                    eref
                ));
                json_rows.push(json!({
                    "epsilon": row.eps,
                    "d": dec(&r.d, 20),
                    "amplitude": dec(&r.amplitude, 20),
                    "implied_alpha_eps": dec(&r.implied_alpha_eps, 20),
                    "implied_alpha_d": dec(&r.implied_alpha_d, 20),
                    "status": "ok",
                }));
            }
            Err(msg) => {
                text.push_str(&format!("{:>6} failed: {msg}\n", row.eps));
                csv.push_str(&format!("{},,,,,,,,{}\n", row.eps, csv_field(msg)));
                json_rows.push(json!({ "epsilon": row.eps, "status": msg }));
                diagnostics.push(format!("eps = {}: {msg}", row.eps));
            }
        }
    }
    text.push_str(&format!("\nverdict: {summary}\n"));
    let doc = json!({
        "format": "splitting-lab/compare.v1",
        "series_alpha": dec(&c.alpha.estimate, 20),
        "series_alpha_error": dec(&c.alpha.error, 6),
        "reference_alpha": ALPHA_REFERENCE,
        "rows": json_rows,
        "verdict": { "pass": pass, "summary": summary },
    });
    let json = serde_json::to_string_pretty(&doc).map_err(splitting_lab::json::JsonError::from)? + "\n";
    let status = if !pass {
        Status::ValidationFailure
    } else if !diagnostics.is_empty() {
        Status::ConfigError
    } else {
        Status::Success
    };
    Ok(RunOutput {
        stdout: pick(cfg.format, &text, &csv, &json),
        files: vec![("compare.txt".into(), text), ("compare.csv".into(), csv), ("compare.json".into(), json)],
        diagnostics,
        status,
    })
}

fn corrupted_basis(index: usize) -> TauBasis {
    let clean = TauBasis::new();
    let mut table: Vec<Poly> = (0..=index.max(70)).map(|n| clean.tau(n)).collect();
    table[index] = table[index].scale(&Rational::from((101, 100)));
    TauBasis::from_table(table)
}

fn validate(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let basis = match cfg.corrupt_tau {
        Some(k) => corrupted_basis(k),
        None => TauBasis::new(),
    };
    let opts = ValidationOptions { bits: cfg.precision_bits, ..ValidationOptions::default() };
    let report = run_validation(&basis, &opts);
    let mut text = String::new();
    let mut csv = String::from("property,passed,detail\n");
    let mut rows = Vec::new();
    for r in &report.results {
        text.push_str(&format!("{} {}: {}\n", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail));
        csv.push_str(&format!("{},{},{}\n", csv_field(r.name), r.passed, csv_field(&r.detail)));
        rows.push(json!({ "property": r.name, "passed": r.passed, "detail": r.detail }));
    }
    let all = report.all_passed();
    text.push_str(&format!("{}\n", if all { "all properties hold" } else { "validation failed" }));
    let doc = json!({ "format": "splitting-lab/validate.v1", "precision_bits": cfg.precision_bits, "passed": all, "properties": rows });
    let json = serde_json::to_string_pretty(&doc).map_err(splitting_lab::json::JsonError::from)? + "\n";
    Ok(RunOutput {
        stdout: pick(cfg.format, &text, &csv, &json),
        files: vec![("validate.txt".into(), text), ("validate.csv".into(), csv), ("validate.json".into(), json)],
        diagnostics: Vec::new(),
        status: if all { Status::Success } else { Status::ValidationFailure },
    })
}
