//! Executes a parsed config and renders the report.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use equivcheck::approximator::{curve_to_csv, error_curve, median, Activation, FitConfig, FitResult};
use equivcheck::universality::{
    compare_classes, decide_polynomial_in_class, directional_failure_test, normal_subgroup_certificate, orbit_equivalent,
    separation_equivalent, symmetrized_monomial_certificate, Witness,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{exact_pairs, exact_vectors, pick_group, resolve, AnalysisConfig, AnalysisSpec, Resolved};
use crate::specs::parse_subgroup;
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub version: u32,
    pub seed: u64,
    pub analyses: Vec<Entry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub index: usize,
    pub kind: &'static str,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall-clock milliseconds, only with `--timings`.
    pub timings: Option<f64>,
}

pub struct Outcome {
    pub report: Report,
    pub text: String,
    /// `(analysis index, csv)` for every fit analysis.
    pub curves: Vec<(usize, String)>,
}

impl Outcome {
    pub fn failed(&self) -> bool {
        self.report.analyses.iter().any(|e| !e.ok)
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub timings: bool,
}

/// Checks the specs that are only parsed at run time, so bad names fail before any work starts.
fn prevalidate(cfg: &AnalysisConfig) -> Result<(), CliError> {
    for a in &cfg.analyses {
        match a {
            AnalysisSpec::Certificate { group, subgroup, components } => {
                let g = pick_group(group, &cfg.group)?.build()?;
                for spec in std::iter::once(subgroup).chain(components) {
                    match parse_subgroup(&g, spec) {
                        Err(CliError::Config(m)) => return Err(CliError::Config(m)),
                        _ => continue,
                    }
                }
            }
            AnalysisSpec::Separation { orbit_group: Some(g), .. } => {
                g.build()?;
            }
            AnalysisSpec::Fit { activation: Some(act), .. } => {
                act.parse::<Activation>().map_err(|e| CliError::Config(format!("activation: {e}")))?;
            }
            _ => {}
        }
    }
    Ok(())
}

/// Runs the analyses accepted by `keep`; entries keep their declaration index.
pub fn run_config(cfg: &AnalysisConfig, opts: &RunOptions, keep: &dyn Fn(&AnalysisSpec) -> bool) -> Result<Outcome, CliError> {
    let resolved = resolve(cfg)?;
    prevalidate(cfg)?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let mut outcome = Outcome { report: Report { version: cfg.version, seed, analyses: Vec::new() }, text: String::new(), curves: Vec::new() };
    for (index, spec) in cfg.analyses.iter().enumerate().filter(|(_, a)| keep(a)) {
        let start = Instant::now();
        let result = run_one(spec, &resolved, cfg, seed);
        let timings = opts.timings.then(|| start.elapsed().as_secs_f64() * 1e3);
        let _ = write!(outcome.text, "[{index}] {} ", spec.kind());
        let entry = match result {
            Ok(done) => {
                outcome.text.push_str(&done.text);
                if let Some(csv) = done.csv {
                    outcome.curves.push((index, csv));
                }
                Entry { index, kind: spec.kind(), ok: true, result: Some(done.value), error: None, timings }
            }
            Err(e) => {
                let _ = writeln!(outcome.text, "error: {e}");
                Entry { index, kind: spec.kind(), ok: false, result: None, error: Some(e.to_string()), timings }
            }
        };
        outcome.report.analyses.push(entry);
    }
    let failed = outcome.report.analyses.iter().filter(|e| !e.ok).count();
    let _ = writeln!(outcome.text, "{} analyses, {} failed", outcome.report.analyses.len(), failed);
    Ok(outcome)
}

struct Done {
    value: Value,
    text: String,
    csv: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn witness_line(w: &Option<Witness>) -> String {
    match w {
        Some(Witness::Annihilator { operator, image }) => format!("\n    witness operator {operator}\n    image {image}\n"),
        Some(Witness::Directions { directions, image }) => {
            let dirs: Vec<String> =
                directions.iter().map(|d| format!("({})", d.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(", "))).collect();
            format!("\n    witness directions {}\n    image {image}\n", dirs.join(" "))
        }
        None => "\n".into(),
    }
}

fn run_one(spec: &AnalysisSpec, r: &Resolved, cfg: &AnalysisConfig, seed: u64) -> equivcheck::Result<Done> {
    match spec {
        AnalysisSpec::Membership { target, family } => {
            let v = decide_polynomial_in_class(r.target(target), r.family(family))?;
            let text = format!("{target} in {family}: {:?} ({}){}", v.status, v.details, witness_line(&v.witness));
            Ok(Done { value: to_value(&v.report(target, family)), text, csv: None })
        }
        AnalysisSpec::FailureTests { target, family, symmetrized } => {
            let fam = r.family(family);
            let mut value = json!({ "family": family });
            let mut text = format!("on {family}\n");
            if let Some(t) = target {
                let v = directional_failure_test(r.target(t), fam)?;
                let _ = write!(text, "  directional {t}: {:?} ({}){}", v.status, v.details, witness_line(&v.witness));
                value["directional"] = to_value(&v.report(t, family));
            }
            if let Some(sym) = symmetrized {
                let cert = symmetrized_monomial_certificate(fam, &sym.s, &sym.a, &exact_vectors(&sym.directions))?;
                let _ = writeln!(
                    text,
                    "  symmetrized s={:?} a={:?}: value {} closed form {} agrees {} certifies failure {}",
                    sym.s, sym.a, cert.value, cert.closed_form, cert.agrees, cert.certifies_failure
                );
                value["symmetrized"] = to_value(&cert);
            }
            Ok(Done { value, text, csv: None })
        }
        AnalysisSpec::Separation { family, pairs, orbit_group } => {
            let fam = r.family(family);
            let group = orbit_group.as_ref().map(|g| g.build()).transpose().map_err(|e| equivcheck::Error::InvalidParameters(e.to_string()))?;
            let mut rows = Vec::new();
            let mut text = format!("on {family}\n");
            for (x, y) in exact_pairs(pairs) {
                let pair = separation_equivalent(&x, &y, fam)?;
                let orbit = group.as_ref().map(|g| orbit_equivalent(&x, &y, g)).transpose()?;
                let show = |v: &[equivcheck::linalg::Rational]| v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(", ");
                let _ = write!(text, "  ({}) vs ({}): {}", show(&x), show(&y), if pair.equivalent { "equivalent" } else { "separated" });
                if let Some(o) = orbit {
                    let _ = write!(text, ", same orbit {o}");
                }
                text.push('\n');
                let mut row = to_value(&pair);
                row["same_orbit"] = json!(orbit);
                rows.push(row);
            }
            Ok(Done { value: json!({ "family": family, "pairs": rows }), text, csv: None })
        }
        AnalysisSpec::Certificate { group, subgroup, components } => {
            let invalid = |e: CliError| equivcheck::Error::InvalidParameters(e.to_string());
            let spec = pick_group(group, &cfg.group).map_err(invalid)?;
            let g = Arc::new(spec.build().map_err(invalid)?);
            let group = spec.label();
            let h = parse_subgroup(&g, subgroup).map_err(invalid)?;
            let ks = components.iter().map(|k| parse_subgroup(&g, k)).collect::<Result<Vec<_>, _>>().map_err(invalid)?;
            let cert = normal_subgroup_certificate(&g, &h, &ks)?;
            let text = match &cert.refusal {
                Some(reason) => format!("{group} / {subgroup}: refused ({reason})\n"),
                None => format!(
                    "{group} / {subgroup}: {} (quotient order {}, hidden dim {})\n",
                    if cert.granted { "granted" } else { "not granted" },
                    cert.quotient_order.unwrap_or(0),
                    cert.hidden_dim.unwrap_or(0)
                ),
            };
            let mut value = to_value(&cert);
            value["group"] = json!(group);
            value["subgroup"] = json!(subgroup);
            value["component_specs"] = json!(components);
            Ok(Done { value, text, csv: None })
        }
        AnalysisSpec::Compare { first, second, degree_cap } => {
            let cmp = compare_classes(r.family(first), r.family(second), *degree_cap)?;
            let mut text = format!("{first} vs {second} up to degree {degree_cap}: {:?}\n", cmp.relation);
            for w in &cmp.witnesses {
                let _ = writeln!(text, "  degree {} witness in {} not in {}: {}", w.degree, w.member_of, w.not_member_of, w.polynomial);
            }
            Ok(Done { value: to_value(&cmp), text, csv: None })
        }
        AnalysisSpec::Fit { target, family, widths, seeds, activation, samples, inner_scale, ridge_lambda, domain_box } => {
            let fam = r.family(family);
            let first = *widths.first().ok_or_else(|| equivcheck::Error::InvalidParameters("widths must be nonempty".into()))?;
            let mut fit_cfg = FitConfig::new(first, fam.source_dim);
            if let Some(act) = activation {
                fit_cfg.activation = act.parse()?;
            }
            if let Some(s) = samples {
                fit_cfg.sample_count = *s;
            }
            if let Some(s) = inner_scale {
                fit_cfg.inner_scale = *s;
            }
            if let Some(l) = ridge_lambda {
                fit_cfg.ridge_lambda = *l;
            }
            if let Some(b) = domain_box {
                fit_cfg.domain_box = b.clone();
            }
            let seeds = seeds.clone().unwrap_or_else(|| vec![seed]);
            let mut results: Vec<FitResult> = Vec::new();
            for &s in &seeds {
                results.extend(error_curve(r.target(target), fam, widths, &FitConfig { seed: s, ..fit_cfg.clone() })?);
            }
            let mut text = format!("{target} on {family} ({:?}, {} seeds)\n", fit_cfg.activation, seeds.len());
            let mut summary = Vec::new();
            for &w in widths {
                let rms: Vec<f64> = results.iter().filter(|r| r.width == w).map(|r| r.rms_error).collect();
                let med = median(&rms);
                let _ = writeln!(text, "  width {w}: median test rms {med:.3e}");
                summary.push(json!({ "width": w, "median_test_rms": med }));
            }
            let value = json!({ "target": target, "family": family, "config": fit_cfg, "seeds": seeds, "results": results, "summary": summary });
            Ok(Done { value, text, csv: Some(curve_to_csv(&results)) })
        }
    }
}
