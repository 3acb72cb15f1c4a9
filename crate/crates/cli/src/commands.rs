use std::path::Path;

use serde_json::json;

use qcc_core::circuit::{
    detect, effective_postselection_projector, end_to_end_weak_experiment, expected_state,
    fixtures, parse_circuit, path_observable, run_from_input, Circuit,
};
use qcc_core::exec::Strategy;
use qcc_core::hilbert::{fidelity_up_to_phase, OperatorExpr};
use qcc_core::pointer::{convergence_sweep, MeterConfig};
use qcc_core::scenarios::{self, verify_with, Scenario, SCENARIO_NAMES};
use qcc_core::Error;

use crate::render::{self, ascii_label, complex, csv, key_values, real, sig17, table, Format};
use crate::{Cli, Command};

/// What a successful command prints and whether its checks held.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub diagnostics: Vec<String>,
    pub pass: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            diagnostics: Vec::new(),
            pass: true,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_numeric() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<Outcome, Failure>;

pub fn dispatch(cli: &Cli) -> CmdResult {
    let (format, tol) = (cli.format, cli.tolerance);
    match &cli.command {
        Command::ScenarioList => Ok(Outcome::ok(scenario_list(format))),
        Command::ScenarioRun { name, n, d } => scenario_run(&scenario(name, *n, *d)?, format, tol),
        Command::CircuitVerify {
            file,
            expect,
            detector,
        } => circuit_verify(file, expect.as_deref(), detector.as_deref(), format, tol),
        Command::PointerSweep {
            scenario: name,
            n,
            d,
            observable,
            g,
            sigma,
        } => pointer_sweep(
            &scenario(name, *n, *d)?,
            observable.as_deref(),
            g,
            *sigma,
            format,
        ),
        Command::EndToEnd {
            prep,
            postsel,
            detector,
            observable,
            g,
            sigma,
            density,
        } => end_to_end(
            prep, postsel, detector, observable, *g, *sigma, *density, format,
        ),
    }
}

const SCENARIO_SUMMARIES: [(&str, &str, &str); 5] = [
    ("original_cheshire", "", "two paths, polarization"),
    (
        "two_property_three_path",
        "",
        "three paths, two dichotomic properties",
    ),
    ("n_path", "--n", "n paths, n-1 dichotomic properties"),
    (
        "qutrit_two_property",
        "",
        "three paths, two qutrit properties",
    ),
    ("qudit", "--d", "d paths, d-1 d-level properties"),
];

fn scenario_list(format: Format) -> String {
    debug_assert!(SCENARIO_SUMMARIES.iter().map(|s| s.0).eq(SCENARIO_NAMES));
    match format {
        Format::Table => {
            let rows: Vec<Vec<String>> = SCENARIO_SUMMARIES
                .iter()
                .map(|(n, p, d)| vec![n.to_string(), p.to_string(), d.to_string()])
                .collect();
            table(&["scenario", "size", "description"], &rows)
        }
        Format::Json => {
            let list: Vec<_> = SCENARIO_SUMMARIES
                .iter()
                .map(|(n, p, d)| json!({"name": n, "size_flag": p, "description": d}))
                .collect();
            pretty(json!(list))
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = SCENARIO_SUMMARIES
                .iter()
                .map(|(n, p, d)| vec![n.to_string(), p.to_string(), d.to_string()])
                .collect();
            csv(&["name", "size_flag", "description"], &rows)
        }
    }
}

fn scenario(name: &str, n: Option<usize>, d: Option<usize>) -> Result<Scenario, Failure> {
    let size = match name {
        "n_path" | "n_path_dichotomic" => {
            if d.is_some() {
                return Err(Failure::usage(
                    "--d applies to the qudit scenario; use --n for n_path",
                ));
            }
            Some(n.ok_or_else(|| Failure::usage("scenario `n_path` needs --n"))?)
        }
        "qudit" | "qudit_chain" => {
            if n.is_some() {
                return Err(Failure::usage(
                    "--n applies to the n_path scenario; use --d for qudit",
                ));
            }
            Some(d.ok_or_else(|| Failure::usage("scenario `qudit` needs --d"))?)
        }
        _ if n.is_some() || d.is_some() => {
            return Err(Failure::usage(format!(
                "scenario `{name}` takes no size flag"
            )));
        }
        _ => None,
    };
    scenarios::by_name(name, size).map_err(|e| match e {
        Error::Config(msg) if msg.starts_with("unknown scenario") => {
            Failure::usage(format!("{msg} (known: {})", SCENARIO_NAMES.join(", ")))
        }
        other => other.into(),
    })
}

fn scenario_run(s: &Scenario, format: Format, tol: f64) -> CmdResult {
    let report = verify_with(s, tol, Strategy::default())?;
    let mut diagnostics = Vec::new();
    if report.pass {
        diagnostics.push(format!(
            "{}: {} rows match the expected values within {tol:e}",
            s.name,
            s.expected.len()
        ));
    } else {
        for m in &report.mismatches {
            diagnostics.push(format!(
                "{}: ({})_w = {} but expected {}",
                s.name,
                m.label,
                complex(m.computed),
                complex(m.expected)
            ));
        }
    }
    Ok(Outcome {
        stdout: render::weak_value_table(&report.computed, format),
        diagnostics,
        pass: report.pass,
    })
}

fn load_circuit(path: &Path) -> Result<Circuit, Failure> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default();
            let shipped = path.components().count() == 1
                && fixtures::ALL
                    .iter()
                    .any(|(n, _)| name.strip_suffix(".qcc").unwrap_or(name) == *n);
            if !shipped {
                return Err(Failure::usage(format!("{}: {e}", path.display())));
            }
            return fixtures::load(name).map_err(Failure::from);
        }
        Err(e) => return Err(Failure::usage(format!("{}: {e}", path.display()))),
    };
    parse_circuit(&text).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn expected(name: &str, circuit: &Circuit) -> Result<qcc_core::hilbert::StateVector, Failure> {
    let state = expected_state(name).map_err(|e| Failure::usage(e.to_string()))?;
    if state.space() != circuit.space().descriptor() {
        return Err(Failure::usage(format!(
            "reference state `{name}` lives on {}, the circuit on {}",
            state.space(),
            circuit.space().descriptor()
        )));
    }
    Ok(state)
}

fn circuit_verify(
    path: &Path,
    expect: Option<&str>,
    detector: Option<&str>,
    format: Format,
    tol: f64,
) -> CmdResult {
    let circuit = load_circuit(path)?;
    let target = expect.map(|name| expected(name, &circuit)).transpose()?;
    if target.is_some() && circuit.input().is_none() && detector.is_none() {
        return Err(Failure::usage(
            "circuit has no `input` line; --expect then needs --detector to name the post-selection port",
        ));
    }
    if let Some(name) = detector {
        circuit.detector(name)?;
    }

    let platform = circuit.space().platform().name();
    let mut pairs: Vec<(&str, String)> = vec![
        ("circuit", path.display().to_string()),
        ("platform", platform.to_string()),
        ("modes", circuit.space().modes().to_string()),
        ("elements", circuit.elements().len().to_string()),
    ];
    let mut doc = serde_json::Map::new();
    doc.insert("circuit".into(), json!(path.display().to_string()));
    doc.insert("platform".into(), json!(platform));
    doc.insert("modes".into(), json!(circuit.space().modes()));
    doc.insert("elements".into(), json!(circuit.elements().len()));

    let mut pass = true;
    let mut diagnostics = Vec::new();
    let mut detector_rows = Vec::new();

    if circuit.input().is_some() {
        let out = run_from_input(&circuit)?;
        pairs.push(("output norm", real(out.norm())));
        doc.insert("output_norm".into(), json!(out.norm()));
        if let Some(t) = &target {
            let f = fidelity_up_to_phase(&out, t)?;
            let ok = f >= 1.0 - tol;
            pass &= ok;
            pairs.push((
                "fidelity",
                format!("{f:.15} ({})", expect.unwrap_or_default()),
            ));
            doc.insert("expect".into(), json!(expect));
            doc.insert("fidelity".into(), json!(f));
            if !ok {
                diagnostics.push(format!("fidelity {f:.15} is below 1 - {tol:e}"));
            }
        }
        for d in detect(&circuit, &out)? {
            detector_rows.push((d.name, d.probability));
        }
    }
    for (name, p) in &detector_rows {
        pairs.push(("detector", format!("{name} p={}", real(*p))));
    }
    if !detector_rows.is_empty() {
        let list: Vec<_> = detector_rows
            .iter()
            .map(|(name, p)| json!({"name": name, "probability": p}))
            .collect();
        doc.insert("detectors".into(), json!(list));
    }

    if let Some(name) = detector {
        let post_target = if circuit.input().is_none() {
            target.as_ref()
        } else {
            None
        };
        let report = effective_postselection_projector(&circuit, name, post_target)?;
        pairs.push(("projector", format!("{name} rank {}", report.rank)));
        let mut proj = serde_json::Map::new();
        proj.insert("detector".into(), json!(name));
        proj.insert("rank".into(), json!(report.rank));
        if post_target.is_some() {
            match report.fidelity_to_target {
                Some(f) => {
                    let ok = f >= 1.0 - tol;
                    pass &= ok;
                    pairs.push((
                        "fidelity",
                        format!("{f:.15} ({})", expect.unwrap_or_default()),
                    ));
                    proj.insert("fidelity".into(), json!(f));
                    proj.insert("expect".into(), json!(expect));
                    if !ok {
                        diagnostics
                            .push(format!("projector fidelity {f:.15} is below 1 - {tol:e}"));
                    }
                }
                None => {
                    pass = false;
                    diagnostics.push(format!(
                        "detector `{name}` selects a rank-{} projector, not a single state",
                        report.rank
                    ));
                }
            }
        }
        doc.insert("projector".into(), serde_json::Value::Object(proj));
    }

    pairs.push(("result", if pass { "pass" } else { "FAIL" }.to_string()));
    doc.insert("pass".into(), json!(pass));

    let stdout = match format {
        Format::Table => key_values(&pairs),
        Format::Json => pretty(serde_json::Value::Object(doc)),
        Format::Csv => csv(
            &["key", "value"],
            &pairs
                .iter()
                .map(|(k, v)| vec![k.to_string(), v.clone()])
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Outcome {
        stdout,
        diagnostics,
        pass,
    })
}

fn pointer_sweep(
    s: &Scenario,
    observable: Option<&str>,
    g: &[f64],
    sigma: f64,
    format: Format,
) -> CmdResult {
    let rows: Vec<&(String, OperatorExpr)> = match observable {
        Some(label) => {
            let want = ascii_label(label);
            let row = s
                .observables
                .iter()
                .find(|(l, _)| ascii_label(l) == want)
                .ok_or_else(|| {
                    let known: Vec<String> = s.observables.iter().map(|(l, _)| l.clone()).collect();
                    Failure::usage(format!(
                        "scenario `{}` has no observable `{label}` (known: {})",
                        s.name,
                        known.join(", ")
                    ))
                })?;
            vec![row]
        }
        None => s.observables.iter().collect(),
    };
    let g_abs: Vec<f64> = g.iter().map(|x| x * sigma).collect();
    let meter = MeterConfig::new(sigma, g_abs.first().copied().unwrap_or(0.01 * sigma));
    let mut out = Vec::new();
    for (label, op) in rows {
        for point in convergence_sweep(&s.ensemble, op, &meter, &g_abs)? {
            out.push((label.as_str(), point.g / sigma, point.inferred, point.error));
        }
    }
    let stdout = match format {
        Format::Table => table(
            &["observable", "g/sigma", "inferred", "error"],
            &out.iter()
                .map(|(l, g, w, e)| vec![format!("({l})_w"), real(*g), complex(*w), format!("{e:.3e}")])
                .collect::<Vec<_>>(),
        ),
        Format::Json => pretty(json!(out
                .iter()
                .map(|(l, g, w, e)| {
                    json!({"observable": l, "g_over_sigma": g, "inferred": {"re": w.re, "im": w.im}, "error": e})
                })
                .collect::<Vec<_>>())),
        Format::Csv => csv(
            &["observable", "g_over_sigma", "re", "im", "error"],
            &out.iter()
                .map(|(l, g, w, e)| vec![l.to_string(), sig17(*g), sig17(w.re), sig17(w.im), sig17(*e)])
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Outcome::ok(stdout))
}

/// `Pi<k>`, `Pi<k>sx^<factor>`, their `Π`/`σ` spellings, or `identity`.
/// A numeric factor counts internal properties from 1, as in scenario labels.
fn observable(spec: &str, circuit: &Circuit) -> Result<OperatorExpr, Failure> {
    let ascii = ascii_label(spec.trim());
    if ascii == "identity" || ascii == "I" {
        return Ok(OperatorExpr::identity(circuit.space().descriptor().clone()));
    }
    let bad = || {
        Failure::usage(format!(
            "cannot read observable `{spec}`; try Pi1, Pi2sx^pol or identity"
        ))
    };
    let rest = ascii.strip_prefix("Pi").ok_or_else(bad)?;
    let digits = rest.chars().take_while(|c| c.is_ascii_digit()).count();
    let k: usize = rest[..digits].parse().map_err(|_| bad())?;
    let factor = match &rest[digits..] {
        "" => None,
        tail => Some(tail.strip_prefix("sx^").ok_or_else(bad)?),
    };
    let labels = circuit.space().platform().internal_labels();
    let factor = match factor.map(str::parse::<usize>) {
        Some(Ok(m)) => Some(*labels.get(m.wrapping_sub(1)).ok_or_else(bad)?),
        _ => factor,
    };
    path_observable(circuit.space(), k, factor).map_err(|e| Failure::usage(e.to_string()))
}

#[allow(clippy::too_many_arguments)]
fn end_to_end(
    prep: &Path,
    postsel: &Path,
    detector: &str,
    spec: &str,
    g: f64,
    sigma: f64,
    density: bool,
    format: Format,
) -> CmdResult {
    let prep = load_circuit(prep)?;
    let post = load_circuit(postsel)?;
    let op = observable(spec, &prep)?;
    let meter = MeterConfig::new(sigma, g * sigma);
    let rec = end_to_end_weak_experiment(&prep, &op, &meter, &post, detector)?;
    if density {
        return Ok(Outcome::ok(rec.density_csv()));
    }
    let stdout = match format {
        Format::Table => key_values(&[
            ("observable", spec.to_string()),
            ("g/sigma", real(g)),
            ("sigma", real(sigma)),
            ("success probability", real(rec.success_probability)),
            ("position mean", real(rec.conditional_position_mean)),
            ("momentum mean", real(rec.conditional_momentum_mean)),
            ("weak value", complex(rec.inferred_weak_value)),
        ]),
        Format::Json => format!("{}\n", rec.to_json()),
        Format::Csv => csv(
            &[
                "g",
                "sigma",
                "success_probability",
                "position_mean",
                "momentum_mean",
                "re",
                "im",
            ],
            &[vec![
                sig17(rec.g),
                sig17(rec.sigma),
                sig17(rec.success_probability),
                sig17(rec.conditional_position_mean),
                sig17(rec.conditional_momentum_mean),
                sig17(rec.inferred_weak_value.re),
                sig17(rec.inferred_weak_value.im),
            ]],
        ),
    };
    Ok(Outcome::ok(stdout))
}

fn pretty(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("plain json values always serialize");
    s.push('\n');
    s
}
