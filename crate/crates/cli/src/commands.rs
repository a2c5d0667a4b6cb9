//! Command dispatch.

use serde_json::{json, Value};
use twistfock::conjugate::{conjugate_variables, dq_wick, potential};
use twistfock::hilbert::{classify_factor_type, noninjectivity_criterion, SpectrumInput};
use twistfock::linalg::{word_tensor, C64};
use twistfock::wick::{index_to_word, wick_polynomial};
use twistfock::Model;

use crate::config::{complex, one_based, RunConfig};
use crate::report::{self, Report, Timings};
use crate::CliError;

pub const COMMANDS: [&str; 10] =
    ["validate", "gram", "wick", "moments", "dq", "conjugate", "fisher", "type", "noninjectivity", "transport"];

/// Most words `moments` lists when no word is given.
const MOMENT_LISTING_CAP: usize = 4096;

pub struct Outcome {
    pub report: Report,
    /// Flags failed: exit code 2.
    pub rejected: bool,
}

pub fn run(command: &str, cfg: &RunConfig, force: bool) -> Result<Outcome, CliError> {
    if !COMMANDS.contains(&command) {
        return Err(CliError::UnknownCommand(command.to_string()));
    }
    cfg.check()?;
    let start = std::time::Instant::now();
    let model = cfg.model()?;
    let flags = model.twist.report().expect("config models are validated").clone();
    let inputs = serde_json::to_value(cfg).expect("config is plain data");
    let (results, rejected) = if command == "validate" {
        (json!({ "all_pass": flags.all_pass(), "structural_pass": flags.structural_pass() }), !flags.all_pass())
    } else if !flags.structural_pass() && !force {
        let why = "braided, crossing_symmetric and compatible must all pass (use --force to override)";
        (json!({ "refused": why }), true)
    } else {
        (dispatch(command, cfg, &model).map_err(|e| e.context(command))?, false)
    };
    let report = Report {
        command: command.to_string(),
        inputs,
        validation: Some(report::validation(&flags)),
        results,
        timings: Timings { total_seconds: start.elapsed().as_secs_f64() },
    };
    Ok(Outcome { report, rejected })
}

type Lib<T> = twistfock::Result<T>;

fn dispatch(command: &str, cfg: &RunConfig, model: &Model) -> Result<Value, CliError> {
    let lib = |r: Lib<Value>| r.map_err(|e| CliError::library(command, e));
    match command {
        "gram" => lib(gram(cfg, model)),
        "wick" => {
            let (xi, n) = tensor_input(cfg, model)?;
            lib(wick_polynomial(model, &xi, n).map(|p| {
                json!({ "degree": n, "terms": report::polynomial(&p.to_one_based()), "display": p.to_string() })
            }))
        }
        "moments" => moments(cfg, model),
        "dq" => {
            let (xi, n) = tensor_input(cfg, model)?;
            let i = generator_index(cfg, model)?;
            lib(dq_wick(model, &xi, n, i).map(|t| {
                let blocks: Vec<Value> = t
                    .blocks()
                    .iter()
                    .map(|(&(l, r), m)| json!({ "left_level": l, "right_level": r, "coefficients": report::matrix(m) }))
                    .collect();
                json!({ "index": i + 1, "degree": n, "vacuum_component": report::complex(t.vacuum_component()), "blocks": blocks })
            }))
        }
        "conjugate" => lib(conjugate(cfg, model)),
        "fisher" => lib(conjugate_variables(model, cfg.numerics.series_order).map(|r| {
            json!({
                "series_order": r.truncation,
                "fisher_value": r.fisher_value,
                "fisher_error_interval": [r.fisher_error_interval.0, r.fisher_error_interval.1],
                "tail_bound": r.tail_bound,
            })
        })),
        "type" => {
            let tol = cfg.numerics.tolerance;
            let input = match (&cfg.input.exact, &cfg.input.spectrum) {
                (Some(e), _) => SpectrumInput::Exact(e.clone()),
                (None, Some(s)) => SpectrumInput::Numerical(s.clone()),
                (None, None) => SpectrumInput::Numerical(model.subspace.spectrum().to_vec()),
            };
            let t = classify_factor_type(&input, tol, cfg.numerics.denominator_bound)
                .map_err(|e| CliError::library(command, e))?;
            Ok(json!({ "factor_type": t }))
        }
        "noninjectivity" => {
            let spectrum = cfg.input.spectrum.clone().unwrap_or_else(|| model.subspace.spectrum().to_vec());
            let q = cfg.input.q.unwrap_or_else(|| model.twist.q());
            let v = noninjectivity_criterion(&spectrum, q).map_err(|e| CliError::library(command, e))?;
            Ok(json!({ "q": q, "criterion": v }))
        }
        "transport" => {
            let n = &cfg.numerics;
            lib(potential(model, n.series_order, n.r, n.c_r).map(|p| {
                let mut v = serde_json::to_value(&p).expect("plain data");
                v["v"] = report::polynomial(&p.v);
                v["w"] = report::polynomial(&p.w);
                if p.threshold.is_none() {
                    v["note"] = json!("no C_R given; regime verdict omitted");
                }
                v
            }))
        }
        _ => unreachable!("checked against COMMANDS"),
    }
}

fn gram(cfg: &RunConfig, model: &Model) -> Lib<Value> {
    let h = &model.subspace;
    let mut levels = Vec::new();
    for n in 0..=cfg.numerics.truncation {
        let min = model.fock.min_eigenvalue(n)?;
        levels.push(json!({
            "level": n,
            "dimension": model.dim().pow(n as u32),
            "min_eigenvalue": min,
            "inverse_norm": 1.0 / min,
        }));
    }
    Ok(json!({
        "dimension": h.dim(),
        "spectrum": h.spectrum(),
        "s_norm": h.s_norm(),
        "basis_gram": report::matrix(&h.gram()),
        "pairing": report::matrix(h.pairing()),
        "twist_norm": model.twist.q(),
        "levels": levels,
    }))
}

fn conjugate(cfg: &RunConfig, model: &Model) -> Lib<Value> {
    let r = conjugate_variables(model, cfg.numerics.series_order)?;
    let per_index: Vec<Value> = (0..model.dim())
        .map(|i| {
            let levels: serde_json::Map<String, Value> = (0..=r.truncation)
                .map(|n| (format!("{}", 2 * n + 1), report::vector(r.xi[i].level(2 * n + 1).as_slice())))
                .collect();
            json!({
                "index": i + 1,
                "level_norms": r.level_norms[i],
                "tail_bound": r.tail_bounds[i],
                "tail_bound_sharp": r.tail_bounds_sharp[i],
                "levels": levels,
            })
        })
        .collect();
    Ok(json!({
        "series_order": r.truncation,
        "xi": per_index,
        "tail_bound": r.tail_bound,
        "fisher_value": r.fisher_value,
        "fisher_error_interval": [r.fisher_error_interval.0, r.fisher_error_interval.1],
    }))
}

fn moments(cfg: &RunConfig, model: &Model) -> Result<Value, CliError> {
    let d = model.dim();
    let words: Vec<Vec<usize>> = match &cfg.input.word {
        Some(w) => vec![one_based(w, d, "input.word")?],
        None => {
            let top = cfg.numerics.truncation;
            let total: usize = (1..=top).map(|n| d.saturating_pow(n as u32)).sum();
            if total > MOMENT_LISTING_CAP {
                return Err(CliError::ConfigParse(format!(
                    "moments: {total} words up to length {top}; give input.word or lower --truncation"
                )));
            }
            (1..=top).flat_map(|n| (0..d.pow(n as u32)).map(move |k| index_to_word(k, d, n))).collect()
        }
    };
    let mut out = Vec::with_capacity(words.len());
    for w in words {
        let trunc = cfg.numerics.truncation.max(w.len());
        let m = model.fock.vacuum_moment(&w, trunc).map_err(|e| CliError::library("moments", e))?;
        let display: Vec<usize> = w.iter().map(|i| i + 1).collect();
        out.push(json!({ "word": display, "moment": report::complex(m) }));
    }
    Ok(json!({ "moments": out }))
}

/// `input.tensor` on `input.degree` slots, or the basis tensor `e_w` of `input.word`.
fn tensor_input(cfg: &RunConfig, model: &Model) -> Result<(Vec<C64>, usize), CliError> {
    let d = model.dim();
    match (&cfg.input.tensor, &cfg.input.word) {
        (Some(t), _) => {
            let n = cfg.input.degree.ok_or_else(|| CliError::ConfigParse("input.tensor needs input.degree".into()))?;
            if Some(t.len()) != d.checked_pow(n as u32) {
                return Err(CliError::ConfigParse(format!("input.tensor must have {d}^{n} entries")));
            }
            Ok((t.iter().map(complex).collect(), n))
        }
        (None, Some(w)) => {
            let w = one_based(w, d, "input.word")?;
            Ok((word_tensor(model.subspace.basis(), &w), w.len()))
        }
        (None, None) => Err(CliError::ConfigParse("give input.word or input.tensor".into())),
    }
}

fn generator_index(cfg: &RunConfig, model: &Model) -> Result<usize, CliError> {
    let i = cfg.input.index.ok_or_else(|| CliError::ConfigParse("dq needs input.index".into()))?;
    Ok(one_based(&[i], model.dim(), "input.index")?[0])
}
