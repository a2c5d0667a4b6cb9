//! Report container and the text rendering.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use twistfock::linalg::{CMat, C64};
use twistfock::ValidationReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    /// Flags of the twist the command ran with.
    pub validation: Option<Value>,
    pub results: Value,
    pub timings: Timings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
}

impl Report {
    /// Everything but the timings, for comparing runs.
    pub fn without_timings(&self) -> Report {
        Report { timings: Timings { total_seconds: 0.0 }, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are plain JSON")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command: {}\n", self.command);
        if let Some(v) = &self.validation {
            out.push_str("validation:\n");
            if let Value::Object(map) = v {
                for (k, flag) in map {
                    if let (Some(pass), Some(res)) = (flag.get("pass"), flag.get("residual")) {
                        let verdict = if pass.as_bool() == Some(true) { "pass" } else { "FAIL" };
                        out.push_str(&format!("  {k:<30} {verdict}  residual {}\n", num(res)));
                    }
                }
                if let Some(Value::Array(ws)) = map.get("warnings") {
                    for w in ws {
                        out.push_str(&format!("  warning: {}\n", w.as_str().unwrap_or_default()));
                    }
                }
            }
        }
        out.push_str("results:\n");
        render(&self.results, 1, &mut out);
        out.push_str(&format!("time: {:.3}s\n", self.timings.total_seconds));
        out
    }
}

fn num(v: &Value) -> String {
    match v.as_f64() {
        Some(x) => format!("{x:.3e}"),
        None => v.to_string(),
    }
}

fn render(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match x {
                    Value::Object(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render(x, depth + 1, out);
                    }
                    Value::Array(items) if items.len() > 12 => {
                        out.push_str(&format!("{pad}{k}: [{} entries]\n", items.len()));
                    }
                    _ => out.push_str(&format!("{pad}{k}: {x}\n")),
                }
            }
        }
        other => out.push_str(&format!("{pad}{other}\n")),
    }
}

pub fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn vector(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|z| complex(*z)).collect())
}

pub fn matrix(m: &CMat) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect())).collect())
}

/// `[{word, coeff}]` with 1-based words.
pub fn polynomial(terms: &[(Vec<usize>, C64)]) -> Value {
    Value::Array(terms.iter().map(|(w, c)| json!({ "word": w, "coeff": [c.re, c.im] })).collect())
}

pub fn validation(r: &ValidationReport) -> Value {
    serde_json::to_value(r).expect("validation report is plain data")
}
