//! Versioned run reports, their canonical renderings and the determinism
//! hash.

use std::collections::BTreeMap;

use kuranishi::report::Report;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::scenario::Echo;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    ValidationFailed,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionsEcho {
    pub order: u32,
    pub pole_bound: Option<i64>,
    pub emit_family: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub engine_version: String,
    pub task: String,
    pub status: Status,
    pub error: Option<String>,
    pub scenario: Option<Echo>,
    pub options: OptionsEcho,
    pub sections: BTreeMap<String, Value>,
    pub verification: Report,
    pub summary: Vec<String>,
    /// Not part of the canonical content.
    pub timing_ms: u64,
    pub determinism_hash: String,
}

#[derive(Serialize)]
struct Canonical<'a> {
    schema_version: u32,
    engine_version: &'a str,
    task: &'a str,
    status: &'a Status,
    error: &'a Option<String>,
    scenario: &'a Option<Echo>,
    options: &'a OptionsEcho,
    sections: &'a BTreeMap<String, Value>,
    verification: &'a Report,
    summary: &'a [String],
}

impl RunReport {
    fn canonical(&self) -> Canonical<'_> {
        Canonical {
            schema_version: self.schema_version,
            engine_version: &self.engine_version,
            task: &self.task,
            status: &self.status,
            error: &self.error,
            scenario: &self.scenario,
            options: &self.options,
            sections: &self.sections,
            verification: &self.verification,
            summary: &self.summary,
        }
    }

    /// SHA-256 of the canonical JSON (everything but timing and the hash).
    pub fn compute_hash(&self) -> String {
        let s = serde_json::to_string(&self.canonical()).expect("serializable");
        let d = Sha256::digest(s.as_bytes());
        d.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn seal(&mut self) {
        self.determinism_hash = self.compute_hash();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Canonical text; timing is appended only on request.
    pub fn render_text(&self, timing: bool) -> String {
        let mut s = String::new();
        s.push_str(&format!("kuranishi report, schema {}, engine {}\n", self.schema_version, self.engine_version));
        s.push_str(&format!("task: {}\n", self.task));
        if let Some(e) = &self.scenario {
            if !e.name.is_empty() {
                s.push_str(&format!("scenario: {}\n", e.name));
            }
            s.push_str(&format!("curve: {}\n", e.curve));
            s.push_str(&format!("charts: {}\n", e.charts.join(", ")));
            s.push_str(&format!("rank: {}", e.rank));
            if !e.base.is_empty() {
                s.push_str(&format!(", family over {} to order {}", e.base.join(", "), e.family_order));
            }
            if e.connection {
                let poles: Vec<String> = e.poles.iter().map(|(p, k)| format!("{k}·{p}")).collect();
                s.push_str(&format!(", connection with D = {}", if poles.is_empty() { "0".to_string() } else { poles.join(" + ") }));
            }
            s.push('\n');
        }
        if let Some(e) = &self.error {
            s.push_str(&format!("error: {e}\n"));
        }
        for l in &self.summary {
            s.push_str(l);
            s.push('\n');
        }
        if !self.verification.checks.is_empty() {
            s.push_str("verification:\n");
            for l in self.verification.render().lines() {
                s.push_str("  ");
                s.push_str(l);
                s.push('\n');
            }
        }
        s.push_str(&format!("hash: {}\n", self.determinism_hash));
        if timing {
            s.push_str(&format!("time: {} ms\n", self.timing_ms));
        }
        s
    }
}

/// Prose summary of a report: dimensions, obstruction polynomials, checks
/// with failures first. Warns on a schema mismatch.
pub fn explain(json: &str) -> Result<(String, Option<String>), serde_json::Error> {
    let v: Value = serde_json::from_str(json)?;
    let version = v.get("schema_version").and_then(Value::as_u64);
    let warning = match version {
        Some(x) if x == u64::from(SCHEMA_VERSION) => None,
        Some(x) => Some(format!("report has schema version {x}, this build reads {SCHEMA_VERSION}; rendering what is recognized")),
        None => Some("report has no schema version; rendering what is recognized".to_string()),
    };
    let mut out = Vec::new();
    let task = v.get("task").and_then(Value::as_str).unwrap_or("unknown");
    let name = v.pointer("/scenario/name").and_then(Value::as_str).unwrap_or("");
    out.push(if name.is_empty() { format!("Task {task}.") } else { format!("Task {task} on scenario {name}.") });
    if let Some(e) = v.get("error").and_then(Value::as_str) {
        out.push(format!("The run failed: {e}"));
    }
    if let Some(k) = v.pointer("/sections/kuranishi") {
        let d = |key: &str| k.pointer(&format!("/dims/{key}")).and_then(Value::as_u64).unwrap_or(0);
        out.push(format!("T¹ = ⟨{}⟩, T² = ⟨{}⟩.", d("h1"), d("h2")));
        let order = k.get("order").and_then(Value::as_u64).unwrap_or(0);
        if k.get("unobstructed").and_then(Value::as_bool).unwrap_or(false) {
            out.push(format!("The deformations are unobstructed to order {order}."));
        } else if let Some(series) = k.get("series").and_then(Value::as_array) {
            for part in series {
                let deg = part.get("degree").and_then(Value::as_u64).unwrap_or(0);
                let fs: Vec<&str> = part.get("f").and_then(Value::as_array).map(|a| a.iter().filter_map(Value::as_str).collect()).unwrap_or_default();
                if fs.iter().any(|f| *f != "0") {
                    out.push(format!("f{} = ({})", sub(deg), fs.join(", ")));
                }
            }
        }
    } else if let Some(h) = v.pointer("/sections/hyper/dims") {
        let d = |key: &str| h.get(key).and_then(Value::as_u64).unwrap_or(0);
        out.push(format!("ℍ⁰, ℍ¹, ℍ² have dimensions {}, {}, {}; ℍ¹ splits as W′ {} + W″ {}.", d("h0"), d("h1"), d("h2"), d("w_prime"), d("w_second")));
    }
    if v.get("sections").and_then(Value::as_object).map(|m| !m.contains_key("kuranishi")).unwrap_or(true) {
        if let Some(s) = v.get("summary").and_then(Value::as_array) {
            for l in s.iter().filter_map(Value::as_str) {
                out.push(l.to_string());
            }
        }
    }
    if let Some(checks) = v.pointer("/verification/checks").and_then(Value::as_array) {
        let failed: Vec<&Value> = checks.iter().filter(|c| !c.get("passed").and_then(Value::as_bool).unwrap_or(false)).collect();
        let line = |c: &Value| {
            let n = c.get("name").and_then(Value::as_str).unwrap_or("?");
            match c.get("detail").and_then(Value::as_str) {
                Some(d) if !d.is_empty() => format!("{n} ({d})"),
                _ => n.to_string(),
            }
        };
        if failed.is_empty() {
            out.push(format!("All {} checks pass.", checks.len()));
        } else {
            out.push(format!("{} of {} checks fail:", failed.len(), checks.len()));
            for c in &failed {
                out.push(format!("  FAIL {}", line(c)));
            }
            out.push("Passing checks:".into());
        }
        if !failed.is_empty() {
            for c in checks.iter().filter(|c| c.get("passed").and_then(Value::as_bool).unwrap_or(false)) {
                out.push(format!("  pass {}", line(c)));
            }
        }
    }
    Ok((out.join("\n"), warning))
}

fn sub(n: u64) -> String {
    n.to_string().chars().map(|c| char::from_u32(0x2080 + c.to_digit(10).unwrap_or(0)).unwrap_or(c)).collect()
}
