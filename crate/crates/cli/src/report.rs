//! Consolidated JSON report: sorted keys, floats cut to 12 significant
//! digits. Entry values built with [`float`] carry non-finite numbers as
//! strings; inside serialized sections they become null.

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported for information; never fails the run.
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    pub module: &'static str,
    pub quantity: String,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Default)]
pub struct Report {
    pub entries: Vec<Entry>,
    pub sections: Map<String, Value>,
}

impl Report {
    pub fn push(&mut self, module: &'static str, quantity: impl Into<String>, value: impl Serialize, tolerance: Option<f64>, pass: Option<bool>) {
        let verdict = match pass {
            None => Verdict::Info,
            Some(true) => Verdict::Pass,
            Some(false) => Verdict::Fail,
        };
        self.entries.push(Entry {
            module,
            quantity: quantity.into(),
            value: to_value(&value),
            tolerance,
            verdict,
        });
    }

    pub fn section(&mut self, key: &str, value: impl Serialize) {
        self.sections.insert(key.to_string(), to_value(&value));
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.verdict != Verdict::Fail)
    }

    pub fn render(&self, command: &str, name: &str, provenance: Option<&str>, config_text: &str) -> String {
        let mut root = Map::new();
        root.insert("schema".into(), Value::from(SCHEMA));
        root.insert("tool".into(), Value::from(env!("CARGO_PKG_NAME")));
        root.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        root.insert("command".into(), Value::from(command));
        root.insert("fixture".into(), Value::from(name));
        if let Some(p) = provenance {
            root.insert("provenance".into(), Value::from(p));
        }
        root.insert("config_hash".into(), Value::from(config_hash(config_text)));
        root.insert("entries".into(), to_value(&self.entries));
        for (k, v) in &self.sections {
            root.insert(k.clone(), v.clone());
        }
        root.insert("verdict".into(), Value::from(if self.passed() { "pass" } else { "fail" }));
        let mut out = serde_json::to_string_pretty(&round_floats(Value::Object(root))).expect("report serializes");
        out.push('\n');
        out
    }
}

pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn to_value<T: Serialize + ?Sized>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

pub fn float(x: f64) -> Value {
    if x.is_nan() {
        Value::from("nan")
    } else if x.is_infinite() {
        Value::from(if x > 0.0 { "inf" } else { "-inf" })
    } else {
        let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
        Value::from(r)
    }
}

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => float(n.as_f64().unwrap()),
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(float(2.0 / 3.0), Value::from(0.666666666667));
        assert_eq!(float(f64::INFINITY), Value::from("inf"));
        assert_eq!(float(-0.0), Value::from(-0.0));
    }

    #[test]
    fn non_finite_values_become_strings() {
        let mut r = Report::default();
        r.push("m", "q", float(f64::NAN), None, None);
        r.push("m", "raw", f64::NAN, None, None);
        let text = r.render("analyze", "x", None, "");
        assert!(text.contains("\"value\": \"nan\""));
        assert!(text.contains("\"value\": null"));
    }

    #[test]
    fn verdict_follows_entries() {
        let mut r = Report::default();
        r.push("m", "a", 1.0, Some(0.1), Some(true));
        assert!(r.passed());
        r.push("m", "b", 1.0, Some(0.1), Some(false));
        assert!(!r.passed());
        assert!(r.render("analyze", "x", None, "{}").contains("\"verdict\": \"fail\""));
    }
}
