//! JSON run reports.
//!
//! `serde_json` keeps object keys sorted, and floats are written in their
//! shortest round-trip form, so parsing a report and serialising it again
//! reproduces it byte for byte. Non-finite numbers become the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use std::time::Instant;

use serde_json::{Map, Value};

pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn matrix(rows: &[Vec<f64>]) -> Value {
    Value::Array(rows.iter().map(|r| nums(r)).collect())
}

/// Command echo, payload and per-phase wall-clock timings.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub command: String,
    pub params: Map<String, Value>,
    pub results: Value,
    timings: Map<String, Value>,
    started: Instant,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            params: Map::new(),
            results: Value::Null,
            timings: Map::new(),
            started: Instant::now(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    /// Records the time since the previous phase (or the start).
    pub fn phase(&mut self, name: &str) {
        let now = Instant::now();
        self.timings.insert(name.to_string(), num(now.duration_since(self.started).as_secs_f64()));
        self.started = now;
    }

    pub fn to_value(&self) -> Value {
        let mut command = Map::new();
        command.insert("name".into(), Value::from(self.command.clone()));
        command.insert("params".into(), Value::Object(self.params.clone()));
        command.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        let mut root = Map::new();
        root.insert("command".into(), Value::Object(command));
        root.insert("results".into(), self.results.clone());
        root.insert("timings".into(), Value::Object(self.timings.clone()));
        Value::Object(root)
    }

    pub fn to_json(&self) -> String {
        render(&self.to_value())
    }
}

pub fn render(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serialising a JSON value cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_round_trip_bytes() {
        let mut r = RunReport::new("demo");
        r.param("zeta", 1);
        r.param("alpha", 0.1 + 0.2);
        r.results = serde_json::json!({"b": [1e-300, 0.04288583301311766, num(f64::INFINITY)], "a": 1.0 / 3.0});
        r.phase("total");
        let text = r.to_json();
        let parsed: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(render(&parsed), text);
        assert!(text.find("\"alpha\"").unwrap() < text.find("\"zeta\"").unwrap());
        assert!(text.contains("0.30000000000000004"));
    }
}
