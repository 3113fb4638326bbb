use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub observed: Value,
    pub expected: Value,
    pub tolerance: f64,
}

/// Everything a subcommand prints. Serialized with sorted keys and every
/// float rounded to 12 significant digits, so output is byte-stable.
#[derive(Debug, Default)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub outputs: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub elapsed_ms: Option<u128>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), ..Default::default() }
    }

    pub fn input(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.inputs.insert(key.into(), to_value(v));
        self
    }

    pub fn output(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.outputs.insert(key.into(), to_value(v));
        self
    }

    /// `|observed - expected| <= tol`.
    pub fn check_close(&mut self, name: &str, observed: f64, expected: f64, tol: f64) -> bool {
        let pass = (observed - expected).abs() <= tol;
        self.push(name, pass, to_value(observed), to_value(expected), tol)
    }

    /// A predicate, with the quantities that decided it.
    pub fn check(&mut self, name: &str, pass: bool, observed: impl Serialize, expected: impl Serialize) -> bool {
        self.push(name, pass, to_value(observed), to_value(expected), 0.0)
    }

    fn push(&mut self, name: &str, pass: bool, observed: Value, expected: Value, tolerance: f64) -> bool {
        self.checks.push(Check { name: name.into(), pass, observed, expected, tolerance });
        pass
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        let mut top = Map::new();
        top.insert("checks".into(), to_value(&self.checks));
        top.insert("command".into(), Value::String(self.command.clone()));
        top.insert("inputs".into(), to_value(&self.inputs));
        top.insert("outputs".into(), to_value(&self.outputs));
        top.insert("passed".into(), Value::Bool(self.all_pass()));
        if let Some(ms) = self.elapsed_ms {
            top.insert("elapsed_ms".into(), Value::from(ms as u64));
        }
        canonical(Value::Object(top))
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report is valid JSON")
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or_else(|e| Value::String(format!("<unserializable: {e}>")))
}

/// 12 significant digits; non-finite values become strings.
pub fn round12(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(x.to_string());
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    Number::from_f64(r).map_or(Value::Null, Value::Number)
}

pub fn fmt12(x: f64) -> String {
    match round12(x) {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s,
        _ => "null".into(),
    }
}

/// Sorts object keys and rounds floats, recursively.
fn canonical(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let sorted: BTreeMap<String, Value> = m.into_iter().map(|(k, v)| (k, canonical(v))).collect();
            Value::Object(sorted.into_iter().collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Number(n) if n.is_f64() => round12(n.as_f64().expect("f64 number")),
        other => other,
    }
}
