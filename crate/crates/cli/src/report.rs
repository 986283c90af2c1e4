//! Reports are JSON value trees with sorted keys. The same tree renders as
//! pretty JSON or as indented `key: value` text.

use loctraj_core::algebra::{AElement, CPElement};
use loctraj_core::dynamics::DynSystem;
use loctraj_core::CMatrix;
use serde_json::{json, Map, Value};

use crate::format::{digest, matrix_rows};

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    root: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, arguments: Value) -> Self {
        let mut root = Map::new();
        root.insert("command".into(), json!(command));
        root.insert("arguments".into(), arguments);
        Self { root }
    }

    pub fn set(&mut self, key: &str, value: Value) -> &mut Self {
        self.root.insert(key.into(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.root.get(key)
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        let notes = self.root.entry("notes").or_insert_with(|| json!([]));
        notes.as_array_mut().expect("notes is an array").push(json!(text.into()));
        self
    }

    pub fn value(&self) -> Value {
        Value::Object(self.root.clone())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.value()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        render_object(&self.root, 0, &mut out);
        out
    }
}

fn is_inline(v: &Value) -> bool {
    match v {
        Value::Object(m) => m.is_empty(),
        Value::Array(items) => items.iter().all(|i| !matches!(i, Value::Object(_) | Value::String(_))),
        _ => true,
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => serde_json::to_string(other).expect("value serializes"),
    }
}

fn render_object(map: &Map<String, Value>, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    for (k, v) in map {
        if is_inline(v) {
            out.push_str(&format!("{pad}{k}: {}\n", inline(v)));
        } else {
            out.push_str(&format!("{pad}{k}:\n"));
            render_nested(v, depth + 1, out);
        }
    }
}

fn render_nested(v: &Value, depth: usize, out: &mut String) {
    match v {
        Value::Object(m) => render_object(m, depth, out),
        Value::Array(items) => {
            let pad = "  ".repeat(depth);
            for item in items {
                match item {
                    Value::Object(m) => {
                        out.push_str(&format!("{pad}-\n"));
                        render_object(m, depth + 1, out);
                    }
                    other => out.push_str(&format!("{pad}- {}\n", inline(other))),
                }
            }
        }
        other => out.push_str(&format!("{}{}\n", "  ".repeat(depth), inline(other))),
    }
}

/// JSON number, or `null` for non-finite values.
pub fn num(x: f64) -> Value {
    json!(x)
}

/// Rows of `[re, im]` pairs, with `-0.0` printed as `0.0`.
pub fn matrix(m: &CMatrix) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = matrix_rows(m)
        .into_iter()
        .map(|r| r.into_iter().map(|[re, im]| [re + 0.0, im + 0.0]).collect())
        .collect();
    json!(rows)
}

/// Nonzero fiber blocks of an element of `A`.
pub fn a_element(a: &AElement) -> Value {
    let blocks: Vec<Value> = a
        .blocks()
        .iter()
        .enumerate()
        .filter(|(_, b)| !b.is_zero())
        .map(|(x, b)| json!({"x": x, "matrix": matrix(b)}))
        .collect();
    json!(blocks)
}

/// Coefficient dump `[{g, x, matrix}]` over the nonzero fiber blocks.
pub fn cp_element(f: &CPElement) -> Value {
    let mut terms = Vec::new();
    for (g, a) in f.coeffs().iter().enumerate() {
        for (x, b) in a.blocks().iter().enumerate() {
            if !b.is_zero() {
                terms.push(json!({"g": g, "x": x, "matrix": matrix(b)}));
            }
        }
    }
    json!(terms)
}

pub fn system_summary(system: &DynSystem) -> Value {
    let orbits = loctraj_core::dynamics::orbits(system).orbits;
    json!({
        "digest": digest(system.raw()),
        "group_order": system.group().order(),
        "points": system.points(),
        "fiber_dim": system.fiber_dim(),
        "blocks": system.blocks(),
        "orbits": orbits,
    })
}
