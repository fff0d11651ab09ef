//! Rendering of command results as text or JSON.

use std::fmt::Write;

use serde_json::{json, Value};

use aal_core::{FiniteAlgebra, Partition, Valuation};

use crate::Format;

pub struct Report {
    pub verdict: bool,
    pub text: String,
    pub json: Value,
}

impl Report {
    pub fn new(verdict: bool) -> Self {
        Report {
            verdict,
            text: String::new(),
            json: json!({}),
        }
    }

    pub fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.json
            .as_object_mut()
            .expect("reports are JSON objects")
            .insert(key.to_string(), value);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("values serialize");
                s.push('\n');
                s
            }
        }
    }
}

/// `x` with its label when the label says something different.
pub fn element(alg: &FiniteAlgebra, x: usize) -> String {
    let label = alg.label(x);
    if label == x.to_string() {
        label
    } else {
        format!("{x} ({label})")
    }
}

pub fn valuation_text(alg: &FiniteAlgebra, v: &Valuation) -> String {
    if v.is_empty() {
        return "(no variables)".to_string();
    }
    v.iter()
        .map(|(name, &x)| format!("{name}={}", element(alg, x)))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn valuation_json(v: &Valuation) -> Value {
    json!(v)
}

/// Blocks written with the given element names.
pub fn blocks_text(p: &Partition, name: impl Fn(usize) -> String) -> String {
    let mut out = String::new();
    for (i, block) in p.blocks().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push('{');
        for (j, &x) in block.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{}", name(x));
        }
        out.push('}');
    }
    out
}

pub fn partition_json(p: &Partition) -> Value {
    json!({ "blocks": p.blocks() })
}

pub fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
