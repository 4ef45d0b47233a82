//! Shared fixtures and independent oracles for the integration tests.
//!
//! Nothing here calls into the code under test except to obtain the value
//! being checked; the readers and the ranking oracle are written from the
//! file formats and formulas directly.

#![allow(dead_code)]

pub mod criteria;
pub mod ooxml;

use std::path::PathBuf;

use base64::Engine;
use serde_json::{json, Value};

pub const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(FIXTURES).join(name)
}

pub fn fixture(name: &str) -> Vec<u8> {
    std::fs::read(fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn fixture_text(name: &str) -> String {
    String::from_utf8(fixture(name)).expect("fixture is UTF-8")
}

/// One cell as a plain JSON reading of nbformat 4 sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCell {
    pub cell_type: String,
    pub source: String,
    pub execution_count: Option<i64>,
    /// Decoded `image/png` payloads of display and result outputs.
    pub pngs: Vec<Vec<u8>>,
    /// `text/html` outputs (without a PNG sibling) that contain `<table`.
    pub html_tables: usize,
}

fn multiline(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Array(lines) => lines.iter().map(|l| l.as_str().expect("string line")).collect(),
        Value::Null => String::new(),
        other => panic!("not a multiline string: {other}"),
    }
}

/// Minimal nbformat 4 reader over `serde_json::Value`. Raw cells are
/// skipped, matching the documented behaviour of the parser.
pub fn read_nbformat(bytes: &[u8]) -> Vec<ReferenceCell> {
    let doc: Value = serde_json::from_slice(bytes).expect("notebook is JSON");
    assert_eq!(doc["nbformat"], json!(4));
    doc["cells"]
        .as_array()
        .expect("cells array")
        .iter()
        .filter(|c| c["cell_type"] != "raw")
        .map(|c| {
            let mut pngs = Vec::new();
            let mut html_tables = 0;
            for out in c["outputs"].as_array().map(Vec::as_slice).unwrap_or(&[]) {
                let kind = out["output_type"].as_str().unwrap_or_default();
                if kind != "display_data" && kind != "execute_result" {
                    continue;
                }
                let data = &out["data"];
                if !data["image/png"].is_null() {
                    let b64: String = multiline(&data["image/png"]).split_whitespace().collect();
                    pngs.push(base64::engine::general_purpose::STANDARD.decode(b64).expect("base64 png"));
                } else if multiline(&data["text/html"]).contains("<table") {
                    html_tables += 1;
                }
            }
            ReferenceCell {
                cell_type: c["cell_type"].as_str().expect("cell_type").to_string(),
                source: multiline(&c["source"]),
                execution_count: c["execution_count"].as_i64(),
                pngs,
                html_tables,
            }
        })
        .collect()
}

/// Okapi BM25 (k1 = 1.2, b = 0.75, idf = ln(1 + (N - df + 0.5)/(df + 0.5)))
/// by brute force: every count is a fresh linear scan.
pub fn bm25_oracle(query: &[String], docs: &[Vec<String>]) -> Vec<f64> {
    let k1 = 1.2;
    let b = 0.75;
    let n = docs.len() as f64;
    let avgdl = docs.iter().map(|d| d.len() as f64).sum::<f64>() / n;
    let mut distinct: Vec<&String> = Vec::new();
    for t in query {
        if !distinct.contains(&t) {
            distinct.push(t);
        }
    }
    docs.iter()
        .map(|doc| {
            let mut score = 0.0;
            for term in &distinct {
                let tf = doc.iter().filter(|w| w == term).count() as f64;
                if tf == 0.0 {
                    continue;
                }
                let df = docs.iter().filter(|d| d.contains(term)).count() as f64;
                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * doc.len() as f64 / avgdl));
            }
            score
        })
        .collect()
}

/// A 1×1 PNG.
pub const PNG_1X1: &str =
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mNkYPhfDwAChwGA60e6kgAAAABJRU5ErkJggg==";

const VOCABULARY: &[&str] = &[
    "price", "area", "garage", "quality", "outlier", "scaler", "forest", "lasso", "ridge", "heatmap",
    "missing", "impute", "skew", "log", "feature", "target", "split", "fold", "score", "residual",
];

/// Deterministic synthetic notebook: `cells` cells of roughly `chars` source
/// characters each, every fifth a markdown cell, every seventh with a chart
/// and every eleventh with an HTML table.
pub fn synthetic_notebook(cells: usize, chars: usize) -> Vec<u8> {
    let cells: Vec<Value> = (0..cells)
        .map(|i| {
            let mut source = String::new();
            let mut k = i;
            while source.len() < chars {
                let word = VOCABULARY[k % VOCABULARY.len()];
                source.push_str(&format!("{word}_{i} = frame['{word}'].mean()  # step {k}\n"));
                k = (k * 7 + 3) % 1_000_003;
            }
            if i % 5 == 4 {
                return json!({"cell_type": "markdown", "metadata": {}, "source": format!("## Section {i}\n{source}")});
            }
            let mut outputs = Vec::new();
            if i % 7 == 0 {
                outputs.push(json!({"output_type": "display_data", "metadata": {}, "data": {"image/png": PNG_1X1}}));
            }
            if i % 11 == 0 {
                outputs.push(json!({
                    "output_type": "execute_result", "execution_count": i, "metadata": {},
                    "data": {"text/html": "<table><tr><th>a</th><th>b</th></tr><tr><td>1</td><td>2</td></tr></table>"}
                }));
            }
            json!({"cell_type": "code", "metadata": {}, "execution_count": i, "source": source, "outputs": outputs})
        })
        .collect();
    serde_json::to_vec(&json!({"nbformat": 4, "nbformat_minor": 5, "metadata": {}, "cells": cells})).unwrap()
}
