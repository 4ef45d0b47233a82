//! Outline units to relevant cells.
//!
//! The offline ranking is Okapi BM25 with each cell as one document:
//!
//! ```text
//! idf(t)      = ln(1 + (N - df(t) + 0.5) / (df(t) + 0.5))
//! score(q, d) = Σ_{t ∈ q} idf(t) · tf(t,d)·(k1 + 1) / (tf(t,d) + k1·(1 - b + b·|d|/avgdl))
//! ```
//!
//! with `k1 = 1.2`, `b = 0.75`, summed over the distinct stemmed query terms.
//! Raw scores map to `[0, 1)` through `s / (s + 1)`; zero scores are dropped.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{CellId, ItemId};
use crate::keywords::CELL_VIEW_CHARS;
use crate::lm::{fit_to_budget, LmGateway, PromptPart, SemanticError};
use crate::notebook::{prompt_view, CellKind, Notebook, NotebookCell};
use crate::outline::OutlineTree;
use crate::text;

pub const K1: f64 = 1.2;
pub const B: f64 = 0.75;
/// Cells kept per unit.
pub const MAX_RESULTS: usize = 5;

const INSTRUCTION: &str = "You match one item of a presentation outline to the notebook cells \
that best support it. The first block names the outline item and its parent topic; \
the following blocks are notebook cells. Pick at most 5 relevant cells and rate each \
from 0 to 1. Answer with one line per picked cell in the form `cell <index>: <score>`, \
most relevant first, and nothing else.";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetrievalError {
    #[error("query has no searchable terms")]
    EmptyQuery,
}

/// A childless outline item with its parent topic as context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlineUnit {
    pub item_id: ItemId,
    pub item_text: String,
    /// Parent topic text; empty for top-level items.
    pub context_text: String,
}

impl OutlineUnit {
    pub fn query(&self) -> String {
        if self.context_text.is_empty() {
            self.item_text.clone()
        } else {
            format!("{} {}", self.context_text, self.item_text)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCell {
    pub cell_id: CellId,
    pub score: f64,
}

/// One unit per childless item, depth-first. Hidden items are included.
pub fn flatten_outline(outline: &OutlineTree) -> Vec<OutlineUnit> {
    outline
        .leaves()
        .map(|item| OutlineUnit {
            item_id: item.id.clone(),
            item_text: item.text.clone(),
            context_text: item
                .parent
                .as_ref()
                .and_then(|p| outline.get(p))
                .map(|p| p.text.clone())
                .unwrap_or_default(),
        })
        .collect()
}

pub fn normalize_score(raw: f64) -> f64 {
    raw / (raw + 1.0)
}

/// Raw BM25 score of every document for the distinct terms of `query`.
pub fn bm25_scores(query: &[String], docs: &[Vec<String>]) -> Vec<f64> {
    let n = docs.len() as f64;
    if docs.is_empty() {
        return Vec::new();
    }
    let total: usize = docs.iter().map(Vec::len).sum();
    let avgdl = total as f64 / n;
    let mut df: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        for term in doc.iter().map(String::as_str).collect::<HashSet<_>>() {
            *df.entry(term).or_default() += 1;
        }
    }
    let mut terms: Vec<&str> = query.iter().map(String::as_str).collect();
    terms.sort_unstable();
    terms.dedup();
    docs.iter()
        .map(|doc| {
            if avgdl == 0.0 {
                return 0.0;
            }
            let mut tf: HashMap<&str, usize> = HashMap::new();
            for term in doc {
                *tf.entry(term).or_default() += 1;
            }
            let norm = K1 * (1.0 - B + B * doc.len() as f64 / avgdl);
            terms
                .iter()
                .filter_map(|t| {
                    let f = *tf.get(t)? as f64;
                    let d = df[t] as f64;
                    let idf = (1.0 + (n - d + 0.5) / (d + 0.5)).ln();
                    Some(idf * f * (K1 + 1.0) / (f + norm))
                })
                .sum()
        })
        .collect()
}

/// Sorts by score descending, then notebook index ascending.
fn sort_ranked(ranked: &mut [(usize, ScoredCell)]) {
    ranked.sort_by(|a, b| b.1.score.total_cmp(&a.1.score).then(a.0.cmp(&b.0)));
}

fn eligible(cell: &NotebookCell, include_markdown: bool) -> bool {
    include_markdown || cell.kind != CellKind::Markdown
}

/// BM25 over the eligible cells, all non-zero results in rank order.
pub fn lexical_rank_filtered(
    query: &str,
    notebook: &Notebook,
    include_markdown: bool,
) -> Result<Vec<ScoredCell>, RetrievalError> {
    let terms = text::index_terms(query);
    if terms.is_empty() {
        return Err(RetrievalError::EmptyQuery);
    }
    let cells: Vec<&NotebookCell> = notebook.cells.iter().filter(|c| eligible(c, include_markdown)).collect();
    let docs: Vec<Vec<String>> = cells.iter().map(|c| text::index_terms(&c.source)).collect();
    let mut ranked: Vec<(usize, ScoredCell)> = cells
        .iter()
        .zip(bm25_scores(&terms, &docs))
        .filter(|(_, raw)| *raw > 0.0)
        .map(|(cell, raw)| (cell.index, ScoredCell { cell_id: cell.id.clone(), score: normalize_score(raw) }))
        .collect();
    sort_ranked(&mut ranked);
    Ok(ranked.into_iter().map(|(_, s)| s).collect())
}

/// BM25 over every cell.
pub fn lexical_rank(query: &str, notebook: &Notebook) -> Result<Vec<ScoredCell>, RetrievalError> {
    lexical_rank_filtered(query, notebook, true)
}

fn heuristic_retrieval(unit: &OutlineUnit, notebook: &Notebook, include_markdown: bool) -> Vec<ScoredCell> {
    match lexical_rank_filtered(&unit.query(), notebook, include_markdown) {
        Ok(mut ranked) => {
            ranked.truncate(MAX_RESULTS);
            ranked
        }
        Err(RetrievalError::EmptyQuery) => Vec::new(),
    }
}

fn line_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*cell\s+(\d+)\s*:\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*$").unwrap())
}

/// Parses `cell <index>: <score>` lines, clamping scores to `[0, 1]`.
pub fn parse_retrieval_response(response: &str, notebook: &Notebook) -> Result<Vec<ScoredCell>, String> {
    let mut seen = HashSet::new();
    let mut ranked = Vec::new();
    for line in response.lines().filter(|l| !l.trim().is_empty()) {
        let caps = line_pattern()
            .captures(line)
            .ok_or_else(|| format!("expected `cell <index>: <score>`, got {line:?}"))?;
        let index: usize = caps[1].parse().map_err(|_| format!("bad cell index in {line:?}"))?;
        let score: f64 = caps[2].parse().map_err(|_| format!("bad score in {line:?}"))?;
        let cell = notebook.by_index(index).ok_or_else(|| format!("unknown cell index {index}"))?;
        if !seen.insert(index) {
            continue;
        }
        let score = score.clamp(0.0, 1.0);
        if score > 0.0 {
            ranked.push((index, ScoredCell { cell_id: cell.id.clone(), score }));
        }
    }
    sort_ranked(&mut ranked);
    ranked.truncate(MAX_RESULTS);
    Ok(ranked.into_iter().map(|(_, s)| s).collect())
}

pub fn render_retrieval_response(scored: &[ScoredCell], notebook: &Notebook) -> String {
    scored
        .iter()
        .filter_map(|s| notebook.index_of(&s.cell_id).map(|i| format!("cell {i}: {}\n", s.score)))
        .collect()
}

/// At most five cells relevant to `unit`, best first. An empty result is a
/// valid outcome.
pub fn retrieve_cells(
    unit: &OutlineUnit,
    notebook: &Notebook,
    gw: &LmGateway,
    include_markdown: bool,
) -> Result<Vec<ScoredCell>, SemanticError> {
    if notebook.is_empty() {
        return Ok(Vec::new());
    }
    gw.semantic(
        &format!("retrieval {}", unit.item_text),
        |config| {
            let mut parts = vec![PromptPart::new(
                "unit",
                format!("outline item: {}\nparent topic: {}", unit.item_text, unit.context_text),
            )];
            parts.extend(
                notebook
                    .cells
                    .iter()
                    .filter(|c| eligible(c, include_markdown))
                    .map(|c| PromptPart::new(c.id.as_str(), prompt_view(c, CELL_VIEW_CHARS))),
            );
            fit_to_budget(parts, INSTRUCTION, config)
        },
        |response| parse_retrieval_response(response, notebook),
        || heuristic_retrieval(unit, notebook, include_markdown),
        |scored| render_retrieval_response(scored, notebook),
    )
}
