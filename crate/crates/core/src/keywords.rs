//! Per-cell keywords for the notebook overview, at most five per cell, most
//! representative first.
//!
//! The heuristic ranks identifier tokens by TF-IDF with each cell as one
//! document:
//!
//! ```text
//! tf(t, d)  = count(t, d) / |d|
//! idf(t)    = ln((1 + N) / (1 + df(t))) + 1
//! ```
//!
//! Ties break alphabetically. Cells with chart output also get their axis
//! labels (column names passed as `x=`/`y=` subscripts or to
//! `xlabel`/`ylabel`) appended, up to two.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ids::CellId;
use crate::lm::{fit_to_budget, LmGateway, PromptPart, SemanticError};
use crate::notebook::{prompt_view, Notebook};
use crate::text;

pub const MAX_KEYWORDS: usize = 5;
const MAX_AXIS_LABELS: usize = 2;
/// Per-cell character budget inside keyword and topic prompts.
pub(crate) const CELL_VIEW_CHARS: usize = 1200;

const INSTRUCTION: &str = "You summarize Jupyter notebook cells for a presentation outline. \
For every cell below, list at most 5 keywords describing what its code does, \
most representative first. Answer with exactly one line per cell in the form \
`cell <index>: <keyword>; <keyword>; ...` and nothing else. \
Leave the list empty for empty cells.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordList {
    pub cell_id: CellId,
    pub keywords: Vec<String>,
}

pub type KeywordMap = BTreeMap<CellId, KeywordList>;

/// Case-insensitive dedup, empty entries dropped, capped at five.
pub fn normalize_keywords<I: IntoIterator<Item = String>>(items: I) -> Vec<String> {
    let mut seen = HashSet::new();
    items
        .into_iter()
        .map(|k| k.trim().to_string())
        .filter(|k| !k.is_empty())
        .filter(|k| seen.insert(k.to_lowercase()))
        .take(MAX_KEYWORDS)
        .collect()
}

/// TF-IDF ranking of every document's distinct terms, best first.
pub fn tfidf_ranking(docs: &[Vec<String>]) -> Vec<Vec<(String, f64)>> {
    let n = docs.len() as f64;
    let mut df: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        let distinct: HashSet<&str> = doc.iter().map(String::as_str).collect();
        for term in distinct {
            *df.entry(term).or_default() += 1;
        }
    }
    docs.iter()
        .map(|doc| {
            let mut counts: HashMap<&str, usize> = HashMap::new();
            for term in doc {
                *counts.entry(term).or_default() += 1;
            }
            let len = doc.len() as f64;
            let mut ranked: Vec<(String, f64)> = counts
                .into_iter()
                .map(|(term, count)| {
                    let idf = ((1.0 + n) / (1.0 + df[term] as f64)).ln() + 1.0;
                    (term.to_string(), count as f64 / len * idf)
                })
                .collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            ranked
        })
        .collect()
}

/// Column names used as chart axes, in source order.
pub fn axis_labels(source: &str) -> Vec<String> {
    static PATTERNS: OnceLock<[Regex; 2]> = OnceLock::new();
    let patterns = PATTERNS.get_or_init(|| {
        [
            Regex::new(r#"\b[xy]\s*=\s*[A-Za-z_][A-Za-z0-9_.]*\[\s*['"]([^'"]+)['"]\s*\]"#).unwrap(),
            Regex::new(r#"\b(?:xlabel|ylabel|set_xlabel|set_ylabel)\(\s*['"]([^'"]+)['"]"#).unwrap(),
        ]
    });
    let mut found: Vec<(usize, String)> = patterns
        .iter()
        .flat_map(|re| re.captures_iter(source).map(|c| {
            let m = c.get(1).unwrap();
            (m.start(), m.as_str().trim().to_string())
        }))
        .collect();
    found.sort();
    let mut seen = HashSet::new();
    found
        .into_iter()
        .map(|(_, label)| label)
        .filter(|l| !l.is_empty() && !l.contains([';', '\n']))
        .filter(|l| seen.insert(l.to_lowercase()))
        .collect()
}

pub fn heuristic_keywords(notebook: &Notebook) -> KeywordMap {
    let docs: Vec<Vec<String>> = notebook.cells.iter().map(|c| text::tokens(&c.source)).collect();
    let ranking = tfidf_ranking(&docs);
    notebook
        .cells
        .iter()
        .zip(ranking)
        .map(|(cell, ranked)| {
            let labels: Vec<String> = if cell.charts().next().is_some() {
                axis_labels(&cell.source).into_iter().take(MAX_AXIS_LABELS).collect()
            } else {
                Vec::new()
            };
            let lowered: HashSet<String> = labels.iter().map(|l| l.to_lowercase()).collect();
            let keep = MAX_KEYWORDS - labels.len();
            let keywords = normalize_keywords(
                ranked
                    .into_iter()
                    .map(|(term, _)| term)
                    .filter(|term| !lowered.contains(term))
                    .take(keep)
                    .chain(labels),
            );
            (cell.id.clone(), KeywordList { cell_id: cell.id.clone(), keywords })
        })
        .collect()
}

fn line_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*cell\s+(\d+)\s*:(.*)$").unwrap())
}

/// Parses `cell <index>: <kw>(; <kw>)*` lines. Cells the model skipped get
/// an empty list.
pub fn parse_keyword_response(response: &str, notebook: &Notebook) -> Result<KeywordMap, String> {
    let mut map: KeywordMap = notebook
        .cells
        .iter()
        .map(|c| (c.id.clone(), KeywordList { cell_id: c.id.clone(), keywords: Vec::new() }))
        .collect();
    for line in response.lines().filter(|l| !l.trim().is_empty()) {
        let caps = line_pattern()
            .captures(line)
            .ok_or_else(|| format!("expected `cell <index>: ...`, got {line:?}"))?;
        let index: usize = caps[1].parse().map_err(|_| format!("bad cell index in {line:?}"))?;
        let cell = notebook.by_index(index).ok_or_else(|| format!("unknown cell index {index}"))?;
        let keywords = normalize_keywords(caps[2].split(';').map(str::to_string));
        map.insert(cell.id.clone(), KeywordList { cell_id: cell.id.clone(), keywords });
    }
    Ok(map)
}

pub fn render_keyword_response(map: &KeywordMap, notebook: &Notebook) -> String {
    notebook
        .cells
        .iter()
        .map(|cell| {
            let keywords = map.get(&cell.id).map(|k| k.keywords.join("; ")).unwrap_or_default();
            format!("cell {}: {}\n", cell.index, keywords).replace(": \n", ":\n")
        })
        .collect()
}

/// Keyword lists for every cell of the notebook.
pub fn extract_keywords(notebook: &Notebook, gw: &LmGateway) -> Result<KeywordMap, SemanticError> {
    if notebook.is_empty() {
        return Ok(KeywordMap::new());
    }
    gw.semantic(
        "keywords",
        |config| {
            let parts = notebook
                .cells
                .iter()
                .map(|c| PromptPart::new(c.id.as_str(), prompt_view(c, CELL_VIEW_CHARS)))
                .collect();
            fit_to_budget(parts, INSTRUCTION, config)
        },
        |response| parse_keyword_response(response, notebook),
        || heuristic_keywords(notebook),
        |map| render_keyword_response(map, notebook),
    )
}
