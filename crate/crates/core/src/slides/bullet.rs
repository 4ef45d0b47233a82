//! Bullet and title text.
//!
//! A cell opening with a comment of two or more words is summarized by that
//! comment. Otherwise the heuristic bullet is a verb template chosen by the
//! first call in the cell that names a known operation:
//!
//! | calls                          | template                     |
//! |--------------------------------|------------------------------|
//! | `read_csv`, `load`, ...        | `Loads data from <file>`     |
//! | `plot`, `scatter`, `hist`, ... | `Plots <chart> of <a> ...`   |
//! | `fit`, `train`                 | `Trains <model> on <args>`   |
//! | `describe`, `drop`, ... (see [`VERBS`]) | verb phrase + receiver |
//! | anything else                  | `Runs <kw1> <kw2>`           |
//!
//! Concise bullets are cut to 15 words, detailed ones to 40.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;

use super::{DetailLevel, SlideError};
use crate::keywords::{axis_labels, KeywordMap};
use crate::lm::{fit_to_budget, LmGateway, PromptPart, SemanticError};
use crate::notebook::{prompt_view, CellKind, NotebookCell};
use crate::text;

const BULLET_VIEW_CHARS: usize = 2000;

const LOAD_CALLS: &[&str] = &[
    "read_csv", "read_excel", "read_json", "read_parquet", "read_table", "read_sql", "load", "load_data",
    "loadtxt", "genfromtxt", "load_dataset",
];
const PLOT_CALLS: &[&str] = &[
    "plot", "scatter", "scatterplot", "hist", "histplot", "distplot", "kdeplot", "heatmap", "boxplot", "barplot",
    "bar", "barh", "countplot", "lineplot", "pairplot", "regplot", "violinplot", "imshow", "pie",
];
const TRAIN_CALLS: &[&str] = &["fit", "train"];
/// Method calls with a fixed verb phrase; `{}` is the receiver or first
/// argument.
const VERBS: &[(&str, &str)] = &[
    ("head", "Previews the first rows of {}"),
    ("describe", "Summarizes statistics of {}"),
    ("info", "Inspects the columns of {}"),
    ("isnull", "Counts missing values in {}"),
    ("isna", "Counts missing values in {}"),
    ("fillna", "Fills missing values in {}"),
    ("dropna", "Drops missing values from {}"),
    ("drop", "Drops rows or columns from {}"),
    ("corr", "Computes correlations of {}"),
    ("corrcoef", "Computes correlations of {}"),
    ("get_dummies", "One-hot encodes {}"),
    ("fit_transform", "Transforms {}"),
    ("log", "Log-transforms {}"),
    ("log1p", "Log-transforms {}"),
    ("train_test_split", "Splits {} into training and validation sets"),
    ("predict", "Predicts with {}"),
    ("to_csv", "Writes {} to a file"),
];

pub fn word_limit(detail: DetailLevel) -> usize {
    match detail {
        DetailLevel::Concise => 15,
        DetailLevel::Detailed => 40,
    }
}

/// Keeps the first `limit` words.
pub fn cap_words(text: &str, limit: usize) -> String {
    text.split_whitespace().take(limit).collect::<Vec<_>>().join(" ")
}

fn call_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?:([A-Za-z_][A-Za-z0-9_]*)(?:\[[^\]]*\])*\.)?([A-Za-z_][A-Za-z0-9_]*)\s*\(([^()]*)").unwrap()
    })
}

fn string_literal() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"['"]([^'"]+)['"]"#).unwrap())
}

fn identifier() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Za-z_][A-Za-z0-9_]*$").unwrap())
}

struct Call<'a> {
    receiver: Option<&'a str>,
    name: &'a str,
    args: &'a str,
}

fn calls(source: &str) -> Vec<Call<'_>> {
    call_pattern()
        .captures_iter(source)
        .map(|c| Call {
            receiver: c.get(1).map(|m| m.as_str()),
            name: c.get(2).unwrap().as_str(),
            args: c.get(3).unwrap().as_str(),
        })
        .filter(|c| !text::is_stopword(c.name))
        .collect()
}

/// Tokens ranked by count, then first appearance.
fn cell_keywords(source: &str) -> Vec<String> {
    let tokens = text::tokens(source);
    let mut counts: HashMap<&str, (usize, usize)> = HashMap::new();
    for (pos, t) in tokens.iter().enumerate() {
        counts.entry(t).or_insert((0, pos)).0 += 1;
    }
    let mut ranked: Vec<(&str, (usize, usize))> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.cmp(&b.1 .1)));
    ranked.into_iter().map(|(t, _)| t.to_string()).collect()
}

fn chart_noun(call: &str) -> &'static str {
    match call {
        "scatter" | "scatterplot" | "regplot" => "a scatter plot",
        "hist" | "histplot" | "distplot" | "kdeplot" => "the distribution",
        "heatmap" | "imshow" => "a heatmap",
        "boxplot" | "violinplot" => "a box plot",
        "bar" | "barh" | "barplot" | "countplot" => "a bar chart",
        "pie" => "a pie chart",
        "pairplot" => "pairwise plots",
        _ => "a chart",
    }
}

fn join_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn arg_identifiers(args: &str) -> Vec<String> {
    args.split(',')
        .map(str::trim)
        .filter(|a| identifier().is_match(a))
        .map(str::to_string)
        .collect()
}

/// The opening comment when it has at least two words, capitalized.
fn leading_comment(source: &str) -> Option<String> {
    let line = source.lines().map(str::trim).find(|l| !l.is_empty())?;
    let comment = line.strip_prefix('#')?.trim_start_matches('#').trim();
    if comment.split_whitespace().count() < 2 {
        return None;
    }
    let mut chars = comment.chars();
    let first = chars.next()?;
    Some(first.to_uppercase().chain(chars).collect())
}

/// Receiver of a method call, else its first string or identifier argument.
fn subject(call: &Call) -> Option<String> {
    const MODULES: &[&str] = &["pd", "np", "plt", "sns", "sklearn", "math", "self"];
    call.receiver
        .filter(|r| !MODULES.contains(r))
        .map(str::to_string)
        .or_else(|| string_literal().captures(call.args).map(|c| c[1].to_string()))
        .or_else(|| arg_identifiers(call.args).into_iter().next())
}

fn core_sentence(cell: &NotebookCell, keywords: &[String]) -> String {
    if let Some(comment) = leading_comment(&cell.source) {
        return comment;
    }
    let found = calls(&cell.source);
    let first = found.iter().find(|c| {
        LOAD_CALLS.contains(&c.name) || PLOT_CALLS.contains(&c.name) || TRAIN_CALLS.contains(&c.name)
    });
    if first.is_none() {
        let verb = found.iter().find_map(|c| {
            let (_, phrase) = VERBS.iter().find(|(name, _)| *name == c.name)?;
            Some(phrase.replace("{}", &subject(c)?))
        });
        if let Some(sentence) = verb {
            return sentence;
        }
    }
    let kw = |n: usize| keywords.iter().take(n).cloned().collect::<Vec<_>>();
    match first {
        Some(call) if LOAD_CALLS.contains(&call.name) => {
            let target = string_literal()
                .captures(call.args)
                .map(|c| c[1].to_string())
                .or_else(|| keywords.first().cloned())
                .unwrap_or_else(|| "a file".into());
            format!("Loads data from {target}")
        }
        Some(call) if PLOT_CALLS.contains(&call.name) => {
            let labels = axis_labels(&cell.source);
            let noun = chart_noun(call.name);
            match labels.as_slice() {
                [a, b, ..] => format!("Plots {noun} of {a} against {b}"),
                [a] => format!("Plots {noun} of {a}"),
                [] if keywords.is_empty() => format!("Plots {noun}"),
                [] => format!("Plots {noun} of {}", join_and(&kw(2))),
            }
        }
        Some(call) => {
            let model = found
                .iter()
                .map(|c| c.name)
                .find(|n| n.chars().next().is_some_and(char::is_uppercase))
                .map(str::to_string)
                .or_else(|| keywords.first().cloned())
                .unwrap_or_else(|| "a model".into());
            let args = arg_identifiers(call.args);
            if args.is_empty() {
                format!("Trains {model}")
            } else {
                format!("Trains {model} on {}", join_and(&args))
            }
        }
        None if keywords.is_empty() => "Runs the cell".into(),
        None => format!("Runs {}", kw(2).join(" ")),
    }
}

/// Deterministic bullet for a non-empty cell.
pub fn heuristic_bullet(cell: &NotebookCell, detail: DetailLevel) -> String {
    let limit = word_limit(detail);
    if cell.kind == CellKind::Markdown {
        let line = cell.source.lines().map(|l| l.trim().trim_start_matches('#').trim()).find(|l| !l.is_empty());
        return cap_words(line.unwrap_or_default(), limit);
    }
    let keywords = cell_keywords(&cell.source);
    let mut sentence = core_sentence(cell, &keywords);
    if detail == DetailLevel::Detailed {
        let mut names: Vec<String> = Vec::new();
        for call in calls(&cell.source) {
            if !names.iter().any(|n| n == call.name) {
                names.push(call.name.to_string());
            }
        }
        names.truncate(5);
        if !names.is_empty() {
            sentence.push_str(&format!(", calling {}", join_and(&names)));
        }
        let extra: Vec<String> = keywords.iter().take(5).cloned().collect();
        if !extra.is_empty() {
            sentence.push_str(&format!(" with {}", join_and(&extra)));
        }
    }
    cap_words(&sentence, limit)
}

fn bullet_instruction(detail: DetailLevel) -> String {
    format!(
        "Summarize the notebook cell below as one bullet point for a presentation slide: \
a single sentence of at most {} words describing what the code does. \
Answer with the sentence only.",
        word_limit(detail)
    )
}

fn first_line(response: &str) -> Result<String, String> {
    response
        .lines()
        .map(|l| l.trim().trim_start_matches(['-', '*', '•']).trim().trim_matches('"').trim())
        .find(|l| !l.is_empty())
        .map(str::to_string)
        .ok_or_else(|| "empty response".to_string())
}

/// One sentence summarizing `cell`.
pub fn generate_bullet(cell: &NotebookCell, detail: DetailLevel, gw: &LmGateway) -> Result<String, SlideError> {
    if cell.source.trim().is_empty() {
        return Err(SlideError::EmptyCell(cell.id.clone()));
    }
    let instruction = bullet_instruction(detail);
    Ok(gw.semantic(
        &format!("bullet {}", cell.id),
        |config| {
            fit_to_budget(
                vec![PromptPart::new(cell.id.as_str(), prompt_view(cell, BULLET_VIEW_CHARS))],
                &instruction,
                config,
            )
        },
        first_line,
        || heuristic_bullet(cell, detail),
        |text| format!("{text}\n"),
    )?)
}

const TITLE_INSTRUCTION: &str = "Write a short slide title (at most 6 words) for a presentation \
slide built from the notebook cells below. Answer with the title only.";

/// Top keyword of the first cell, title-cased.
pub fn heuristic_title(cells: &[&NotebookCell], keywords: &KeywordMap) -> String {
    cells
        .first()
        .and_then(|c| keywords.get(&c.id))
        .and_then(|k| k.keywords.first())
        .map(|k| text::title_case(k))
        .unwrap_or_else(|| "New Slide".to_string())
}

pub fn generate_title(
    cells: &[&NotebookCell],
    keywords: &KeywordMap,
    gw: &LmGateway,
) -> Result<String, SemanticError> {
    gw.semantic(
        "title",
        |config| {
            let parts = cells
                .iter()
                .map(|c| PromptPart::new(c.id.as_str(), prompt_view(c, BULLET_VIEW_CHARS)))
                .collect();
            fit_to_budget(parts, TITLE_INSTRUCTION, config)
        },
        first_line,
        || heuristic_title(cells, keywords),
        |title| format!("{title}\n"),
    )
}
