//! Topic candidates and on-request recommendations for the next outline item.
//!
//! Candidates are extracted once per notebook. Recommendations are computed
//! only when asked for, against the current outline context, and never
//! repeat an item already in that context unless `allow_duplicates` is set.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::ItemId;
use crate::keywords::{tfidf_ranking, CELL_VIEW_CHARS};
use crate::lm::{fit_to_budget, LmGateway, PromptPart, SemanticError};
use crate::notebook::{prompt_view, Notebook};
use crate::outline::{OutlineLevel, OutlineTree};
use crate::text;

pub const MAX_RECOMMENDATIONS: usize = 10;
const MAX_SUBTOPICS: usize = 4;

const EXTRACT_INSTRUCTION: &str = "You plan a presentation about a Jupyter notebook. \
Read the cells below and list the topics the presentation could cover, each followed by \
its sub-topics. Answer with lines `topic: <title>` and `sub: <title>`, every `sub:` line \
belonging to the closest `topic:` line above it, and nothing else.";

const RECOMMEND_INSTRUCTION: &str = "You help a user write a presentation outline. \
The first block lists the outline items at the level being edited. The second block \
lists candidate topics. Rank the 10 candidates that best continue the outline, one \
candidate per line, best first, copied verbatim, and nothing else.";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopicError {
    #[error("unknown outline item {0}")]
    UnknownItem(ItemId),
    #[error(transparent)]
    Semantic(#[from] SemanticError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicCandidate {
    pub title: String,
    #[serde(default)]
    pub subtopics: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicCandidateSet {
    pub topics: Vec<TopicCandidate>,
}

impl TopicCandidateSet {
    /// Merges case-insensitive duplicate titles, keeping the first spelling,
    /// and drops empty titles.
    pub fn from_topics(topics: Vec<TopicCandidate>) -> Self {
        let mut merged: Vec<TopicCandidate> = Vec::new();
        let mut by_key: HashMap<String, usize> = HashMap::new();
        for topic in topics {
            let title = topic.title.trim().to_string();
            if title.is_empty() {
                continue;
            }
            let slot = *by_key.entry(title.to_lowercase()).or_insert_with(|| {
                merged.push(TopicCandidate { title: title.clone(), subtopics: Vec::new() });
                merged.len() - 1
            });
            let target = &mut merged[slot];
            for sub in topic.subtopics {
                let sub = sub.trim().to_string();
                let fresh = !sub.is_empty()
                    && !sub.eq_ignore_ascii_case(&target.title)
                    && !target.subtopics.iter().any(|s| s.eq_ignore_ascii_case(&sub));
                if fresh {
                    target.subtopics.push(sub);
                }
            }
        }
        Self { topics: merged }
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    /// Titles then sub-topics, deduplicated case-insensitively.
    pub fn flat(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.topics
            .iter()
            .map(|t| &t.title)
            .chain(self.topics.iter().flat_map(|t| &t.subtopics))
            .filter(|s| seen.insert(s.to_lowercase()))
            .cloned()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendationContext {
    pub items: Vec<String>,
    pub level: OutlineLevel,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendOptions {
    /// Keep candidates that already appear in the context.
    pub allow_duplicates: bool,
}

/// Clusters cells by their top TF-IDF term; each cluster becomes a topic
/// titled by its two strongest terms.
pub fn heuristic_candidates(notebook: &Notebook) -> TopicCandidateSet {
    let docs: Vec<Vec<String>> = notebook.cells.iter().map(|c| text::tokens(&c.source)).collect();
    let ranking = tfidf_ranking(&docs);
    type Ranked = [(String, f64)];
    // (head term, ranked terms of each member cell)
    let mut clusters: Vec<(String, Vec<&Ranked>)> = Vec::new();
    for ranked in &ranking {
        let Some((head, _)) = ranked.first() else { continue };
        match clusters.iter_mut().find(|(k, _)| k == head) {
            Some((_, members)) => members.push(ranked),
            None => clusters.push((head.clone(), vec![ranked])),
        }
    }
    let topics = clusters
        .into_iter()
        .map(|(head, members)| {
            let mut weights: HashMap<&str, f64> = HashMap::new();
            for ranked in &members {
                for (term, w) in ranked.iter().skip(1) {
                    if term != &head {
                        *weights.entry(term).or_default() += w;
                    }
                }
            }
            let second = weights
                .into_iter()
                .max_by(|a, b| a.1.total_cmp(&b.1).then_with(|| b.0.cmp(a.0)))
                .map(|(t, _)| t.to_string());
            let title = match &second {
                Some(s) => text::title_case(&format!("{head} {s}")),
                None => text::title_case(&head),
            };
            let subtopics = members
                .iter()
                .filter_map(|ranked| {
                    let terms: Vec<&str> = ranked
                        .iter()
                        .map(|(t, _)| t.as_str())
                        .filter(|t| *t != head && Some(*t) != second.as_deref())
                        .take(2)
                        .collect();
                    (!terms.is_empty()).then(|| text::title_case(&terms.join(" ")))
                })
                .take(MAX_SUBTOPICS)
                .collect();
            TopicCandidate { title, subtopics }
        })
        .collect();
    TopicCandidateSet::from_topics(topics)
}

pub fn parse_candidates_response(response: &str) -> Result<TopicCandidateSet, String> {
    let mut topics: Vec<TopicCandidate> = Vec::new();
    for line in response.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(title) = line.strip_prefix("topic:") {
            topics.push(TopicCandidate { title: title.trim().to_string(), subtopics: Vec::new() });
        } else if let Some(sub) = line.strip_prefix("sub:") {
            let topic = topics.last_mut().ok_or_else(|| format!("`sub:` before any `topic:` in {line:?}"))?;
            topic.subtopics.push(sub.trim().to_string());
        } else {
            return Err(format!("expected `topic:` or `sub:`, got {line:?}"));
        }
    }
    Ok(TopicCandidateSet::from_topics(topics))
}

pub fn render_candidates_response(set: &TopicCandidateSet) -> String {
    let mut out = String::new();
    for topic in &set.topics {
        out.push_str(&format!("topic: {}\n", topic.title));
        for sub in &topic.subtopics {
            out.push_str(&format!("sub: {sub}\n"));
        }
    }
    out
}

pub fn extract_topic_candidates(notebook: &Notebook, gw: &LmGateway) -> Result<TopicCandidateSet, SemanticError> {
    if notebook.is_empty() {
        return Ok(TopicCandidateSet::default());
    }
    gw.semantic(
        "topics",
        |config| {
            let parts = notebook
                .cells
                .iter()
                .map(|c| PromptPart::new(c.id.as_str(), prompt_view(c, CELL_VIEW_CHARS)))
                .collect();
            fit_to_budget(parts, EXTRACT_INSTRUCTION, config)
        },
        parse_candidates_response,
        || heuristic_candidates(notebook),
        render_candidates_response,
    )
}

/// Sub-topic target: parent text plus all sibling texts. Topic target: all
/// topic texts.
pub fn recommendation_context(outline: &OutlineTree, target: &ItemId) -> Result<RecommendationContext, TopicError> {
    let item = outline.get(target).ok_or_else(|| TopicError::UnknownItem(target.clone()))?;
    Ok(match &item.parent {
        Some(parent) => {
            let parent_item = outline.get(parent).ok_or_else(|| TopicError::UnknownItem(parent.clone()))?;
            let mut items = vec![parent_item.text.clone()];
            items.extend(outline.children(parent).map(|c| c.text.clone()));
            RecommendationContext { items, level: OutlineLevel::Subtopic }
        }
        None => RecommendationContext {
            items: outline.topics().map(|t| t.text.clone()).collect(),
            level: OutlineLevel::Topic,
        },
    })
}

fn eligible(candidates: &TopicCandidateSet, context: &RecommendationContext, options: RecommendOptions) -> Vec<String> {
    let present: HashSet<String> = context.items.iter().map(|i| i.trim().to_lowercase()).collect();
    candidates
        .flat()
        .into_iter()
        .filter(|c| options.allow_duplicates || !present.contains(&c.to_lowercase()))
        .collect()
}

/// Ranks by the number of distinct candidate terms found in the context,
/// then alphabetically.
pub fn heuristic_recommendations(pool: &[String], context: &RecommendationContext) -> Vec<String> {
    let context_terms: HashSet<String> = context.items.iter().flat_map(|i| text::index_terms(i)).collect();
    let mut scored: Vec<(usize, &String)> = pool
        .iter()
        .map(|c| {
            let terms: HashSet<String> = text::index_terms(c).into_iter().collect();
            (terms.intersection(&context_terms).count(), c)
        })
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    scored.into_iter().take(MAX_RECOMMENDATIONS).map(|(_, c)| c.clone()).collect()
}

/// One recommendation per line; output is filtered to the eligible pool's
/// rules (exclusion, dedup, cap) whatever the model answers.
pub fn parse_recommendations(
    response: &str,
    context: &RecommendationContext,
    options: RecommendOptions,
) -> Vec<String> {
    let present: HashSet<String> = context.items.iter().map(|i| i.trim().to_lowercase()).collect();
    let mut seen = HashSet::new();
    response
        .lines()
        .map(|l| l.trim().trim_start_matches(['-', '*']).trim())
        .filter(|l| !l.is_empty())
        .filter(|l| options.allow_duplicates || !present.contains(&l.to_lowercase()))
        .filter(|l| seen.insert(l.to_lowercase()))
        .take(MAX_RECOMMENDATIONS)
        .map(str::to_string)
        .collect()
}

/// At most ten ranked topics for the item being written. Side-effect free.
pub fn recommend_topics(
    candidates: &TopicCandidateSet,
    context: &RecommendationContext,
    options: RecommendOptions,
    gw: &LmGateway,
) -> Result<Vec<String>, SemanticError> {
    let pool = eligible(candidates, context, options);
    if pool.is_empty() {
        return Ok(Vec::new());
    }
    let label = match (context.level, context.items.first()) {
        (OutlineLevel::Subtopic, Some(parent)) => format!("recommend under {parent}"),
        _ => "recommend topics".to_string(),
    };
    gw.semantic(
        &label,
        |config| {
            let parts = vec![
                PromptPart::new("context", context.items.join("\n")),
                PromptPart::new("candidates", pool.join("\n")),
            ];
            fit_to_budget(parts, RECOMMEND_INSTRUCTION, config)
        },
        |response| Ok(parse_recommendations(response, context, options)),
        || heuristic_recommendations(&pool, context),
        |list| list.iter().map(|s| format!("{s}\n")).collect(),
    )
}
