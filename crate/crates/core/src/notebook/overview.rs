use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{MediaKind, Notebook, NotebookCell};
use crate::ids::CellId;
use crate::keywords::KeywordMap;

/// Appended wherever text is cut to fit a budget.
pub const TRUNCATION_MARKER: &str = "…[truncated]";

/// Source length at which the card weight saturates.
const WEIGHT_SATURATION_CHARS: f64 = 2000.0;

#[derive(Debug, Error, PartialEq)]
pub enum OverviewError {
    #[error("no keyword entry for cell {0}")]
    MissingKeywords(CellId),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CardState {
    #[default]
    Default,
    Focused,
    Selected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverviewCard {
    pub cell_id: CellId,
    pub index: usize,
    pub keywords: Vec<String>,
    pub content_weight: f64,
    pub state: CardState,
    pub charts: usize,
    pub tables: usize,
}

/// `min(1, ln(1 + chars) / ln(1 + 2000))`, monotone in the character count.
pub fn content_weight(chars: usize) -> f64 {
    ((1.0 + chars as f64).ln() / (1.0 + WEIGHT_SATURATION_CHARS).ln()).min(1.0)
}

pub fn build_overview(notebook: &Notebook, keywords: &KeywordMap) -> Result<Vec<OverviewCard>, OverviewError> {
    notebook
        .cells
        .iter()
        .map(|cell| {
            let list = keywords
                .get(&cell.id)
                .ok_or_else(|| OverviewError::MissingKeywords(cell.id.clone()))?;
            Ok(OverviewCard {
                cell_id: cell.id.clone(),
                index: cell.index,
                keywords: list.keywords.clone(),
                content_weight: content_weight(cell.source.chars().count()),
                state: CardState::Default,
                charts: cell.media.iter().filter(|m| m.kind == MediaKind::Chart).count(),
                tables: cell.media.iter().filter(|m| m.kind == MediaKind::Table).count(),
            })
        })
        .collect()
}

fn take_chars(text: &str, n: usize) -> &str {
    match text.char_indices().nth(n) {
        Some((byte, _)) => &text[..byte],
        None => text,
    }
}

/// Renders a cell for a prompt as `[cell {index}]`, one ` <chart>` marker per
/// chart, a newline and the source. When everything fits, table rows follow as
/// `a | b | c` lines. Output never exceeds `char_budget` characters plus the
/// truncation marker, which always ends a cut rendering.
pub fn prompt_view(cell: &NotebookCell, char_budget: usize) -> String {
    let budget = char_budget.max(16);
    let mut header = format!("[cell {}]", cell.index);
    for _ in cell.charts() {
        if header.chars().count() + " <chart>".len() > budget / 2 {
            break;
        }
        header.push_str(" <chart>");
    }
    let mut out = header;
    out.push('\n');
    out.push_str(&cell.source);

    let len = out.chars().count();
    if len > budget {
        let mut cut = take_chars(&out, budget).to_string();
        cut.push_str(TRUNCATION_MARKER);
        return cut;
    }

    let mut used = len;
    'tables: for table in cell.tables() {
        for row in table.table_rows() {
            let line = format!("\n{}", row.join(" | "));
            let n = line.chars().count();
            if used + n > budget {
                break 'tables;
            }
            out.push_str(&line);
            used += n;
        }
    }
    out
}
