use base64::Engine;
use serde::Deserialize;
use serde_json::Value;

use super::{table, CellKind, MediaItem, MediaKind, MediaPayload, Notebook, NotebookCell, NotebookError};
use crate::ids::CellId;

#[derive(Deserialize)]
struct RawNotebook {
    nbformat: u32,
    cells: Vec<RawCell>,
}

#[derive(Deserialize)]
struct RawCell {
    cell_type: String,
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    source: MultilineText,
    #[serde(default)]
    outputs: Vec<RawOutput>,
    #[serde(default)]
    execution_count: Option<i64>,
}

#[derive(Deserialize)]
struct RawOutput {
    output_type: String,
    #[serde(default)]
    data: serde_json::Map<String, Value>,
}

/// nbformat stores multiline strings either whole or as a list of lines.
#[derive(Deserialize)]
#[serde(untagged)]
enum MultilineText {
    Whole(String),
    Lines(Vec<String>),
}

impl Default for MultilineText {
    fn default() -> Self {
        MultilineText::Whole(String::new())
    }
}

impl MultilineText {
    fn join(self) -> String {
        match self {
            MultilineText::Whole(s) => s,
            MultilineText::Lines(lines) => lines.concat(),
        }
    }
}

fn mime_text(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => items
            .iter()
            .map(|v| v.as_str().map(str::to_string))
            .collect::<Option<Vec<_>>>()
            .map(|lines| lines.concat()),
        _ => None,
    }
}

/// Parses an nbformat 4 document. Cells keep file order; `raw` cells are
/// skipped. `image/png` outputs become charts and `text/html` outputs holding
/// a `<table>` become tables. A multi-line `text/plain` execute result becomes
/// a table only when the cell has no chart or HTML table output.
pub fn parse_notebook(bytes: &[u8]) -> Result<Notebook, NotebookError> {
    let raw: RawNotebook = serde_json::from_slice(bytes)
        .map_err(|e| NotebookError::MalformedNotebook(e.to_string()))?;
    if raw.nbformat != 4 {
        return Err(NotebookError::MalformedNotebook(format!(
            "unsupported nbformat major version {}",
            raw.nbformat
        )));
    }

    let mut cells = Vec::with_capacity(raw.cells.len());
    for raw_cell in raw.cells {
        let kind = match raw_cell.cell_type.as_str() {
            "code" => CellKind::Code,
            "markdown" => CellKind::Markdown,
            "raw" => continue,
            other => {
                return Err(NotebookError::MalformedNotebook(format!(
                    "unknown cell_type {other:?}"
                )))
            }
        };
        let index = cells.len();
        let id = CellId(
            raw_cell
                .id
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| format!("c{index}")),
        );
        let media = extract_media(&raw_cell.outputs, &id)?;
        cells.push(NotebookCell {
            id,
            index,
            kind,
            source: raw_cell.source.join(),
            media,
            execution_count: raw_cell.execution_count,
        });
    }

    let mut seen = std::collections::HashSet::new();
    for cell in &cells {
        if !seen.insert(&cell.id) {
            return Err(NotebookError::MalformedNotebook(format!(
                "duplicate cell id {}",
                cell.id
            )));
        }
    }
    Ok(Notebook { cells })
}

fn extract_media(outputs: &[RawOutput], cell: &CellId) -> Result<Vec<MediaItem>, NotebookError> {
    let mut media = Vec::new();
    let mut plain_candidates = Vec::new();
    for output in outputs {
        if !matches!(output.output_type.as_str(), "display_data" | "execute_result") {
            continue;
        }
        if let Some(png) = output.data.get("image/png").and_then(mime_text) {
            let cleaned: String = png.chars().filter(|c| !c.is_whitespace()).collect();
            let bytes = base64::engine::general_purpose::STANDARD
                .decode(cleaned.as_bytes())
                .map_err(|e| NotebookError::MalformedNotebook(format!("bad image/png in {cell}: {e}")))?;
            if !bytes.is_empty() {
                media.push(MediaItem {
                    kind: MediaKind::Chart,
                    payload: MediaPayload::Png(bytes),
                    origin_cell: cell.clone(),
                });
            }
            continue;
        }
        if let Some(html) = output.data.get("text/html").and_then(mime_text) {
            if table::contains_table(&html) {
                media.push(MediaItem {
                    kind: MediaKind::Table,
                    payload: MediaPayload::Html(html),
                    origin_cell: cell.clone(),
                });
                continue;
            }
        }
        if output.output_type == "execute_result" {
            if let Some(text) = output.data.get("text/plain").and_then(mime_text) {
                plain_candidates.push(text);
            }
        }
    }
    if media.is_empty() {
        for text in plain_candidates {
            if let Some(html) = table::plain_text_table(&text) {
                media.push(MediaItem {
                    kind: MediaKind::Table,
                    payload: MediaPayload::Html(html),
                    origin_cell: cell.clone(),
                });
            }
        }
    }
    Ok(media)
}
