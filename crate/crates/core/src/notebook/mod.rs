//! Notebook ingestion: nbformat 4 parsing into an ordered cell model, the
//! overview card model, and the textual cell rendering used in prompts.

mod overview;
mod parse;
pub mod table;

use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::CellId;

pub use overview::{build_overview, content_weight, prompt_view, CardState, OverviewCard, OverviewError, TRUNCATION_MARKER};
pub use parse::parse_notebook;

#[derive(Debug, Error)]
pub enum NotebookError {
    #[error("malformed notebook: {0}")]
    MalformedNotebook(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Code,
    Markdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediaKind {
    Chart,
    Table,
}

/// Chart payloads are PNG bytes, table payloads an HTML fragment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "format", content = "data")]
pub enum MediaPayload {
    Png(#[serde(with = "base64_bytes")] Vec<u8>),
    Html(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaItem {
    pub kind: MediaKind,
    pub payload: MediaPayload,
    pub origin_cell: CellId,
}

impl MediaItem {
    /// Pixel size read from the PNG header, for aspect-preserving layout.
    pub fn pixel_size(&self) -> Option<(u32, u32)> {
        match &self.payload {
            MediaPayload::Png(bytes) => png_size(bytes),
            MediaPayload::Html(_) => None,
        }
    }

    pub fn table_rows(&self) -> Vec<Vec<String>> {
        match &self.payload {
            MediaPayload::Html(html) => table::rows(html),
            MediaPayload::Png(_) => Vec::new(),
        }
    }
}

/// Width and height from the IHDR chunk, which must directly follow the
/// 8-byte signature.
pub fn png_size(bytes: &[u8]) -> Option<(u32, u32)> {
    const SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";
    if bytes.len() < 24 || &bytes[..8] != SIGNATURE || &bytes[12..16] != b"IHDR" {
        return None;
    }
    let width = u32::from_be_bytes(bytes[16..20].try_into().ok()?);
    let height = u32::from_be_bytes(bytes[20..24].try_into().ok()?);
    (width > 0 && height > 0).then_some((width, height))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotebookCell {
    pub id: CellId,
    pub index: usize,
    pub kind: CellKind,
    pub source: String,
    pub media: Vec<MediaItem>,
    pub execution_count: Option<i64>,
}

impl NotebookCell {
    pub fn charts(&self) -> impl Iterator<Item = &MediaItem> {
        self.media.iter().filter(|m| m.kind == MediaKind::Chart)
    }

    pub fn tables(&self) -> impl Iterator<Item = &MediaItem> {
        self.media.iter().filter(|m| m.kind == MediaKind::Table)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Notebook {
    pub cells: Vec<NotebookCell>,
}

impl Notebook {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, id: &CellId) -> Option<&NotebookCell> {
        self.cells.iter().find(|c| &c.id == id)
    }

    pub fn by_index(&self, index: usize) -> Option<&NotebookCell> {
        self.cells.get(index)
    }

    pub fn index_of(&self, id: &CellId) -> Option<usize> {
        self.cell(id).map(|c| c.index)
    }
}

pub(crate) mod base64_bytes {
    use base64::Engine;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&base64::engine::general_purpose::STANDARD.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        base64::engine::general_purpose::STANDARD
            .decode(text.as_bytes())
            .map_err(serde::de::Error::custom)
    }
}

pub(crate) fn encode_base64(bytes: &[u8]) -> String {
    base64::engine::general_purpose::STANDARD.encode(bytes)
}
