//! Session events and their log records.
//!
//! A session log is JSON Lines, one `{"revision", "op", "payload"}` record
//! per event, payload keys sorted. `created` is revision 0 and every later
//! event adds one.
//! Events carry everything needed to apply them without a language model,
//! so replaying a log is deterministic.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ids::{ItemId, SessionId, SlideId};
use crate::keywords::KeywordMap;
use crate::notebook::Notebook;
use crate::outline::{OutlineItem, OutlineTree};
use crate::slides::{BoxRef, GenerationParams, Rect, Slide, Template};

/// Edits applied to one slide through `PATCH /sessions/{id}/slides/{sid}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SlideEdit {
    Rename { title: String },
    EditBullet { index: usize, text: String },
    /// `to_index` is a position in the deck, hidden slides included.
    Reorder { to_index: usize },
    Delete,
    Restore,
    SetTemplate { template: Template },
    MoveBox { element: BoxRef, rect: Rect },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "payload", rename_all = "snake_case")]
pub enum Event {
    Created { session_id: SessionId, notebook: Notebook, keywords: KeywordMap },
    OutlineReplaced { outline: OutlineTree },
    /// Rebuilt slides only; every other slide is kept as is.
    DeckGenerated { params: GenerationParams, slides: Vec<Slide> },
    /// A bind or unbind; `dirty` marks the slide's item.
    SlideRebuilt { slide: Slide, dirty: bool },
    ManualSlideAdded { slide: Slide, item: OutlineItem, after: Option<ItemId> },
    SlideEdited { slide_id: SlideId, edit: SlideEdit },
    KeywordsRefreshed { keywords: KeywordMap },
}

impl Event {
    pub fn op(&self) -> &'static str {
        match self {
            Self::Created { .. } => "created",
            Self::OutlineReplaced { .. } => "outline_replaced",
            Self::DeckGenerated { .. } => "deck_generated",
            Self::SlideRebuilt { .. } => "slide_rebuilt",
            Self::ManualSlideAdded { .. } => "manual_slide_added",
            Self::SlideEdited { .. } => "slide_edited",
            Self::KeywordsRefreshed { .. } => "keywords_refreshed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub revision: u64,
    pub op: String,
    pub payload: Value,
}

impl LogRecord {
    pub fn new(revision: u64, event: &Event) -> Self {
        let mut value = serde_json::to_value(event).expect("events serialize");
        let payload = value.get_mut("payload").map(Value::take).unwrap_or(Value::Null);
        Self { revision, op: event.op().to_string(), payload }
    }

    pub fn event(&self) -> Result<Event, serde_json::Error> {
        let mut object = serde_json::Map::new();
        object.insert("op".into(), Value::String(self.op.clone()));
        if !self.payload.is_null() {
            object.insert("payload".into(), self.payload.clone());
        }
        serde_json::from_value(Value::Object(object))
    }
}
