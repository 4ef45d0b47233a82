//! Live authoring sessions.
//!
//! A session owns a notebook, its keyword overview, the outline and the
//! deck. Commands on [`Store`] compute an [`Event`] (calling the language
//! model where needed), apply it to a copy of the state, append it to the
//! session log and only then publish the new state. Mutations of one session
//! are serialized; reads never wait for a running command.

mod event;
mod state;
mod store;

use thiserror::Error;

use crate::export::ExportError;
use crate::ids::{CellId, ItemId, SessionId, SlideId};
use crate::lm::SemanticError;
use crate::notebook::NotebookError;
use crate::outline::OutlineError;
use crate::slides::SlideError;
use crate::topics::TopicError;

pub use event::{Event, LogRecord, SlideEdit};
pub use state::{DiffSummary, LinkTargets, SessionState};
pub use store::{
    BindMode, GenerateOutcome, GenerateRequest, GenerationReport, OutlineInput, SessionConfig, StateView, Store,
    UnitReport, SNAPSHOT_EVERY,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error("unknown session {0}")]
    UnknownSession(SessionId),
    #[error("unknown slide {0}")]
    UnknownSlide(SlideId),
    #[error("unknown cell {0}")]
    UnknownCell(CellId),
    #[error("unknown outline item {0}")]
    UnknownItem(ItemId),
    #[error("unknown reference {0:?}")]
    UnknownRef(String),
    #[error("no cells selected")]
    NoCellsSelected,
    #[error("slide {0} is not deleted")]
    InvalidRestore(SlideId),
    #[error("invalid edit: {0}")]
    InvalidEdit(String),
    #[error("{0}")]
    GeometryViolation(String),
    #[error("malformed outline: {0}")]
    MalformedOutline(String),
    #[error("malformed notebook: {0}")]
    MalformedNotebook(String),
    #[error("{0}")]
    InvalidParams(String),
    #[error(transparent)]
    Backend(#[from] SemanticError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("session log: {0}")]
    Persistence(String),
    #[error("inconsistent event: {0}")]
    Inconsistent(String),
}

impl SessionError {
    /// Machine-readable code, named after the error.
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownSession(_) => "UnknownSession",
            Self::UnknownSlide(_) => "UnknownSlide",
            Self::UnknownCell(_) => "UnknownCell",
            Self::UnknownItem(_) => "UnknownItem",
            Self::UnknownRef(_) => "UnknownRef",
            Self::NoCellsSelected => "NoCellsSelected",
            Self::InvalidRestore(_) => "InvalidRestore",
            Self::InvalidEdit(_) => "InvalidEdit",
            Self::GeometryViolation(_) => "GeometryViolation",
            Self::MalformedOutline(_) => "MalformedOutline",
            Self::MalformedNotebook(_) => "MalformedNotebook",
            Self::InvalidParams(_) => "InvalidParams",
            Self::Backend(SemanticError::UnparseableResponse(_)) => "UnparseableResponse",
            Self::Backend(_) => "BackendFailure",
            Self::Export(e) => e.code(),
            Self::Persistence(_) => "Persistence",
            Self::Inconsistent(_) => "Inconsistent",
        }
    }
}

impl From<OutlineError> for SessionError {
    fn from(e: OutlineError) -> Self {
        match e {
            OutlineError::MalformedOutline(m) => Self::MalformedOutline(m),
        }
    }
}

impl From<NotebookError> for SessionError {
    fn from(e: NotebookError) -> Self {
        match e {
            NotebookError::MalformedNotebook(m) => Self::MalformedNotebook(m),
        }
    }
}

impl From<SlideError> for SessionError {
    fn from(e: SlideError) -> Self {
        match e {
            SlideError::InvalidParams(m) => Self::InvalidParams(m),
            SlideError::EmptyCell(c) => Self::InvalidEdit(format!("cell {c} has no source")),
            SlideError::Semantic(s) => Self::Backend(s),
        }
    }
}

impl From<TopicError> for SessionError {
    fn from(e: TopicError) -> Self {
        match e {
            TopicError::UnknownItem(i) => Self::UnknownItem(i),
            TopicError::Semantic(s) => Self::Backend(s),
        }
    }
}
