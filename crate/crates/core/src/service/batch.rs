//! One-shot batch run: notebook + plain-text outline in, `.pptx` and/or
//! HTML out, a JSON generation report on standard output.
//!
//! Exit codes: 0 success (zero-match warnings included), 1 usage, I/O or
//! export failure, 2 malformed notebook, 3 malformed outline, 4 language
//! model backend failure.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lm::{BackendKind, LmConfig, LmError, LmGateway};
use crate::outline::OutlineTree;
use crate::session::{GenerateRequest, OutlineInput, SessionError, Store, UnitReport};
use crate::slides::GenerationParams;

#[derive(Debug, Clone, PartialEq)]
pub struct BatchJob {
    pub notebook_path: PathBuf,
    pub outline_path: PathBuf,
    pub params: GenerationParams,
    pub lm: LmConfig,
    pub out_pptx: Option<PathBuf>,
    pub out_html: Option<PathBuf>,
    /// HTML output in present mode.
    pub present: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub backend: BackendKind,
    pub slides: usize,
    pub units: Vec<UnitReport>,
    pub warnings: Vec<String>,
    pub outputs: Vec<PathBuf>,
    /// Remote requests issued, retries included; zero for offline backends.
    pub remote_calls: usize,
}

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("language model backend: {0}")]
    Backend(#[from] LmError),
}

impl BatchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Session(SessionError::MalformedNotebook(_)) => 2,
            Self::Session(SessionError::MalformedOutline(_)) => 3,
            Self::Session(SessionError::Backend(_)) | Self::Backend(_) => 4,
            Self::Usage(_) | Self::Io { .. } | Self::Session(_) => 1,
        }
    }
}

fn read(path: &PathBuf) -> Result<Vec<u8>, BatchError> {
    std::fs::read(path).map_err(|e| BatchError::Io { path: path.clone(), message: e.to_string() })
}

fn write(path: &PathBuf, bytes: &[u8]) -> Result<(), BatchError> {
    std::fs::write(path, bytes).map_err(|e| BatchError::Io { path: path.clone(), message: e.to_string() })
}

/// Runs `job` to completion. Parameters are validated before any file is
/// read; the outline is parsed before any model call.
pub fn run_batch(job: &BatchJob) -> Result<BatchReport, BatchError> {
    job.params.validate().map_err(|e| BatchError::Usage(e.to_string()))?;
    if job.out_pptx.is_none() && job.out_html.is_none() {
        return Err(BatchError::Usage("nothing to write: give --out-pptx and/or --out-html".into()));
    }
    let notebook = read(&job.notebook_path)?;
    let outline = String::from_utf8(read(&job.outline_path)?)
        .map_err(|e| SessionError::MalformedOutline(format!("outline is not UTF-8: {e}")))?;
    OutlineTree::parse_plain_text(&outline).map_err(SessionError::from)?;

    let gw = Arc::new(LmGateway::new(job.lm.clone())?);
    let store = Store::in_memory(gw.clone());
    let (id, _) = store.create_session(&notebook)?;
    store.replace_outline(&id, OutlineInput::PlainText { text: outline })?;
    let outcome = store.generate(&id, GenerateRequest { params: Some(job.params), force: false })?;

    let mut outputs = Vec::new();
    if let Some(path) = &job.out_pptx {
        write(path, &store.export_pptx(&id)?)?;
        outputs.push(path.clone());
    }
    if let Some(path) = &job.out_html {
        write(path, store.export_html(&id, job.present)?.as_bytes())?;
        outputs.push(path.clone());
    }
    Ok(BatchReport {
        backend: gw.backend(),
        slides: outcome.deck.iter().filter(|s| !s.deleted).count(),
        units: outcome.report.units,
        warnings: outcome.report.warnings,
        outputs,
        remote_calls: gw.remote_calls(),
    })
}
