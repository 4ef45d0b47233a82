//! Deck export: an OOXML `.pptx` package and a single-file HTML
//! presentation.
//!
//! Both exporters take the visible slides of a deck together with their
//! geometries (one per visible slide, in deck order) and resolve media
//! payloads from the notebook. Both are pure: equal inputs give equal bytes.

mod html;
pub mod markdown;
mod pptx;

use thiserror::Error;

use crate::ids::CellId;
use crate::notebook::{MediaItem, MediaKind, Notebook};
use crate::slides::{BoxRef, GenerationParams, LayoutError, MediaRef, Slide, SlideGeometry};

pub use html::{export_html, HTML_SCALE};
pub use pptx::{export_pptx, EMU_PER_UNIT, SLIDE_HEIGHT_EMU, SLIDE_WIDTH_EMU};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExportError {
    #[error("deck has no visible slides")]
    EmptyDeck,
    #[error("media of cell {cell} cannot be encoded: {reason}")]
    MediaEncodingFailure { cell: CellId, reason: String },
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("archive: {0}")]
    Archive(String),
}

impl ExportError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::EmptyDeck => "EmptyDeck",
            Self::MediaEncodingFailure { .. } => "MediaEncodingFailure",
            Self::Layout(LayoutError::Overflow { .. }) => "Overflow",
            Self::Layout(_) => "GeometryViolation",
            Self::Archive(_) => "ExportFailure",
        }
    }
}

/// Visible slides paired with their geometries.
fn visible<'a>(
    deck: &'a [Slide],
    geometries: &'a [SlideGeometry],
) -> Result<Vec<(&'a Slide, &'a SlideGeometry)>, ExportError> {
    let slides: Vec<&Slide> = deck.iter().filter(|s| !s.deleted).collect();
    if slides.is_empty() {
        return Err(ExportError::EmptyDeck);
    }
    if slides.len() != geometries.len() {
        return Err(ExportError::Layout(LayoutError::GeometryViolation(format!(
            "{} visible slides but {} geometries",
            slides.len(),
            geometries.len()
        ))));
    }
    Ok(slides.into_iter().zip(geometries).collect())
}

/// Geometry and parameters must agree on page numbers.
fn check_page_number(geometry: &SlideGeometry, params: &GenerationParams) -> Result<(), ExportError> {
    if geometry.get(BoxRef::PageNumber).is_some() != params.page_numbers {
        return Err(ExportError::Layout(LayoutError::GeometryViolation(
            "page-number box disagrees with params.page_numbers".into(),
        )));
    }
    Ok(())
}

/// The notebook output a media reference points at; charts must carry a
/// readable PNG.
fn resolve<'a>(notebook: &'a Notebook, media: &MediaRef) -> Result<&'a MediaItem, ExportError> {
    let failure = |reason: &str| ExportError::MediaEncodingFailure { cell: media.cell_id.clone(), reason: reason.into() };
    let item = notebook
        .cell(&media.cell_id)
        .and_then(|c| c.media.get(media.output))
        .ok_or_else(|| failure("output not found in notebook"))?;
    if item.kind != media.kind {
        return Err(failure("output kind changed"));
    }
    if item.kind == MediaKind::Chart && item.pixel_size().is_none() {
        return Err(failure("chart is not a valid PNG"));
    }
    Ok(item)
}
