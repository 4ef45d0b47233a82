//! Slide content: one bullet per relevant cell, the cells' charts and
//! tables, the outline item text as title.

mod bullet;
pub mod layout;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{CellId, ItemId, SlideId};
use crate::lm::{fan_out, LmGateway, SemanticError};
use crate::notebook::{MediaKind, Notebook};
use crate::retrieval::{OutlineUnit, ScoredCell};

pub use bullet::{
    cap_words, generate_bullet, generate_title, heuristic_bullet, heuristic_title, word_limit,
};
pub use layout::{
    deck_geometries, layout_slide, validate_geometry, BoxRef, LayoutError, PlacedBox, Rect, SlideGeometry,
    CANVAS_HEIGHT, CANVAS_WIDTH,
};

/// Upper bound of `top_k`.
pub const MAX_TOP_K: usize = 5;
/// Relevance given to cells the user binds by hand.
pub const MANUAL_RELEVANCE: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SlideError {
    #[error("cell {0} has no source")]
    EmptyCell(CellId),
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Semantic(#[from] SemanticError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetailLevel {
    #[default]
    Concise,
    Detailed,
}

impl std::str::FromStr for DetailLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "concise" => Ok(Self::Concise),
            "detailed" => Ok(Self::Detailed),
            other => Err(format!("unknown detail level {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationParams {
    pub top_k: usize,
    pub detail_level: DetailLevel,
    pub page_numbers: bool,
    /// Markdown cells are retrieval candidates.
    pub include_markdown: bool,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self { top_k: 3, detail_level: DetailLevel::Concise, page_numbers: false, include_markdown: true }
    }
}

impl GenerationParams {
    pub fn validate(&self) -> Result<(), SlideError> {
        if !(1..=MAX_TOP_K).contains(&self.top_k) {
            return Err(SlideError::InvalidParams(format!("top_k {} outside [1, {MAX_TOP_K}]", self.top_k)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    /// Centered title only.
    Title,
    #[default]
    OneColumn,
    TwoColumn,
}

impl std::str::FromStr for Template {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "title" => Ok(Self::Title),
            "one_column" => Ok(Self::OneColumn),
            "two_column" => Ok(Self::TwoColumn),
            other => Err(format!("unknown template {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bullet {
    /// Markdown subset: `**bold**`, `*italic*`, `` `code` ``.
    pub text: String,
    pub source_cell: CellId,
    pub relevance: f64,
    #[serde(default)]
    pub manually_edited: bool,
}

/// One output of one cell, with the pixel size of charts for layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaRef {
    pub cell_id: CellId,
    /// Position among the cell's media items.
    pub output: usize,
    pub kind: MediaKind,
    #[serde(default)]
    pub pixel_size: Option<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slide {
    pub id: SlideId,
    pub title: String,
    pub bullets: Vec<Bullet>,
    pub media: Vec<MediaRef>,
    pub template: Template,
    /// Set by an explicit template choice; generation then keeps it.
    #[serde(default)]
    pub template_locked: bool,
    #[serde(default)]
    pub deleted: bool,
    pub source_unit: Option<ItemId>,
    /// Bullet order.
    pub bound_cells: Vec<CellId>,
    /// Cells bound by hand; kept across regeneration.
    #[serde(default)]
    pub pinned: Vec<CellId>,
    /// Cells unbound by hand; never retrieved again for this slide.
    #[serde(default)]
    pub excluded: Vec<CellId>,
    /// Boxes moved by hand, keyed by [`BoxRef`] name.
    #[serde(default)]
    pub box_overrides: BTreeMap<String, Rect>,
}

impl Slide {
    pub fn relevance_of(&self, cell: &CellId) -> Option<f64> {
        self.bullets.iter().find(|b| &b.source_cell == cell).map(|b| b.relevance)
    }

    /// Sorts bullets by relevance (descending) then cell index and recomputes
    /// bound cells, media and the automatic template.
    pub fn refresh(&mut self, notebook: &Notebook) {
        let index = |c: &CellId| notebook.index_of(c).unwrap_or(usize::MAX);
        self.bullets
            .sort_by(|a, b| b.relevance.total_cmp(&a.relevance).then_with(|| index(&a.source_cell).cmp(&index(&b.source_cell))));
        self.bound_cells = self.bullets.iter().map(|b| b.source_cell.clone()).collect();
        let mut cells: Vec<&CellId> = self.bound_cells.iter().collect();
        cells.sort_by_key(|c| index(c));
        self.media = cells
            .into_iter()
            .filter_map(|c| notebook.cell(c))
            .flat_map(|cell| {
                cell.media.iter().enumerate().map(|(output, m)| MediaRef {
                    cell_id: cell.id.clone(),
                    output,
                    kind: m.kind,
                    pixel_size: m.pixel_size(),
                })
            })
            .collect();
        if !self.template_locked {
            self.template = auto_template(self.media.len());
        }
    }
}

pub fn auto_template(media: usize) -> Template {
    if media >= 2 {
        Template::TwoColumn
    } else {
        Template::OneColumn
    }
}

/// Builds a slide from already chosen cells. Bullets in `reuse` are kept for
/// their cells (with the new relevance); the others are generated.
#[allow(clippy::too_many_arguments)]
pub fn build_slide(
    id: SlideId,
    title: &str,
    source_unit: Option<ItemId>,
    cells: &[ScoredCell],
    notebook: &Notebook,
    detail: DetailLevel,
    gw: &LmGateway,
    reuse: &HashMap<CellId, Bullet>,
) -> Result<Slide, SemanticError> {
    let fresh: Vec<&ScoredCell> = cells.iter().filter(|s| !reuse.contains_key(&s.cell_id)).collect();
    let texts = fan_out(&fresh, gw.fan_out_width(), |scored| match notebook.cell(&scored.cell_id) {
        Some(cell) => match generate_bullet(cell, detail, gw) {
            Ok(text) => Ok(text),
            Err(SlideError::EmptyCell(_)) => Ok(format!("Cell {} has no source", cell.index)),
            Err(SlideError::Semantic(e)) => Err(e),
            Err(SlideError::InvalidParams(m)) => unreachable!("{m}"),
        },
        None => Ok(String::new()),
    });
    let mut generated: HashMap<&CellId, String> = HashMap::new();
    for (scored, text) in fresh.iter().zip(texts) {
        generated.insert(&scored.cell_id, text?);
    }
    let bullets = cells
        .iter()
        .filter(|s| notebook.cell(&s.cell_id).is_some())
        .map(|s| match reuse.get(&s.cell_id) {
            Some(old) => Bullet { relevance: s.score, ..old.clone() },
            None => Bullet {
                text: generated.remove(&s.cell_id).unwrap_or_default(),
                source_cell: s.cell_id.clone(),
                relevance: s.score,
                manually_edited: false,
            },
        })
        .collect();
    let mut slide = Slide {
        id,
        title: title.to_string(),
        bullets,
        media: Vec::new(),
        template: Template::OneColumn,
        template_locked: false,
        deleted: false,
        source_unit,
        bound_cells: Vec::new(),
        pinned: Vec::new(),
        excluded: Vec::new(),
        box_overrides: BTreeMap::new(),
    };
    slide.refresh(notebook);
    Ok(slide)
}

/// Keeps the best `min(top_k, |scored|)` cells, one bullet each; the title is
/// the unit's item text.
pub fn assemble_slide(
    id: SlideId,
    unit: &OutlineUnit,
    scored: &[ScoredCell],
    notebook: &Notebook,
    params: &GenerationParams,
    gw: &LmGateway,
) -> Result<Slide, SemanticError> {
    let kept = &scored[..scored.len().min(params.top_k)];
    build_slide(
        id,
        &unit.item_text,
        Some(unit.item_id.clone()),
        kept,
        notebook,
        params.detail_level,
        gw,
        &HashMap::new(),
    )
}
