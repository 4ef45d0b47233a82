//! Band layout on a 1280×720 canvas.
//!
//! ```text
//! y   0..120   title band (title box at 40,20 1200×90)
//! y 140..      bullets, 60 per bullet, at most 300 with media, 540 without
//! y    ..680   media, left to right, 40 apart, equal widths
//! y 680..710   page number, 60×30 at x = 1180
//! ```
//!
//! `n` media boxes are `(1280 - 40·(n + 1)) / n` wide; below 200 (n > 5) the
//! slide overflows. Charts are scaled into their box keeping aspect ratio,
//! tables fill it. Boxes are half-open rectangles; two boxes overlap when both
//! their x and y intersections have positive length.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{GenerationParams, MediaRef, Slide, Template};
use crate::notebook::MediaKind;

pub const CANVAS_WIDTH: f64 = 1280.0;
pub const CANVAS_HEIGHT: f64 = 720.0;
pub const MARGIN: f64 = 40.0;
pub const TITLE_BAND_END: f64 = 120.0;
pub const BULLET_TOP: f64 = 140.0;
pub const BULLET_ROW: f64 = 60.0;
pub const BULLET_CAP_WITH_MEDIA: f64 = 300.0;
pub const BULLET_CAP_ALONE: f64 = 540.0;
pub const BAND_GAP: f64 = 20.0;
pub const CONTENT_BOTTOM: f64 = 680.0;
pub const MIN_MEDIA_WIDTH: f64 = 200.0;
pub const PAGE_NUMBER_BOX: Rect = Rect { x: 1180.0, y: 680.0, w: 60.0, h: 30.0 };
const EPS: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("{} media items do not fit; unbind {excess:?}", excess.len())]
    Overflow { excess: Vec<MediaRef> },
    #[error("geometry violation: {0}")]
    GeometryViolation(String),
    #[error("slide is deleted")]
    DeletedSlide,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn inside_canvas(&self) -> bool {
        [self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite())
            && self.w > 0.0
            && self.h > 0.0
            && self.x >= -EPS
            && self.y >= -EPS
            && self.right() <= CANVAS_WIDTH + EPS
            && self.bottom() <= CANVAS_HEIGHT + EPS
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        let dx = self.right().min(other.right()) - self.x.max(other.x);
        let dy = self.bottom().min(other.bottom()) - self.y.max(other.y);
        dx > EPS && dy > EPS
    }

    /// Largest rectangle of aspect `pw:ph` centered in `self`.
    pub fn fit(&self, pw: f64, ph: f64) -> Rect {
        if pw <= 0.0 || ph <= 0.0 {
            return *self;
        }
        let scale = (self.w / pw).min(self.h / ph);
        let (w, h) = (pw * scale, ph * scale);
        Rect { x: self.x + (self.w - w) / 2.0, y: self.y + (self.h - h) / 2.0, w, h }
    }
}

/// Element a box belongs to; serialized as `title`, `bullets`, `media:<i>`
/// or `page_number`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum BoxRef {
    Title,
    Bullets,
    Media(usize),
    PageNumber,
}

impl std::fmt::Display for BoxRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Title => f.write_str("title"),
            Self::Bullets => f.write_str("bullets"),
            Self::Media(i) => write!(f, "media:{i}"),
            Self::PageNumber => f.write_str("page_number"),
        }
    }
}

impl std::str::FromStr for BoxRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "title" => Ok(Self::Title),
            "bullets" => Ok(Self::Bullets),
            "page_number" => Ok(Self::PageNumber),
            other => other
                .strip_prefix("media:")
                .and_then(|i| i.parse().ok())
                .map(Self::Media)
                .ok_or_else(|| format!("unknown box {other:?}")),
        }
    }
}

impl From<BoxRef> for String {
    fn from(b: BoxRef) -> Self {
        b.to_string()
    }
}

impl TryFrom<String> for BoxRef {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedBox {
    pub element: BoxRef,
    pub rect: Rect,
    /// Drawn area of a chart inside `rect`; `None` means the whole box.
    #[serde(default)]
    pub content: Option<Rect>,
}

impl PlacedBox {
    pub fn drawn(&self) -> Rect {
        self.content.unwrap_or(self.rect)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlideGeometry {
    pub width: f64,
    pub height: f64,
    pub boxes: Vec<PlacedBox>,
}

impl SlideGeometry {
    pub fn get(&self, element: BoxRef) -> Option<&PlacedBox> {
        self.boxes.iter().find(|b| b.element == element)
    }
}

/// Every box inside the canvas, no two overlapping.
pub fn validate_geometry(geometry: &SlideGeometry) -> Result<(), LayoutError> {
    for b in &geometry.boxes {
        if !b.rect.inside_canvas() {
            return Err(LayoutError::GeometryViolation(format!("{} {:?} leaves the canvas", b.element, b.rect)));
        }
    }
    for (i, a) in geometry.boxes.iter().enumerate() {
        for b in &geometry.boxes[i + 1..] {
            if a.rect.overlaps(&b.rect) {
                return Err(LayoutError::GeometryViolation(format!("{} overlaps {}", a.element, b.element)));
            }
        }
    }
    Ok(())
}

fn fitted(media: &MediaRef, rect: Rect) -> Option<Rect> {
    match (media.kind, media.pixel_size) {
        (MediaKind::Chart, Some((w, h))) => Some(rect.fit(w as f64, h as f64)),
        _ => None,
    }
}

/// Default boxes for a slide, before hand-moved overrides.
fn default_boxes(slide: &Slide, params: &GenerationParams) -> Result<Vec<PlacedBox>, LayoutError> {
    let max_media = ((CANVAS_WIDTH - MARGIN) / (MIN_MEDIA_WIDTH + MARGIN)).floor() as usize;
    if slide.media.len() > max_media {
        return Err(LayoutError::Overflow { excess: slide.media[max_media..].to_vec() });
    }
    let mut boxes = Vec::new();
    if slide.template == Template::Title {
        boxes.push(PlacedBox {
            element: BoxRef::Title,
            rect: Rect::new(MARGIN, 240.0, CANVAS_WIDTH - 2.0 * MARGIN, 240.0),
            content: None,
        });
    } else {
        boxes.push(PlacedBox {
            element: BoxRef::Title,
            rect: Rect::new(MARGIN, 20.0, CANVAS_WIDTH - 2.0 * MARGIN, 90.0),
            content: None,
        });
        let n = slide.bullets.len() as f64;
        let cap = if slide.media.is_empty() { BULLET_CAP_ALONE } else { BULLET_CAP_WITH_MEDIA };
        let bullet_h = (BULLET_ROW * n).min(cap);
        if bullet_h > 0.0 {
            boxes.push(PlacedBox {
                element: BoxRef::Bullets,
                rect: Rect::new(MARGIN, BULLET_TOP, CANVAS_WIDTH - 2.0 * MARGIN, bullet_h),
                content: None,
            });
        }
        if !slide.media.is_empty() {
            let top = if bullet_h > 0.0 { BULLET_TOP + bullet_h + BAND_GAP } else { BULLET_TOP };
            let count = slide.media.len() as f64;
            let w = (CANVAS_WIDTH - MARGIN * (count + 1.0)) / count;
            for (i, media) in slide.media.iter().enumerate() {
                let rect = Rect::new(MARGIN + i as f64 * (w + MARGIN), top, w, CONTENT_BOTTOM - top);
                boxes.push(PlacedBox { element: BoxRef::Media(i), rect, content: fitted(media, rect) });
            }
        }
    }
    if params.page_numbers {
        boxes.push(PlacedBox { element: BoxRef::PageNumber, rect: PAGE_NUMBER_BOX, content: None });
    }
    Ok(boxes)
}

pub fn layout_slide(slide: &Slide, params: &GenerationParams) -> Result<SlideGeometry, LayoutError> {
    if slide.deleted {
        return Err(LayoutError::DeletedSlide);
    }
    let mut boxes = default_boxes(slide, params)?;
    for (key, rect) in &slide.box_overrides {
        let element: BoxRef = key.parse().map_err(LayoutError::GeometryViolation)?;
        if let Some(b) = boxes.iter_mut().find(|b| b.element == element) {
            b.rect = *rect;
            b.content = match element {
                BoxRef::Media(i) => fitted(&slide.media[i], *rect),
                _ => None,
            };
        }
    }
    let geometry = SlideGeometry { width: CANVAS_WIDTH, height: CANVAS_HEIGHT, boxes };
    validate_geometry(&geometry)?;
    Ok(geometry)
}

/// Geometries of the visible slides, in deck order.
pub fn deck_geometries(deck: &[Slide], params: &GenerationParams) -> Result<Vec<SlideGeometry>, LayoutError> {
    deck.iter().filter(|s| !s.deleted).map(|s| layout_slide(s, params)).collect()
}
