//! Session state and the pure event application.
//!
//! Invariants held at every revision (see [`SessionState::check_invariants`]):
//!
//! * deck order equals the order of the outline leaves that have slides,
//!   hidden ones included, so visible deck order equals visible leaf order;
//! * `item.slide` and `slide.source_unit` point at each other and the item
//!   is a leaf;
//! * a slide is deleted exactly when its item is hidden.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::event::{Event, SlideEdit};
use super::SessionError;
use crate::ids::{CellId, ItemId, SessionId, SlideId};
use crate::keywords::KeywordMap;
use crate::notebook::{build_overview, Notebook, OverviewCard};
use crate::outline::{OutlineItem, OutlineTree};
use crate::retrieval::ScoredCell;
use crate::slides::{layout_slide, GenerationParams, Slide, Template};

/// Result of replacing the outline.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffSummary {
    pub added: Vec<ItemId>,
    pub modified: Vec<ItemId>,
    pub moved: Vec<ItemId>,
    pub deleted: Vec<ItemId>,
    /// Items dirtied by this replacement.
    pub changed: Vec<ItemId>,
    /// Every dirty item after the replacement.
    pub dirty: Vec<ItemId>,
    /// Slides dropped because their item was deleted or gained children.
    pub dropped_slides: Vec<SlideId>,
}

/// Everything linked to one item, slide or cell.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinkTargets {
    pub item: Option<ItemId>,
    pub slide: Option<SlideId>,
    /// Bound cells with their relevance, in bullet order.
    pub cells: Vec<ScoredCell>,
    /// Notebook index of the first bound cell.
    pub scroll_to: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: SessionId,
    pub notebook: Arc<Notebook>,
    pub keywords: KeywordMap,
    /// Bumped when keywords are replaced; guards background refreshes.
    pub keywords_version: u64,
    pub outline: OutlineTree,
    pub deck: Vec<Slide>,
    pub params: GenerationParams,
    pub revision: u64,
    #[serde(default)]
    pub last_diff: Option<DiffSummary>,
    next_item: u64,
    next_slide: u64,
}

fn numeric_suffix(id: &str, prefix: char) -> Option<u64> {
    id.strip_prefix(prefix)?.parse().ok()
}

/// Longest common subsequence of two id sequences.
fn lcs<'a>(a: &[&'a ItemId], b: &[&'a ItemId]) -> HashSet<&'a ItemId> {
    let (n, m) = (a.len(), b.len());
    let mut table = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[i][j] = if a[i] == b[j] { table[i + 1][j + 1] + 1 } else { table[i + 1][j].max(table[i][j + 1]) };
        }
    }
    let (mut i, mut j) = (0, 0);
    let mut keep = HashSet::new();
    while i < n && j < m {
        if a[i] == b[j] {
            keep.insert(a[i]);
            i += 1;
            j += 1;
        } else if table[i + 1][j] >= table[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    keep
}

impl SessionState {
    pub fn new(session_id: SessionId, notebook: Notebook, keywords: KeywordMap) -> Self {
        Self {
            session_id,
            notebook: Arc::new(notebook),
            keywords,
            keywords_version: 0,
            outline: OutlineTree::new(),
            deck: Vec::new(),
            params: GenerationParams::default(),
            revision: 0,
            last_diff: None,
            next_item: 1,
            next_slide: 1,
        }
    }

    pub fn cards(&self) -> Vec<OverviewCard> {
        build_overview(&self.notebook, &self.keywords).expect("keywords cover every cell")
    }

    /// The next item id `i<n>` not yet used.
    pub fn fresh_item_ids(&self) -> impl FnMut() -> ItemId {
        let mut next = self.next_item;
        let taken: HashSet<ItemId> = self.outline.items().iter().map(|i| i.id.clone()).collect();
        move || loop {
            let id = ItemId(format!("i{next}"));
            next += 1;
            if !taken.contains(&id) {
                return id;
            }
        }
    }

    /// Ids `s<n>` for `count` new slides.
    pub fn fresh_slide_ids(&self, count: usize) -> Vec<SlideId> {
        (0..count as u64).map(|k| SlideId(format!("s{}", self.next_slide + k))).collect()
    }

    pub fn slide(&self, id: &SlideId) -> Option<&Slide> {
        self.deck.iter().find(|s| &s.id == id)
    }

    fn slide_mut(&mut self, id: &SlideId) -> Result<&mut Slide, SessionError> {
        self.deck.iter_mut().find(|s| &s.id == id).ok_or_else(|| SessionError::UnknownSlide(id.clone()))
    }

    pub fn slide_for_item(&self, item: &ItemId) -> Option<&Slide> {
        self.deck.iter().find(|s| s.source_unit.as_ref() == Some(item))
    }

    pub fn visible_deck(&self) -> Vec<&Slide> {
        self.deck.iter().filter(|s| !s.deleted).collect()
    }

    fn bump_counters(&mut self) {
        for item in self.outline.items() {
            if let Some(n) = numeric_suffix(item.id.as_str(), 'i') {
                self.next_item = self.next_item.max(n + 1);
            }
        }
        for slide in &self.deck {
            if let Some(n) = numeric_suffix(slide.id.as_str(), 's') {
                self.next_slide = self.next_slide.max(n + 1);
            }
        }
    }

    /// Orders the deck by outline leaf order.
    fn sort_deck(&mut self) {
        let position: HashMap<&ItemId, usize> = self.outline.leaves().enumerate().map(|(i, item)| (&item.id, i)).collect();
        let mut deck = std::mem::take(&mut self.deck);
        deck.sort_by_key(|s| s.source_unit.as_ref().and_then(|u| position.get(u).copied()).unwrap_or(usize::MAX));
        self.deck = deck;
    }

    /// Applies one event. Fails without side effects on the caller's copy
    /// only if the caller applies to a clone, which the store always does.
    pub fn apply(&mut self, event: &Event) -> Result<(), SessionError> {
        match event {
            Event::Created { .. } => {
                return Err(SessionError::Inconsistent("session already created".into()));
            }
            Event::OutlineReplaced { outline } => {
                let diff = self.sync_outline(outline.clone())?;
                self.last_diff = Some(diff);
            }
            Event::DeckGenerated { params, slides } => self.apply_generated(*params, slides)?,
            Event::SlideRebuilt { slide, dirty } => {
                let current = self.slide_mut(&slide.id)?;
                *current = slide.clone();
                if *dirty {
                    if let Some(item) = slide.source_unit.as_ref().and_then(|u| self.outline.get_mut(u)) {
                        item.dirty = true;
                    }
                }
            }
            Event::ManualSlideAdded { slide, item, after } => {
                if self.slide(&slide.id).is_some() {
                    return Err(SessionError::Inconsistent(format!("slide {} exists", slide.id)));
                }
                let mut item = item.clone();
                item.slide = Some(slide.id.clone());
                self.outline.insert_topic_after(item, after.as_ref()).map_err(SessionError::from)?;
                self.deck.push(slide.clone());
                self.sort_deck();
            }
            Event::SlideEdited { slide_id, edit } => self.apply_edit(slide_id, edit)?,
            Event::KeywordsRefreshed { keywords } => {
                self.keywords = keywords.clone();
                self.keywords_version += 1;
            }
        }
        self.bump_counters();
        self.revision += 1;
        Ok(())
    }

    fn sync_outline(&mut self, new: OutlineTree) -> Result<DiffSummary, SessionError> {
        let old = &self.outline;
        let mut diff = DiffSummary::default();
        let mut items: Vec<OutlineItem> = new.items().to_vec();
        let mut dirty: BTreeSet<ItemId> = BTreeSet::new();

        for item in &mut items {
            match old.get(&item.id) {
                None => {
                    item.dirty = true;
                    item.slide = None;
                    item.hidden = false;
                    diff.added.push(item.id.clone());
                    dirty.insert(item.id.clone());
                }
                Some(prev) => {
                    let changed = prev.text != item.text || prev.level != item.level || prev.parent != item.parent;
                    item.dirty = prev.dirty;
                    item.slide = prev.slide.clone();
                    item.hidden = prev.hidden;
                    if changed {
                        diff.modified.push(item.id.clone());
                        dirty.insert(item.id.clone());
                    }
                }
            }
        }

        // Reordering within a sibling group: items off the longest common
        // subsequence of old and new order moved.
        let mut groups: Vec<Option<&ItemId>> = vec![None];
        groups.extend(new.topics().map(|t| Some(&t.id)));
        for parent in groups {
            let new_seq: Vec<&ItemId> = new
                .items()
                .iter()
                .filter(|i| i.parent.as_ref() == parent)
                .filter(|i| old.get(&i.id).is_some_and(|p| p.parent.as_ref() == parent))
                .map(|i| &i.id)
                .collect();
            let members: HashSet<&ItemId> = new_seq.iter().copied().collect();
            let old_seq: Vec<&ItemId> = old
                .items()
                .iter()
                .filter(|i| i.parent.as_ref() == parent && members.contains(&i.id))
                .map(|i| &i.id)
                .collect();
            let keep = lcs(&old_seq, &new_seq);
            for id in new_seq.into_iter().filter(|id| !keep.contains(id)) {
                diff.moved.push(id.clone());
                dirty.insert(id.clone());
            }
        }

        let present: HashSet<&ItemId> = new.items().iter().map(|i| &i.id).collect();
        for gone in old.items().iter().filter(|i| !present.contains(&i.id)) {
            diff.deleted.push(gone.id.clone());
            if let Some(parent) = gone.parent.as_ref().filter(|p| present.contains(p)) {
                dirty.insert(parent.clone());
            }
        }
        for item in new.items() {
            if new.is_leaf(&item.id) && old.get(&item.id).is_some_and(|p| !old.is_leaf(&p.id)) {
                dirty.insert(item.id.clone());
            }
        }

        for item in &mut items {
            if dirty.contains(&item.id) {
                item.dirty = true;
            }
        }
        let mut tree = OutlineTree::from_items(items)?;

        let mut kept = Vec::new();
        for slide in std::mem::take(&mut self.deck) {
            let alive = slide.source_unit.as_ref().is_some_and(|u| tree.is_leaf(u));
            if alive {
                kept.push(slide);
            } else {
                if let Some(item) = slide.source_unit.as_ref().and_then(|u| tree.get_mut(u)) {
                    item.slide = None;
                    item.hidden = false;
                }
                diff.dropped_slides.push(slide.id.clone());
            }
        }
        self.deck = kept;
        self.outline = tree;
        self.sort_deck();
        diff.changed = dirty.into_iter().collect();
        diff.dirty = self.outline.dirty_items();
        Ok(diff)
    }

    fn apply_generated(&mut self, params: GenerationParams, slides: &[Slide]) -> Result<(), SessionError> {
        for slide in slides {
            let unit = slide
                .source_unit
                .clone()
                .ok_or_else(|| SessionError::Inconsistent(format!("generated slide {} has no unit", slide.id)))?;
            if !self.outline.is_leaf(&unit) {
                return Err(SessionError::Inconsistent(format!("{unit} is not an outline leaf")));
            }
            match self.deck.iter_mut().find(|s| s.source_unit.as_ref() == Some(&unit)) {
                Some(existing) => *existing = slide.clone(),
                None => self.deck.push(slide.clone()),
            }
            self.outline.get_mut(&unit).expect("leaf exists").slide = Some(slide.id.clone());
        }
        for item in self.outline.items_mut() {
            item.dirty = false;
        }
        self.params = params;
        self.sort_deck();
        Ok(())
    }

    fn item_of(&self, slide_id: &SlideId) -> Result<Option<ItemId>, SessionError> {
        Ok(self.slide(slide_id).ok_or_else(|| SessionError::UnknownSlide(slide_id.clone()))?.source_unit.clone())
    }

    fn apply_edit(&mut self, slide_id: &SlideId, edit: &SlideEdit) -> Result<(), SessionError> {
        let item = self.item_of(slide_id)?;
        match edit {
            SlideEdit::Rename { title } => {
                self.slide_mut(slide_id)?.title = title.clone();
                if let Some(item) = item.and_then(|i| self.outline.get_mut(&i)) {
                    item.text = title.clone();
                    item.dirty = true;
                }
            }
            SlideEdit::EditBullet { index, text } => {
                let slide = self.slide_mut(slide_id)?;
                let count = slide.bullets.len();
                let bullet = slide
                    .bullets
                    .get_mut(*index)
                    .ok_or_else(|| SessionError::InvalidEdit(format!("bullet {index} of {count}")))?;
                bullet.text = text.clone();
                bullet.manually_edited = true;
            }
            SlideEdit::Reorder { to_index } => {
                let item = item.ok_or_else(|| SessionError::InvalidEdit("slide has no outline item".into()))?;
                self.reorder(&item, *to_index)?;
            }
            SlideEdit::Delete => {
                let slide = self.slide_mut(slide_id)?;
                if slide.deleted {
                    return Err(SessionError::InvalidEdit(format!("slide {slide_id} is already deleted")));
                }
                slide.deleted = true;
                if let Some(item) = item.and_then(|i| self.outline.get_mut(&i)) {
                    item.hidden = true;
                    item.dirty = true;
                }
            }
            SlideEdit::Restore => {
                let slide = self.slide_mut(slide_id)?;
                if !slide.deleted {
                    return Err(SessionError::InvalidRestore(slide_id.clone()));
                }
                slide.deleted = false;
                if let Some(item) = item.and_then(|i| self.outline.get_mut(&i)) {
                    item.hidden = false;
                }
            }
            SlideEdit::SetTemplate { template } => {
                let slide = self.slide_mut(slide_id)?;
                slide.template = *template;
                slide.template_locked = true;
                if *template == Template::Title {
                    slide.box_overrides.clear();
                }
            }
            SlideEdit::MoveBox { element, rect } => {
                let params = self.params;
                let slide = self.slide_mut(slide_id)?;
                let mut candidate = slide.clone();
                candidate.box_overrides.insert(element.to_string(), *rect);
                let geometry = layout_slide(&Slide { deleted: false, ..candidate.clone() }, &params)
                    .map_err(|e| SessionError::GeometryViolation(e.to_string()))?;
                if geometry.get(*element).is_none() {
                    return Err(SessionError::GeometryViolation(format!("slide has no {element} box")));
                }
                *slide = candidate;
            }
        }
        Ok(())
    }

    /// Position of `item` in the deck order implied by `tree`.
    fn deck_position(&self, tree: &OutlineTree, item: &ItemId) -> Option<usize> {
        tree.leaves().filter(|l| l.slide.is_some()).position(|l| &l.id == item)
    }

    /// Moves the item among its siblings so its slide lands at `to_index`.
    fn reorder(&mut self, item: &ItemId, to_index: usize) -> Result<(), SessionError> {
        if self.deck_position(&self.outline, item) == Some(to_index) {
            return Ok(());
        }
        let siblings = self.outline.siblings_of(item).len();
        for k in 0..siblings {
            let mut tree = self.outline.clone();
            tree.move_within_siblings(item, k)?;
            if self.deck_position(&tree, item) == Some(to_index) {
                tree.get_mut(item).expect("item exists").dirty = true;
                self.outline = tree;
                self.sort_deck();
                return Ok(());
            }
        }
        Err(SessionError::InvalidEdit(format!(
            "slide of {item} cannot reach position {to_index} by reordering its siblings"
        )))
    }

    /// Resolves `item:<id>`, `slide:<id>`, `cell:<id>` or a bare id (tried in
    /// that order).
    pub fn linkage(&self, reference: &str) -> Result<LinkTargets, SessionError> {
        let (kind, id) = match reference.split_once(':') {
            Some((k @ ("item" | "slide" | "cell"), id)) => (Some(k), id),
            _ => (None, reference),
        };
        let slide = match kind {
            Some("item") | None if self.outline.get(&ItemId::from(id)).is_some() => {
                let item = ItemId::from(id);
                match self.slide_for_item(&item) {
                    Some(slide) => Some(slide),
                    None => return Ok(LinkTargets { item: Some(item), ..LinkTargets::default() }),
                }
            }
            Some("slide") | None if self.slide(&SlideId::from(id)).is_some() => self.slide(&SlideId::from(id)),
            Some("cell") | None if self.notebook.cell(&CellId::from(id)).is_some() => {
                let cell = CellId::from(id);
                match self.deck.iter().find(|s| s.bound_cells.contains(&cell)) {
                    Some(slide) => Some(slide),
                    None => return Ok(LinkTargets::default()),
                }
            }
            _ => return Err(SessionError::UnknownRef(reference.to_string())),
        };
        let slide = slide.expect("resolved above");
        let cells: Vec<ScoredCell> = slide
            .bullets
            .iter()
            .map(|b| ScoredCell { cell_id: b.source_cell.clone(), score: b.relevance })
            .collect();
        let scroll_to = cells.iter().filter_map(|c| self.notebook.index_of(&c.cell_id)).min();
        Ok(LinkTargets { item: slide.source_unit.clone(), slide: Some(slide.id.clone()), cells, scroll_to })
    }

    /// Structural invariants; `Err` names the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let with_slides: Vec<&ItemId> = self.outline.leaves().filter(|l| l.slide.is_some()).map(|l| &l.id).collect();
        let deck_units: Vec<Option<&ItemId>> = self.deck.iter().map(|s| s.source_unit.as_ref()).collect();
        if deck_units != with_slides.iter().map(|i| Some(*i)).collect::<Vec<_>>() {
            return Err(format!("deck order {deck_units:?} differs from outline order {with_slides:?}"));
        }
        let visible_leaves: Vec<&ItemId> =
            self.outline.visible_leaves().filter(|l| l.slide.is_some()).map(|l| &l.id).collect();
        let visible_deck: Vec<&ItemId> = self.visible_deck().iter().filter_map(|s| s.source_unit.as_ref()).collect();
        if visible_leaves != visible_deck {
            return Err("visible deck order differs from visible outline order".into());
        }
        for slide in &self.deck {
            let unit = slide.source_unit.as_ref().ok_or_else(|| format!("slide {} has no item", slide.id))?;
            let item = self.outline.get(unit).ok_or_else(|| format!("slide {} points at missing {unit}", slide.id))?;
            if item.slide.as_ref() != Some(&slide.id) {
                return Err(format!("item {unit} does not link back to slide {}", slide.id));
            }
            if item.hidden != slide.deleted {
                return Err(format!("item {unit} hidden={} but slide deleted={}", item.hidden, slide.deleted));
            }
            if slide.bound_cells != slide.bullets.iter().map(|b| b.source_cell.clone()).collect::<Vec<_>>() {
                return Err(format!("slide {} bound cells differ from bullets", slide.id));
            }
            if slide.bullets.iter().any(|b| !(0.0..=1.0).contains(&b.relevance)) {
                return Err(format!("slide {} has a relevance outside [0, 1]", slide.id));
            }
        }
        for item in self.outline.items() {
            if let Some(slide) = &item.slide {
                if self.slide(slide).is_none() {
                    return Err(format!("item {} links missing slide {slide}", item.id));
                }
            }
        }
        Ok(())
    }
}
