//! Session store: commands, single-writer commits and the on-disk log.
//!
//! With a log directory every session writes `<id>.jsonl` (one
//! [`LogRecord`] per event) and, every [`SNAPSHOT_EVERY`] revisions,
//! `<id>.snapshot.json`. Opening the store replays the snapshot plus the
//! newer log records.

use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::event::{Event, LogRecord, SlideEdit};
use super::state::{DiffSummary, LinkTargets, SessionState};
use super::SessionError;
use crate::export::{export_html, export_pptx};
use crate::ids::{CellId, ItemId, SessionId, SlideId};
use crate::keywords::{extract_keywords, heuristic_keywords};
use crate::lm::{fan_out, BackendKind, LmGateway};
use crate::notebook::{parse_notebook, NotebookCell, OverviewCard};
use crate::outline::{DraftItem, OutlineItem, OutlineLevel, OutlineTree};
use crate::retrieval::{flatten_outline, retrieve_cells, OutlineUnit, ScoredCell};
use crate::slides::{
    build_slide, deck_geometries, generate_bullet, generate_title, layout_slide, Bullet, GenerationParams, Slide,
    MANUAL_RELEVANCE,
};
use crate::topics::{extract_topic_candidates, recommend_topics, recommendation_context, RecommendOptions, TopicCandidateSet};

pub const SNAPSHOT_EVERY: u64 = 100;

#[derive(Debug, Clone)]
pub struct SessionConfig {
    /// Where session logs live; `None` keeps sessions in memory only.
    pub log_dir: Option<PathBuf>,
    pub snapshot_every: u64,
    /// Regenerate bullets of retained cells on update. Manually edited
    /// bullets are kept either way.
    pub resummarize_on_update: bool,
    pub recommend: RecommendOptions,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            log_dir: None,
            snapshot_every: SNAPSHOT_EVERY,
            resummarize_on_update: false,
            recommend: RecommendOptions::default(),
        }
    }
}

/// Outline submitted by a client: flat items with ids, nested drafts, or the
/// plain-text format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutlineInput {
    Items { items: Vec<OutlineItem> },
    Drafts { topics: Vec<DraftItem> },
    PlainText { text: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    /// `None` keeps the session's current parameters.
    #[serde(default)]
    pub params: Option<GenerationParams>,
    /// Rebuild every visible slide, not only dirty or new ones.
    #[serde(default)]
    pub force: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitReport {
    pub item_id: ItemId,
    pub text: String,
    pub context: String,
    pub rebuilt: bool,
    /// Cells retrieved for a rebuilt unit.
    pub retrieved: Option<usize>,
    pub bullets: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub revision: u64,
    pub units: Vec<UnitReport>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateOutcome {
    pub deck: Vec<Slide>,
    pub report: GenerationReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindMode {
    Bind,
    Unbind,
}

/// What the UI renders: everything but the notebook.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub session_id: SessionId,
    pub revision: u64,
    pub outline: Vec<OutlineItem>,
    pub deck: Vec<Slide>,
    pub params: GenerationParams,
    pub dirty: Vec<ItemId>,
    pub last_diff: Option<DiffSummary>,
}

impl From<&SessionState> for StateView {
    fn from(state: &SessionState) -> Self {
        Self {
            session_id: state.session_id.clone(),
            revision: state.revision,
            outline: state.outline.items().to_vec(),
            deck: state.deck.clone(),
            params: state.params,
            dirty: state.outline.dirty_items(),
            last_diff: state.last_diff.clone(),
        }
    }
}

struct Session {
    state: RwLock<Arc<SessionState>>,
    /// Held for the whole of a command; owns the log file.
    writer: Mutex<Option<File>>,
    candidates: RwLock<Option<Arc<TopicCandidateSet>>>,
}

pub struct Store {
    gw: Arc<LmGateway>,
    config: SessionConfig,
    sessions: RwLock<HashMap<SessionId, Arc<Session>>>,
}

fn persistence(e: impl std::fmt::Display) -> SessionError {
    SessionError::Persistence(e.to_string())
}

impl Store {
    /// Opens the store, replaying every session log found in `log_dir`.
    pub fn new(gw: Arc<LmGateway>, config: SessionConfig) -> Result<Self, SessionError> {
        let store = Self { gw, config, sessions: RwLock::new(HashMap::new()) };
        if let Some(dir) = &store.config.log_dir {
            std::fs::create_dir_all(dir).map_err(persistence)?;
            let mut logs: Vec<PathBuf> = std::fs::read_dir(dir)
                .map_err(persistence)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            logs.sort();
            for path in logs {
                let (id, session) = store.load(&path)?;
                store.sessions.write().unwrap().insert(id, Arc::new(session));
            }
        }
        Ok(store)
    }

    pub fn in_memory(gw: Arc<LmGateway>) -> Self {
        Self::new(gw, SessionConfig::default()).expect("no log directory to read")
    }

    pub fn gateway(&self) -> &LmGateway {
        &self.gw
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn session_ids(&self) -> Vec<SessionId> {
        let mut ids: Vec<SessionId> = self.sessions.read().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }

    fn log_path(&self, id: &SessionId) -> Option<PathBuf> {
        self.config.log_dir.as_ref().map(|d| d.join(format!("{id}.jsonl")))
    }

    fn snapshot_path(&self, id: &SessionId) -> Option<PathBuf> {
        self.config.log_dir.as_ref().map(|d| d.join(format!("{id}.snapshot.json")))
    }

    fn load(&self, path: &Path) -> Result<(SessionId, Session), SessionError> {
        let file = File::open(path).map_err(persistence)?;
        let mut records = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(persistence)?;
            if line.trim().is_empty() {
                continue;
            }
            let record: LogRecord = serde_json::from_str(&line)
                .map_err(|e| persistence(format!("{}:{}: {e}", path.display(), n + 1)))?;
            records.push(record);
        }
        let first = records.first().ok_or_else(|| persistence(format!("{} is empty", path.display())))?;
        let Event::Created { session_id, notebook, keywords } = first.event().map_err(persistence)? else {
            return Err(persistence(format!("{} does not start with `created`", path.display())));
        };
        let mut state = match self.snapshot_path(&session_id).filter(|p| p.exists()) {
            Some(snap) => {
                let text = std::fs::read_to_string(&snap).map_err(persistence)?;
                serde_json::from_str::<SessionState>(&text).map_err(persistence)?
            }
            None => SessionState::new(session_id.clone(), notebook, keywords),
        };
        let base = state.revision;
        for record in records.iter().skip(1).filter(|r| r.revision > base) {
            if record.revision != state.revision + 1 {
                return Err(persistence(format!("{}: revision gap before {}", path.display(), record.revision)));
            }
            state.apply(&record.event().map_err(persistence)?)?;
        }
        let file = OpenOptions::new().append(true).open(path).map_err(persistence)?;
        let session = Session {
            state: RwLock::new(Arc::new(state)),
            writer: Mutex::new(Some(file)),
            candidates: RwLock::new(None),
        };
        Ok((session_id, session))
    }

    fn session(&self, id: &SessionId) -> Result<Arc<Session>, SessionError> {
        self.sessions.read().unwrap().get(id).cloned().ok_or_else(|| SessionError::UnknownSession(id.clone()))
    }

    /// Consistent read-only snapshot at the latest revision.
    pub fn snapshot(&self, id: &SessionId) -> Result<Arc<SessionState>, SessionError> {
        Ok(self.session(id)?.state.read().unwrap().clone())
    }

    pub fn view(&self, id: &SessionId) -> Result<StateView, SessionError> {
        Ok(StateView::from(self.snapshot(id)?.as_ref()))
    }

    fn append(&self, file: &mut Option<File>, record: &LogRecord) -> Result<(), SessionError> {
        if let Some(file) = file {
            let mut line = serde_json::to_string(record).map_err(persistence)?;
            line.push('\n');
            file.write_all(line.as_bytes()).map_err(persistence)?;
            file.flush().map_err(persistence)?;
        }
        Ok(())
    }

    fn write_snapshot(&self, state: &SessionState) -> Result<(), SessionError> {
        if let Some(path) = self.snapshot_path(&state.session_id) {
            let tmp = path.with_extension("json.tmp");
            std::fs::write(&tmp, serde_json::to_vec(state).map_err(persistence)?).map_err(persistence)?;
            std::fs::rename(&tmp, &path).map_err(persistence)?;
        }
        Ok(())
    }

    /// Applies `event` to a copy, logs it, then publishes the copy. The
    /// caller holds the writer lock.
    fn commit(
        &self,
        session: &Session,
        file: &mut Option<File>,
        event: Event,
    ) -> Result<Arc<SessionState>, SessionError> {
        let current = session.state.read().unwrap().clone();
        let mut next = (*current).clone();
        next.apply(&event)?;
        self.append(file, &LogRecord::new(next.revision, &event))?;
        if self.config.snapshot_every > 0 && next.revision.is_multiple_of(self.config.snapshot_every) {
            self.write_snapshot(&next)?;
        }
        let next = Arc::new(next);
        *session.state.write().unwrap() = next.clone();
        Ok(next)
    }

    /// Parses the notebook and opens a session with heuristic keywords.
    pub fn create_session(&self, bytes: &[u8]) -> Result<(SessionId, Vec<OverviewCard>), SessionError> {
        let notebook = parse_notebook(bytes)?;
        let keywords = heuristic_keywords(&notebook);
        let id = SessionId(uuid::Uuid::new_v4().simple().to_string());
        let event = Event::Created { session_id: id.clone(), notebook: notebook.clone(), keywords: keywords.clone() };
        let state = SessionState::new(id.clone(), notebook, keywords);
        let mut file = match self.log_path(&id) {
            Some(path) => Some(
                OpenOptions::new().create_new(true).append(true).open(&path).map_err(persistence)?,
            ),
            None => None,
        };
        self.append(&mut file, &LogRecord::new(0, &event))?;
        let cards = state.cards();
        let session = Session {
            state: RwLock::new(Arc::new(state)),
            writer: Mutex::new(file),
            candidates: RwLock::new(None),
        };
        self.sessions.write().unwrap().insert(id.clone(), Arc::new(session));
        Ok((id, cards))
    }

    /// Replaces heuristic keywords with model keywords. Returns `false` when
    /// nothing changed: heuristic backend, or keywords replaced meanwhile.
    pub fn refresh_keywords(&self, id: &SessionId) -> Result<bool, SessionError> {
        if self.gw.backend() == BackendKind::Heuristic {
            return Ok(false);
        }
        let session = self.session(id)?;
        let start = self.snapshot(id)?;
        let keywords = extract_keywords(&start.notebook, &self.gw)?;
        let mut file = session.writer.lock().unwrap();
        if session.state.read().unwrap().keywords_version != start.keywords_version {
            return Ok(false);
        }
        self.commit(&session, &mut file, Event::KeywordsRefreshed { keywords })?;
        Ok(true)
    }

    pub fn overview(&self, id: &SessionId) -> Result<Vec<OverviewCard>, SessionError> {
        Ok(self.snapshot(id)?.cards())
    }

    pub fn replace_outline(&self, id: &SessionId, input: OutlineInput) -> Result<DiffSummary, SessionError> {
        let session = self.session(id)?;
        let mut file = session.writer.lock().unwrap();
        let state = session.state.read().unwrap().clone();
        let outline = match input {
            OutlineInput::Items { items } => OutlineTree::from_items(items)?,
            OutlineInput::Drafts { topics } => OutlineTree::from_drafts(&topics, state.fresh_item_ids())?,
            OutlineInput::PlainText { text } => {
                let parsed = OutlineTree::parse_plain_text(&text)?;
                let drafts = reuse_ids(parsed.to_drafts(), &state.outline);
                OutlineTree::from_drafts(&drafts, state.fresh_item_ids())?
            }
        };
        let next = self.commit(&session, &mut file, Event::OutlineReplaced { outline })?;
        Ok(next.last_diff.clone().unwrap_or_default())
    }

    /// Topic candidates, extracted on first use and cached.
    pub fn candidates(&self, id: &SessionId) -> Result<Arc<TopicCandidateSet>, SessionError> {
        let session = self.session(id)?;
        if let Some(cached) = session.candidates.read().unwrap().clone() {
            return Ok(cached);
        }
        let notebook = session.state.read().unwrap().notebook.clone();
        let set = Arc::new(extract_topic_candidates(&notebook, &self.gw)?);
        *session.candidates.write().unwrap() = Some(set.clone());
        Ok(set)
    }

    /// At most ten topics for the outline item `item`. Read-only.
    pub fn recommend(&self, id: &SessionId, item: &ItemId) -> Result<Vec<String>, SessionError> {
        let state = self.snapshot(id)?;
        let context = recommendation_context(&state.outline, item)?;
        let candidates = self.candidates(id)?;
        Ok(recommend_topics(&candidates, &context, self.config.recommend, &self.gw)?)
    }

    fn rebuild_unit(
        &self,
        state: &SessionState,
        unit: &OutlineUnit,
        params: &GenerationParams,
        id: SlideId,
    ) -> Result<(Slide, usize), SessionError> {
        let notebook = &state.notebook;
        let existing = state.slide_for_item(&unit.item_id);
        let pinned: Vec<CellId> =
            existing.map(|s| s.pinned.clone()).unwrap_or_default().into_iter().filter(|c| notebook.cell(c).is_some()).collect();
        let excluded: HashSet<&CellId> = existing.map(|s| s.excluded.iter().collect()).unwrap_or_default();
        let retrieved = retrieve_cells(unit, notebook, &self.gw, params.include_markdown)?;
        let room = params.top_k.saturating_sub(pinned.len());
        let mut cells: Vec<ScoredCell> =
            pinned.iter().map(|c| ScoredCell { cell_id: c.clone(), score: MANUAL_RELEVANCE }).collect();
        cells.extend(
            retrieved
                .iter()
                .filter(|s| !pinned.contains(&s.cell_id) && !excluded.contains(&s.cell_id))
                .take(room)
                .cloned(),
        );
        let reuse: HashMap<CellId, Bullet> = existing
            .map(|s| {
                s.bullets
                    .iter()
                    .filter(|b| b.manually_edited || !self.config.resummarize_on_update)
                    .map(|b| (b.source_cell.clone(), b.clone()))
                    .collect()
            })
            .unwrap_or_default();
        let mut slide = build_slide(
            id,
            &unit.item_text,
            Some(unit.item_id.clone()),
            &cells,
            notebook,
            params.detail_level,
            &self.gw,
            &reuse,
        )?;
        if let Some(old) = existing {
            slide.pinned = pinned;
            slide.excluded = old.excluded.clone();
            if old.template_locked {
                slide.template = old.template;
                slide.template_locked = true;
            }
        }
        Ok((slide, retrieved.len()))
    }

    /// Rebuilds the slides of dirty or new leaves (all visible leaves with
    /// `force`), keeps every other slide verbatim and clears dirty flags.
    pub fn generate(&self, id: &SessionId, request: GenerateRequest) -> Result<GenerateOutcome, SessionError> {
        let session = self.session(id)?;
        let mut file = session.writer.lock().unwrap();
        let state = session.state.read().unwrap().clone();
        let params = request.params.unwrap_or(state.params);
        params.validate()?;
        let units = flatten_outline(&state.outline);
        let targets: Vec<&OutlineUnit> = units
            .iter()
            .filter(|u| {
                let item = state.outline.get(&u.item_id).expect("unit item exists");
                !item.hidden && (request.force || item.dirty || item.slide.is_none())
            })
            .collect();
        let mut fresh = state.fresh_slide_ids(targets.len()).into_iter();
        let ids: Vec<SlideId> = targets
            .iter()
            .map(|u| match state.slide_for_item(&u.item_id) {
                Some(s) => s.id.clone(),
                None => fresh.next().expect("one fresh id per target"),
            })
            .collect();
        let jobs: Vec<(&OutlineUnit, SlideId)> = targets.iter().copied().zip(ids).collect();
        let built = fan_out(&jobs, self.gw.fan_out_width(), |(unit, slide_id)| {
            self.rebuild_unit(&state, unit, &params, slide_id.clone())
        });
        let mut slides = Vec::new();
        let mut retrieved: HashMap<ItemId, usize> = HashMap::new();
        for ((unit, _), result) in jobs.iter().zip(built) {
            let (slide, count) = result?;
            retrieved.insert(unit.item_id.clone(), count);
            slides.push(slide);
        }
        let next = self.commit(&session, &mut file, Event::DeckGenerated { params, slides })?;

        let mut report = GenerationReport { revision: next.revision, ..GenerationReport::default() };
        for unit in &units {
            let slide = next.slide_for_item(&unit.item_id);
            let count = retrieved.get(&unit.item_id).copied();
            if count == Some(0) {
                report.warnings.push(format!("no cells matched outline item {:?} ({})", unit.item_text, unit.item_id));
            }
            report.units.push(UnitReport {
                item_id: unit.item_id.clone(),
                text: unit.item_text.clone(),
                context: unit.context_text.clone(),
                rebuilt: count.is_some(),
                retrieved: count,
                bullets: slide.map_or(0, |s| s.bullets.len()),
            });
        }
        for slide in next.visible_deck() {
            if let Err(e) = layout_slide(slide, &next.params) {
                report.warnings.push(format!("slide {}: {e}", slide.id));
            }
        }
        Ok(GenerateOutcome { deck: next.deck.clone(), report })
    }

    fn checked_cells<'a>(state: &'a SessionState, cells: &[CellId]) -> Result<Vec<&'a NotebookCell>, SessionError> {
        let mut seen = HashSet::new();
        let mut found = Vec::new();
        for id in cells {
            let cell = state.notebook.cell(id).ok_or_else(|| SessionError::UnknownCell(id.clone()))?;
            if seen.insert(id) {
                found.push(cell);
            }
        }
        Ok(found)
    }

    /// Binds cells (appending bullets with relevance 1.0) or unbinds them
    /// (removing their bullets). Other bullets are left untouched.
    pub fn bind_cells(
        &self,
        id: &SessionId,
        slide_id: &SlideId,
        cells: &[CellId],
        mode: BindMode,
    ) -> Result<Slide, SessionError> {
        let session = self.session(id)?;
        let mut file = session.writer.lock().unwrap();
        let state = session.state.read().unwrap().clone();
        let mut slide = state.slide(slide_id).cloned().ok_or_else(|| SessionError::UnknownSlide(slide_id.clone()))?;
        let cells = Self::checked_cells(&state, cells)?;
        let mut dirty = false;
        match mode {
            BindMode::Bind => {
                let new: Vec<&NotebookCell> =
                    cells.into_iter().filter(|c| !slide.bound_cells.contains(&c.id)).collect();
                let texts = fan_out(&new, self.gw.fan_out_width(), |cell| {
                    generate_bullet(cell, state.params.detail_level, &self.gw)
                });
                for (cell, text) in new.iter().zip(texts) {
                    let text = match text {
                        Ok(text) => text,
                        Err(crate::slides::SlideError::EmptyCell(_)) => format!("Cell {} has no source", cell.index),
                        Err(e) => return Err(e.into()),
                    };
                    slide.bullets.push(Bullet {
                        text,
                        source_cell: cell.id.clone(),
                        relevance: MANUAL_RELEVANCE,
                        manually_edited: false,
                    });
                    if !slide.pinned.contains(&cell.id) {
                        slide.pinned.push(cell.id.clone());
                    }
                    dirty = true;
                }
            }
            BindMode::Unbind => {
                for cell in cells {
                    if !slide.bound_cells.contains(&cell.id) {
                        continue;
                    }
                    slide.bullets.retain(|b| b.source_cell != cell.id);
                    if let Some(pos) = slide.pinned.iter().position(|c| c == &cell.id) {
                        slide.pinned.remove(pos);
                    } else if !slide.excluded.contains(&cell.id) {
                        slide.excluded.push(cell.id.clone());
                    }
                }
            }
        }
        slide.refresh(&state.notebook);
        let next = self.commit(&session, &mut file, Event::SlideRebuilt { slide, dirty })?;
        Ok(next.slide(slide_id).cloned().expect("slide exists"))
    }

    /// New topic slide from hand-picked cells, placed after the topic of
    /// `insert_after` (or last).
    pub fn add_manual_slide(
        &self,
        id: &SessionId,
        cells: &[CellId],
        insert_after: Option<&SlideId>,
    ) -> Result<(Slide, OutlineItem), SessionError> {
        if cells.is_empty() {
            return Err(SessionError::NoCellsSelected);
        }
        let session = self.session(id)?;
        let mut file = session.writer.lock().unwrap();
        let state = session.state.read().unwrap().clone();
        let mut selected = Self::checked_cells(&state, cells)?;
        selected.sort_by_key(|c| c.index);
        let after = match insert_after {
            Some(sid) => {
                let slide = state.slide(sid).ok_or_else(|| SessionError::UnknownSlide(sid.clone()))?;
                slide.source_unit.as_ref().and_then(|u| state.outline.topic_of(u)).map(|t| t.id.clone())
            }
            None => None,
        };
        let title = generate_title(&selected, &state.keywords, &self.gw)?;
        let scored: Vec<ScoredCell> =
            selected.iter().map(|c| ScoredCell { cell_id: c.id.clone(), score: MANUAL_RELEVANCE }).collect();
        let item_id = (state.fresh_item_ids())();
        let slide_id = state.fresh_slide_ids(1).remove(0);
        let mut slide = build_slide(
            slide_id.clone(),
            &title,
            Some(item_id.clone()),
            &scored,
            &state.notebook,
            state.params.detail_level,
            &self.gw,
            &HashMap::new(),
        )?;
        slide.pinned = selected.iter().map(|c| c.id.clone()).collect();
        let item = OutlineItem {
            id: item_id.clone(),
            text: title,
            level: OutlineLevel::Topic,
            parent: None,
            order: 0,
            dirty: false,
            slide: Some(slide_id.clone()),
            hidden: false,
        };
        let next = self.commit(&session, &mut file, Event::ManualSlideAdded { slide, item, after })?;
        Ok((
            next.slide(&slide_id).cloned().expect("slide added"),
            next.outline.get(&item_id).cloned().expect("item added"),
        ))
    }

    pub fn edit_slide(&self, id: &SessionId, slide_id: &SlideId, edit: SlideEdit) -> Result<StateView, SessionError> {
        let session = self.session(id)?;
        let mut file = session.writer.lock().unwrap();
        let next = self.commit(&session, &mut file, Event::SlideEdited { slide_id: slide_id.clone(), edit })?;
        Ok(StateView::from(next.as_ref()))
    }

    pub fn linkage(&self, id: &SessionId, reference: &str) -> Result<LinkTargets, SessionError> {
        self.snapshot(id)?.linkage(reference)
    }

    pub fn export_pptx(&self, id: &SessionId) -> Result<Vec<u8>, SessionError> {
        let state = self.snapshot(id)?;
        let geometries = deck_geometries(&state.deck, &state.params).map_err(crate::export::ExportError::from)?;
        Ok(export_pptx(&state.deck, &geometries, &state.params, &state.notebook)?)
    }

    pub fn export_html(&self, id: &SessionId, present: bool) -> Result<String, SessionError> {
        let state = self.snapshot(id)?;
        let geometries = deck_geometries(&state.deck, &state.params).map_err(crate::export::ExportError::from)?;
        Ok(export_html(&state.deck, &geometries, &state.params, &state.notebook, present)?)
    }
}

/// Plain-text outlines carry no ids: each line takes the id of the first
/// unclaimed current item with the same level and text, else a fresh one.
fn reuse_ids(drafts: Vec<DraftItem>, current: &OutlineTree) -> Vec<DraftItem> {
    let mut claimed: HashSet<ItemId> = HashSet::new();
    let mut claim = |text: &str, level: OutlineLevel| {
        let found = current
            .items()
            .iter()
            .find(|i| i.level == level && i.text == text && !claimed.contains(&i.id))
            .map(|i| i.id.clone());
        if let Some(id) = &found {
            claimed.insert(id.clone());
        }
        found
    };
    drafts
        .into_iter()
        .map(|topic| DraftItem {
            id: claim(&topic.text, OutlineLevel::Topic),
            children: topic
                .children
                .into_iter()
                .map(|c| DraftItem { id: claim(&c.text, OutlineLevel::Subtopic), text: c.text, children: Vec::new() })
                .collect(),
            text: topic.text,
        })
        .collect()
}
