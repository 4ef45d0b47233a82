//! # deckforge
//!
//! Outline-driven slide decks from computational notebooks.
//!
//! A session starts from a parsed `.ipynb` file. Every cell gets a keyword
//! card for the overview. The user drafts a two-level outline, and each
//! lowest-level outline item is matched against the notebook to find its
//! most relevant cells. Those cells become a slide: the item text is the
//! title, one bullet per cell, charts and tables below. The outline, the
//! deck and the bound cells stay linked while the user edits, and the deck
//! exports to `.pptx` or a single-file HTML presentation.
//!
//! Every language-model backed step has a deterministic heuristic and a
//! replay backend, so the whole pipeline runs offline.
//!
//! ## Examples
//!
//! Each major capability has a runnable example under `examples/`:
//!
//! ```text
//! cargo run -p deckforge --example parse_notebook
//! cargo run -p deckforge --example overview_keywords
//! cargo run -p deckforge --example retrieve_cells
//! cargo run -p deckforge --example recommend_topics
//! cargo run -p deckforge --example generate_deck
//! cargo run -p deckforge --example session_edits
//! cargo run -p deckforge --example export_deck
//! cargo run -p deckforge --example replay_backend
//! cargo run -p deckforge --example http_service
//! cargo run -p deckforge --example record_fixtures
//! ```

pub mod export;
pub mod ids;
pub mod keywords;
pub mod lm;
pub mod notebook;
pub mod outline;
pub mod retrieval;
pub mod service;
pub mod session;
pub mod slides;
pub mod text;
pub mod topics;

pub use ids::{CellId, ItemId, SessionId, SlideId};
pub use lm::{BackendKind, LmConfig, LmGateway};
pub use notebook::{parse_notebook, CellKind, MediaItem, MediaKind, Notebook, NotebookCell};
pub use outline::{OutlineItem, OutlineLevel, OutlineTree};
pub use session::{SessionError, Store};
pub use slides::{DetailLevel, GenerationParams, Slide};
