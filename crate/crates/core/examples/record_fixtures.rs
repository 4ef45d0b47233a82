//! Records the replay fixtures for the house-prices scenario.
//!
//! Runs the whole scenario against a recording replay store, so every
//! prompt is answered by the heuristic rendered in the model's response
//! grammar, then patches the bullet of the scatter cell to a hand-written
//! sentence and writes the JSON Lines file.
//!
//! ```text
//! cargo run -p deckforge --example record_fixtures [-- OUT.jsonl]
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use deckforge::lm::{LmGateway, ReplayStore};
use deckforge::session::{BindMode, GenerateRequest, OutlineInput};
use deckforge::{CellId, Store};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
const SCATTER_CELL: &str = "c12";
const SCATTER_BULLET: &str = "Plotting a scatter plot between LotFrontage and SalePrice";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(FIXTURES).join("house_prices.replay.jsonl"));
    let notebook = std::fs::read(PathBuf::from(FIXTURES).join("house_prices.ipynb"))?;
    let outline = std::fs::read_to_string(PathBuf::from(FIXTURES).join("scenario_outline.txt"))?;

    let gw = Arc::new(LmGateway::with_replay(ReplayStore::recorder()));
    let store = Store::in_memory(gw.clone());
    let (id, _) = store.create_session(&notebook)?;
    store.refresh_keywords(&id)?;
    store.candidates(&id)?;
    store.replace_outline(&id, OutlineInput::PlainText { text: outline })?;
    let view = store.view(&id)?;
    for item in &view.outline {
        store.recommend(&id, &item.id)?;
    }
    let outcome = store.generate(&id, GenerateRequest::default())?;
    let target = view.outline.iter().find(|i| i.text == "Removing Outliers").ok_or("outline lacks Removing Outliers")?;
    let slide = outcome
        .deck
        .iter()
        .find(|s| s.source_unit.as_ref() == Some(&target.id))
        .ok_or("no slide for Removing Outliers")?;
    store.bind_cells(&id, &slide.id, &[CellId::from(SCATTER_CELL)], BindMode::Bind)?;

    let replay = gw.replay_store().expect("replay backend");
    let patched = replay.set_response_by_label(&format!("bullet {SCATTER_CELL}"), &format!("{SCATTER_BULLET}\n"));
    if patched != 1 {
        return Err(format!("expected one bullet record for {SCATTER_CELL}, found {patched}").into());
    }
    replay.save(&out)?;
    println!("{} records -> {}", replay.len(), out.display());
    Ok(())
}
