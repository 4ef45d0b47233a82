//! Runs the scenario on recorded model answers, with no network.
//!
//! ```text
//! cargo run -p deckforge --example replay_backend
//! ```

use std::sync::Arc;

use deckforge::lm::{LmConfig, LmGateway};
use deckforge::session::{BindMode, GenerateRequest, OutlineInput};
use deckforge::{CellId, Store};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let gw = Arc::new(LmGateway::new(LmConfig::replay(format!("{dir}/house_prices.replay.jsonl")))?);
    let store = Store::in_memory(gw.clone());
    let (id, _) = store.create_session(&std::fs::read(format!("{dir}/house_prices.ipynb"))?)?;
    store.refresh_keywords(&id)?;
    let text = std::fs::read_to_string(format!("{dir}/scenario_outline.txt"))?;
    store.replace_outline(&id, OutlineInput::PlainText { text })?;
    let deck = store.generate(&id, GenerateRequest::default())?.deck;
    let outliers = deck.iter().find(|s| s.title == "Removing Outliers").ok_or("no Removing Outliers slide")?;
    let slide = store.bind_cells(&id, &outliers.id, &[CellId::from("c12")], BindMode::Bind)?;
    println!("# {}", slide.title);
    for bullet in &slide.bullets {
        println!("  - [{}] {}", bullet.source_cell, bullet.text);
    }
    println!("{} media, {} remote calls", slide.media.len(), gw.remote_calls());
    Ok(())
}
