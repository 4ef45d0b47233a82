//! Generates a deck from a notebook and a plain-text outline and prints it.
//!
//! ```text
//! cargo run -p deckforge --example generate_deck
//! ```

use std::sync::Arc;

use deckforge::lm::LmGateway;
use deckforge::session::{GenerateRequest, OutlineInput};
use deckforge::{DetailLevel, GenerationParams, Store};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let store = Store::in_memory(Arc::new(LmGateway::heuristic()));
    let (id, _) = store.create_session(&std::fs::read(format!("{dir}/house_prices.ipynb"))?)?;
    let text = std::fs::read_to_string(format!("{dir}/scenario_outline.txt"))?;
    store.replace_outline(&id, OutlineInput::PlainText { text })?;
    let params = GenerationParams { top_k: 4, detail_level: DetailLevel::Detailed, ..GenerationParams::default() };
    let outcome = store.generate(&id, GenerateRequest { params: Some(params), force: false })?;
    for slide in &outcome.deck {
        println!("# {}  ({:?}, {} media)", slide.title, slide.template, slide.media.len());
        for bullet in &slide.bullets {
            println!("  - [{} {:.2}] {}", bullet.source_cell, bullet.relevance, bullet.text);
        }
    }
    for warning in &outcome.report.warnings {
        println!("warning: {warning}");
    }
    Ok(())
}
