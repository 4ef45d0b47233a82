//! Exports a generated deck to `.pptx` and HTML.
//!
//! ```text
//! cargo run -p deckforge --example export_deck [-- OUT_DIR]
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use deckforge::lm::LmGateway;
use deckforge::session::{GenerateRequest, OutlineInput};
use deckforge::{GenerationParams, Store};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let store = Store::in_memory(Arc::new(LmGateway::heuristic()));
    let (id, _) = store.create_session(&std::fs::read(format!("{dir}/house_prices.ipynb"))?)?;
    let text = std::fs::read_to_string(format!("{dir}/scenario_outline.txt"))?;
    store.replace_outline(&id, OutlineInput::PlainText { text })?;
    let params = GenerationParams { page_numbers: true, ..GenerationParams::default() };
    store.generate(&id, GenerateRequest { params: Some(params), force: false })?;

    let pptx = out.join("house_prices.pptx");
    let html = out.join("house_prices.html");
    std::fs::write(&pptx, store.export_pptx(&id)?)?;
    std::fs::write(&html, store.export_html(&id, true)?)?;
    println!("{}\n{}", pptx.display(), html.display());
    Ok(())
}
