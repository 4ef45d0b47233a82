//! Edits a generated deck and shows how the outline follows.
//!
//! ```text
//! cargo run -p deckforge --example session_edits
//! ```

use std::sync::Arc;

use deckforge::lm::LmGateway;
use deckforge::session::{BindMode, GenerateRequest, OutlineInput, SlideEdit, StateView};
use deckforge::{CellId, Store};

fn show(label: &str, view: &StateView) {
    let deck: Vec<String> = view
        .deck
        .iter()
        .map(|s| if s.deleted { format!("({})", s.title) } else { s.title.clone() })
        .collect();
    println!("r{:<3} {label:<22} deck: {}  dirty: {}", view.revision, deck.join(" | "), view.dirty.len());
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let store = Store::in_memory(Arc::new(LmGateway::heuristic()));
    let (id, _) = store.create_session(&std::fs::read(format!("{dir}/house_prices.ipynb"))?)?;
    let text = std::fs::read_to_string(format!("{dir}/scenario_outline.txt"))?;
    store.replace_outline(&id, OutlineInput::PlainText { text })?;
    let deck = store.generate(&id, GenerateRequest::default())?.deck;
    show("generated", &store.view(&id)?);

    show("rename", &store.edit_slide(&id, &deck[0].id, SlideEdit::Rename { title: "The Data".into() })?);
    show("reorder", &store.edit_slide(&id, &deck[3].id, SlideEdit::Reorder { to_index: 1 })?);
    show("delete", &store.edit_slide(&id, &deck[5].id, SlideEdit::Delete)?);
    store.bind_cells(&id, &deck[2].id, &[CellId::from("c12")], BindMode::Bind)?;
    show("bind c12", &store.view(&id)?);
    store.generate(&id, GenerateRequest::default())?;
    show("regenerate dirty", &store.view(&id)?);
    show("restore", &store.edit_slide(&id, &deck[5].id, SlideEdit::Restore)?);

    let links = store.linkage(&id, "cell:c12")?;
    println!("c12 -> slide {:?}, item {:?}", links.slide, links.item);
    Ok(())
}
