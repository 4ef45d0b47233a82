//! Extracts topic candidates and recommends topics for each outline item.
//!
//! ```text
//! cargo run -p deckforge --example recommend_topics
//! ```

use std::sync::Arc;

use deckforge::lm::LmGateway;
use deckforge::session::OutlineInput;
use deckforge::Store;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let store = Store::in_memory(Arc::new(LmGateway::heuristic()));
    let (id, _) = store.create_session(&std::fs::read(format!("{dir}/house_prices.ipynb"))?)?;
    let candidates = store.candidates(&id)?;
    println!("candidates:");
    for topic in &candidates.topics {
        println!("  {} [{}]", topic.title, topic.subtopics.join(", "));
    }
    store.replace_outline(&id, OutlineInput::PlainText { text: "Data Introduction\nData Cleaning\n  Removing Outliers\n".into() })?;
    for item in store.view(&id)?.outline {
        println!("{}: {}", item.text, store.recommend(&id, &item.id)?.join(" | "));
    }
    Ok(())
}
