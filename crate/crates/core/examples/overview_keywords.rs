//! Builds the overview: one card per cell with keywords and a content weight.
//!
//! ```text
//! cargo run -p deckforge --example overview_keywords
//! ```

use deckforge::keywords::heuristic_keywords;
use deckforge::notebook::build_overview;
use deckforge::parse_notebook;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bytes = std::fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/house_prices.ipynb"))?;
    let notebook = parse_notebook(&bytes)?;
    let cards = build_overview(&notebook, &heuristic_keywords(&notebook))?;
    for card in cards {
        println!("{:>4}  weight {:.2}  {}", card.cell_id.as_str(), card.content_weight, card.keywords.join(", "));
    }
    Ok(())
}
