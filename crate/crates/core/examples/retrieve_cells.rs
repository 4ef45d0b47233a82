//! Ranks notebook cells for each outline item with the BM25 heuristic.
//!
//! ```text
//! cargo run -p deckforge --example retrieve_cells
//! ```

use deckforge::lm::LmGateway;
use deckforge::outline::OutlineTree;
use deckforge::parse_notebook;
use deckforge::retrieval::{flatten_outline, retrieve_cells};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let notebook = parse_notebook(&std::fs::read(format!("{dir}/house_prices.ipynb"))?)?;
    let outline = OutlineTree::parse_plain_text(&std::fs::read_to_string(format!("{dir}/scenario_outline.txt"))?)?;
    let gw = LmGateway::heuristic();
    for unit in flatten_outline(&outline) {
        let cells = retrieve_cells(&unit, &notebook, &gw, true)?;
        let ranked: Vec<String> = cells.iter().map(|c| format!("{} {:.3}", c.cell_id, c.score)).collect();
        println!("{:<28} {}", unit.item_text, ranked.join("  "));
    }
    Ok(())
}
