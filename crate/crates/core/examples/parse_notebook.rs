//! Parses a notebook and lists its cells with their outputs.
//!
//! ```text
//! cargo run -p deckforge --example parse_notebook [-- NOTEBOOK.ipynb]
//! ```

use deckforge::{parse_notebook, CellKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/house_prices.ipynb").into());
    let notebook = parse_notebook(&std::fs::read(&path)?)?;
    println!("{path}: {} cells", notebook.len());
    for cell in &notebook.cells {
        let kind = match cell.kind {
            CellKind::Code => "code",
            CellKind::Markdown => "md",
        };
        let first = cell.source.lines().next().unwrap_or_default();
        println!(
            "{:>4} {:<5} {:<4} charts={} tables={}  {}",
            cell.id.as_str(),
            kind,
            cell.execution_count.map(|n| n.to_string()).unwrap_or_default(),
            cell.charts().count(),
            cell.tables().count(),
            first.chars().take(60).collect::<String>()
        );
    }
    Ok(())
}
