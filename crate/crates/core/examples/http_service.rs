//! Serves the HTTP API on a local port and drives one session through it.
//!
//! ```text
//! cargo run -p deckforge --example http_service
//! ```

use std::sync::Arc;

use deckforge::lm::LmGateway;
use deckforge::service::router;
use deckforge::Store;
use serde_json::{json, Value};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runtime = tokio::runtime::Runtime::new()?;
    let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let base = format!("http://{}", listener.local_addr()?);
    let app = router(Arc::new(Store::in_memory(Arc::new(LmGateway::heuristic()))));
    runtime.spawn(async move { axum::serve(listener, app).await });

    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let created: Value = ureq::post(format!("{base}/sessions"))
        .send(std::fs::read(format!("{dir}/house_prices.ipynb"))?)?
        .body_mut()
        .read_json()?;
    let id = created["session_id"].as_str().ok_or("no session id")?;
    println!("session {id}: {} cards", created["cards"].as_array().map_or(0, Vec::len));

    let outline = std::fs::read_to_string(format!("{dir}/scenario_outline.txt"))?;
    ureq::put(format!("{base}/sessions/{id}/outline")).send_json(json!({ "text": outline }))?;
    let outcome: Value = ureq::post(format!("{base}/sessions/{id}/generate")).send_empty()?.body_mut().read_json()?;
    for slide in outcome["deck"].as_array().into_iter().flatten() {
        println!("  {} ({} bullets)", slide["title"], slide["bullets"].as_array().map_or(0, Vec::len));
    }
    let pptx = ureq::get(format!("{base}/sessions/{id}/export.pptx")).call()?.body_mut().read_to_vec()?;
    println!("export.pptx: {} bytes", pptx.len());
    Ok(())
}
