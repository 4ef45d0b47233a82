//! Recorded prompt -> response fixtures.
//!
//! The fixture file is JSON Lines, one [`ReplayRecord`] per line, keyed by the
//! SHA-256 of the assembled prompt. `label` is informational and lets tools
//! find and patch a specific response.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use super::LmError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub hash: String,
    #[serde(default)]
    pub label: String,
    pub response: String,
}

#[derive(Debug, Default)]
pub struct ReplayStore {
    entries: RwLock<BTreeMap<String, ReplayRecord>>,
    recording: bool,
}

impl ReplayStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// A store that accepts new records on miss (see `LmGateway`).
    pub fn recorder() -> Self {
        Self { recording: true, ..Self::default() }
    }

    pub fn parse(text: &str) -> Result<Self, LmError> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: ReplayRecord = serde_json::from_str(line)
                .map_err(|e| LmError::Fixture(format!("line {}: {e}", n + 1)))?;
            entries.insert(record.hash.clone(), record);
        }
        Ok(Self { entries: RwLock::new(entries), recording: false })
    }

    pub fn load(path: &Path) -> Result<Self, LmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LmError::Fixture(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn is_recording(&self) -> bool {
        self.recording
    }

    pub fn set_recording(&mut self, on: bool) {
        self.recording = on;
    }

    pub fn get(&self, hash: &str) -> Option<String> {
        self.entries.read().unwrap().get(hash).map(|r| r.response.clone())
    }

    pub fn insert(&self, record: ReplayRecord) {
        self.entries.write().unwrap().insert(record.hash.clone(), record);
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn records(&self) -> Vec<ReplayRecord> {
        let mut records: Vec<ReplayRecord> = self.entries.read().unwrap().values().cloned().collect();
        records.sort_by(|a, b| a.label.cmp(&b.label).then_with(|| a.hash.cmp(&b.hash)));
        records
    }

    /// Replaces the response of every record with this label; returns how many
    /// records changed.
    pub fn set_response_by_label(&self, label: &str, response: &str) -> usize {
        let mut entries = self.entries.write().unwrap();
        let mut n = 0;
        for record in entries.values_mut().filter(|r| r.label == label) {
            record.response = response.to_string();
            n += 1;
        }
        n
    }

    /// Sorted by label, then hash, so re-recording yields minimal diffs.
    pub fn to_jsonl(&self) -> String {
        self.records()
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), LmError> {
        std::fs::write(path, self.to_jsonl())
            .map_err(|e| LmError::Fixture(format!("{}: {e}", path.display())))
    }
}
