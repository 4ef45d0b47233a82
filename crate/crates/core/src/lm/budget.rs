//! Prompt assembly and token budgeting.
//!
//! Tokens are estimated as `ceil(chars / 4)`. When a prompt is over budget,
//! every part is cut to the same character cap so that late notebook cells
//! stay represented; no part is ever dropped.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{LmConfig, LmError};
use crate::notebook::TRUNCATION_MARKER;

pub const PART_SEPARATOR: &str = "\n\n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptPart {
    pub id: String,
    pub text: String,
}

impl PromptPart {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self { id: id.into(), text: text.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRequest {
    pub instruction: String,
    pub parts: Vec<PromptPart>,
    pub reserved_response_tokens: usize,
}

impl PromptRequest {
    /// The exact text sent to the model and hashed for replay.
    pub fn assembled(&self) -> String {
        let mut out = self.instruction.clone();
        for part in &self.parts {
            out.push_str(PART_SEPARATOR);
            out.push_str(&part.text);
        }
        out
    }

    /// Parts only, as sent in the user message of a remote request.
    pub fn body(&self) -> String {
        self.parts.iter().map(|p| p.text.as_str()).collect::<Vec<_>>().join(PART_SEPARATOR)
    }

    pub fn estimated_tokens(&self) -> usize {
        estimate_tokens(&self.assembled())
    }

    /// Hex SHA-256 of [`PromptRequest::assembled`], the replay fixture key.
    pub fn prompt_hash(&self) -> String {
        hex::encode(Sha256::digest(self.assembled().as_bytes()))
    }
}

pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

fn truncate_to(text: &str, cap: usize) -> String {
    if text.chars().count() <= cap {
        return text.to_string();
    }
    let keep = cap - TRUNCATION_MARKER.chars().count();
    let mut out: String = text.chars().take(keep).collect();
    out.push_str(TRUNCATION_MARKER);
    out
}

/// Builds a request whose estimate fits `token_budget - reserved_response_tokens`.
pub fn fit_to_budget(
    parts: Vec<PromptPart>,
    instruction: &str,
    config: &LmConfig,
) -> Result<PromptRequest, LmError> {
    let reserve = config.reserved_response_tokens;
    let budget = config.token_budget;
    let instruction_tokens = estimate_tokens(instruction);
    if instruction_tokens + reserve > budget {
        return Err(LmError::BudgetExceeded { estimated: instruction_tokens + reserve, budget });
    }
    let limit = budget - reserve;
    let mut request = PromptRequest {
        instruction: instruction.to_string(),
        parts,
        reserved_response_tokens: reserve,
    };
    if request.estimated_tokens() <= limit || request.parts.is_empty() {
        return Ok(request);
    }

    let n = request.parts.len();
    let overhead = instruction.chars().count() + PART_SEPARATOR.len() * n;
    let available = (limit * 4).saturating_sub(overhead);
    let cap = available / n;
    if cap <= TRUNCATION_MARKER.chars().count() {
        return Err(LmError::BudgetExceeded { estimated: request.estimated_tokens() + reserve, budget });
    }
    for part in &mut request.parts {
        part.text = truncate_to(&part.text, cap);
    }
    debug_assert!(request.estimated_tokens() <= limit);
    Ok(request)
}
