//! Two-level outline (topics and sub-topics).
//!
//! Items are stored flat with parent links and sibling order, and kept in
//! depth-first order. Only childless items ("leaves") become slides.
//!
//! Plain-text format, used by batch mode:
//!
//! ```text
//! Data Introduction
//! Data Cleaning
//!   Finding Important Features
//!   Removing Outliers
//! Findings
//! ```
//!
//! An unindented line is a topic, a line indented by exactly two spaces is a
//! sub-topic of the topic above it, blank lines are ignored. Anything else is
//! malformed.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{ItemId, SlideId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OutlineError {
    #[error("malformed outline: {0}")]
    MalformedOutline(String),
}

fn malformed(msg: impl Into<String>) -> OutlineError {
    OutlineError::MalformedOutline(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlineLevel {
    Topic,
    Subtopic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlineItem {
    pub id: ItemId,
    pub text: String,
    pub level: OutlineLevel,
    #[serde(default)]
    pub parent: Option<ItemId>,
    #[serde(default)]
    pub order: usize,
    #[serde(default)]
    pub dirty: bool,
    #[serde(default)]
    pub slide: Option<SlideId>,
    /// Hidden together with its deleted slide, restorable in place.
    #[serde(default)]
    pub hidden: bool,
}

impl OutlineItem {
    pub fn topic(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: ItemId(id.into()),
            text: text.into(),
            level: OutlineLevel::Topic,
            parent: None,
            order: 0,
            dirty: false,
            slide: None,
            hidden: false,
        }
    }
}

/// Nested outline input; `id` may be omitted for new items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DraftItem {
    #[serde(default)]
    pub id: Option<ItemId>,
    pub text: String,
    #[serde(default)]
    pub children: Vec<DraftItem>,
}

impl DraftItem {
    pub fn new(text: &str) -> Self {
        Self { id: None, text: text.to_string(), children: Vec::new() }
    }

    pub fn with_children(text: &str, children: &[&str]) -> Self {
        Self { id: None, text: text.to_string(), children: children.iter().map(|c| Self::new(c)).collect() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutlineTree {
    items: Vec<OutlineItem>,
}

impl OutlineTree {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates parent links and ids, then renumbers sibling orders
    /// contiguously (relative order kept).
    pub fn from_items(items: Vec<OutlineItem>) -> Result<Self, OutlineError> {
        let mut seen = HashSet::new();
        for item in &items {
            if !seen.insert(item.id.clone()) {
                return Err(malformed(format!("duplicate item id {}", item.id)));
            }
        }
        let levels: HashMap<&ItemId, OutlineLevel> = items.iter().map(|i| (&i.id, i.level)).collect();
        for item in &items {
            match (item.level, &item.parent) {
                (OutlineLevel::Topic, None) => {}
                (OutlineLevel::Topic, Some(_)) => {
                    return Err(malformed(format!("topic {} has a parent", item.id)))
                }
                (OutlineLevel::Subtopic, None) => {
                    return Err(malformed(format!("orphan sub-topic {}", item.id)))
                }
                (OutlineLevel::Subtopic, Some(parent)) => match levels.get(parent) {
                    Some(OutlineLevel::Topic) => {}
                    Some(OutlineLevel::Subtopic) => {
                        return Err(malformed(format!("sub-topic {} nested under sub-topic {parent}", item.id)))
                    }
                    None => return Err(malformed(format!("orphan sub-topic {} (unknown parent {parent})", item.id))),
                },
            }
        }
        let mut sibling_orders: HashSet<(Option<&ItemId>, usize)> = HashSet::new();
        for item in &items {
            if !sibling_orders.insert((item.parent.as_ref(), item.order)) {
                return Err(malformed(format!("duplicate sibling order {} at {}", item.order, item.id)));
            }
        }
        let mut tree = Self { items };
        tree.normalize();
        Ok(tree)
    }

    /// Builds a tree from nested drafts; `fresh_id` names items without ids.
    pub fn from_drafts(
        drafts: &[DraftItem],
        mut fresh_id: impl FnMut() -> ItemId,
    ) -> Result<Self, OutlineError> {
        let mut items = Vec::new();
        for (order, topic) in drafts.iter().enumerate() {
            let topic_id = topic.id.clone().unwrap_or_else(&mut fresh_id);
            items.push(OutlineItem {
                id: topic_id.clone(),
                text: topic.text.clone(),
                level: OutlineLevel::Topic,
                parent: None,
                order,
                dirty: false,
                slide: None,
                hidden: false,
            });
            for (child_order, child) in topic.children.iter().enumerate() {
                if !child.children.is_empty() {
                    return Err(malformed(format!("outline deeper than two levels under {:?}", child.text)));
                }
                items.push(OutlineItem {
                    id: child.id.clone().unwrap_or_else(&mut fresh_id),
                    text: child.text.clone(),
                    level: OutlineLevel::Subtopic,
                    parent: Some(topic_id.clone()),
                    order: child_order,
                    dirty: false,
                    slide: None,
                    hidden: false,
                });
            }
        }
        Self::from_items(items)
    }

    pub fn to_drafts(&self) -> Vec<DraftItem> {
        self.topics()
            .map(|t| DraftItem {
                id: Some(t.id.clone()),
                text: t.text.clone(),
                children: self
                    .children(&t.id)
                    .map(|c| DraftItem { id: Some(c.id.clone()), text: c.text.clone(), children: Vec::new() })
                    .collect(),
            })
            .collect()
    }

    /// Parses the plain-text format; items get ids `i1`, `i2`, ... in line order.
    pub fn parse_plain_text(text: &str) -> Result<Self, OutlineError> {
        let mut drafts: Vec<DraftItem> = Vec::new();
        let mut next = 0;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            next += 1;
            let id = Some(ItemId(format!("i{next}")));
            if let Some(rest) = line.strip_prefix("  ") {
                if rest.starts_with(char::is_whitespace) {
                    return Err(malformed(format!("line {}: indentation must be exactly two spaces", n + 1)));
                }
                let parent = drafts
                    .last_mut()
                    .ok_or_else(|| malformed(format!("line {}: sub-topic before any topic", n + 1)))?;
                parent.children.push(DraftItem { id, text: rest.trim_end().to_string(), children: Vec::new() });
            } else if line.starts_with(char::is_whitespace) {
                return Err(malformed(format!("line {}: indentation must be exactly two spaces", n + 1)));
            } else {
                drafts.push(DraftItem { id, text: line.trim_end().to_string(), children: Vec::new() });
            }
        }
        if drafts.is_empty() {
            return Err(malformed("outline has no items"));
        }
        Self::from_drafts(&drafts, || unreachable!("plain-text items carry ids"))
    }

    pub fn to_plain_text(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            if item.level == OutlineLevel::Subtopic {
                out.push_str("  ");
            }
            out.push_str(&item.text);
            out.push('\n');
        }
        out
    }

    fn normalize(&mut self) {
        let mut ordered = Vec::with_capacity(self.items.len());
        let mut topics: Vec<&OutlineItem> = self.items.iter().filter(|i| i.parent.is_none()).collect();
        topics.sort_by_key(|i| i.order);
        for (t_order, topic) in topics.iter().enumerate() {
            let mut t = (*topic).clone();
            t.order = t_order;
            ordered.push(t);
            let mut children: Vec<&OutlineItem> =
                self.items.iter().filter(|i| i.parent.as_ref() == Some(&topic.id)).collect();
            children.sort_by_key(|i| i.order);
            for (c_order, child) in children.iter().enumerate() {
                let mut c = (*child).clone();
                c.order = c_order;
                ordered.push(c);
            }
        }
        self.items = ordered;
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    /// Depth-first order.
    pub fn items(&self) -> &[OutlineItem] {
        &self.items
    }

    pub fn get(&self, id: &ItemId) -> Option<&OutlineItem> {
        self.items.iter().find(|i| &i.id == id)
    }

    pub fn get_mut(&mut self, id: &ItemId) -> Option<&mut OutlineItem> {
        self.items.iter_mut().find(|i| &i.id == id)
    }

    pub fn items_mut(&mut self) -> impl Iterator<Item = &mut OutlineItem> {
        self.items.iter_mut()
    }

    pub fn topics(&self) -> impl Iterator<Item = &OutlineItem> {
        self.items.iter().filter(|i| i.parent.is_none())
    }

    pub fn children<'a>(&'a self, id: &ItemId) -> impl Iterator<Item = &'a OutlineItem> + 'a {
        let id = id.clone();
        self.items.iter().filter(move |i| i.parent.as_ref() == Some(&id))
    }

    pub fn siblings_of(&self, id: &ItemId) -> Vec<&OutlineItem> {
        match self.get(id) {
            Some(item) => self.items.iter().filter(|i| i.parent == item.parent).collect(),
            None => Vec::new(),
        }
    }

    pub fn is_leaf(&self, id: &ItemId) -> bool {
        self.get(id).is_some() && self.children(id).next().is_none()
    }

    /// Childless items in depth-first order, hidden ones included.
    pub fn leaves(&self) -> impl Iterator<Item = &OutlineItem> {
        self.items.iter().filter(|i| self.children(&i.id).next().is_none())
    }

    /// Leaves that are not hidden.
    pub fn visible_leaves(&self) -> impl Iterator<Item = &OutlineItem> {
        self.leaves().filter(|i| !i.hidden)
    }

    pub fn dirty_items(&self) -> Vec<ItemId> {
        self.items.iter().filter(|i| i.dirty).map(|i| i.id.clone()).collect()
    }

    /// Moves an item to position `to_index` among its siblings.
    pub fn move_within_siblings(&mut self, id: &ItemId, to_index: usize) -> Result<(), OutlineError> {
        let item = self.get(id).ok_or_else(|| malformed(format!("unknown item {id}")))?;
        let parent = item.parent.clone();
        let mut siblings: Vec<ItemId> = self
            .items
            .iter()
            .filter(|i| i.parent == parent)
            .map(|i| i.id.clone())
            .collect();
        if to_index >= siblings.len() {
            return Err(malformed(format!("position {to_index} out of range for {} siblings", siblings.len())));
        }
        let from = siblings.iter().position(|s| s == id).expect("item is its own sibling");
        let moved = siblings.remove(from);
        siblings.insert(to_index, moved);
        for (order, sid) in siblings.iter().enumerate() {
            self.get_mut(sid).expect("sibling exists").order = order;
        }
        self.normalize();
        Ok(())
    }

    /// Inserts a new topic right after topic `after`, or last.
    pub fn insert_topic_after(&mut self, mut item: OutlineItem, after: Option<&ItemId>) -> Result<(), OutlineError> {
        if self.get(&item.id).is_some() {
            return Err(malformed(format!("duplicate item id {}", item.id)));
        }
        let position = match after {
            Some(a) => {
                let topic = self.get(a).ok_or_else(|| malformed(format!("unknown item {a}")))?;
                if topic.level != OutlineLevel::Topic {
                    return Err(malformed(format!("{a} is not a topic")));
                }
                topic.order + 1
            }
            None => self.topics().count(),
        };
        for topic in self.items.iter_mut().filter(|i| i.parent.is_none() && i.order >= position) {
            topic.order += 1;
        }
        item.level = OutlineLevel::Topic;
        item.parent = None;
        item.order = position;
        self.items.push(item);
        self.normalize();
        Ok(())
    }

    /// The topic an item belongs to (itself for topics).
    pub fn topic_of(&self, id: &ItemId) -> Option<&OutlineItem> {
        let item = self.get(id)?;
        match &item.parent {
            Some(parent) => self.get(parent),
            None => Some(item),
        }
    }
}
