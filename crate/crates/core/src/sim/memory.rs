use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::model::Timestamp;

pub const DEFAULT_MEMORY_SIZE: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryKind {
    OwnPost,
    OwnReply,
    Reaction,
    Social,
    Read,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryEntry {
    pub ts: Timestamp,
    pub kind: MemoryKind,
    pub text: String,
}

/// Bounded agent memory: the last `capacity` entries plus a backstory slot
/// that is never evicted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Memory {
    backstory: Option<String>,
    entries: VecDeque<MemoryEntry>,
    capacity: usize,
}

impl Memory {
    pub fn new(backstory: Option<String>, capacity: usize) -> Self {
        Self { backstory, entries: VecDeque::with_capacity(capacity), capacity: capacity.max(1) }
    }

    pub fn backstory(&self) -> Option<&str> {
        self.backstory.as_deref()
    }

    pub fn push(&mut self, entry: MemoryEntry) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(entry);
    }

    /// Oldest first.
    pub fn entries(&self) -> impl DoubleEndedIterator<Item = &MemoryEntry> + ExactSizeIterator + '_ {
        self.entries.iter()
    }

    /// Texts the agent itself wrote (posts and replies), oldest first.
    pub fn own_texts(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries
            .iter()
            .filter(|e| matches!(e.kind, MemoryKind::OwnPost | MemoryKind::OwnReply))
            .map(|e| e.text.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}
