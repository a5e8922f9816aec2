use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Gazetteer, PlaceKind, ToponymMatch};
use crate::text::{self, Normalized};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindFloor {
    pub single_word: f64,
    pub multi_word: f64,
}

impl Default for KindFloor {
    fn default() -> Self {
        Self { single_word: 0.95, multi_word: 0.9 }
    }
}

/// Tunables for the false-positive filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContextConfig {
    pub spatial_prepositions: Vec<String>,
    /// Tokens inspected before a match for cues or prepositions.
    pub window_tokens: usize,
    pub default_floor: KindFloor,
    pub kind_floors: BTreeMap<PlaceKind, KindFloor>,
}

impl Default for ContextConfig {
    fn default() -> Self {
        Self {
            spatial_prepositions: ["at", "in", "near", "to", "from", "verso", "a", "presso"]
                .into_iter()
                .map(String::from)
                .collect(),
            window_tokens: 3,
            default_floor: KindFloor::default(),
            kind_floors: BTreeMap::new(),
        }
    }
}

impl ContextConfig {
    pub fn floor(&self, kind: PlaceKind, words: usize) -> f64 {
        let f = self.kind_floors.get(&kind).unwrap_or(&self.default_floor);
        if words > 1 {
            f.multi_word
        } else {
            f.single_word
        }
    }
}

fn window_has_cue(window: &[&str], cues: &[String], prepositions: &[String]) -> bool {
    let joined = window.join(" ");
    let single = |w: &str| prepositions.iter().any(|p| p == w);
    window.iter().any(|w| single(w))
        || cues.iter().any(|c| {
            if c.contains(' ') {
                format!(" {joined} ").contains(&format!(" {c} "))
            } else {
                window.contains(&c.as_str())
            }
        })
}

/// Keeps a match when it is an exact multi-word name, when a cue of its
/// entry or a spatial preposition occurs in the few tokens before it, or
/// when its score reaches the floor for its kind and word count.
pub fn filter_by_context(
    matches: Vec<ToponymMatch>,
    text: &str,
    index: &Gazetteer,
    cfg: &ContextConfig,
) -> Vec<ToponymMatch> {
    if matches.is_empty() {
        return matches;
    }
    let tokens = Normalized::new(text).tokens();
    let prepositions: Vec<String> = cfg.spatial_prepositions.iter().map(|p| text::token_key(p)).collect();
    matches
        .into_iter()
        .filter(|m| {
            let Some(entry_idx) = index.entry_index(&m.entry_id) else {
                return false;
            };
            let words = text::word_count(&m.name);
            if m.score >= 1.0 && words > 1 {
                return true;
            }
            let before: Vec<&str> = tokens.iter().filter(|t| t.end <= m.span.start).map(|t| t.text.as_str()).collect();
            let window = &before[before.len().saturating_sub(cfg.window_tokens)..];
            if window_has_cue(window, &index.cues[entry_idx], &prepositions) {
                return true;
            }
            m.score >= cfg.floor(index.entry_at(entry_idx).kind, words)
        })
        .collect()
}
