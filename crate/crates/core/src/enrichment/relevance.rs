use serde::{Deserialize, Serialize};

use super::{TermSet, WeightedTerm};
use crate::gazetteer::ToponymMatch;
use crate::model::{distance_to_polyline_m, GeoPoint, RelevanceVerdict, TimeWindow, Timestamp};

pub const DEFAULT_RELEVANCE_THRESHOLD: f64 = 0.95;

fn default_content_norm() -> f64 {
    1.0
}

/// Where and when an event happens and how people talk about it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub name: String,
    pub path: Vec<GeoPoint>,
    pub buffer_m: f64,
    pub window: TimeWindow,
    #[serde(default)]
    pub place_ids: Vec<String>,
    #[serde(default)]
    pub terms: Vec<WeightedTerm>,
    #[serde(default = "default_content_norm")]
    pub content_norm: f64,
}

impl EventSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.path.is_empty() {
            return Err("event path must not be empty".into());
        }
        if !(self.buffer_m > 0.0) {
            return Err("event buffer_m must be positive".into());
        }
        if !(self.content_norm > 0.0) {
            return Err("event content_norm must be positive".into());
        }
        Ok(())
    }
}

/// What relevance needs to know about a message after geocoding and
/// toponym filtering.
#[derive(Debug, Clone, Copy)]
pub struct RelevanceInput<'a> {
    pub ts: Timestamp,
    pub resolved_geo: Option<GeoPoint>,
    /// Toponym matches retained by the context filter.
    pub matches: &'a [ToponymMatch],
    /// Normalized tokens of the message text.
    pub tokens: &'a [String],
}

/// Event spec with its term list compiled once.
#[derive(Debug, Clone)]
pub struct CompiledEvent {
    pub spec: EventSpec,
    terms: TermSet,
}

impl CompiledEvent {
    pub fn new(spec: EventSpec) -> Self {
        let terms = TermSet::new(&spec.terms);
        Self { spec, terms }
    }
}

/// Scores the three relevance modalities and combines them by max.
pub fn assess_relevance(input: &RelevanceInput<'_>, ev: &CompiledEvent, threshold: f64) -> RelevanceVerdict {
    let spec = &ev.spec;
    let in_window = spec.window.contains(input.ts);
    let geo = match input.resolved_geo {
        Some(p) if in_window && distance_to_polyline_m(p, &spec.path) <= spec.buffer_m => 1.0,
        _ => 0.0,
    };
    let toponym = if in_window {
        input
            .matches
            .iter()
            .filter(|m| spec.place_ids.iter().any(|id| *id == m.entry_id))
            .map(|m| m.score)
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let content = (ev.terms.score(input.tokens) / spec.content_norm).min(1.0);
    RelevanceVerdict::new(geo, toponym, content, threshold)
}
