//! Per-message annotation: topics, emotion, incident templates, relevance.

mod emotion;
mod relevance;
mod templates;
mod topics;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gazetteer::{self, filter_by_context, match_candidates, ContextConfig, Gazetteer};
use crate::model::{EnrichedMessage, GeoProvenance, Message, ResolvedGeo};
use crate::text;

pub use emotion::{classify_emotion, EmotionLexicon};
pub use relevance::{assess_relevance, CompiledEvent, EventSpec, RelevanceInput, DEFAULT_RELEVANCE_THRESHOLD};
pub use templates::{compile_pattern, compile_template, match_template, PatternToken, Template, TemplateDictionary};
pub use topics::{classify_topics, Taxonomy, TopicDomain};

#[derive(Debug, Error)]
pub enum EnrichmentError {
    #[error("invalid template `{0}`: needs at least one literal token")]
    InvalidTemplate(String),
    #[error("template dictionary: {0}")]
    Templates(String),
    #[error("taxonomy: {0}")]
    Taxonomy(String),
    #[error("emotion lexicon line {line}: {msg}")]
    Lexicon { line: u64, msg: String },
    #[error("event spec: {0}")]
    Event(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTerm {
    pub term: String,
    pub weight: f64,
}

impl WeightedTerm {
    pub fn new(term: impl Into<String>, weight: f64) -> Self {
        Self { term: term.into(), weight }
    }
}

/// Weighted keywords compiled to token keys. Each distinct term contributes
/// its weight once when present.
#[derive(Debug, Clone, Default)]
pub struct TermSet {
    single: HashMap<String, f64>,
    phrases: Vec<(Vec<String>, f64)>,
}

impl TermSet {
    pub fn new(terms: &[WeightedTerm]) -> Self {
        let mut set = TermSet::default();
        for t in terms {
            let toks = text::tokenize(&t.term);
            match toks.len() {
                0 => {}
                1 => {
                    *set.single.entry(toks.into_iter().next().unwrap_or_default()).or_insert(0.0) += t.weight;
                }
                _ => set.phrases.push((toks, t.weight)),
            }
        }
        set
    }

    pub fn score(&self, tokens: &[String]) -> f64 {
        let mut seen: Vec<&str> = Vec::new();
        let mut total = 0.0;
        for tok in tokens {
            if let Some(w) = self.single.get(tok) {
                if !seen.contains(&tok.as_str()) {
                    seen.push(tok);
                    total += w;
                }
            }
        }
        for (phrase, w) in &self.phrases {
            if tokens.windows(phrase.len()).any(|win| win == phrase.as_slice()) {
                total += w;
            }
        }
        total
    }
}

/// All enrichment resources bundled behind one call.
#[derive(Debug, Clone)]
pub struct Enricher {
    pub gazetteer: Arc<Gazetteer>,
    pub context: ContextConfig,
    pub taxonomy: Arc<Taxonomy>,
    pub lexicon: Arc<EmotionLexicon>,
    pub templates: Arc<TemplateDictionary>,
    pub event: Arc<CompiledEvent>,
    pub threshold: f64,
}

impl Enricher {
    pub fn enrich(&self, msg: Message) -> EnrichedMessage {
        let tokens = text::tokenize(&msg.text);
        let matches = filter_by_context(match_candidates(&msg.text, &self.gazetteer), &msg.text, &self.gazetteer, &self.context);
        let resolved_geo = match msg.declared_geo {
            Some(point) => Some(ResolvedGeo { point, provenance: GeoProvenance::Declared }),
            None => gazetteer::best_match(&matches)
                .and_then(|m| self.gazetteer.get(&m.entry_id))
                .map(|e| ResolvedGeo { point: e.location, provenance: GeoProvenance::Geoparsed }),
        };
        let relevance = assess_relevance(
            &RelevanceInput {
                ts: msg.ts,
                resolved_geo: resolved_geo.map(|r| r.point),
                matches: &matches,
                tokens: &tokens,
            },
            &self.event,
            self.threshold,
        );
        EnrichedMessage {
            topics: self.taxonomy.classify_tokens(&tokens),
            emotion: self.lexicon.classify_tokens(&tokens),
            template_hits: self.templates.hits_tokens(&tokens),
            resolved_geo,
            relevance,
            base: msg,
        }
    }
}
