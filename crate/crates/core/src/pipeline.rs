//! Wiring of enrichment resources and the analytics engine from one config.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{AnalyticsEngine, EngineConfig, EngineError, EngineEvent};
use crate::enrichment::{
    CompiledEvent, EmotionLexicon, Enricher, EnrichmentError, EventSpec, Taxonomy, TemplateDictionary,
    DEFAULT_RELEVANCE_THRESHOLD,
};
use crate::fixtures;
use crate::gazetteer::{load_gazetteer, ContextConfig, Gazetteer, GazetteerError};
use crate::model::{EnrichedMessage, Message};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("gazetteer: {0}")]
    Gazetteer(#[from] GazetteerError),
    #[error(transparent)]
    Enrichment(#[from] EnrichmentError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{what}: {source}")]
    Json { what: String, source: serde_json::Error },
}

fn default_threshold() -> f64 {
    DEFAULT_RELEVANCE_THRESHOLD
}

/// Resource paths override the embedded fixtures when set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub gazetteer: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub event: Option<PathBuf>,
    pub context: ContextConfig,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    pub engine: EngineConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            gazetteer: None,
            taxonomy: None,
            lexicon: None,
            templates: None,
            event: None,
            context: ContextConfig::default(),
            threshold: DEFAULT_RELEVANCE_THRESHOLD,
            engine: EngineConfig::default(),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })
}

fn text_or(path: &Option<PathBuf>, embedded: &str) -> Result<String, PipelineError> {
    match path {
        Some(p) => read_text(p),
        None => Ok(embedded.to_string()),
    }
}

pub fn parse_event(json: &str) -> Result<EventSpec, PipelineError> {
    let ev: EventSpec =
        serde_json::from_str(json).map_err(|source| PipelineError::Json { what: "event spec".into(), source })?;
    ev.validate().map_err(EnrichmentError::Event)?;
    Ok(ev)
}

impl PipelineConfig {
    pub fn from_json(json: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(json).map_err(|source| PipelineError::Json { what: "pipeline config".into(), source })
    }

    pub fn load_gazetteer(&self) -> Result<Gazetteer, PipelineError> {
        Ok(load_gazetteer(text_or(&self.gazetteer, fixtures::GAZETTEER_CSV)?.as_bytes())?)
    }

    pub fn load_event(&self) -> Result<EventSpec, PipelineError> {
        parse_event(&text_or(&self.event, fixtures::EVENT_JSON)?)
    }

    pub fn enricher(&self) -> Result<Enricher, PipelineError> {
        self.enricher_for(self.load_event()?)
    }

    pub fn enricher_for(&self, event: EventSpec) -> Result<Enricher, PipelineError> {
        Ok(Enricher {
            gazetteer: Arc::new(self.load_gazetteer()?),
            context: self.context.clone(),
            taxonomy: Arc::new(Taxonomy::from_json(&text_or(&self.taxonomy, fixtures::TAXONOMY_JSON)?)?),
            lexicon: Arc::new(EmotionLexicon::from_csv(text_or(&self.lexicon, fixtures::EMOTION_LEXICON_CSV)?.as_bytes())?),
            templates: Arc::new(TemplateDictionary::from_json(&text_or(&self.templates, fixtures::TEMPLATES_JSON)?)?),
            event: Arc::new(CompiledEvent::new(event)),
            threshold: self.threshold,
        })
    }
}

/// Enrichment followed by analytics, applied one message at a time.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub enricher: Enricher,
    pub engine: AnalyticsEngine,
}

impl Pipeline {
    pub fn new(enricher: Enricher, engine: EngineConfig) -> Result<Self, PipelineError> {
        Ok(Self { enricher, engine: AnalyticsEngine::new(engine)? })
    }

    pub fn from_config(cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        Self::new(cfg.enricher()?, cfg.engine.clone())
    }

    pub fn apply(&mut self, msg: Message) -> Result<(EnrichedMessage, Vec<EngineEvent>), PipelineError> {
        let enriched = self.enricher.enrich(msg);
        let events = self.engine.apply(&enriched)?;
        Ok((enriched, events))
    }
}
