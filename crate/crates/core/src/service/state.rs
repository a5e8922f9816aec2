use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::curation::{fixture_products, NewProduct, NewWatchTopic, Product, WatchTopic};
use crate::analytics::{AnalyticsEngine, EmergingTopic, EngineConfig, EngineError, EngineEvent, TrendAlert};
use crate::analytics::HeatSurface;
use crate::enrichment::Enricher;
use crate::model::{EnrichedMessage, Message};

/// One entry of the update stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Update {
    Message(Box<EnrichedMessage>),
    Alert(TrendAlert),
    Surface(HeatSurface),
    Emerging(Vec<EmergingTopic>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateEvent {
    pub seq: u64,
    #[serde(flatten)]
    pub update: Update,
}

impl UpdateEvent {
    pub fn kind(&self) -> &'static str {
        match self.update {
            Update::Message(_) => "message",
            Update::Alert(_) => "alert",
            Update::Surface(_) => "surface",
            Update::Emerging(_) => "emerging",
        }
    }
}

/// Every state mutation. The persistence tail stores these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Command {
    Ingest { message: Message },
    Finish,
    CreateWatchTopic { topic: NewWatchTopic },
    DeleteWatchTopic { id: String },
    CreateProduct { product: NewProduct },
    SetTracked { authors: BTreeSet<String> },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CommandError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    NotFound(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Everything the service knows; a pure function of the commands applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceState {
    pub engine: AnalyticsEngine,
    /// Commands applied so far, failed ones excluded.
    pub applied: u64,
    pub events: Vec<UpdateEvent>,
    pub watch_topics: BTreeMap<String, WatchTopic>,
    next_topic: u64,
    pub products: BTreeMap<String, Product>,
    pub tracked: BTreeSet<String>,
}

impl ServiceState {
    pub fn new(engine: EngineConfig) -> Result<Self, EngineError> {
        Ok(Self {
            engine: AnalyticsEngine::new(engine)?,
            applied: 0,
            events: Vec::new(),
            watch_topics: BTreeMap::new(),
            next_topic: 1,
            products: fixture_products().into_iter().map(|p| (p.id.clone(), p)).collect(),
            tracked: BTreeSet::new(),
        })
    }

    pub fn last_seq(&self) -> u64 {
        self.events.last().map_or(0, |e| e.seq)
    }

    /// Events with `seq > since`, oldest first.
    pub fn events_since(&self, since: u64) -> &[UpdateEvent] {
        let start = self.events.partition_point(|e| e.seq <= since);
        &self.events[start..]
    }

    fn push(&mut self, update: Update) -> UpdateEvent {
        let ev = UpdateEvent { seq: self.last_seq() + 1, update };
        self.events.push(ev.clone());
        ev
    }

    fn push_engine(&mut self, events: Vec<EngineEvent>, out: &mut Vec<UpdateEvent>) {
        for e in events {
            let u = match e {
                EngineEvent::Surface(s) => Update::Surface(s),
                EngineEvent::Alert(a) => Update::Alert(a),
                EngineEvent::Emerging(t) => Update::Emerging(t),
            };
            out.push(self.push(u));
        }
    }

    /// Applies one command, returning the stream events it produced. A
    /// failed command leaves the state untouched.
    pub fn apply(&mut self, enricher: &Enricher, cmd: Command) -> Result<Vec<UpdateEvent>, CommandError> {
        let mut out = Vec::new();
        match cmd {
            Command::Ingest { message } => {
                message.validate().map_err(|e| CommandError::Invalid(e.to_string()))?;
                let enriched = enricher.enrich(message);
                let events = self.engine.apply(&enriched)?;
                self.push_engine(events, &mut out);
                out.push(self.push(Update::Message(Box::new(enriched))));
            }
            Command::Finish => {
                let events = self.engine.finish();
                self.push_engine(events, &mut out);
            }
            Command::CreateWatchTopic { topic } => {
                topic.validate().map_err(CommandError::Invalid)?;
                if self.watch_topics.values().any(|t| t.label == topic.label) {
                    return Err(CommandError::Conflict(format!("watch topic `{}` already exists", topic.label)));
                }
                let id = format!("wt-{}", self.next_topic);
                self.next_topic += 1;
                let created_ts = self.engine.last_ts().unwrap_or(0);
                let t = WatchTopic { id: id.clone(), label: topic.label, terms: topic.terms, created_ts, origin: topic.origin };
                self.watch_topics.insert(id, t);
            }
            Command::DeleteWatchTopic { id } => {
                if self.watch_topics.remove(&id).is_none() {
                    return Err(CommandError::NotFound(format!("no watch topic `{id}`")));
                }
            }
            Command::CreateProduct { product } => {
                product.validate().map_err(CommandError::Invalid)?;
                if self.products.values().any(|p| p.name == product.name) {
                    return Err(CommandError::Conflict(format!("product `{}` already exists", product.name)));
                }
                let id = product.id.clone().unwrap_or_else(|| slug(&product.name));
                if self.products.contains_key(&id) {
                    return Err(CommandError::Conflict(format!("product id `{id}` already exists")));
                }
                let p = Product { id: id.clone(), name: product.name, filters: product.filters, visibility: product.visibility };
                self.products.insert(id, p);
            }
            Command::SetTracked { authors } => self.tracked = authors,
        }
        self.applied += 1;
        Ok(out)
    }

    /// Message events matching `pred` after `since`.
    pub fn message_feed<'a>(
        &'a self,
        since: u64,
        pred: impl Fn(&EnrichedMessage) -> bool + 'a,
    ) -> impl Iterator<Item = &'a UpdateEvent> + 'a {
        self.events_since(since).iter().filter(move |e| matches!(&e.update, Update::Message(m) if pred(m)))
    }
}

fn slug(name: &str) -> String {
    let mut s = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            s.push(c.to_ascii_lowercase());
        } else if !s.ends_with('-') {
            s.push('-');
        }
    }
    let s = s.trim_matches('-').to_string();
    if s.is_empty() {
        "product".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enrichment::WeightedTerm;
    use crate::pipeline::PipelineConfig;
    use crate::service::curation::{ProductFilter, TopicOrigin, Visibility};

    fn setup() -> (ServiceState, Enricher) {
        let cfg = PipelineConfig::default();
        (ServiceState::new(cfg.engine.clone()).unwrap(), cfg.enricher().unwrap())
    }

    fn topic(label: &str) -> Command {
        Command::CreateWatchTopic {
            topic: NewWatchTopic { label: label.into(), terms: vec![WeightedTerm::new("blocked", 1.0)], origin: TopicOrigin::Operator },
        }
    }

    #[test]
    fn watch_topic_lifecycle() {
        let (mut s, e) = setup();
        s.apply(&e, topic("roadblocks")).unwrap();
        assert!(s.watch_topics.values().any(|t| t.label == "roadblocks"));
        assert!(matches!(s.apply(&e, topic("roadblocks")), Err(CommandError::Conflict(_))));
        assert!(matches!(s.apply(&e, Command::DeleteWatchTopic { id: "nope".into() }), Err(CommandError::NotFound(_))));
        s.apply(&e, Command::DeleteWatchTopic { id: "wt-1".into() }).unwrap();
        assert!(s.watch_topics.is_empty());
        assert_eq!(s.applied, 2);
    }

    #[test]
    fn products_get_slug_ids_and_unique_names() {
        let (mut s, e) = setup();
        let p = NewProduct {
            id: None,
            name: "Road Blocks!".into(),
            filters: vec![ProductFilter { topics: Some(["mobility".to_string()].into()), ..Default::default() }],
            visibility: Visibility::Draft,
        };
        s.apply(&e, Command::CreateProduct { product: p.clone() }).unwrap();
        assert!(s.products.contains_key("road-blocks"));
        assert!(matches!(s.apply(&e, Command::CreateProduct { product: p }), Err(CommandError::Conflict(_))));
    }

    #[test]
    fn update_event_wire_shape() {
        let ev = UpdateEvent { seq: 3, update: Update::Emerging(vec![]) };
        let v = serde_json::to_value(&ev).unwrap();
        assert_eq!(v, serde_json::json!({"seq": 3, "kind": "emerging", "payload": []}));
        assert_eq!(serde_json::from_value::<UpdateEvent>(v).unwrap(), ev);
    }
}
