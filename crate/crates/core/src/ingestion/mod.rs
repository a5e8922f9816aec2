//! Event logs, deterministic replay, and generated scenarios with labels.

mod adapter;
mod geocorpus;
mod log;
mod phrases;
mod replay;
mod scenario;

pub use adapter::{AdapterError, ReplayAdapter, SourceAdapter, SourceMetadata, SyntheticAdapter};
pub use geocorpus::{geoparse_accuracy, synthesize_geocorpus, CorpusError, GeoCorpus, SentenceKind};
pub use log::{parse_event_log, sort_messages, EventLog, LogError};
pub use phrases::{Bilingual, GeoPhrases, Lang, PhraseBanks};
pub use replay::{replay, Pacer, RecordingPacer, ReplayError, ReplayMode, ReplayReport, Sink, SinkError, SleepPacer};
pub use scenario::{
    synthesize_scenario, synthesize_scenario_with, AgentCounts, AgentRates, Anchor, GatheringInjection,
    GatheringTruth, GroundTruth, IncidentInjection, ScenarioError, ScenarioSpec,
};
