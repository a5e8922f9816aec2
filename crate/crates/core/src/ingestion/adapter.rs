use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{synthesize_scenario, EventLog, ScenarioError, ScenarioSpec};
use crate::model::{Message, SourceKind, Timestamp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdapterError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceMetadata {
    pub name: String,
    pub kinds: Vec<SourceKind>,
    pub mode: String,
}

/// A message source. Live harvesters would implement this; only offline
/// sources ship.
pub trait SourceAdapter {
    /// Messages with a timestamp strictly after `since` (all of them when
    /// `None`), in log order.
    fn poll(&mut self, since: Option<Timestamp>) -> Result<Vec<Message>, AdapterError>;
    fn describe(&self) -> SourceMetadata;
}

fn kinds_of(log: &EventLog) -> Vec<SourceKind> {
    let mut kinds: Vec<SourceKind> = log.messages().iter().map(|m| m.source.kind).collect();
    kinds.sort();
    kinds.dedup();
    kinds
}

fn after(log: &EventLog, since: Option<Timestamp>) -> Vec<Message> {
    let start = since.map_or(0, |s| log.messages().partition_point(|m| m.ts <= s));
    log.messages()[start..].to_vec()
}

/// Serves a recorded event log.
#[derive(Debug, Clone)]
pub struct ReplayAdapter {
    name: String,
    log: EventLog,
}

impl ReplayAdapter {
    pub fn new(name: impl Into<String>, log: EventLog) -> Self {
        Self { name: name.into(), log }
    }
}

impl SourceAdapter for ReplayAdapter {
    fn poll(&mut self, since: Option<Timestamp>) -> Result<Vec<Message>, AdapterError> {
        Ok(after(&self.log, since))
    }

    fn describe(&self) -> SourceMetadata {
        SourceMetadata { name: self.name.clone(), kinds: kinds_of(&self.log), mode: "replay".into() }
    }
}

/// Generates a scenario on first poll.
#[derive(Debug, Clone)]
pub struct SyntheticAdapter {
    spec: ScenarioSpec,
    log: Option<EventLog>,
}

impl SyntheticAdapter {
    pub fn new(spec: ScenarioSpec) -> Self {
        Self { spec, log: None }
    }
}

impl SourceAdapter for SyntheticAdapter {
    fn poll(&mut self, since: Option<Timestamp>) -> Result<Vec<Message>, AdapterError> {
        if self.log.is_none() {
            self.log = Some(synthesize_scenario(&self.spec)?.0);
        }
        Ok(after(self.log.as_ref().expect("generated above"), since))
    }

    fn describe(&self) -> SourceMetadata {
        SourceMetadata {
            name: self.spec.name.clone(),
            kinds: self.log.as_ref().map(kinds_of).unwrap_or_else(|| SourceKind::ALL.to_vec()),
            mode: "synthetic".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingestion::AgentCounts;

    #[test]
    fn polling_is_incremental() {
        let mut spec = ScenarioSpec::embedded();
        spec.agents = AgentCounts { peaceful: 20, violent: 5, bystander: 10, remote: 10 };
        let mut syn = SyntheticAdapter::new(spec.clone());
        let all = syn.poll(None).unwrap();
        assert_eq!(syn.describe().mode, "synthetic");
        let cut = all[all.len() / 2].ts;
        let rest = syn.poll(Some(cut)).unwrap();
        assert!(rest.iter().all(|m| m.ts > cut));
        assert_eq!(rest.len(), all.iter().filter(|m| m.ts > cut).count());

        let mut rep = ReplayAdapter::new("log", synthesize_scenario(&spec).unwrap().0);
        assert_eq!(rep.poll(None).unwrap(), all);
        assert!(rep.poll(Some(all.last().unwrap().ts)).unwrap().is_empty());
        assert!(!rep.describe().kinds.is_empty());
    }
}
