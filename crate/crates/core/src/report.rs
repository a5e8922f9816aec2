//! Batch analysis over a whole event log, and plot data export.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::analytics::{AlertKind, AnalyticsSnapshot, EmergingTopic, EngineEvent, HeatSurface, TrendAlert};
use crate::ingestion::{EventLog, GatheringTruth, GroundTruth};
use crate::model::{EnrichedMessage, TemplateCategory, Timestamp};
use crate::pipeline::{Pipeline, PipelineError};

/// Accepted-message precision and recall, plus template agreement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthComparison {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// `None` when nothing was accepted.
    pub precision: Option<f64>,
    /// `None` when the truth has no relevant message.
    pub recall: Option<f64>,
    /// Messages the generator built from each category bank.
    pub truth_categories: BTreeMap<TemplateCategory, usize>,
    /// Truth-labeled messages whose template hits include their category.
    pub matched_categories: BTreeMap<TemplateCategory, usize>,
    pub gatherings_expected: Vec<GatheringTruth>,
    pub gatherings_detected: usize,
    /// Gathering alerts with no injected gathering at that cell and window.
    pub gathering_false_positives: usize,
}

/// Summary of one batch run, shaped like the per-category tables of a
/// simulation write-up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub messages: usize,
    pub accepted: usize,
    pub geolocated: usize,
    /// Messages with at least one template hit of each category.
    pub categories: BTreeMap<TemplateCategory, usize>,
    pub alerts: Vec<TrendAlert>,
    pub gathering_alerts: usize,
    pub burst_alerts: usize,
    pub emerging: Vec<EmergingTopic>,
    pub truth: Option<TruthComparison>,
}

/// Everything a batch run produced.
#[derive(Debug, Clone)]
pub struct BatchRun {
    pub enriched: Vec<EnrichedMessage>,
    pub events: Vec<EngineEvent>,
    pub surfaces: Vec<HeatSurface>,
    pub snapshot: AnalyticsSnapshot,
}

/// Runs every message through `pipeline`, then closes the last window.
pub fn run_batch(log: &EventLog, mut pipeline: Pipeline) -> Result<BatchRun, PipelineError> {
    let mut enriched = Vec::with_capacity(log.len());
    let mut events = Vec::new();
    for m in log.messages() {
        let (e, ev) = pipeline.apply(m.clone())?;
        enriched.push(e);
        events.extend(ev);
    }
    events.extend(pipeline.engine.finish());
    Ok(BatchRun {
        enriched,
        events,
        surfaces: pipeline.engine.closed_surfaces(),
        snapshot: pipeline.engine.snapshot(),
    })
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn compare(run: &BatchRun, truth: &GroundTruth) -> TruthComparison {
    let (mut tp, mut fp, mut fneg) = (0, 0, 0);
    let mut matched: BTreeMap<TemplateCategory, usize> = BTreeMap::new();
    for e in &run.enriched {
        let relevant = truth.relevance.get(&e.base.id).copied().unwrap_or(false);
        match (e.relevance.accepted, relevant) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
        if let Some(&c) = truth.incidents.get(&e.base.id) {
            if e.has_category(c) {
                *matched.entry(c).or_default() += 1;
            }
        }
    }
    let mut truth_categories: BTreeMap<TemplateCategory, usize> = BTreeMap::new();
    for &c in truth.incidents.values() {
        *truth_categories.entry(c).or_default() += 1;
    }
    let expected: BTreeSet<(u32, u32, Timestamp)> =
        truth.gatherings.iter().map(|g| (g.ix, g.iy, g.window_start)).collect();
    let mut detected = BTreeSet::new();
    let mut gathering_fp = 0;
    for a in gathering_alerts(&run.events) {
        let key = (a.cell.ix, a.cell.iy, a.window.start);
        if expected.contains(&key) {
            detected.insert(key);
        } else {
            gathering_fp += 1;
        }
    }
    TruthComparison {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fneg,
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fneg),
        truth_categories,
        matched_categories: matched,
        gatherings_expected: truth.gatherings.clone(),
        gatherings_detected: detected.len(),
        gathering_false_positives: gathering_fp,
    }
}

fn alerts(events: &[EngineEvent]) -> impl Iterator<Item = &TrendAlert> {
    events.iter().filter_map(|e| match e {
        EngineEvent::Alert(a) => Some(a),
        _ => None,
    })
}

pub fn gathering_alerts(events: &[EngineEvent]) -> impl Iterator<Item = &TrendAlert> {
    alerts(events).filter(|a| a.kind == AlertKind::Gathering)
}

pub fn report(run: &BatchRun, truth: Option<&GroundTruth>) -> Report {
    let mut categories = BTreeMap::new();
    for e in &run.enriched {
        let cats: BTreeSet<TemplateCategory> = e.template_hits.iter().map(|h| h.category).collect();
        for c in cats {
            *categories.entry(c).or_default() += 1;
        }
    }
    let all: Vec<TrendAlert> = alerts(&run.events).cloned().collect();
    Report {
        messages: run.enriched.len(),
        accepted: run.enriched.iter().filter(|e| e.relevance.accepted).count(),
        geolocated: run.enriched.iter().filter(|e| e.resolved_geo.is_some()).count(),
        categories,
        gathering_alerts: all.iter().filter(|a| a.kind == AlertKind::Gathering).count(),
        burst_alerts: all.iter().filter(|a| a.kind == AlertKind::Burst).count(),
        alerts: all,
        emerging: run.snapshot.emerging.clone(),
        truth: truth.map(|t| compare(run, t)),
    }
}

/// Surface of the window containing `at`, after a full batch run.
pub fn export_surface(log: &EventLog, pipeline: Pipeline, at: Timestamp) -> Result<HeatSurface, PipelineError> {
    let run = run_batch(log, pipeline.clone())?;
    let clock = pipeline.engine.config().clock();
    let window = clock.window(clock.index_of(at));
    Ok(run
        .surfaces
        .into_iter()
        .find(|s| s.window == window)
        .unwrap_or_else(|| HeatSurface::empty(pipeline.engine.config().grid, window)))
}
