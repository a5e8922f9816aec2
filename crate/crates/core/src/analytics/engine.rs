use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::alerts::{burst_check, detect_gatherings, BurstConfig, GatheringConfig, TrendAlert};
use super::binning::{counts_toward_surface, HeatSurface};
use super::community::{extract_community, Community, InteractionGraph};
use super::emerging::{emerging_topics, EmergingConfig, EmergingTopic};
use super::graph::GraphOptions;
use super::sectors::{compute_sectors, AlertCells, SectorDisplay, SectorError};
use super::tracking::{TrackedPosition, UserTracker};
use crate::model::{cell_of, BoundingBox, CellIndex, EnrichedMessage, GeoPoint, GridSpec, TimeWindow, Timestamp, WindowClock};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("message `{id}` at {ts} arrived after {last}; messages must be applied in timestamp order")]
    OutOfOrder { id: String, ts: Timestamp, last: Timestamp },
    #[error("engine config: {0}")]
    Config(String),
}

fn default_grid() -> GridSpec {
    let bbox = BoundingBox { min: GeoPoint { lat: 41.80, lon: 12.35 }, max: GeoPoint { lat: 42.00, lon: 12.62 } };
    GridSpec { bbox, nx: 64, ny: 64 }
}

fn default_window_s() -> i64 {
    300
}

fn default_k() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub grid: GridSpec,
    pub window_s: i64,
    /// Window boundaries are `origin + i * window_s`.
    pub origin: Timestamp,
    pub burst: BurstConfig,
    pub gathering: GatheringConfig,
    pub emerging: EmergingConfig,
    /// Count rejected messages on the surface too.
    pub count_all: bool,
    pub graph: GraphOptions,
    pub community_k: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            grid: default_grid(),
            window_s: default_window_s(),
            origin: 0,
            burst: BurstConfig::default(),
            gathering: GatheringConfig::default(),
            emerging: EmergingConfig::default(),
            count_all: false,
            graph: GraphOptions::default(),
            community_k: default_k(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: &str| Err(EngineError::Config(m.to_string()));
        if self.window_s <= 0 {
            return bad("window_s must be positive");
        }
        if self.burst.baseline_windows == 0 {
            return bad("burst.baseline_windows must be at least 1");
        }
        if !(self.burst.trigger_ratio > 1.0) {
            return bad("burst.trigger_ratio must exceed 1");
        }
        if self.community_k < 2 {
            return bad("community_k must be at least 2");
        }
        GridSpec::new(self.grid.bbox, self.grid.nx, self.grid.ny).map_err(|e| EngineError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn clock(&self) -> WindowClock {
        WindowClock { origin: self.origin, length: self.window_s }
    }
}

/// Things the engine learns when a window closes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EngineEvent {
    Surface(HeatSurface),
    Alert(TrendAlert),
    Emerging(Vec<EmergingTopic>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceView {
    pub grid: GridSpec,
    pub heights: Vec<u32>,
}

/// Exported analytics state; field names match the service schemas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsSnapshot {
    pub window: Option<TimeWindow>,
    pub surface: SurfaceView,
    pub alerts: Vec<TrendAlert>,
    pub emerging: Vec<EmergingTopic>,
    pub communities: Vec<Community>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct OpenWindow {
    index: i64,
    counts: Vec<u32>,
    topics: BTreeMap<String, u32>,
}

/// Single-writer analytics state. Messages must arrive in timestamp order;
/// a window closes when the first message of a later window arrives or on
/// [`AnalyticsEngine::finish`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsEngine {
    config: EngineConfig,
    applied: u64,
    last_ts: Option<Timestamp>,
    open: Option<OpenWindow>,
    /// Most recent closed windows, oldest first, at most `baseline_windows`.
    history: VecDeque<Vec<u32>>,
    prev_topics: BTreeMap<String, u32>,
    surfaces: BTreeMap<i64, Vec<u32>>,
    alerts: Vec<TrendAlert>,
    emerging: Vec<EmergingTopic>,
    alert_cells: BTreeSet<CellIndex>,
    graph: InteractionGraph,
    author_of: BTreeMap<String, String>,
    tracker: UserTracker,
    recent_index: Option<i64>,
    recent: Vec<EnrichedMessage>,
}

impl AnalyticsEngine {
    pub fn new(config: EngineConfig) -> Result<Self, EngineError> {
        config.validate()?;
        Ok(Self {
            config,
            applied: 0,
            last_ts: None,
            open: None,
            history: VecDeque::new(),
            prev_topics: BTreeMap::new(),
            surfaces: BTreeMap::new(),
            alerts: Vec::new(),
            emerging: Vec::new(),
            alert_cells: BTreeSet::new(),
            graph: InteractionGraph::default(),
            author_of: BTreeMap::new(),
            tracker: UserTracker::default(),
            recent_index: None,
            recent: Vec::new(),
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn applied(&self) -> u64 {
        self.applied
    }

    pub fn last_ts(&self) -> Option<Timestamp> {
        self.last_ts
    }

    pub fn apply(&mut self, m: &EnrichedMessage) -> Result<Vec<EngineEvent>, EngineError> {
        let ts = m.base.ts;
        if let Some(last) = self.last_ts.filter(|&l| ts < l) {
            return Err(EngineError::OutOfOrder { id: m.base.id.clone(), ts, last });
        }
        let grid = self.config.grid;
        let index = self.config.clock().index_of(ts);
        let mut events = Vec::new();
        if self.open.as_ref().is_some_and(|o| o.index < index) {
            events = self.close_open();
            let gap = index - self.history_tail_index() - 1;
            for _ in 0..gap.clamp(0, self.config.burst.baseline_windows as i64) {
                self.push_history(vec![0; grid.cell_count()]);
            }
            if gap > 0 {
                self.prev_topics.clear();
            }
        }
        let open = self.open.get_or_insert_with(|| OpenWindow {
            index,
            counts: vec![0; grid.cell_count()],
            topics: BTreeMap::new(),
        });
        if counts_toward_surface(m, self.config.count_all) {
            if let Some(cell) = m.geo().and_then(|p| cell_of(p, &grid).ok()) {
                open.counts[grid.flat(cell)] += 1;
            }
        }
        for t in &m.topics {
            *open.topics.entry(t.clone()).or_insert(0) += 1;
        }
        let parent = m.base.reply_to.as_ref().and_then(|r| self.author_of.get(r)).map(String::as_str);
        self.graph.observe(&m.base, parent, self.config.graph);
        self.author_of.insert(m.base.id.clone(), m.base.author_id.clone());
        self.tracker.observe(m);
        if self.recent_index != Some(index) {
            self.recent.clear();
            self.recent_index = Some(index);
        }
        self.recent.push(m.clone());
        self.last_ts = Some(ts);
        self.applied += 1;
        Ok(events)
    }

    /// Closes the open window, if any.
    pub fn finish(&mut self) -> Vec<EngineEvent> {
        self.close_open()
    }

    fn history_tail_index(&self) -> i64 {
        self.surfaces.keys().next_back().copied().unwrap_or(i64::MIN / 2)
    }

    fn push_history(&mut self, counts: Vec<u32>) {
        self.history.push_back(counts);
        while self.history.len() > self.config.burst.baseline_windows {
            self.history.pop_front();
        }
    }

    fn close_open(&mut self) -> Vec<EngineEvent> {
        let Some(open) = self.open.take() else { return Vec::new() };
        let grid = self.config.grid;
        let window = self.config.clock().window(open.index);
        let mut alerts = detect_gatherings(&open.counts, &grid, window, &self.config.gathering);
        for (i, &observed) in open.counts.iter().enumerate() {
            if observed < self.config.burst.min_count {
                continue;
            }
            let history: Vec<u32> = self.history.iter().map(|h| h[i]).collect();
            alerts.extend(burst_check(grid.unflat(i), window, observed, &history, &self.config.burst));
        }
        self.emerging = emerging_topics(&self.prev_topics, &open.topics, &self.config.emerging);
        self.alert_cells = alerts.iter().map(|a| a.cell).collect();
        self.alerts.extend(alerts.iter().cloned());

        let mut events = vec![EngineEvent::Surface(HeatSurface { grid, window, heights: open.counts.clone() })];
        events.extend(alerts.into_iter().map(EngineEvent::Alert));
        events.push(EngineEvent::Emerging(self.emerging.clone()));

        self.prev_topics = open.topics;
        self.push_history(open.counts.clone());
        self.surfaces.insert(open.index, open.counts);
        events
    }

    /// Surface for the window containing `at`, or the latest window.
    pub fn surface(&self, at: Option<Timestamp>) -> HeatSurface {
        let grid = self.config.grid;
        let clock = self.config.clock();
        let index = match at {
            Some(ts) => Some(clock.index_of(ts)),
            None => self.open.as_ref().map(|o| o.index).or_else(|| self.surfaces.keys().next_back().copied()),
        };
        let Some(index) = index else {
            let window = clock.window(self.last_ts.map_or(0, |t| clock.index_of(t)));
            return HeatSurface::empty(grid, window);
        };
        let window = clock.window(index);
        let heights = match &self.open {
            Some(o) if o.index == index => Some(&o.counts),
            _ => self.surfaces.get(&index),
        };
        match heights {
            Some(h) => HeatSurface { grid, window, heights: h.clone() },
            None => HeatSurface::empty(grid, window),
        }
    }

    /// Every closed window's surface, in time order.
    pub fn closed_surfaces(&self) -> Vec<HeatSurface> {
        let clock = self.config.clock();
        self.surfaces
            .iter()
            .map(|(&i, h)| HeatSurface { grid: self.config.grid, window: clock.window(i), heights: h.clone() })
            .collect()
    }

    pub fn alerts(&self) -> &[TrendAlert] {
        &self.alerts
    }

    pub fn emerging(&self) -> &[EmergingTopic] {
        &self.emerging
    }

    pub fn interaction_graph(&self) -> &InteractionGraph {
        &self.graph
    }

    pub fn communities(&self) -> Vec<Community> {
        let n = self.graph.author_count();
        if n < 2 {
            return Vec::new();
        }
        extract_community(&self.graph, self.config.community_k.min(n)).into_iter().collect()
    }

    /// Sector guidance over the latest window's messages, treating the
    /// latest closed window's alert cells as danger.
    pub fn guidance(&self, center: GeoPoint, radius_m: f64, sectors: usize) -> Result<SectorDisplay, SectorError> {
        let alerts = AlertCells { grid: &self.config.grid, cells: &self.alert_cells };
        compute_sectors(center, radius_m, &self.recent, sectors, Some(alerts))
    }

    pub fn tracked_positions(&self, tracked: &BTreeSet<String>) -> BTreeMap<String, TrackedPosition> {
        self.tracker.positions(tracked)
    }

    pub fn snapshot(&self) -> AnalyticsSnapshot {
        let latest = self.open.as_ref().map(|o| o.index).or_else(|| self.surfaces.keys().next_back().copied());
        let surface = self.surface(latest.map(|i| self.config.clock().window(i).start));
        AnalyticsSnapshot {
            window: latest.map(|_| surface.window),
            surface: SurfaceView { grid: surface.grid, heights: surface.heights },
            alerts: self.alerts.clone(),
            emerging: self.emerging.clone(),
            communities: self.communities(),
        }
    }
}
