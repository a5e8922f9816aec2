use serde::{Deserialize, Serialize};

use crate::model::{CellIndex, GridSpec, TimeWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlertKind {
    Burst,
    Gathering,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendAlert {
    pub kind: AlertKind,
    pub cell: CellIndex,
    pub window: TimeWindow,
    pub observed: u32,
    pub baseline: f64,
    pub ratio: f64,
}

impl TrendAlert {
    fn new(kind: AlertKind, cell: CellIndex, window: TimeWindow, observed: u32, baseline: f64) -> Self {
        Self { kind, cell, window, observed, baseline, ratio: f64::from(observed) / baseline.max(1.0) }
    }
}

/// Count history of one cell over contiguous windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSeries {
    pub cell: CellIndex,
    pub counts: Vec<(TimeWindow, u32)>,
}

impl CellSeries {
    pub fn is_contiguous(&self) -> bool {
        self.counts.windows(2).all(|p| p[0].0.end() == p[1].0.start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurstConfig {
    pub baseline_windows: usize,
    pub trigger_ratio: f64,
    pub min_count: u32,
}

impl Default for BurstConfig {
    fn default() -> Self {
        Self { baseline_windows: 3, trigger_ratio: 3.0, min_count: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GatheringConfig {
    pub z_ratio: f64,
    pub min_count: u32,
}

impl Default for GatheringConfig {
    fn default() -> Self {
        Self { z_ratio: 4.0, min_count: 20 }
    }
}

/// Burst test for one observation given its trailing history (oldest
/// first). An empty history counts as a baseline of 1.
pub fn burst_check(
    cell: CellIndex,
    window: TimeWindow,
    observed: u32,
    history: &[u32],
    cfg: &BurstConfig,
) -> Option<TrendAlert> {
    let baseline = if history.is_empty() {
        0.0
    } else {
        history.iter().map(|&c| f64::from(c)).sum::<f64>() / history.len() as f64
    };
    let alert = TrendAlert::new(AlertKind::Burst, cell, window, observed, baseline);
    (observed >= cfg.min_count && alert.ratio >= cfg.trigger_ratio).then_some(alert)
}

/// Temporal bursts: a window whose count reaches `min_count` and
/// `trigger_ratio` times the mean of up to `baseline_windows` preceding
/// windows.
pub fn detect_bursts(series: &CellSeries, cfg: &BurstConfig) -> Vec<TrendAlert> {
    let counts: Vec<u32> = series.counts.iter().map(|&(_, c)| c).collect();
    series
        .counts
        .iter()
        .enumerate()
        .filter_map(|(i, &(window, observed))| {
            let history = &counts[i.saturating_sub(cfg.baseline_windows)..i];
            burst_check(series.cell, window, observed, history, cfg)
        })
        .collect()
}

/// Spatial outliers within one window: cells whose count reaches
/// `min_count` and `z_ratio` times the mean of the nonzero cells. When only
/// one cell is nonzero the mean runs over every cell, zeros included.
pub fn detect_gatherings(counts: &[u32], grid: &GridSpec, window: TimeWindow, cfg: &GatheringConfig) -> Vec<TrendAlert> {
    let nonzero: Vec<u32> = counts.iter().copied().filter(|&c| c > 0).collect();
    if nonzero.is_empty() {
        return Vec::new();
    }
    let sum: f64 = nonzero.iter().map(|&c| f64::from(c)).sum();
    let mean = if nonzero.len() == 1 { sum / counts.len() as f64 } else { sum / nonzero.len() as f64 };
    counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c >= cfg.min_count)
        .map(|(i, &c)| TrendAlert::new(AlertKind::Gathering, grid.unflat(i), window, c, mean))
        .filter(|a| a.ratio >= cfg.z_ratio)
        .collect()
}
