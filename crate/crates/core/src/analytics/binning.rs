use serde::{Deserialize, Serialize};

use crate::model::{cell_of, EnrichedMessage, GridSpec, TimeWindow};

/// Per-window cell counts, each matrix row-major (`iy * nx + ix`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCounts {
    pub windows: Vec<TimeWindow>,
    pub matrices: Vec<Vec<u32>>,
    /// Messages ignored because they were rejected, not geolocated, outside
    /// the grid or outside every window.
    pub skipped: usize,
}

impl BinnedCounts {
    pub fn total(&self) -> u64 {
        self.matrices.iter().flatten().map(|&c| u64::from(c)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatSurface {
    pub grid: GridSpec,
    pub window: TimeWindow,
    /// Control-point heights, row-major.
    pub heights: Vec<u32>,
}

impl HeatSurface {
    pub fn empty(grid: GridSpec, window: TimeWindow) -> Self {
        Self { grid, window, heights: vec![0; grid.cell_count()] }
    }

    pub fn total(&self) -> u64 {
        self.heights.iter().map(|&h| u64::from(h)).sum()
    }
}

/// Whether a message contributes to counts: accepted (unless `count_all`)
/// and geolocated.
pub fn counts_toward_surface(m: &EnrichedMessage, count_all: bool) -> bool {
    (count_all || m.relevance.accepted) && m.resolved_geo.is_some()
}

/// Counts accepted geolocated messages per cell for each window. Windows are
/// expected to be contiguous and sorted; messages outside them are skipped.
pub fn bin_messages<'a, I>(msgs: I, grid: &GridSpec, windows: &[TimeWindow], count_all: bool) -> BinnedCounts
where
    I: IntoIterator<Item = &'a EnrichedMessage>,
{
    let mut matrices = vec![vec![0u32; grid.cell_count()]; windows.len()];
    let mut skipped = 0;
    for m in msgs {
        let placed = counts_toward_surface(m, count_all)
            .then(|| m.geo())
            .flatten()
            .and_then(|p| cell_of(p, grid).ok())
            .and_then(|cell| {
                let w = windows.partition_point(|w| w.end() <= m.base.ts);
                windows.get(w).filter(|win| win.contains(m.base.ts)).map(|_| (w, cell))
            });
        match placed {
            Some((w, cell)) => matrices[w][grid.flat(cell)] += 1,
            None => skipped += 1,
        }
    }
    BinnedCounts { windows: windows.to_vec(), matrices, skipped }
}

/// Surface heights are the counts themselves; interpolation is left to
/// renderers.
pub fn build_surface(counts: &[u32], grid: &GridSpec, window: TimeWindow) -> HeatSurface {
    debug_assert_eq!(counts.len(), grid.cell_count());
    HeatSurface { grid: *grid, window, heights: counts.to_vec() }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::analytics::testutil::{enriched, rome_grid};
    use crate::model::{BoundingBox, CellIndex, GeoPoint, WindowClock};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_stream_gives_zero_matrices() {
        let g = rome_grid();
        let ws = WindowClock::new(0, 300).unwrap().series(0, 900);
        let b = bin_messages(std::iter::empty(), &g, &ws, false);
        assert_eq!(b.matrices.len(), 3);
        assert_eq!(b.total(), 0);
    }

    #[test]
    fn single_point() {
        let g = rome_grid();
        let ws = WindowClock::new(0, 300).unwrap().series(0, 300);
        let c = CellIndex { ix: 4, iy: 2 };
        let m = enriched("a", 10, Some(g.cell_center(c)), true);
        let b = bin_messages([&m], &g, &ws, false);
        assert_eq!(b.matrices[0][g.flat(c)], 1);
        assert_eq!(b.total(), 1);
        let rejected = enriched("b", 10, Some(g.cell_center(c)), false);
        let b = bin_messages([&rejected], &g, &ws, false);
        assert_eq!((b.total(), b.skipped), (0, 1));
        assert_eq!(bin_messages([&rejected], &g, &ws, true).total(), 1);
    }

    /// O(n·cells) recount scanning every window and cell rectangle.
    fn brute_recount(msgs: &[EnrichedMessage], g: &GridSpec, ws: &[TimeWindow]) -> Vec<Vec<u32>> {
        let mut out = vec![vec![0u32; g.cell_count()]; ws.len()];
        for (wi, w) in ws.iter().enumerate() {
            for iy in 0..g.ny {
                for ix in 0..g.nx {
                    let lat_hi = if iy + 1 == g.ny { f64::INFINITY } else { g.lat_edge(iy + 1) };
                    let lon_hi = if ix + 1 == g.nx { f64::INFINITY } else { g.lon_edge(ix + 1) };
                    let inside = |p: GeoPoint| {
                        g.bbox.contains(p) && p.lat >= g.lat_edge(iy) && p.lat < lat_hi && p.lon >= g.lon_edge(ix) && p.lon < lon_hi
                    };
                    out[wi][g.flat(CellIndex { ix, iy })] = msgs
                        .iter()
                        .filter(|m| m.relevance.accepted && w.contains(m.base.ts) && m.geo().is_some_and(inside))
                        .count() as u32;
                }
            }
        }
        out
    }

    #[test]
    fn matches_brute_force_recount() {
        let g = GridSpec::new(
            BoundingBox::new(GeoPoint::new(41.8, 12.4).unwrap(), GeoPoint::new(42.0, 12.6).unwrap()).unwrap(),
            12,
            9,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let msgs: Vec<EnrichedMessage> = (0..500)
            .map(|i| {
                let geo = (rng.gen_range(0..10) > 0)
                    .then(|| GeoPoint::new(rng.gen_range(41.78..42.02), rng.gen_range(12.38..12.62)).unwrap());
                enriched(&format!("m{i}"), rng.gen_range(0..1200), geo, rng.gen_bool(0.8))
            })
            .collect();
        let ws = WindowClock::new(0, 300).unwrap().series(0, 1200);
        let b = bin_messages(&msgs, &g, &ws, false);
        assert_eq!(b.matrices, brute_recount(&msgs, &g, &ws));
        assert_eq!(b.total() as usize + b.skipped, msgs.len());
    }

    #[test]
    fn surface_conserves_counts() {
        let g = rome_grid();
        let w = TimeWindow::new(0, 300).unwrap();
        let counts: Vec<u32> = (0..g.cell_count() as u32).map(|i| i % 3).collect();
        let s = build_surface(&counts, &g, w);
        assert_eq!(s.total(), counts.iter().map(|&c| u64::from(c)).sum::<u64>());
        assert_eq!(HeatSurface::empty(g, w).total(), 0);
    }
}
