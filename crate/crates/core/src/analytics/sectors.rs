use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{bearing, cell_of, haversine_m, CellIndex, EnrichedMessage, GeoPoint, GridSpec};

pub const MIN_SECTORS: usize = 4;
pub const DEFAULT_SECTORS: usize = 8;
pub const DEFAULT_RADIUS_M: f64 = 500.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SectorError {
    #[error("need at least {MIN_SECTORS} sectors, got {0}")]
    TooFewSectors(usize),
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorColor {
    Red,
    Green,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sector {
    pub color: SectorColor,
    pub danger_count: u32,
    pub positive_count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorDisplay {
    pub center: GeoPoint,
    pub radius_m: f64,
    pub sectors: Vec<Sector>,
}

/// Cells currently under an alert; a message located in one counts as danger.
#[derive(Debug, Clone, Copy)]
pub struct AlertCells<'a> {
    pub grid: &'a GridSpec,
    pub cells: &'a BTreeSet<CellIndex>,
}

/// Sector `i` covers bearings `[i*360/n, (i+1)*360/n)`.
pub fn sector_index(bearing_deg: f64, n: usize) -> usize {
    let width = 360.0 / n as f64;
    ((bearing_deg.rem_euclid(360.0) / width).floor() as usize).min(n - 1)
}

/// Colors the directions around `center` by what nearby messages report.
/// Messages exactly at the center have no bearing and are left out.
pub fn compute_sectors<'a, I>(
    center: GeoPoint,
    radius_m: f64,
    msgs: I,
    n: usize,
    alerts: Option<AlertCells<'_>>,
) -> Result<SectorDisplay, SectorError>
where
    I: IntoIterator<Item = &'a EnrichedMessage>,
{
    if n < MIN_SECTORS {
        return Err(SectorError::TooFewSectors(n));
    }
    if !(radius_m.is_finite() && radius_m > 0.0) {
        return Err(SectorError::InvalidRadius(radius_m));
    }
    let mut danger = vec![0u32; n];
    let mut positive = vec![0u32; n];
    for m in msgs {
        let Some(p) = m.geo() else { continue };
        if haversine_m(center, p) > radius_m {
            continue;
        }
        let Ok(b) = bearing(center, p) else { continue };
        let i = sector_index(b, n);
        let in_alert = alerts.is_some_and(|a| cell_of(p, a.grid).is_ok_and(|c| a.cells.contains(&c)));
        if in_alert || m.template_hits.iter().any(|h| h.category.is_danger()) {
            danger[i] += 1;
        }
        if m.template_hits.iter().any(|h| h.category.is_positive()) {
            positive[i] += 1;
        }
    }
    let sectors = danger
        .into_iter()
        .zip(positive)
        .map(|(danger_count, positive_count)| Sector {
            color: if danger_count > 0 {
                SectorColor::Red
            } else if positive_count > 0 {
                SectorColor::Green
            } else {
                SectorColor::Neutral
            },
            danger_count,
            positive_count,
        })
        .collect();
    Ok(SectorDisplay { center, radius_m, sectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::testutil::enriched;
    use crate::model::{destination, TemplateCategory, TemplateHit};
    use proptest::prelude::*;

    fn center() -> GeoPoint {
        GeoPoint::new(41.9, 12.5).unwrap()
    }

    fn tagged(id: &str, b: f64, dist: f64, cats: &[TemplateCategory]) -> EnrichedMessage {
        let mut m = enriched(id, 0, Some(destination(center(), b, dist)), true);
        m.template_hits = cats.iter().map(|&category| TemplateHit { category, template_id: "t".into() }).collect();
        m
    }

    fn colors(d: &SectorDisplay) -> Vec<SectorColor> {
        d.sectors.iter().map(|s| s.color).collect()
    }

    #[test]
    fn empty_is_all_neutral() {
        let d = compute_sectors(center(), 500.0, std::iter::empty(), 8, None).unwrap();
        assert_eq!(colors(&d), vec![SectorColor::Neutral; 8]);
    }

    #[test]
    fn violence_due_north() {
        let m = tagged("a", 0.0, 200.0, &[TemplateCategory::Violence]);
        let d = compute_sectors(center(), 500.0, [&m], 8, None).unwrap();
        let mut want = vec![SectorColor::Neutral; 8];
        want[0] = SectorColor::Red;
        assert_eq!(colors(&d), want);
        // outside the radius
        let far = tagged("b", 0.0, 900.0, &[TemplateCategory::Violence]);
        assert_eq!(colors(&compute_sectors(center(), 500.0, [&far], 8, None).unwrap()), vec![SectorColor::Neutral; 8]);
    }

    #[test]
    fn danger_dominates() {
        let a = tagged("a", 100.0, 200.0, &[TemplateCategory::Violence]);
        let b = tagged("b", 110.0, 300.0, &[TemplateCategory::Joyful]);
        let c = tagged("c", 200.0, 300.0, &[TemplateCategory::Curiosity]);
        let d = compute_sectors(center(), 500.0, [&a, &b, &c], 8, None).unwrap();
        assert_eq!(d.sectors[2], Sector { color: SectorColor::Red, danger_count: 1, positive_count: 1 });
        assert_eq!(d.sectors[4].color, SectorColor::Green);
    }

    #[test]
    fn alert_cells_are_danger() {
        let g = crate::analytics::testutil::rome_grid();
        let m = tagged("a", 280.0, 100.0, &[]);
        let cells = BTreeSet::from([cell_of(m.geo().unwrap(), &g).unwrap()]);
        let d = compute_sectors(center(), 500.0, [&m], 4, Some(AlertCells { grid: &g, cells: &cells })).unwrap();
        assert_eq!(d.sectors[3].color, SectorColor::Red);
    }

    #[test]
    fn invalid_sector_count() {
        assert_eq!(compute_sectors(center(), 500.0, std::iter::empty(), 3, None), Err(SectorError::TooFewSectors(3)));
    }

    #[test]
    fn sector_arithmetic_oracle() {
        for n in 4..=16 {
            for k in 0..3600 {
                let b = k as f64 / 10.0;
                let want = (0..n).find(|&i| b >= i as f64 * 360.0 / n as f64 && b < (i + 1) as f64 * 360.0 / n as f64);
                assert_eq!(Some(sector_index(b, n)), want, "b={b} n={n}");
            }
        }
    }

    proptest! {
        #[test]
        fn rotation_shifts_by_one_sector(
            n in 4usize..13,
            items in proptest::collection::vec((0.02f64..0.98, 0usize..13, 50.0f64..450.0, 0u8..3), 0..12),
        ) {
            // bearings kept away from sector edges so geodesic roundtrip noise cannot cross one
            let width = 360.0 / n as f64;
            let cats = [TemplateCategory::Violence, TemplateCategory::Joyful, TemplateCategory::Other];
            let build = |shift: usize| -> Vec<EnrichedMessage> {
                items.iter().enumerate().map(|(i, &(frac, s, dist, c))| {
                    let b = ((s % n + shift) as f64 + frac) * width;
                    tagged(&format!("m{i}"), b % 360.0, dist, &[cats[c as usize]])
                }).collect()
            };
            let base = compute_sectors(center(), 500.0, &build(0), n, None).unwrap();
            let rotated = compute_sectors(center(), 500.0, &build(1), n, None).unwrap();
            for i in 0..n {
                prop_assert_eq!(&rotated.sectors[(i + 1) % n], &base.sectors[i]);
            }
        }
    }
}
