//! Windowed spatial and social computations over enriched messages.

mod alerts;
mod binning;
mod community;
mod emerging;
mod engine;
mod graph;
mod sectors;
mod tracking;

pub use alerts::{burst_check, detect_bursts, detect_gatherings, AlertKind, BurstConfig, CellSeries, GatheringConfig, TrendAlert};
pub use binning::{bin_messages, build_surface, counts_toward_surface, BinnedCounts, HeatSurface};
pub use community::{extract_community, Community, CommunityError, CommunityFixture, InteractionGraph};
pub use emerging::{emerging_topics, EmergingConfig, EmergingTopic};
pub use engine::{AnalyticsEngine, AnalyticsSnapshot, EngineConfig, EngineError, EngineEvent, SurfaceView};
pub use graph::{build_similarity_graph, check_reply_forest, conversation_length, Edge, EdgeKind, GraphError, GraphOptions, SimilarityGraph};
pub use sectors::{compute_sectors, sector_index, DEFAULT_RADIUS_M, DEFAULT_SECTORS, MIN_SECTORS, AlertCells, Sector, SectorColor, SectorDisplay, SectorError};
pub use tracking::{track_users, TrackedPosition, UserTracker};

#[cfg(test)]
pub(crate) mod testutil {
    use std::collections::BTreeSet;

    use crate::model::{
        BoundingBox, EmotionLabel, EnrichedMessage, GeoPoint, GeoProvenance, GridSpec, Message, RelevanceVerdict, ResolvedGeo,
        Source, SourceKind,
    };

    pub(crate) fn enriched(id: &str, ts: i64, geo: Option<GeoPoint>, accepted: bool) -> EnrichedMessage {
        EnrichedMessage {
            base: Message {
                id: id.into(),
                source: Source::new(SourceKind::TwitterLike),
                author_id: "author".into(),
                ts,
                text: String::new(),
                declared_geo: geo,
                reply_to: None,
                mentions: Vec::new(),
            },
            resolved_geo: geo.map(|point| ResolvedGeo { point, provenance: GeoProvenance::Declared }),
            topics: BTreeSet::new(),
            emotion: EmotionLabel::NEUTRAL,
            relevance: RelevanceVerdict::new(if accepted { 1.0 } else { 0.0 }, 0.0, 0.0, 0.95),
            template_hits: Vec::new(),
        }
    }

    pub(crate) fn rome_grid() -> GridSpec {
        let bbox = BoundingBox::new(GeoPoint::new(41.8, 12.4).unwrap(), GeoPoint::new(42.0, 12.6).unwrap()).unwrap();
        GridSpec::new(bbox, 10, 10).unwrap()
    }
}
