//! Geographic, temporal and message primitives shared by every module.

pub mod geo;
pub mod message;
pub mod time;

pub use geo::{
    bearing, cell_of, destination, distance_to_polyline_m, haversine_m, BoundingBox, CellIndex, GeoError,
    GeoPoint, GridSpec,
};
pub use message::{
    EnrichedMessage, Emotion, EmotionLabel, GeoProvenance, Message, MessageError, RelevanceVerdict, ResolvedGeo,
    Source, SourceKind, TemplateCategory, TemplateHit,
};
pub use time::{TimeWindow, Timestamp, WindowClock};
