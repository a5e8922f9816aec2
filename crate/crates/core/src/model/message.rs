use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::geo::GeoPoint;
use super::time::{self, Timestamp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MessageError {
    #[error("unknown source kind `{0}`")]
    UnknownSource(String),
    #[error("message id must not be empty")]
    EmptyId,
    #[error("message `{0}` replies to itself")]
    SelfReply(String),
    #[error("`lat` and `lon` must be given together")]
    PartialCoordinates,
    #[error(transparent)]
    Geo(#[from] super::geo::GeoError),
    #[error(transparent)]
    Time(#[from] time::TimeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    TwitterLike,
    PhotoLike,
    CheckinLike,
    GraphLike,
    DirectInput,
}

impl SourceKind {
    pub const ALL: [SourceKind; 5] = [
        SourceKind::TwitterLike,
        SourceKind::PhotoLike,
        SourceKind::CheckinLike,
        SourceKind::GraphLike,
        SourceKind::DirectInput,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::TwitterLike => "twitter-like",
            SourceKind::PhotoLike => "photo-like",
            SourceKind::CheckinLike => "checkin-like",
            SourceKind::GraphLike => "graph-like",
            SourceKind::DirectInput => "direct-input",
        }
    }
}

/// Source network of a message. Written on the wire as `kind` or
/// `kind:origin-label` (e.g. `photo-like:flickr`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Source {
    pub kind: SourceKind,
    pub label: Option<String>,
}

impl Source {
    pub fn new(kind: SourceKind) -> Self {
        Self { kind, label: None }
    }

    pub fn labeled(kind: SourceKind, label: impl Into<String>) -> Self {
        Self { kind, label: Some(label.into()) }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) => write!(f, "{}:{}", self.kind.as_str(), l),
            None => f.write_str(self.kind.as_str()),
        }
    }
}

impl FromStr for Source {
    type Err = MessageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, label) = match s.split_once(':') {
            Some((k, l)) => (k, Some(l.to_string()).filter(|l| !l.is_empty())),
            None => (s, None),
        };
        let kind = SourceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == kind)
            .ok_or_else(|| MessageError::UnknownSource(s.to_string()))?;
        Ok(Source { kind, label })
    }
}

impl Serialize for Source {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Source {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// A raw social post. Serialized in the event-log wire shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WireMessage", into = "WireMessage")]
pub struct Message {
    pub id: String,
    pub source: Source,
    pub author_id: String,
    pub ts: Timestamp,
    pub text: String,
    pub declared_geo: Option<GeoPoint>,
    pub reply_to: Option<String>,
    pub mentions: Vec<String>,
}

impl Message {
    pub fn validate(&self) -> Result<(), MessageError> {
        if self.id.is_empty() {
            return Err(MessageError::EmptyId);
        }
        if self.reply_to.as_deref() == Some(self.id.as_str()) {
            return Err(MessageError::SelfReply(self.id.clone()));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireMessage {
    id: String,
    source: Source,
    author: String,
    ts: String,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reply_to: Option<String>,
    #[serde(default)]
    mentions: Vec<String>,
}

impl TryFrom<WireMessage> for Message {
    type Error = MessageError;

    fn try_from(w: WireMessage) -> Result<Self, Self::Error> {
        let declared_geo = match (w.lat, w.lon) {
            (Some(lat), Some(lon)) => Some(GeoPoint::new(lat, lon)?),
            (None, None) => None,
            _ => return Err(MessageError::PartialCoordinates),
        };
        let msg = Message {
            id: w.id,
            source: w.source,
            author_id: w.author,
            ts: time::parse_iso(&w.ts)?,
            text: w.text,
            declared_geo,
            reply_to: w.reply_to,
            mentions: w.mentions,
        };
        msg.validate()?;
        Ok(msg)
    }
}

impl From<Message> for WireMessage {
    fn from(m: Message) -> Self {
        WireMessage {
            id: m.id,
            source: m.source,
            author: m.author_id,
            ts: time::format_iso(m.ts),
            text: m.text,
            lat: m.declared_geo.map(|g| g.lat),
            lon: m.declared_geo.map(|g| g.lon),
            reply_to: m.reply_to,
            mentions: m.mentions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeoProvenance {
    Declared,
    Geoparsed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedGeo {
    pub point: GeoPoint,
    pub provenance: GeoProvenance,
}

/// The eight Plutchik primaries plus `neutral`, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emotion {
    Joy,
    Trust,
    Fear,
    Surprise,
    Sadness,
    Disgust,
    Anger,
    Anticipation,
    Neutral,
}

impl Emotion {
    pub const PRIMARIES: [Emotion; 8] = [
        Emotion::Joy,
        Emotion::Trust,
        Emotion::Fear,
        Emotion::Surprise,
        Emotion::Sadness,
        Emotion::Disgust,
        Emotion::Anger,
        Emotion::Anticipation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Joy => "joy",
            Emotion::Trust => "trust",
            Emotion::Fear => "fear",
            Emotion::Surprise => "surprise",
            Emotion::Sadness => "sadness",
            Emotion::Disgust => "disgust",
            Emotion::Anger => "anger",
            Emotion::Anticipation => "anticipation",
            Emotion::Neutral => "neutral",
        }
    }
}

impl FromStr for Emotion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Emotion::PRIMARIES
            .into_iter()
            .chain([Emotion::Neutral])
            .find(|e| e.as_str() == s.trim().to_lowercase())
            .ok_or_else(|| format!("unknown emotion `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionLabel {
    pub primary: Emotion,
    pub intensity: f64,
}

impl EmotionLabel {
    pub const NEUTRAL: EmotionLabel = EmotionLabel { primary: Emotion::Neutral, intensity: 0.0 };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateCategory {
    Violence,
    LawInfringement,
    Injury,
    Joyful,
    Curiosity,
    Other,
}

impl TemplateCategory {
    pub const ALL: [TemplateCategory; 6] = [
        TemplateCategory::Violence,
        TemplateCategory::LawInfringement,
        TemplateCategory::Injury,
        TemplateCategory::Joyful,
        TemplateCategory::Curiosity,
        TemplateCategory::Other,
    ];

    pub fn is_danger(self) -> bool {
        matches!(self, TemplateCategory::Violence | TemplateCategory::LawInfringement | TemplateCategory::Injury)
    }

    pub fn is_positive(self) -> bool {
        matches!(self, TemplateCategory::Joyful | TemplateCategory::Curiosity)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateCategory::Violence => "violence",
            TemplateCategory::LawInfringement => "law_infringement",
            TemplateCategory::Injury => "injury",
            TemplateCategory::Joyful => "joyful",
            TemplateCategory::Curiosity => "curiosity",
            TemplateCategory::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TemplateHit {
    pub category: TemplateCategory,
    pub template_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceVerdict {
    pub geo: f64,
    pub toponym: f64,
    pub content: f64,
    pub combined: f64,
    pub accepted: bool,
}

impl RelevanceVerdict {
    pub fn new(geo: f64, toponym: f64, content: f64, threshold: f64) -> Self {
        let combined = geo.max(toponym).max(content);
        Self { geo, toponym, content, combined, accepted: combined >= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedMessage {
    pub base: Message,
    pub resolved_geo: Option<ResolvedGeo>,
    pub topics: BTreeSet<String>,
    pub emotion: EmotionLabel,
    pub relevance: RelevanceVerdict,
    pub template_hits: Vec<TemplateHit>,
}

impl EnrichedMessage {
    pub fn geo(&self) -> Option<GeoPoint> {
        self.resolved_geo.map(|r| r.point)
    }

    pub fn has_category(&self, c: TemplateCategory) -> bool {
        self.template_hits.iter().any(|h| h.category == c)
    }
}
