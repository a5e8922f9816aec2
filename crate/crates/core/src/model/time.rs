use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// UTC timestamp in whole seconds since the Unix epoch.
pub type Timestamp = i64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeError {
    #[error("invalid ISO-8601 timestamp `{0}`")]
    Parse(String),
    #[error("window duration must be positive, got {0}")]
    NonPositiveDuration(i64),
}

pub fn parse_iso(s: &str) -> Result<Timestamp, TimeError> {
    DateTime::parse_from_rfc3339(s.trim())
        .map(|dt| dt.with_timezone(&Utc).timestamp())
        .map_err(|_| TimeError::Parse(s.to_string()))
}

pub fn format_iso(ts: Timestamp) -> String {
    DateTime::<Utc>::from_timestamp(ts, 0)
        .map(|dt| dt.to_rfc3339_opts(SecondsFormat::Secs, true))
        .unwrap_or_else(|| ts.to_string())
}

/// Accepts either an ISO-8601 timestamp or integer epoch seconds.
pub fn parse_flexible(s: &str) -> Result<Timestamp, TimeError> {
    match s.trim().parse::<i64>() {
        Ok(v) => Ok(v),
        Err(_) => parse_iso(s),
    }
}

/// serde adapter writing timestamps as ISO-8601 UTC strings.
pub mod iso {
    use super::*;

    pub fn serialize<S: Serializer>(ts: &Timestamp, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_iso(*ts))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Timestamp, D::Error> {
        let raw = String::deserialize(d)?;
        parse_iso(&raw).map_err(serde::de::Error::custom)
    }
}

/// Half-open interval `[start, start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawWindow")]
pub struct TimeWindow {
    #[serde(with = "iso")]
    pub start: Timestamp,
    pub duration: i64,
}

#[derive(Deserialize)]
struct RawWindow {
    #[serde(with = "iso")]
    start: Timestamp,
    duration: i64,
}

impl TryFrom<RawWindow> for TimeWindow {
    type Error = TimeError;

    fn try_from(raw: RawWindow) -> Result<Self, Self::Error> {
        TimeWindow::new(raw.start, raw.duration)
    }
}

impl TimeWindow {
    pub fn new(start: Timestamp, duration: i64) -> Result<Self, TimeError> {
        if duration > 0 {
            Ok(Self { start, duration })
        } else {
            Err(TimeError::NonPositiveDuration(duration))
        }
    }

    pub fn end(&self) -> Timestamp {
        self.start + self.duration
    }

    pub fn contains(&self, ts: Timestamp) -> bool {
        ts >= self.start && ts < self.end()
    }

    pub fn next(&self) -> Self {
        Self { start: self.end(), duration: self.duration }
    }
}

/// Contiguous, equally sized windows anchored at `origin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowClock {
    pub origin: Timestamp,
    pub length: i64,
}

impl WindowClock {
    pub fn new(origin: Timestamp, length: i64) -> Result<Self, TimeError> {
        if length <= 0 {
            return Err(TimeError::NonPositiveDuration(length));
        }
        Ok(Self { origin, length })
    }

    pub fn index_of(&self, ts: Timestamp) -> i64 {
        (ts - self.origin).div_euclid(self.length)
    }

    pub fn window(&self, index: i64) -> TimeWindow {
        TimeWindow { start: self.origin + index * self.length, duration: self.length }
    }

    pub fn window_of(&self, ts: Timestamp) -> TimeWindow {
        self.window(self.index_of(ts))
    }

    /// Contiguous series covering `[from, to)`.
    pub fn series(&self, from: Timestamp, to: Timestamp) -> Vec<TimeWindow> {
        if to <= from {
            return Vec::new();
        }
        (self.index_of(from)..=self.index_of(to - 1)).map(|i| self.window(i)).collect()
    }
}
