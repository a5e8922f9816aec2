use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::EventLog;
use crate::model::{Message, Timestamp};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct SinkError(pub String);

/// Receives replayed messages in log order.
pub trait Sink {
    fn accept(&mut self, msg: &Message) -> Result<(), SinkError>;
}

impl<F: FnMut(&Message) -> Result<(), SinkError>> Sink for F {
    fn accept(&mut self, msg: &Message) -> Result<(), SinkError> {
        self(msg)
    }
}

/// Turns simulated time into real waiting.
pub trait Pacer {
    fn wait(&mut self, real: Duration);
}

/// Sleeps the calling thread.
#[derive(Debug, Default, Clone, Copy)]
pub struct SleepPacer;

impl Pacer for SleepPacer {
    fn wait(&mut self, real: Duration) {
        std::thread::sleep(real);
    }
}

/// Records requested waits without sleeping.
#[derive(Debug, Default, Clone)]
pub struct RecordingPacer {
    pub waits: Vec<Duration>,
}

impl Pacer for RecordingPacer {
    fn wait(&mut self, real: Duration) {
        self.waits.push(real);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReplayMode {
    Instant,
    /// Simulated seconds per real second.
    Speed(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReplayError {
    #[error("replay speed must be positive and finite, got {0}")]
    InvalidSpeed(f64),
    #[error("invalid replay mode `{0}`: expected `instant` or a positive number")]
    InvalidMode(String),
    #[error("sink failed at position {position} (message `{id}`): {source}")]
    Sink { position: usize, id: String, source: SinkError },
}

impl FromStr for ReplayMode {
    type Err = ReplayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("instant") {
            return Ok(ReplayMode::Instant);
        }
        let v: f64 = s.parse().map_err(|_| ReplayError::InvalidMode(s.to_string()))?;
        let mode = ReplayMode::Speed(v);
        mode.validate()?;
        Ok(mode)
    }
}

impl ReplayMode {
    pub fn validate(&self) -> Result<(), ReplayError> {
        match *self {
            ReplayMode::Speed(v) if !(v.is_finite() && v > 0.0) => Err(ReplayError::InvalidSpeed(v)),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub delivered: usize,
    /// Simulated clock when the replay ended; `None` for an empty log.
    pub final_time: Option<Timestamp>,
}

/// Delivers the log to `sink` in order. The simulated clock starts at the
/// first message and jumps to each message's timestamp; with a speed the
/// pacer is asked to wait the scaled gap before each delivery.
pub fn replay<S: Sink + ?Sized, P: Pacer + ?Sized>(
    log: &EventLog,
    mode: ReplayMode,
    sink: &mut S,
    pacer: &mut P,
) -> Result<ReplayReport, ReplayError> {
    mode.validate()?;
    let mut clock: Option<Timestamp> = None;
    for (position, m) in log.messages().iter().enumerate() {
        if let (ReplayMode::Speed(speed), Some(now)) = (mode, clock) {
            let gap = (m.ts - now).max(0) as f64 / speed;
            if gap > 0.0 {
                pacer.wait(Duration::from_secs_f64(gap));
            }
        }
        clock = Some(m.ts);
        sink.accept(m).map_err(|source| ReplayError::Sink { position, id: m.id.clone(), source })?;
    }
    Ok(ReplayReport { delivered: log.len(), final_time: clock })
}
