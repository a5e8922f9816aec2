use std::collections::HashMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::analytics::{check_reply_forest, GraphError};
use crate::model::Message;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("reading event log: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Line { line: usize, source: serde_json::Error },
    #[error("line {line}: duplicate message id `{id}` (first seen on line {first})")]
    Duplicate { id: String, line: usize, first: usize },
    #[error(transparent)]
    Replies(#[from] GraphError),
}

/// Messages sorted by timestamp, ties broken by id. Ids are unique and
/// reply links form a forest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    messages: Vec<Message>,
}

impl EventLog {
    pub fn new(mut messages: Vec<Message>) -> Result<Self, LogError> {
        let mut seen: HashMap<&str, usize> = HashMap::with_capacity(messages.len());
        for (i, m) in messages.iter().enumerate() {
            if let Some(first) = seen.insert(m.id.as_str(), i + 1) {
                return Err(LogError::Duplicate { id: m.id.clone(), line: i + 1, first });
            }
        }
        check_reply_forest(&messages)?;
        sort_messages(&mut messages);
        Ok(Self { messages })
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn into_messages(self) -> Vec<Message> {
        self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for m in &self.messages {
            serde_json::to_writer(&mut out, m)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

pub fn sort_messages(messages: &mut [Message]) {
    messages.sort_by(|a, b| a.ts.cmp(&b.ts).then_with(|| a.id.cmp(&b.id)));
}

/// Reads one JSON message per line. Blank lines are skipped; line numbers
/// in errors are 1-based and count them.
pub fn parse_event_log<R: BufRead>(input: R) -> Result<EventLog, LogError> {
    let mut messages = Vec::new();
    let mut line_of: HashMap<String, usize> = HashMap::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let m: Message = serde_json::from_str(&line).map_err(|source| LogError::Line { line: i + 1, source })?;
        if let Some(&first) = line_of.get(&m.id) {
            return Err(LogError::Duplicate { id: m.id, line: i + 1, first });
        }
        line_of.insert(m.id.clone(), i + 1);
        messages.push(m);
    }
    check_reply_forest(&messages)?;
    sort_messages(&mut messages);
    Ok(EventLog { messages })
}
