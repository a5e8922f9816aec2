use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::state::{Command, CommandError, ServiceState};

pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const TAIL_FILE: &str = "tail.jsonl";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("corrupt snapshot {path} at byte {offset}: {msg}")]
    CorruptSnapshot { path: PathBuf, offset: u64, msg: String },
    #[error("corrupt tail {path} at line {line} (byte {offset}): {msg}")]
    CorruptTail { path: PathBuf, line: usize, offset: u64, msg: String },
    #[error("replaying command {n} from the tail: {source}")]
    Replay { n: u64, source: CommandError },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

#[derive(Serialize, Deserialize)]
struct TailEntry {
    n: u64,
    #[serde(flatten)]
    cmd: Command,
}

/// What was found on disk.
#[derive(Debug)]
pub struct Recovered {
    pub snapshot: Option<ServiceState>,
    /// Tail commands not yet covered by the snapshot, with their sequence
    /// numbers.
    pub commands: Vec<(u64, Command)>,
    pub warnings: Vec<String>,
}

/// Snapshot plus append-only command tail in one directory. Snapshots are
/// written to a temporary file and renamed into place; tail entries at or
/// below the snapshot's command count are ignored on recovery.
#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    tail: File,
    snapshot_every: u64,
    since_snapshot: u64,
}

/// Byte offset of a serde_json error position.
fn offset_of(text: &[u8], line: usize, column: usize) -> u64 {
    let mut off = 0usize;
    for (i, l) in text.split(|&b| b == b'\n').enumerate() {
        if i + 1 == line {
            return (off + column.saturating_sub(1)) as u64;
        }
        off += l.len() + 1;
    }
    text.len() as u64
}

impl Store {
    pub fn open(dir: &Path, snapshot_every: u64) -> Result<(Self, Recovered), StoreError> {
        fs::create_dir_all(dir).map_err(io(dir))?;
        let mut warnings = Vec::new();

        let snap_path = dir.join(SNAPSHOT_FILE);
        let snapshot = match fs::read(&snap_path) {
            Ok(bytes) => Some(serde_json::from_slice::<ServiceState>(&bytes).map_err(|e| StoreError::CorruptSnapshot {
                path: snap_path.clone(),
                // a truncated file is reported at its end
                offset: if e.is_eof() { bytes.len() as u64 } else { offset_of(&bytes, e.line(), e.column()) },
                msg: e.to_string(),
            })?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(io(&snap_path)(e)),
        };
        let covered = snapshot.as_ref().map_or(0, |s| s.applied);

        let tail_path = dir.join(TAIL_FILE);
        let mut tail = OpenOptions::new().create(true).read(true).append(true).open(&tail_path).map_err(io(&tail_path))?;
        let mut bytes = Vec::new();
        tail.read_to_end(&mut bytes).map_err(io(&tail_path))?;
        let mut commands = Vec::new();
        let mut offset = 0usize;
        let lines: Vec<&[u8]> = bytes.split_inclusive(|&b| b == b'\n').collect();
        for (i, raw) in lines.iter().enumerate() {
            let line = raw.strip_suffix(b"\n").unwrap_or(raw);
            if line.iter().all(u8::is_ascii_whitespace) {
                offset += raw.len();
                continue;
            }
            match serde_json::from_slice::<TailEntry>(line) {
                Ok(entry) => {
                    if entry.n > covered {
                        commands.push((entry.n, entry.cmd));
                    }
                }
                Err(e) if i + 1 == lines.len() => {
                    let msg = format!("dropping torn final tail line {} ({} bytes): {e}", i + 1, raw.len());
                    log::warn!("{msg}");
                    warnings.push(msg);
                    tail.set_len(offset as u64).map_err(io(&tail_path))?;
                    break;
                }
                Err(e) => {
                    return Err(StoreError::CorruptTail { path: tail_path, line: i + 1, offset: offset as u64, msg: e.to_string() })
                }
            }
            offset += raw.len();
        }
        // a complete last entry without its newline still needs one
        let len = tail.seek(SeekFrom::End(0)).map_err(io(&tail_path))?;
        if len > 0 && !bytes[..len as usize].ends_with(b"\n") {
            tail.write_all(b"\n").map_err(io(&tail_path))?;
        }
        let since_snapshot = commands.len() as u64;
        let store = Self { dir: dir.to_path_buf(), tail, snapshot_every: snapshot_every.max(1), since_snapshot };
        Ok((store, Recovered { snapshot, commands, warnings }))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Appends one applied command, `n` being its 1-based position.
    pub fn record(&mut self, n: u64, cmd: &Command) -> Result<(), StoreError> {
        let path = self.dir.join(TAIL_FILE);
        let mut line = serde_json::to_vec(&TailEntry { n, cmd: cmd.clone() }).expect("commands serialize");
        line.push(b'\n');
        self.tail.write_all(&line).map_err(io(&path))?;
        self.tail.flush().map_err(io(&path))?;
        self.since_snapshot += 1;
        Ok(())
    }

    pub fn due(&self) -> bool {
        self.since_snapshot >= self.snapshot_every
    }

    pub fn snapshot(&mut self, state: &ServiceState) -> Result<(), StoreError> {
        let tmp = self.dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        let dst = self.dir.join(SNAPSHOT_FILE);
        {
            let f = File::create(&tmp).map_err(io(&tmp))?;
            let mut w = BufWriter::new(f);
            serde_json::to_writer(&mut w, state).map_err(|e| io(&tmp)(e.into()))?;
            let f = w.into_inner().map_err(|e| io(&tmp)(e.into_error()))?;
            f.sync_all().map_err(io(&tmp))?;
        }
        fs::rename(&tmp, &dst).map_err(io(&dst))?;
        let tail = self.dir.join(TAIL_FILE);
        self.tail.set_len(0).map_err(io(&tail))?;
        self.since_snapshot = 0;
        Ok(())
    }
}

/// Rebuilds state from what [`Store::open`] found.
pub fn replay_recovered(
    mut state: ServiceState,
    commands: Vec<(u64, Command)>,
    enricher: &crate::enrichment::Enricher,
) -> Result<ServiceState, StoreError> {
    for (n, cmd) in commands {
        state.apply(enricher, cmd).map_err(|source| StoreError::Replay { n, source })?;
    }
    Ok(state)
}
