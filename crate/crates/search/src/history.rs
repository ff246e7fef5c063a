//! Append-only JSONL search history.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;

use glyphpress_core::config::RenderConfig;
use serde::{Deserialize, Serialize};

use crate::fitness::{rank, FitnessKeys, FitnessPolicy, Scored};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Seeded,
    Mutation,
    Crossover,
    Critic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub generation: usize,
    pub fingerprint: String,
    pub config: RenderConfig,
    pub accuracy: Option<f64>,
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// Keys at the time of evaluation; `None` for failures.
    pub fitness_keys: Option<FitnessKeys>,
    pub provenance: Provenance,
    /// Logical clock: the number of records written before this one.
    pub timestamp: u64,
}

impl CandidateRecord {
    pub fn scored(&self) -> Scored<'_> {
        Scored {
            scores: self.accuracy.zip(self.rho).filter(|_| self.failure.is_none()),
            fingerprint: &self.fingerprint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Raw critic reply.
    CriticReply,
    /// The critic could not be reached.
    CriticError,
    /// Heuristic offspring replaced missing critic proposals.
    CriticFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub generation: usize,
    pub kind: EventKind,
    pub detail: String,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum HistoryRecord {
    Candidate(CandidateRecord),
    Event(EventRecord),
}

impl HistoryRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("history record serializes")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HistoryError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("history line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Parse history text. A final line without its newline is an interrupted
/// write; it is ignored when it does not parse.
pub fn parse_history(text: &str) -> Result<(Vec<HistoryRecord>, usize), HistoryError> {
    let complete_len = text.rfind('\n').map_or(0, |i| i + 1);
    let mut records = Vec::new();
    for (i, line) in text[..complete_len].lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(line)
                .map_err(|e| HistoryError::Malformed { line: i + 1, message: e.to_string() })?,
        );
    }
    let tail = &text[complete_len..];
    if !tail.trim().is_empty() {
        if let Ok(r) = serde_json::from_str(tail) {
            records.push(r);
            return Ok((records, text.len()));
        }
    }
    Ok((records, complete_len))
}

/// Where the engine sends new records.
pub trait HistorySink {
    fn append(&mut self, record: &HistoryRecord) -> io::Result<()>;
}

impl HistorySink for Vec<HistoryRecord> {
    fn append(&mut self, record: &HistoryRecord) -> io::Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

/// A JSONL file, flushed after every record.
pub struct JsonlHistory {
    file: File,
}

impl JsonlHistory {
    pub fn create(path: &Path) -> io::Result<Self> {
        Ok(JsonlHistory { file: File::create(path)? })
    }

    /// Open an existing history for resumption: returns the records already
    /// on disk and drops any interrupted trailing line.
    pub fn resume(path: &Path) -> Result<(Self, Vec<HistoryRecord>), HistoryError> {
        let text = std::fs::read_to_string(path)?;
        let (records, keep) = parse_history(&text)?;
        let mut file = OpenOptions::new().read(true).write(true).open(path)?;
        file.set_len(keep as u64)?;
        if keep > 0 && !text[..keep].ends_with('\n') {
            use std::io::Seek;
            file.seek(io::SeekFrom::End(0))?;
            file.write_all(b"\n")?;
        }
        let file = OpenOptions::new().append(true).open(path)?;
        Ok((JsonlHistory { file }, records))
    }
}

impl HistorySink for JsonlHistory {
    fn append(&mut self, record: &HistoryRecord) -> io::Result<()> {
        let mut line = record.to_line();
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()
    }
}

pub fn candidates(records: &[HistoryRecord]) -> impl Iterator<Item = &CandidateRecord> {
    records.iter().filter_map(|r| match r {
        HistoryRecord::Candidate(c) => Some(c),
        HistoryRecord::Event(_) => None,
    })
}

/// Best successful candidate of a history under `policy`.
pub fn best_of(records: &[HistoryRecord], policy: &FitnessPolicy) -> Option<CandidateRecord> {
    let cands: Vec<&CandidateRecord> = candidates(records).filter(|c| c.failure.is_none()).collect();
    let scored: Vec<Scored<'_>> = cands.iter().map(|c| c.scored()).collect();
    rank(&scored, policy).first().map(|&i| cands[i].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn event(t: u64) -> HistoryRecord {
        HistoryRecord::Event(EventRecord {
            generation: 0,
            kind: EventKind::CriticFallback,
            detail: "x".into(),
            timestamp: t,
        })
    }

    #[test]
    fn partial_tail_is_dropped() {
        let full = format!("{}\n{}\n", event(0).to_line(), event(1).to_line());
        let cut = format!("{}{}", full, &event(2).to_line()[..10]);
        let (records, keep) = parse_history(&cut).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(keep, full.len());
        let (records, _) = parse_history(&full).unwrap();
        assert_eq!(records, vec![event(0), event(1)]);
    }

    #[test]
    fn malformed_middle_line_is_an_error() {
        let text = format!("{}\nnot json\n{}\n", event(0).to_line(), event(1).to_line());
        assert!(matches!(parse_history(&text), Err(HistoryError::Malformed { line: 2, .. })));
    }
}
