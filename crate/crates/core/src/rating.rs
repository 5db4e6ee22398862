//! Human clue ratings on the five-level scale, kept in an append-only
//! ledger file.
//!
//! Ledger lines are `<checksum>\t<record json>\n` where the checksum is the
//! first 16 hex digits of the SHA-256 of the JSON text. A trailing line
//! without its newline (a write cut short) is ignored on load and cut off
//! before the next append; a bad line anywhere else is corruption.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::generate::CLUE_COUNT;

/// Annotator name recorded on machine-assigned `EMPTY` judgments.
pub const MACHINE_ANNOTATOR: &str = "system";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rating {
    A,
    B,
    C,
    D,
    E,
    #[serde(rename = "SKIP")]
    Skip,
    #[serde(rename = "EMPTY")]
    Empty,
}

impl Rating {
    pub const ALL: [Rating; 7] = [Rating::A, Rating::B, Rating::C, Rating::D, Rating::E, Rating::Skip, Rating::Empty];

    pub fn label(self) -> &'static str {
        match self {
            Rating::A => "A",
            Rating::B => "B",
            Rating::C => "C",
            Rating::D => "D",
            Rating::E => "E",
            Rating::Skip => "SKIP",
            Rating::Empty => "EMPTY",
        }
    }

    /// A and B count as acceptable clues.
    pub fn is_acceptable(self) -> bool {
        matches!(self, Rating::A | Rating::B)
    }
}

impl fmt::Display for Rating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Rating {
    type Err = RatingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rating::ALL
            .into_iter()
            .find(|r| r.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| RatingError::UnknownRating(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub example_id: String,
    pub clue_index: usize,
    pub rating: Rating,
    pub annotator: String,
    pub rated_at: DateTime<Utc>,
    /// Generator that produced the clue, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

impl RatingRecord {
    pub fn new(example_id: &str, clue_index: usize, rating: Rating, annotator: &str) -> Self {
        RatingRecord {
            example_id: example_id.to_string(),
            clue_index,
            rating,
            annotator: annotator.to_string(),
            rated_at: Utc::now(),
            model: None,
        }
    }

    fn key(&self) -> (String, usize, String) {
        (self.example_id.clone(), self.clue_index, self.annotator.clone())
    }
}

#[derive(Debug, Error)]
pub enum RatingError {
    #[error("unknown example id {0}")]
    UnknownExample(String),
    #[error("clue index {0} out of range")]
    InvalidIndex(usize),
    #[error("EMPTY is assigned by the pipeline, not by annotators")]
    MachineOnly,
    #[error("unknown rating {0:?}")]
    UnknownRating(String),
    #[error("ledger {path} corrupt at line {line}: {reason}")]
    Corrupt { path: String, line: usize, reason: String },
    #[error("ledger io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn checksum(json: &str) -> String {
    hex::encode(&Sha256::digest(json.as_bytes())[..8])
}

/// Serializes one record as a complete ledger line.
pub fn ledger_line(rec: &RatingRecord) -> String {
    let json = serde_json::to_string(rec).expect("rating record serializes");
    format!("{}\t{}\n", checksum(&json), json)
}

fn parse_line(line: &str) -> Result<RatingRecord, String> {
    let (sum, json) = line.split_once('\t').ok_or("missing checksum field")?;
    if checksum(json) != sum {
        return Err("checksum mismatch".into());
    }
    serde_json::from_str(json).map_err(|e| e.to_string())
}

/// Selects records by annotator and/or model; `None` matches anything.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingFilter {
    pub annotator: Option<String>,
    pub model: Option<String>,
}

impl RatingFilter {
    pub fn annotator(name: &str) -> Self {
        RatingFilter {
            annotator: Some(name.to_string()),
            model: None,
        }
    }

    fn matches(&self, r: &RatingRecord) -> bool {
        self.annotator.as_ref().is_none_or(|a| a == &r.annotator) && self.model.as_ref().is_none_or(|m| r.model.as_ref() == Some(m))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingSummary {
    pub total: usize,
    pub counts: BTreeMap<Rating, usize>,
    /// Percent of all current judgments.
    pub percent: BTreeMap<Rating, f64>,
    /// Percent of current judgments other than SKIP.
    pub percent_excluding_skip: BTreeMap<Rating, f64>,
    /// A plus B, in percent of all current judgments.
    pub acceptable_share: f64,
    pub acceptable_share_excluding_skip: f64,
}

impl RatingSummary {
    fn from_ratings<I: IntoIterator<Item = Rating>>(ratings: I) -> Self {
        let mut counts: BTreeMap<Rating, usize> = Rating::ALL.iter().map(|r| (*r, 0)).collect();
        for r in ratings {
            *counts.get_mut(&r).expect("all ratings present") += 1;
        }
        let total: usize = counts.values().sum();
        let non_skip = total - counts[&Rating::Skip];
        let pct = |n: usize, d: usize| if d == 0 { 0.0 } else { 100.0 * n as f64 / d as f64 };
        let percent = counts.iter().map(|(r, n)| (*r, pct(*n, total))).collect();
        let percent_excluding_skip = counts
            .iter()
            .map(|(r, n)| (*r, if *r == Rating::Skip { 0.0 } else { pct(*n, non_skip) }))
            .collect();
        let acceptable = counts[&Rating::A] + counts[&Rating::B];
        RatingSummary {
            total,
            counts,
            percent,
            percent_excluding_skip,
            acceptable_share: pct(acceptable, total),
            acceptable_share_excluding_skip: pct(acceptable, non_skip),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAgreement {
    pub annotators: (String, String),
    /// Clues both annotators rated.
    pub shared: usize,
    pub agreed: usize,
    pub observed: f64,
}

/// An append-only ratings ledger with the latest judgment per
/// (example, clue, annotator) held in memory. Single writer per file.
#[derive(Debug)]
pub struct RatingStore {
    path: PathBuf,
    file: File,
    records: Vec<RatingRecord>,
    latest: HashMap<(String, usize, String), usize>,
    known: Option<HashSet<String>>,
    dropped_tail: bool,
}

impl RatingStore {
    /// Opens (creating if needed) the ledger at `path`. When `known` is
    /// given, ratings for other example ids are refused.
    pub fn open(path: &Path, known: Option<HashSet<String>>) -> Result<Self, RatingError> {
        let io = |source| RatingError::Io {
            path: path.display().to_string(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(io(e)),
        };
        let (records, complete_len) = Self::parse(path, &bytes)?;
        let dropped_tail = complete_len < bytes.len();
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        if dropped_tail {
            log::warn!("{}: dropping {} bytes of incomplete trailing record", path.display(), bytes.len() - complete_len);
            file.set_len(complete_len as u64).map_err(io)?;
        }
        let mut store = RatingStore {
            path: path.to_path_buf(),
            file,
            records: Vec::new(),
            latest: HashMap::new(),
            known,
            dropped_tail,
        };
        for r in records {
            store.index(r);
        }
        Ok(store)
    }

    /// Reads a ledger without opening it for writing.
    pub fn load_records(path: &Path) -> Result<Vec<RatingRecord>, RatingError> {
        let bytes = std::fs::read(path).map_err(|source| RatingError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self::parse(path, &bytes)?.0)
    }

    fn parse(path: &Path, bytes: &[u8]) -> Result<(Vec<RatingRecord>, usize), RatingError> {
        let mut records = Vec::new();
        let mut offset = 0;
        let mut line_no = 0;
        while let Some(nl) = bytes[offset..].iter().position(|&b| b == b'\n') {
            line_no += 1;
            let raw = &bytes[offset..offset + nl];
            offset += nl + 1;
            let corrupt = |reason: String| RatingError::Corrupt {
                path: path.display().to_string(),
                line: line_no,
                reason,
            };
            let text = std::str::from_utf8(raw).map_err(|e| corrupt(e.to_string()))?;
            if text.trim().is_empty() {
                continue;
            }
            records.push(parse_line(text).map_err(corrupt)?);
        }
        Ok((records, offset))
    }

    fn index(&mut self, rec: RatingRecord) {
        self.latest.insert(rec.key(), self.records.len());
        self.records.push(rec);
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Whether an incomplete trailing record was discarded on open.
    pub fn dropped_tail(&self) -> bool {
        self.dropped_tail
    }

    fn check(&self, rec: &RatingRecord) -> Result<(), RatingError> {
        if let Some(known) = &self.known {
            if !known.contains(&rec.example_id) {
                return Err(RatingError::UnknownExample(rec.example_id.clone()));
            }
        }
        if rec.clue_index >= CLUE_COUNT {
            return Err(RatingError::InvalidIndex(rec.clue_index));
        }
        Ok(())
    }

    fn append(&mut self, rec: RatingRecord) -> Result<(), RatingError> {
        self.check(&rec)?;
        // One write per line keeps a concurrent reader from seeing half a
        // record interleaved with another.
        self.file.write_all(ledger_line(&rec).as_bytes()).map_err(|source| RatingError::Io {
            path: self.path.display().to_string(),
            source,
        })?;
        self.index(rec);
        Ok(())
    }

    /// Appends an annotator judgment; it supersedes any earlier one for the
    /// same (example, clue, annotator).
    pub fn record(&mut self, rec: RatingRecord) -> Result<(), RatingError> {
        if rec.rating == Rating::Empty {
            return Err(RatingError::MachineOnly);
        }
        self.append(rec)
    }

    /// Marks a clue the generator failed to produce.
    pub fn record_empty(&mut self, example_id: &str, clue_index: usize) -> Result<(), RatingError> {
        self.append(RatingRecord::new(example_id, clue_index, Rating::Empty, MACHINE_ANNOTATOR))
    }

    /// Skips a whole example: every clue of it gets a SKIP from `annotator`.
    pub fn record_skip(&mut self, example_id: &str, annotator: &str, model: Option<&str>) -> Result<(), RatingError> {
        for idx in 0..CLUE_COUNT {
            let mut rec = RatingRecord::new(example_id, idx, Rating::Skip, annotator);
            rec.model = model.map(String::from);
            self.record(rec)?;
        }
        Ok(())
    }

    /// Flushes the ledger to stable storage.
    pub fn sync(&self) -> Result<(), RatingError> {
        self.file.sync_data().map_err(|source| RatingError::Io {
            path: self.path.display().to_string(),
            source,
        })
    }

    /// Every record ever appended, superseded ones included.
    pub fn history(&self) -> &[RatingRecord] {
        &self.records
    }

    pub fn get(&self, example_id: &str, clue_index: usize, annotator: &str) -> Option<&RatingRecord> {
        self.latest
            .get(&(example_id.to_string(), clue_index, annotator.to_string()))
            .map(|&i| &self.records[i])
    }

    /// Current judgments matching `filter`, in ledger order.
    pub fn current(&self, filter: &RatingFilter) -> Vec<&RatingRecord> {
        let mut idx: Vec<usize> = self.latest.values().copied().filter(|&i| filter.matches(&self.records[i])).collect();
        idx.sort_unstable();
        idx.into_iter().map(|i| &self.records[i]).collect()
    }

    pub fn summary(&self, filter: &RatingFilter) -> RatingSummary {
        RatingSummary::from_ratings(self.current(filter).into_iter().map(|r| r.rating))
    }

    /// Observed pairwise agreement over clues rated by both annotators.
    /// Machine `EMPTY` records are left out.
    pub fn agreement(&self) -> Vec<PairAgreement> {
        let mut by_annotator: BTreeMap<&str, HashMap<(&str, usize), Rating>> = BTreeMap::new();
        for r in self.current(&RatingFilter::default()) {
            if r.annotator != MACHINE_ANNOTATOR {
                by_annotator
                    .entry(&r.annotator)
                    .or_default()
                    .insert((&r.example_id, r.clue_index), r.rating);
            }
        }
        let names: Vec<&str> = by_annotator.keys().copied().collect();
        let mut out = Vec::new();
        for (i, a) in names.iter().enumerate() {
            for b in &names[i + 1..] {
                let (ra, rb) = (&by_annotator[a], &by_annotator[b]);
                let shared: Vec<_> = ra.keys().filter(|k| rb.contains_key(*k)).collect();
                let agreed = shared.iter().filter(|k| ra[**k] == rb[**k]).count();
                out.push(PairAgreement {
                    annotators: (a.to_string(), b.to_string()),
                    shared: shared.len(),
                    agreed,
                    observed: if shared.is_empty() { 0.0 } else { agreed as f64 / shared.len() as f64 },
                });
            }
        }
        out
    }

    /// Writes every record as CSV with a `superseded` column.
    pub fn export_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let current: HashSet<usize> = self.latest.values().copied().collect();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["example_id", "clue_index", "rating", "annotator", "rated_at", "model", "superseded"])?;
        for (i, r) in self.records.iter().enumerate() {
            w.write_record([
                r.example_id.as_str(),
                &r.clue_index.to_string(),
                r.rating.label(),
                &r.annotator,
                &r.rated_at.to_rfc3339(),
                r.model.as_deref().unwrap_or(""),
                if current.contains(&i) { "false" } else { "true" },
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
