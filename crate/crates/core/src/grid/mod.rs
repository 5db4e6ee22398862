//! Crossword assembly from curated keyword and clue pairs.

mod number;
mod render;
mod search;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use number::{number_cells, ClueEntry, ClueLists};
pub use render::{parse_text, render, RenderFormat, View};
pub use search::assemble;

pub const MIN_WORD_LEN: usize = 3;

/// Letter per occupied `(row, col)`.
pub type CellLetters = BTreeMap<(usize, usize), char>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("no entries to assemble")]
    NoEntries,
    #[error("{word} has {len} letters; the board allows at most {max}")]
    WordTooLong { word: String, len: usize, max: usize },
    #[error("{0:?} contains characters other than letters and spaces")]
    NonAlphabetic(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("cannot parse grid text: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    Across,
    Down,
}

impl Direction {
    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::Across => (0, 1),
            Direction::Down => (1, 0),
        }
    }

    pub fn other(self) -> Direction {
        match self {
            Direction::Across => Direction::Down,
            Direction::Down => Direction::Across,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub word: String,
    pub keyword: String,
    pub row: usize,
    pub col: usize,
    pub direction: Direction,
    pub clue: String,
    /// Assigned by [`number_cells`]; zero before numbering.
    pub number: u32,
}

impl Placement {
    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), char)> + '_ {
        let (dr, dc) = self.direction.delta();
        self.word
            .chars()
            .enumerate()
            .map(move |(i, ch)| ((self.row + i * dr as usize, self.col + i * dc as usize), ch))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unplaced {
    pub keyword: String,
    pub clue: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosswordLayout {
    pub rows: usize,
    pub cols: usize,
    pub placements: Vec<Placement>,
    #[serde(default)]
    pub unplaced: Vec<Unplaced>,
}

impl CrosswordLayout {
    pub fn cell_letters(&self) -> CellLetters {
        self.placements.iter().flat_map(|p| p.cells()).collect()
    }

    /// Cells covered by two placements.
    pub fn intersections(&self) -> usize {
        let mut seen = BTreeSet::new();
        let mut shared = 0;
        for p in &self.placements {
            for (cell, _) in p.cells() {
                if !seen.insert(cell) {
                    shared += 1;
                }
            }
        }
        shared
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GridError> {
        serde_json::from_str(text).map_err(|e| GridError::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssembleConfig {
    pub max_rows: usize,
    pub max_cols: usize,
    pub seed: u64,
    /// Wall-clock cap. Searches cut short by it may differ between runs; the
    /// node budget is the deterministic cap.
    #[serde(with = "opt_millis")]
    pub time_budget: Option<Duration>,
    /// Search states expanded before the best layout so far is returned.
    /// `None` searches exhaustively.
    pub node_budget: Option<u64>,
    /// Forbid letters touching other than at crossings.
    pub strict_adjacency: bool,
}

impl Default for AssembleConfig {
    fn default() -> Self {
        AssembleConfig {
            max_rows: 15,
            max_cols: 15,
            seed: 0,
            time_budget: None,
            node_budget: Some(20_000),
            strict_adjacency: true,
        }
    }
}

mod opt_millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match d {
            Some(d) => s.serialize_some(&(d.as_millis() as u64)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Ok(Option::<u64>::deserialize(d)?.map(Duration::from_millis))
    }
}

/// Uppercases and drops spaces; anything left must be letters.
pub fn normalize_answer(keyword: &str) -> Result<String, GridError> {
    let word: String = keyword.chars().filter(|c| !c.is_whitespace()).flat_map(char::to_uppercase).collect();
    if word.is_empty() || !word.chars().all(char::is_alphabetic) {
        return Err(GridError::NonAlphabetic(keyword.to_string()));
    }
    Ok(word)
}

/// Checks the structural rules of a layout: words match their keywords and
/// fit the board, crossings agree on letters, no two words of one direction
/// share a cell, and all words form one connected group. With `strict`,
/// every horizontal or vertical run of two or more letters must be exactly
/// one placed word.
pub fn validate(layout: &CrosswordLayout, strict: bool) -> Result<(), GridError> {
    let bad = |m: String| Err(GridError::InvalidLayout(m));
    // letter and the across/down placement covering each cell
    type Cover = (char, [Option<usize>; 2]);
    let mut cells: BTreeMap<(usize, usize), Cover> = BTreeMap::new();
    for (k, p) in layout.placements.iter().enumerate() {
        if normalize_answer(&p.keyword).ok().as_deref() != Some(p.word.as_str()) {
            return bad(format!("{} does not match keyword {:?}", p.word, p.keyword));
        }
        if p.word.chars().count() < MIN_WORD_LEN {
            return bad(format!("{} is shorter than {MIN_WORD_LEN} letters", p.word));
        }
        let slot = p.direction as usize;
        for ((r, c), ch) in p.cells() {
            if r >= layout.rows || c >= layout.cols {
                return bad(format!("{} leaves the {}x{} board", p.word, layout.rows, layout.cols));
            }
            let entry = cells.entry((r, c)).or_insert((ch, [None, None]));
            if entry.0 != ch {
                return bad(format!("cell ({r},{c}) holds both {} and {ch}", entry.0));
            }
            if entry.1[slot].is_some() {
                return bad(format!("two {:?} words share cell ({r},{c})", p.direction));
            }
            entry.1[slot] = Some(k);
        }
    }
    if strict {
        for dir in [Direction::Across, Direction::Down] {
            for run in runs(&cells, dir) {
                let owner = cells[&run[0]].1[dir as usize];
                let whole = owner.is_some_and(|k| {
                    let p = &layout.placements[k];
                    p.direction == dir && p.cells().map(|(c, _)| c).eq(run.iter().copied())
                });
                if !whole {
                    return bad(format!("letters at {:?} form an unlisted {:?} run", run, dir));
                }
            }
        }
    }
    if !connected(layout, &cells) {
        return bad("placements do not form one connected group".into());
    }
    Ok(())
}

type CellMap = BTreeMap<(usize, usize), (char, [Option<usize>; 2])>;

/// Maximal runs of two or more filled cells in direction `dir`.
fn runs(cells: &CellMap, dir: Direction) -> Vec<Vec<(usize, usize)>> {
    let (dr, dc) = dir.delta();
    let step = |(r, c): (usize, usize)| (r + dr as usize, c + dc as usize);
    let mut out = Vec::new();
    for &cell in cells.keys() {
        let starts = match dir {
            Direction::Across => cell.1 == 0 || !cells.contains_key(&(cell.0, cell.1 - 1)),
            Direction::Down => cell.0 == 0 || !cells.contains_key(&(cell.0 - 1, cell.1)),
        };
        if !starts {
            continue;
        }
        let mut run = vec![cell];
        let mut next = step(cell);
        while cells.contains_key(&next) {
            run.push(next);
            next = step(next);
        }
        if run.len() >= 2 {
            out.push(run);
        }
    }
    out
}

fn connected(layout: &CrosswordLayout, cells: &CellMap) -> bool {
    let n = layout.placements.len();
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(k) = queue.pop_front() {
        for (cell, _) in layout.placements[k].cells() {
            for other in cells[&cell].1.into_iter().flatten() {
                if !seen[other] {
                    seen[other] = true;
                    queue.push_back(other);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}
