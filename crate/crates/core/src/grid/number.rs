use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CrosswordLayout, Direction};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClueEntry {
    pub number: u32,
    pub clue: String,
    pub answer: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClueLists {
    pub across: Vec<ClueEntry>,
    pub down: Vec<ClueEntry>,
}

/// Numbers start cells in row-major order and returns the clue lists.
/// An Across and a Down word starting on one cell share its number.
pub fn number_cells(layout: &mut CrosswordLayout) -> ClueLists {
    let mut starts: BTreeMap<(usize, usize), u32> = layout.placements.iter().map(|p| ((p.row, p.col), 0)).collect();
    for (n, num) in starts.values_mut().enumerate() {
        *num = n as u32 + 1;
    }
    let mut lists = ClueLists::default();
    for p in &mut layout.placements {
        p.number = starts[&(p.row, p.col)];
        let entry = ClueEntry {
            number: p.number,
            clue: p.clue.clone(),
            answer: p.word.clone(),
        };
        match p.direction {
            Direction::Across => lists.across.push(entry),
            Direction::Down => lists.down.push(entry),
        }
    }
    lists.across.sort_by_key(|e| e.number);
    lists.down.sort_by_key(|e| e.number);
    lists
}
