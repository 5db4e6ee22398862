//! Backtracking placement search.
//!
//! Coordinates are unbounded during the search; the bounding box of the
//! partial layout must stay within the board. The first word goes Across at
//! the origin (or Down when the board is not square and it only fits that
//! way), and every later word must cross a placed word at a shared letter.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{normalize_answer, number_cells, AssembleConfig, CrosswordLayout, Direction, GridError, Placement, Unplaced, MIN_WORD_LEN};

#[derive(Debug, Clone, Copy, Default)]
struct Cell {
    letter: char,
    owners: [bool; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Pos {
    row: i64,
    col: i64,
    dir: Direction,
}

#[derive(Debug, Clone)]
struct Candidate {
    word: usize,
    pos: Pos,
    crossings: usize,
    area: i64,
    tie: u64,
}

struct Board {
    cells: HashMap<(i64, i64), Cell>,
    placed: Vec<(usize, Pos)>,
    crossings: usize,
}

impl Board {
    fn bbox(&self) -> Option<(i64, i64, i64, i64)> {
        let mut it = self.cells.keys();
        let &(r, c) = it.next()?;
        Some(it.fold((r, c, r, c), |(r0, c0, r1, c1), &(r, c)| (r0.min(r), c0.min(c), r1.max(r), c1.max(c))))
    }
}

struct Search<'a> {
    words: &'a [Vec<char>],
    cfg: &'a AssembleConfig,
    salt: u64,
    nodes: u64,
    started: Instant,
    stopped: bool,
    seen: HashSet<Vec<(usize, Pos)>>,
    best: Vec<(usize, Pos)>,
    best_crossings: usize,
}

fn mix(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl Search<'_> {
    fn fits(&self, bbox: (i64, i64, i64, i64)) -> bool {
        bbox.2 - bbox.0 < self.cfg.max_rows as i64 && bbox.3 - bbox.1 < self.cfg.max_cols as i64
    }

    /// Crossing count if `word` can go at `pos`, else `None`.
    fn check(&self, board: &Board, word: &[char], pos: Pos) -> Option<usize> {
        let (dr, dc) = pos.dir.delta();
        let slot = pos.dir as usize;
        let len = word.len() as i64;
        let before = (pos.row - dr, pos.col - dc);
        let after = (pos.row + dr * len, pos.col + dc * len);
        if board.cells.contains_key(&before) || board.cells.contains_key(&after) {
            return None;
        }
        let mut crossings = 0;
        for (i, &ch) in word.iter().enumerate() {
            let at = (pos.row + dr * i as i64, pos.col + dc * i as i64);
            match board.cells.get(&at) {
                Some(cell) => {
                    if cell.letter != ch || cell.owners[slot] {
                        return None;
                    }
                    crossings += 1;
                }
                None if self.cfg.strict_adjacency => {
                    let side_a = (at.0 + dc, at.1 + dr);
                    let side_b = (at.0 - dc, at.1 - dr);
                    if board.cells.contains_key(&side_a) || board.cells.contains_key(&side_b) {
                        return None;
                    }
                }
                None => {}
            }
        }
        if crossings == 0 && !board.placed.is_empty() {
            return None;
        }
        Some(crossings)
    }

    fn grown_bbox(board: &Board, len: usize, pos: Pos) -> (i64, i64, i64, i64) {
        let (dr, dc) = pos.dir.delta();
        let end = (pos.row + dr * (len as i64 - 1), pos.col + dc * (len as i64 - 1));
        match board.bbox() {
            Some((r0, c0, r1, c1)) => (r0.min(pos.row), c0.min(pos.col), r1.max(end.0), c1.max(end.1)),
            None => (pos.row, pos.col, end.0, end.1),
        }
    }

    fn candidates(&self, board: &Board, used: &[bool]) -> Vec<Candidate> {
        let mut out = Vec::new();
        let mut tried = HashSet::new();
        for (w, word) in self.words.iter().enumerate() {
            if used[w] {
                continue;
            }
            for (&(r, c), cell) in &board.cells {
                for dir in [Direction::Across, Direction::Down] {
                    if cell.owners[dir as usize] {
                        continue;
                    }
                    let (dr, dc) = dir.delta();
                    for (i, &ch) in word.iter().enumerate() {
                        if ch != cell.letter {
                            continue;
                        }
                        let pos = Pos {
                            row: r - dr * i as i64,
                            col: c - dc * i as i64,
                            dir,
                        };
                        if !tried.insert((w, pos)) {
                            continue;
                        }
                        let Some(crossings) = self.check(board, word, pos) else {
                            continue;
                        };
                        let bbox = Self::grown_bbox(board, word.len(), pos);
                        if !self.fits(bbox) {
                            continue;
                        }
                        let area = (bbox.2 - bbox.0 + 1) * (bbox.3 - bbox.1 + 1);
                        let tie = mix(self.salt ^ mix(w as u64) ^ mix(((pos.row as u64) << 32) ^ (pos.col as u64 & 0xffff_ffff) ^ ((dir as u64) << 63)));
                        out.push(Candidate {
                            word: w,
                            pos,
                            crossings,
                            area,
                            tie,
                        });
                    }
                }
            }
        }
        out.sort_by(|a, b| b.crossings.cmp(&a.crossings).then(a.area.cmp(&b.area)).then(a.tie.cmp(&b.tie)));
        out
    }

    fn place(board: &mut Board, word: &[char], w: usize, pos: Pos, crossings: usize) -> Vec<(i64, i64)> {
        let (dr, dc) = pos.dir.delta();
        let mut fresh = Vec::new();
        for (i, &ch) in word.iter().enumerate() {
            let at = (pos.row + dr * i as i64, pos.col + dc * i as i64);
            let cell = board.cells.entry(at).or_insert_with(|| {
                fresh.push(at);
                Cell {
                    letter: ch,
                    owners: [false; 2],
                }
            });
            cell.owners[pos.dir as usize] = true;
        }
        board.placed.push((w, pos));
        board.crossings += crossings;
        fresh
    }

    fn unplace(board: &mut Board, word_len: usize, fresh: Vec<(i64, i64)>, crossings: usize) {
        let (_, pos) = board.placed.pop().expect("placement to undo");
        let (dr, dc) = pos.dir.delta();
        for i in 0..word_len as i64 {
            if let Some(cell) = board.cells.get_mut(&(pos.row + dr * i, pos.col + dc * i)) {
                cell.owners[pos.dir as usize] = false;
            }
        }
        for at in fresh {
            board.cells.remove(&at);
        }
        board.crossings -= crossings;
    }

    /// Placement set translated so the top-left is the origin, sorted.
    fn canonical(board: &Board) -> Vec<(usize, Pos)> {
        let (r0, c0, _, _) = board.bbox().unwrap_or_default();
        let mut key: Vec<(usize, Pos)> = board
            .placed
            .iter()
            .map(|&(w, p)| {
                (
                    w,
                    Pos {
                        row: p.row - r0,
                        col: p.col - c0,
                        dir: p.dir,
                    },
                )
            })
            .collect();
        key.sort();
        key
    }

    fn out_of_budget(&mut self) -> bool {
        if self.stopped {
            return true;
        }
        let over_nodes = self.cfg.node_budget.is_some_and(|b| self.nodes >= b);
        let over_time = self.cfg.time_budget.is_some_and(|t| self.nodes.is_multiple_of(64) && self.started.elapsed() >= t);
        self.stopped = over_nodes || over_time;
        self.stopped
    }

    fn dfs(&mut self, board: &mut Board, used: &mut [bool], remaining: usize) {
        if self.out_of_budget() || !self.seen.insert(Self::canonical(board)) {
            return;
        }
        self.nodes += 1;
        let placed = board.placed.len();
        if placed > self.best.len() || (placed == self.best.len() && board.crossings > self.best_crossings) {
            self.best = board.placed.clone();
            self.best_crossings = board.crossings;
        }
        if placed + remaining < self.best.len() || remaining == 0 {
            return;
        }
        for cand in self.candidates(board, used) {
            let word = &self.words[cand.word];
            let fresh = Self::place(board, word, cand.word, cand.pos, cand.crossings);
            used[cand.word] = true;
            self.dfs(board, used, remaining - 1);
            used[cand.word] = false;
            Self::unplace(board, word.len(), fresh, cand.crossings);
            if self.stopped {
                return;
            }
        }
    }
}

/// Lays out `(keyword, clue)` entries, maximizing the number of placed words
/// and then the number of crossings. Entries that cannot be placed are
/// listed in `unplaced`. Identical inputs and config give identical output
/// unless a wall-clock budget cuts the search short.
pub fn assemble(entries: &[(String, String)], cfg: &AssembleConfig) -> Result<CrosswordLayout, GridError> {
    if entries.is_empty() {
        return Err(GridError::NoEntries);
    }
    if cfg.max_rows == 0 || cfg.max_cols == 0 {
        return Err(GridError::InvalidConfig("board dimensions must be positive".into()));
    }
    let max = cfg.max_rows.max(cfg.max_cols);
    let mut words = Vec::new();
    let mut origin = Vec::new();
    let mut unplaced = Vec::new();
    for (k, (keyword, _)) in entries.iter().enumerate() {
        let word = normalize_answer(keyword)?;
        let len = word.chars().count();
        if len > max {
            return Err(GridError::WordTooLong { word, len, max });
        }
        if len < MIN_WORD_LEN {
            unplaced.push((k, format!("shorter than {MIN_WORD_LEN} letters")));
            continue;
        }
        words.push(word.chars().collect::<Vec<char>>());
        origin.push(k);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let salt: u64 = rng.gen();
    let mut search = Search {
        words: &words,
        cfg,
        salt,
        nodes: 0,
        started: Instant::now(),
        stopped: false,
        seen: HashSet::new(),
        best: Vec::new(),
        best_crossings: 0,
    };
    // Longer words first as the opening word; seeded order among equals.
    let mut first: Vec<usize> = (0..words.len()).collect();
    first.sort_by_key(|&w| (std::cmp::Reverse(words[w].len()), mix(salt ^ w as u64)));
    let mut dirs = vec![Direction::Across];
    if cfg.max_rows != cfg.max_cols {
        dirs.push(Direction::Down);
    }
    'seeds: for &dir in &dirs {
        for &w in &first {
            let pos = Pos { row: 0, col: 0, dir };
            let room = if dir == Direction::Across { cfg.max_cols } else { cfg.max_rows };
            if words[w].len() > room {
                continue;
            }
            let mut board = Board {
                cells: HashMap::new(),
                placed: Vec::new(),
                crossings: 0,
            };
            let mut used = vec![false; words.len()];
            Search::place(&mut board, &words[w], w, pos, 0);
            used[w] = true;
            search.dfs(&mut board, &mut used, words.len() - 1);
            if search.stopped {
                break 'seeds;
            }
        }
    }

    let (r0, c0) = search
        .best
        .iter()
        .map(|(_, p)| (p.row, p.col))
        .fold((i64::MAX, i64::MAX), |(r, c), (pr, pc)| (r.min(pr), c.min(pc)));
    let mut placements: Vec<Placement> = search
        .best
        .iter()
        .map(|&(w, p)| {
            let (keyword, clue) = &entries[origin[w]];
            Placement {
                word: words[w].iter().collect(),
                keyword: keyword.clone(),
                row: (p.row - r0) as usize,
                col: (p.col - c0) as usize,
                direction: p.dir,
                clue: clue.clone(),
                number: 0,
            }
        })
        .collect();
    placements.sort_by_key(|p| (p.row, p.col, p.direction));
    let (rows, cols) = placements.iter().fold((0, 0), |(r, c), p| {
        let (dr, dc) = p.direction.delta();
        let len = p.word.chars().count();
        (r.max(p.row + 1 + (len - 1) * dr as usize), c.max(p.col + 1 + (len - 1) * dc as usize))
    });
    let placed: HashSet<usize> = search.best.iter().map(|&(w, _)| origin[w]).collect();
    for &k in &origin {
        if !placed.contains(&k) {
            unplaced.push((k, "no valid crossing position".into()));
        }
    }
    unplaced.sort_by_key(|(k, _)| *k);
    let mut layout = CrosswordLayout {
        rows,
        cols,
        placements,
        unplaced: unplaced
            .into_iter()
            .map(|(k, reason)| Unplaced {
                keyword: entries[k].0.clone(),
                clue: entries[k].1.clone(),
                reason,
            })
            .collect(),
    };
    number_cells(&mut layout);
    Ok(layout)
}
