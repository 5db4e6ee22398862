//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use eduverba_core::dataset::ClueInstructExample;
use eduverba_core::grid::{CrosswordLayout, Direction};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CATEGORIES: [&str; 20] = [
    "Geography", "Science", "Applied Science", "History", "Society", "Literature", "Arts", "Music", "Film", "Sports",
    "Religion", "Philosophy", "Politics", "Economics", "Mathematics", "Technology", "Language", "Biography", "Games",
    "Education",
];

const SYLLABLES: [&str; 16] = ["ka", "ri", "mo", "ve", "lan", "tis", "do", "ru", "sa", "pel", "no", "qua", "zen", "bo", "li", "tor"];
const NOUNS: [&str; 12] = ["river", "festival", "theorem", "instrument", "treaty", "novel", "machine", "mountain", "language", "game", "school", "painter"];
const FILLER: [&str; 24] = [
    "the", "region", "known", "for", "its", "long", "history", "and", "many", "visitors", "who", "study", "local", "records",
    "during", "several", "centuries", "with", "notable", "influence", "on", "modern", "culture", "today",
];

fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(2..4);
    let mut w: String = (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
    w[..1].make_ascii_uppercase();
    w
}

fn sentence(rng: &mut ChaCha8Rng, words: usize) -> String {
    let mut s: Vec<&str> = (0..words).map(|_| *FILLER.choose(rng).unwrap()).collect();
    let mut first = s[0].to_string();
    first[..1].make_ascii_uppercase();
    s[0] = "";
    format!("{first}{}.", s.join(" "))
}

/// What a generated fixture page is expected to do under default screening.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PageKind {
    Good,
    Unpopular,
    BadKeyword,
    ShortContext,
}

/// Writes `n` wikitext pages spread over the twenty categories. Returns the
/// kind of every page by title.
pub fn write_fixture_corpus(root: &Path, n: usize, seed: u64) -> BTreeMap<String, PageKind> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kinds = BTreeMap::new();
    let mut used = HashSet::new();
    for c in CATEGORIES {
        fs::create_dir_all(root.join(c)).unwrap();
    }
    for i in 0..n {
        let category = CATEGORIES[i % CATEGORIES.len()];
        let mut title = pseudo_word(&mut rng);
        while !used.insert(title.clone()) {
            title = format!("{title}{}", SYLLABLES[i % SYLLABLES.len()]);
        }
        let roll: f64 = rng.gen();
        let kind = match roll {
            r if r < 0.15 => PageKind::Unpopular,
            r if r < 0.22 => PageKind::BadKeyword,
            r if r < 0.28 => PageKind::ShortContext,
            _ => PageKind::Good,
        };
        let bold = if kind == PageKind::BadKeyword { format!("{title} 2000") } else { title.clone() };
        let noun = NOUNS.choose(&mut rng).unwrap();
        let mut lead = format!("'''{bold}''' is a [[{noun}]] described in many sources.{{{{cite|x}}}}");
        if kind != PageKind::ShortContext {
            for _ in 0..rng.gen_range(4..8) {
                lead.push(' ');
                let len = rng.gen_range(8..16);
                lead.push_str(&sentence(&mut rng, len));
            }
        }
        let body = format!("{lead}\n\n== History ==\nLater text that is not part of the lead.\n");
        let (views, importance) = match kind {
            PageKind::Unpopular => (rng.gen_range(0..9_000), "Low"),
            _ if rng.gen_bool(0.2) => (rng.gen_range(0..5_000), "Top"),
            _ => (rng.gen_range(10_001..200_000), "Mid"),
        };
        let dir = root.join(category);
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join(format!("{title}.wiki")), body).unwrap();
        fs::write(
            dir.join(format!("{title}.meta")),
            format!("views={views}\nimportance={importance}\nurl=https://en.wikipedia.org/wiki/{title}\n"),
        )
        .unwrap();
        kinds.insert(title, kind);
    }
    kinds
}

/// Independent leak oracle: the clue contains the whole answer, or shares a
/// four-letter prefix with one of the answer's words, or repeats a short
/// answer word verbatim.
pub fn leaks(clue: &str, keyword: &str) -> bool {
    let lower = |s: &str| s.to_lowercase();
    if lower(clue).contains(&lower(keyword)) {
        return true;
    }
    let tokens = |s: &str| -> Vec<String> { s.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(lower).collect() };
    let clue_tokens = tokens(clue);
    tokens(keyword).iter().any(|k| {
        clue_tokens.iter().any(|c| {
            if k.chars().count() >= 4 {
                let kp: String = k.chars().take(4).collect();
                c.starts_with(&kp)
            } else {
                c == k
            }
        })
    })
}

/// Synthetic corpus of `n` rows spread over twenty categories with uneven
/// sizes.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<ClueInstructExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            // skewed category sizes: low indices are more frequent
            let c = ((rng.gen::<f64>().powi(2)) * CATEGORIES.len() as f64) as usize;
            ClueInstructExample {
                id: format!("syn{i:06}"),
                context: format!("Row {i} context sentence. More text follows here."),
                keyword: "Keyword".into(),
                category: CATEGORIES[c.min(CATEGORIES.len() - 1)].into(),
                clues: vec!["one".into(), "two".into(), "three".into()],
                source_url: format!("https://example.org/{i}"),
            }
        })
        .collect()
}

fn cells_of(word: &str, r: i64, c: i64, d: Direction) -> Vec<((i64, i64), char)> {
    let (dr, dc) = match d {
        Direction::Across => (0, 1),
        Direction::Down => (1, 0),
    };
    word.chars().enumerate().map(|(i, ch)| ((r + dr * i as i64, c + dc * i as i64), ch)).collect()
}

/// Full structural check of placed words given as `(word, row, col, dir)`:
/// letters agree, no cell has two words of one direction, all horizontal
/// and vertical runs of two or more letters are exactly placed words, the
/// words are connected, and the bounding box fits `rows x cols`.
pub fn check_words(words: &[(String, i64, i64, Direction)], rows: usize, cols: usize) -> Result<(), String> {
    let mut grid: BTreeMap<(i64, i64), (char, u8)> = BTreeMap::new();
    for (w, r, c, d) in words {
        let bit = if *d == Direction::Across { 1 } else { 2 };
        for (cell, ch) in cells_of(w, *r, *c, *d) {
            let e = grid.entry(cell).or_insert((ch, 0));
            if e.0 != ch {
                return Err(format!("letter clash at {cell:?}"));
            }
            if e.1 & bit != 0 {
                return Err(format!("same-direction overlap at {cell:?}"));
            }
            e.1 |= bit;
        }
    }
    if grid.is_empty() {
        return Ok(());
    }
    let rmin = grid.keys().map(|k| k.0).min().unwrap();
    let rmax = grid.keys().map(|k| k.0).max().unwrap();
    let cmin = grid.keys().map(|k| k.1).min().unwrap();
    let cmax = grid.keys().map(|k| k.1).max().unwrap();
    if (rmax - rmin + 1) as usize > rows || (cmax - cmin + 1) as usize > cols {
        return Err("bounding box too large".into());
    }
    let word_spans: BTreeSet<(i64, i64, i64, i64)> = words
        .iter()
        .map(|(w, r, c, d)| {
            let cells = cells_of(w, *r, *c, *d);
            let (a, b) = (cells[0].0, cells[cells.len() - 1].0);
            (a.0, a.1, b.0, b.1)
        })
        .collect();
    // scan every row and column for maximal runs
    for r in rmin..=rmax {
        let mut c = cmin;
        while c <= cmax {
            if grid.contains_key(&(r, c)) {
                let start = c;
                while grid.contains_key(&(r, c + 1)) {
                    c += 1;
                }
                if c > start && !word_spans.contains(&(r, start, r, c)) {
                    return Err(format!("stray across run at row {r}"));
                }
            }
            c += 1;
        }
    }
    for c in cmin..=cmax {
        let mut r = rmin;
        while r <= rmax {
            if grid.contains_key(&(r, c)) {
                let start = r;
                while grid.contains_key(&(r + 1, c)) {
                    r += 1;
                }
                if r > start && !word_spans.contains(&(start, c, r, c)) {
                    return Err(format!("stray down run at col {c}"));
                }
            }
            r += 1;
        }
    }
    // connectivity over shared cells
    let cell_sets: Vec<HashSet<(i64, i64)>> = words.iter().map(|(w, r, c, d)| cells_of(w, *r, *c, *d).into_iter().map(|x| x.0).collect()).collect();
    let mut reached = vec![false; words.len()];
    let mut stack = vec![0];
    reached[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..words.len() {
            if !reached[j] && !cell_sets[i].is_disjoint(&cell_sets[j]) {
                reached[j] = true;
                stack.push(j);
            }
        }
    }
    if reached.iter().any(|r| !r) {
        return Err("disconnected".into());
    }
    Ok(())
}

pub fn check_layout(layout: &CrosswordLayout, rows: usize, cols: usize) -> Result<(), String> {
    let words: Vec<_> = layout.placements.iter().map(|p| (p.word.clone(), p.row as i64, p.col as i64, p.direction)).collect();
    for p in &layout.placements {
        let expected: String = p.keyword.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_uppercase();
        if expected != p.word {
            return Err(format!("{} does not match {}", p.word, p.keyword));
        }
    }
    for (w, r, c, d) in &words {
        let end = cells_of(w, *r, *c, *d).last().unwrap().0;
        if end.0 as usize >= layout.rows || end.1 as usize >= layout.cols {
            return Err("placement outside layout".into());
        }
    }
    check_words(&words, rows, cols)
}

/// Largest number of words that fit in one valid connected layout, found
/// by growing every layout reachable through letter-consistent crossings
/// and checking each one in full.
pub fn exhaustive_max_placed(words: &[String], rows: usize, cols: usize) -> usize {
    type State = BTreeSet<(usize, i64, i64, u8)>;
    let to_dir = |d: u8| if d == 0 { Direction::Across } else { Direction::Down };
    let materialize = |s: &State| -> Vec<(String, i64, i64, Direction)> { s.iter().map(|&(i, r, c, d)| (words[i].clone(), r, c, to_dir(d))).collect() };
    let normalize = |s: State| -> State {
        let r0 = s.iter().map(|x| x.1).min().unwrap();
        let c0 = s.iter().map(|x| x.2).min().unwrap();
        s.into_iter().map(|(i, r, c, d)| (i, r - r0, c - c0, d)).collect()
    };
    let consistent = |s: &State| -> bool {
        let mut grid: BTreeMap<(i64, i64), (char, u8)> = BTreeMap::new();
        for (w, r, c, d) in materialize(s) {
            let bit = if d == Direction::Across { 1 } else { 2 };
            for (cell, ch) in cells_of(&w, r, c, d) {
                let e = grid.entry(cell).or_insert((ch, 0));
                if e.0 != ch || e.1 & bit != 0 {
                    return false;
                }
                e.1 |= bit;
            }
        }
        true
    };
    let mut best = 0;
    let mut level: HashSet<State> = HashSet::new();
    for (i, w) in words.iter().enumerate() {
        let len = w.chars().count();
        if len <= cols {
            level.insert([(i, 0, 0, 0)].into_iter().collect());
        }
        if len <= rows {
            level.insert([(i, 0, 0, 1)].into_iter().collect());
        }
    }
    while !level.is_empty() {
        let mut next = HashSet::new();
        for s in &level {
            if check_words(&materialize(s), rows, cols).is_ok() {
                best = best.max(s.len());
            }
            let used: HashSet<usize> = s.iter().map(|x| x.0).collect();
            let cells: Vec<((i64, i64), char)> = materialize(s).iter().flat_map(|(w, r, c, d)| cells_of(w, *r, *c, *d)).collect();
            for (j, w) in words.iter().enumerate() {
                if used.contains(&j) {
                    continue;
                }
                for &((cr, cc), ch) in &cells {
                    for (k, wc) in w.chars().enumerate() {
                        if wc != ch {
                            continue;
                        }
                        for d in 0..2u8 {
                            let (r, c) = if d == 0 { (cr, cc - k as i64) } else { (cr - k as i64, cc) };
                            let mut t = s.clone();
                            t.insert((j, r, c, d));
                            if consistent(&t) {
                                next.insert(normalize(t));
                            }
                        }
                    }
                }
            }
        }
        level = next;
    }
    best
}
