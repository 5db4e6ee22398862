mod common;

use eduverba_core::grid::{assemble, number_cells, parse_text, render, validate, AssembleConfig, GridError, RenderFormat, View};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn entries(words: &[&str]) -> Vec<(String, String)> {
    words.iter().map(|w| (w.to_string(), format!("clue for {w}"))).collect()
}

fn random_words(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    // a small alphabet makes crossings likely
    let alphabet = ['A', 'E', 'R', 'S', 'T', 'N', 'O'];
    (0..n)
        .map(|_| {
            let len = rng.gen_range(3..7);
            (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect()
        })
        .collect()
}

#[test]
fn single_entry_is_one_row() {
    let l = assemble(&entries(&["Robocall"]), &AssembleConfig::default()).unwrap();
    assert_eq!((l.rows, l.cols), (1, 8));
    assert_eq!(l.placements.len(), 1);
    assert_eq!((l.placements[0].row, l.placements[0].col), (0, 0));
    assert_eq!(l.placements[0].number, 1);
}

#[test]
fn cat_tar_cross_once() {
    let l = assemble(&entries(&["CAT", "TAR"]), &AssembleConfig::default()).unwrap();
    assert_eq!(l.placements.len(), 2);
    assert_eq!(l.intersections(), 1);
    let words: Vec<String> = vec!["CAT".into(), "TAR".into()];
    assert_eq!(common::exhaustive_max_placed(&words, 15, 15), 2);
    common::check_layout(&l, 15, 15).unwrap();
}

#[test]
fn errors() {
    assert_eq!(assemble(&[], &AssembleConfig::default()), Err(GridError::NoEntries));
    let cfg = AssembleConfig {
        max_rows: 5,
        max_cols: 5,
        ..AssembleConfig::default()
    };
    assert!(matches!(assemble(&entries(&["Robocall"]), &cfg), Err(GridError::WordTooLong { len: 8, .. })));
    assert!(matches!(assemble(&entries(&["COVID-19"]), &cfg), Err(GridError::NonAlphabetic(_))));
}

#[test]
fn unplaceable_words_are_reported() {
    let l = assemble(&entries(&["CAT", "XYZ", "ox"]), &AssembleConfig::default()).unwrap();
    assert_eq!(l.placements.len(), 1);
    let reasons: Vec<_> = l.unplaced.iter().map(|u| (u.keyword.as_str(), u.reason.as_str())).collect();
    assert_eq!(reasons.len(), 2);
    assert!(reasons.iter().any(|(k, _)| *k == "ox"));
}

#[test]
fn fuzz_twelve_entries_validate() {
    for seed in 0..40 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=12);
        let words = random_words(&mut rng, n);
        let cfg = AssembleConfig {
            seed,
            node_budget: Some(2_000),
            ..AssembleConfig::default()
        };
        let refs: Vec<&str> = words.iter().map(String::as_str).collect();
        let l = assemble(&entries(&refs), &cfg).unwrap();
        assert_eq!(l.placements.len() + l.unplaced.len(), n);
        validate(&l, true).unwrap();
        common::check_layout(&l, 15, 15).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
}

#[test]
fn relaxed_mode_still_consistent() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let words = random_words(&mut rng, 6);
        let refs: Vec<&str> = words.iter().map(String::as_str).collect();
        let cfg = AssembleConfig {
            seed,
            strict_adjacency: false,
            node_budget: Some(2_000),
            ..AssembleConfig::default()
        };
        let l = assemble(&entries(&refs), &cfg).unwrap();
        validate(&l, false).unwrap();
    }
}

#[test]
fn small_board_respects_bounds() {
    for seed in 0..60 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let words = random_words(&mut rng, 4);
        let refs: Vec<&str> = words.iter().map(String::as_str).collect();
        let cfg = AssembleConfig {
            max_rows: 6,
            max_cols: 7,
            seed,
            node_budget: None,
            ..AssembleConfig::default()
        };
        let l = assemble(&entries(&refs), &cfg).unwrap();
        assert!(l.rows <= 6 && l.cols <= 7);
        common::check_layout(&l, 6, 7).unwrap();
        assert_eq!(l.placements.len(), common::exhaustive_max_placed(&words, 6, 7), "seed {seed}: {words:?}");
    }
}

#[test]
fn text_render_round_trip() {
    let l = assemble(&entries(&["NILE", "AMAZON", "ANDES", "ALPS"]), &AssembleConfig::default()).unwrap();
    let (rows, cols, cells) = parse_text(&render(&l, RenderFormat::Text, View::Solution)).unwrap();
    assert_eq!((rows, cols), (l.rows, l.cols));
    assert_eq!(cells, l.cell_letters());
    let blank = render(&l, RenderFormat::Text, View::Blank);
    assert!(!blank.chars().any(|c| c.is_alphabetic()));
}

#[test]
fn numbering_is_row_major() {
    let mut l = assemble(&entries(&["NILE", "AMAZON", "ANDES", "ALPS", "SAHARA"]), &AssembleConfig::default()).unwrap();
    let lists = number_cells(&mut l);
    let mut starts: Vec<(usize, usize)> = l.placements.iter().map(|p| (p.row, p.col)).collect();
    starts.sort();
    starts.dedup();
    for p in &l.placements {
        let expected = starts.iter().position(|s| *s == (p.row, p.col)).unwrap() as u32 + 1;
        assert_eq!(p.number, expected);
    }
    assert_eq!(lists.across.len() + lists.down.len(), l.placements.len());
    assert!(lists.across.windows(2).all(|w| w[0].number < w[1].number));
}
