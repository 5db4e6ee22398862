use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ClueInstructExample, DatasetError};

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub train: Vec<ClueInstructExample>,
    pub test: Vec<ClueInstructExample>,
}

/// Per-category test quotas by largest remainder: each category gets the
/// floor or ceiling of its proportional share and the quotas sum to
/// `test_size`. Remainder ties go to the alphabetically first category.
fn quotas(sizes: &BTreeMap<&str, usize>, total: usize, test_size: usize) -> BTreeMap<String, usize> {
    let mut out: BTreeMap<String, usize> = BTreeMap::new();
    let mut rems = Vec::new();
    let mut assigned = 0;
    for (cat, &n) in sizes {
        let num = test_size * n;
        out.insert(cat.to_string(), num / total);
        assigned += num / total;
        rems.push((num % total, *cat));
    }
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
    for (_, cat) in rems.into_iter().take(test_size - assigned) {
        *out.get_mut(cat).expect("category present") += 1;
    }
    out
}

/// Category-stratified train/test split. Both halves keep corpus order;
/// the same seed yields the same split.
pub fn split(corpus: &[ClueInstructExample], test_size: usize, seed: u64) -> Result<SplitResult, DatasetError> {
    if test_size > corpus.len() {
        return Err(DatasetError::TestTooLarge {
            test_size,
            corpus_size: corpus.len(),
        });
    }
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, ex) in corpus.iter().enumerate() {
        groups.entry(ex.category.as_str()).or_default().push(i);
    }
    let sizes = groups.iter().map(|(c, v)| (*c, v.len())).collect();
    let quota = if corpus.is_empty() { BTreeMap::new() } else { quotas(&sizes, corpus.len(), test_size) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; corpus.len()];
    for (cat, mut idx) in groups {
        idx.shuffle(&mut rng);
        for &i in &idx[..quota[cat]] {
            in_test[i] = true;
        }
    }
    let (test, train): (Vec<_>, Vec<_>) = corpus.iter().zip(&in_test).partition(|(_, &t)| t);
    Ok(SplitResult {
        train: train.into_iter().map(|(e, _)| e.clone()).collect(),
        test: test.into_iter().map(|(e, _)| e.clone()).collect(),
    })
}

/// Keeps `round(fraction * len)` training rows (halves round up). Subsets
/// are nested: for one seed, a smaller fraction always selects a prefix of
/// the rows a larger fraction selects. Output keeps input order.
pub fn truncate_training(train: &[ClueInstructExample], fraction: f64, seed: u64) -> Result<Vec<ClueInstructExample>, DatasetError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(DatasetError::InvalidFraction(fraction));
    }
    // The epsilon keeps exact halves such as 0.1 * 45 from rounding down.
    let n = ((fraction * train.len() as f64) + 0.5 + 1e-9).floor() as usize;
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut keep = order[..n.min(train.len())].to_vec();
    keep.sort_unstable();
    Ok(keep.into_iter().map(|i| train[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use proptest::prelude::*;

    use super::*;
    use crate::dataset::test_support::example;

    fn corpus(per_cat: &[(&str, usize)]) -> Vec<ClueInstructExample> {
        let mut out = Vec::new();
        for (cat, n) in per_cat {
            for _ in 0..*n {
                out.push(example(out.len(), cat));
            }
        }
        out
    }

    #[test]
    fn sizes_and_determinism() {
        let c = corpus(&[("Science", 50), ("Games", 30), ("Music", 20)]);
        let a = split(&c, 10, 42).unwrap();
        assert_eq!((a.train.len(), a.test.len()), (90, 10));
        assert_eq!(a, split(&c, 10, 42).unwrap());
        assert_ne!(a.test, split(&c, 10, 43).unwrap().test);
        let count = |cat: &str| a.test.iter().filter(|e| e.category == cat).count();
        assert_eq!((count("Science"), count("Games"), count("Music")), (5, 3, 2));
    }

    #[test]
    fn test_too_large() {
        let c = corpus(&[("Science", 3)]);
        assert!(matches!(split(&c, 4, 0), Err(DatasetError::TestTooLarge { .. })));
        let all = split(&c, 3, 0).unwrap();
        assert!(all.train.is_empty());
    }

    #[test]
    fn truncation_counts() {
        let c = corpus(&[("Science", 43_475)]);
        assert_eq!(truncate_training(&c, 0.01, 1).unwrap().len(), 435);
        assert_eq!(truncate_training(&c, 1.0, 1).unwrap().len(), 43_475);
        let small = corpus(&[("Science", 45)]);
        assert_eq!(truncate_training(&small, 0.1, 1).unwrap().len(), 5);
        assert!(truncate_training(&c, 0.0, 1).is_err());
        assert!(truncate_training(&c, 1.5, 1).is_err());
        assert!(truncate_training(&c, f64::NAN, 1).is_err());
    }

    proptest! {
        #[test]
        fn split_partitions_and_stratifies(
            sizes in proptest::collection::vec(1usize..40, 1..6),
            frac in 0.0f64..1.0,
            seed in any::<u64>(),
        ) {
            let cats = ["A", "B", "C", "D", "E", "F"];
            let c = corpus(&cats.iter().zip(&sizes).map(|(c, n)| (*c, *n)).collect::<Vec<_>>());
            let test_size = (frac * c.len() as f64) as usize;
            let s = split(&c, test_size, seed).unwrap();
            prop_assert_eq!(s.test.len(), test_size);
            prop_assert_eq!(s.train.len() + s.test.len(), c.len());
            let train_ids: HashSet<_> = s.train.iter().map(|e| &e.id).collect();
            prop_assert!(s.test.iter().all(|e| !train_ids.contains(&e.id)));
            for (cat, n) in cats.iter().zip(&sizes) {
                let got = s.test.iter().filter(|e| &e.category == cat).count() as f64;
                let want = test_size as f64 * *n as f64 / c.len() as f64;
                prop_assert!((got - want).abs() < 1.0 + 1e-9, "{cat}: {got} vs {want}");
            }
        }

        #[test]
        fn truncation_is_nested(n in 1usize..300, a in 0.01f64..1.0, b in 0.01f64..1.0, seed in any::<u64>()) {
            let c = corpus(&[("A", n)]);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let small: HashSet<_> = truncate_training(&c, lo, seed).unwrap().into_iter().map(|e| e.id).collect();
            let big: HashSet<_> = truncate_training(&c, hi, seed).unwrap().into_iter().map(|e| e.id).collect();
            prop_assert!(small.is_subset(&big));
        }
    }
}
