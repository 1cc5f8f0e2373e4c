use rand::seq::SliceRandom;

use super::{DataError, Dataset};
use crate::seed;

/// Nested, label-stratified subsets of a dataset's records.
///
/// Returns record indices for each requested size. Actives and inactives are
/// shuffled once and each subset takes a prefix of both lists, so every
/// subset contains the previous one. The active count of a subset is the
/// dataset's active fraction times its size, rounded, and never decreases
/// along the chain.
pub fn sample_nested(d: &Dataset, sizes: &[usize], seed: u64) -> Result<Vec<Vec<usize>>, DataError> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DataError::Sampling(format!("sizes must be strictly increasing: {sizes:?}")));
    }
    if let Some(&last) = sizes.last() {
        if last > d.records.len() {
            return Err(DataError::Sampling(format!(
                "size {last} exceeds the {} records of {}",
                d.records.len(),
                d.id
            )));
        }
    }
    let mut rng = seed::rng_for(seed, &format!("nested/{}", d.id), 0);
    let mut actives: Vec<usize> = (0..d.records.len()).filter(|&i| d.records[i].label).collect();
    let mut inactives: Vec<usize> = (0..d.records.len()).filter(|&i| !d.records[i].label).collect();
    actives.shuffle(&mut rng);
    inactives.shuffle(&mut rng);
    let frac = actives.len() as f64 / d.records.len().max(1) as f64;

    let mut out = Vec::with_capacity(sizes.len());
    let (mut prev_a, mut prev_i) = (0usize, 0usize);
    for &size in sizes {
        let lo = prev_a.max(size.saturating_sub(inactives.len()));
        let hi = actives.len().min(size - prev_i);
        if lo > hi {
            return Err(DataError::Sampling(format!("cannot keep size {size} nested and stratified")));
        }
        let n_a = ((size as f64 * frac).round() as usize).clamp(lo, hi);
        let n_i = size - n_a;
        let mut subset: Vec<usize> = actives[..n_a].iter().chain(&inactives[..n_i]).copied().collect();
        subset.sort_unstable();
        out.push(subset);
        prev_a = n_a;
        prev_i = n_i;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::Fingerprint;
    use crate::data::{Group, Record};
    use proptest::prelude::*;

    fn dataset(actives: usize, inactives: usize) -> Dataset {
        Dataset {
            id: "d".into(),
            group: Group::Synth,
            target_class: String::new(),
            target: String::new(),
            records: (0..actives + inactives)
                .map(|i| Record {
                    compound_id: format!("c{i}"),
                    fingerprint: Fingerprint::new(8).unwrap(),
                    label: i % 50 == 0 && i / 50 < actives,
                    weight: 1.0,
                })
                .collect(),
            duplicate_target: false,
        }
    }

    #[test]
    fn nested_sizes() {
        let d = dataset(40, 1960);
        let s = sample_nested(&d, &[10, 20], 5).unwrap();
        assert_eq!(s[0].len(), 10);
        assert_eq!(s[1].len(), 20);
        assert!(s[0].iter().all(|i| s[1].contains(i)));
    }

    #[test]
    fn stratified() {
        let d = dataset(40, 1960);
        let s = sample_nested(&d, &[1000], 5).unwrap();
        assert_eq!(s[0].iter().filter(|&&i| d.records[i].label).count(), 20);
    }

    #[test]
    fn errors_and_determinism() {
        let d = dataset(4, 96);
        assert!(sample_nested(&d, &[20, 10], 1).is_err());
        assert!(sample_nested(&d, &[101], 1).is_err());
        assert_eq!(sample_nested(&d, &[10, 50], 1).unwrap(), sample_nested(&d, &[10, 50], 1).unwrap());
    }

    proptest! {
        #[test]
        fn chain_is_nested(actives in 1usize..30, inactives in 1usize..300, seed: u64, cuts in proptest::collection::btree_set(1usize..330, 1..6)) {
            let d = dataset(actives, inactives);
            let n = d.records.len();
            let sizes: Vec<usize> = cuts.into_iter().filter(|&s| s <= n).collect();
            prop_assume!(!sizes.is_empty());
            let chain = sample_nested(&d, &sizes, seed).unwrap();
            for (s, &size) in chain.iter().zip(&sizes) {
                prop_assert_eq!(s.len(), size);
            }
            for w in chain.windows(2) {
                prop_assert!(w[0].iter().all(|i| w[1].binary_search(i).is_ok()));
            }
        }
    }
}
