use std::collections::HashSet;

use serde::Serialize;

use super::{Collection, DataError, Group};

/// Active occurrence rate of one dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AorSummary {
    pub dataset_id: String,
    /// Mean over the dataset's actives of the per-compound counts.
    pub mean: f64,
    /// Population standard deviation of the per-compound counts.
    pub std: f64,
    /// (compound key, number of other datasets in which it is also active)
    pub per_compound: Vec<(String, usize)>,
}

/// For each active compound of dataset `id`, counts the other datasets in
/// which the compound is also active. Datasets of the `exclude` groups are
/// left out of the count.
pub fn active_occurrence_rate(c: &Collection, id: &str, exclude: &[Group]) -> Result<AorSummary, DataError> {
    let target_idx = c.index_of(id).ok_or_else(|| DataError::UnknownDataset(id.to_string()))?;
    let target = &c.datasets[target_idx];
    let others: Vec<HashSet<String>> = c
        .datasets
        .iter()
        .enumerate()
        .filter(|(i, d)| *i != target_idx && !exclude.contains(&d.group))
        .map(|(_, d)| d.records.iter().filter(|r| r.label).map(|r| c.compound_key(r)).collect())
        .collect();

    let per_compound: Vec<(String, usize)> = target
        .records
        .iter()
        .filter(|r| r.label)
        .map(|r| {
            let key = c.compound_key(r);
            let count = others.iter().filter(|s| s.contains(&key)).count();
            (key, count)
        })
        .collect();
    if per_compound.is_empty() {
        return Err(DataError::NoActives(id.to_string()));
    }
    let n = per_compound.len() as f64;
    let mean = per_compound.iter().map(|(_, k)| *k as f64).sum::<f64>() / n;
    let var = per_compound.iter().map(|(_, k)| (*k as f64 - mean).powi(2)).sum::<f64>() / n;
    Ok(AorSummary { dataset_id: id.to_string(), mean, std: var.sqrt(), per_compound })
}

/// Entry `(x, y)` is the fraction of dataset `x`'s compounds that also
/// appear in dataset `y`. Rows and columns follow `c.datasets`.
pub fn intersection_matrix(c: &Collection) -> Vec<Vec<f64>> {
    let sets: Vec<HashSet<String>> =
        c.datasets.iter().map(|d| d.records.iter().map(|r| c.compound_key(r)).collect()).collect();
    sets.iter()
        .enumerate()
        .map(|(x, sx)| {
            sets.iter()
                .enumerate()
                .map(|(y, sy)| {
                    if x == y {
                        1.0
                    } else if sx.is_empty() {
                        0.0
                    } else {
                        sx.intersection(sy).count() as f64 / sx.len() as f64
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::Fingerprint;
    use crate::data::{Dataset, Identity, Record};

    fn ds(id: &str, group: Group, compounds: &[(&str, bool)]) -> Dataset {
        Dataset {
            id: id.into(),
            group,
            target_class: String::new(),
            target: String::new(),
            records: compounds
                .iter()
                .map(|&(c, label)| Record {
                    compound_id: c.into(),
                    fingerprint: Fingerprint::new(8).unwrap(),
                    label,
                    weight: 1.0,
                })
                .collect(),
            duplicate_target: false,
        }
    }

    #[test]
    fn aor_definition() {
        let c = Collection::new(vec![
            ds("a", Group::Pcba, &[("x", true), ("y", true), ("z", false)]),
            ds("b", Group::Pcba, &[("x", true), ("y", false)]),
            ds("c", Group::Pcba, &[("x", true)]),
            ds("d", Group::Muv, &[("x", true)]),
            ds("e", Group::Dude, &[("x", true), ("y", true)]),
        ]);
        let s = active_occurrence_rate(&c, "a", &[]).unwrap();
        assert_eq!(s.per_compound, vec![("x".to_string(), 4), ("y".to_string(), 1)]);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.std, 1.5);
        let s = active_occurrence_rate(&c, "a", &[Group::Dude]).unwrap();
        assert_eq!(s.per_compound, vec![("x".to_string(), 3), ("y".to_string(), 0)]);
        assert!(matches!(active_occurrence_rate(&c, "zz", &[]), Err(DataError::UnknownDataset(_))));
    }

    #[test]
    fn aor_of_identical_datasets_is_one() {
        let rows = [("p", true), ("q", true), ("r", false)];
        let c = Collection::new(vec![ds("a", Group::Pcba, &rows), ds("b", Group::Pcba, &rows)]);
        assert_eq!(active_occurrence_rate(&c, "a", &[]).unwrap().mean, 1.0);
        assert_eq!(active_occurrence_rate(&c, "b", &[]).unwrap().mean, 1.0);
    }

    #[test]
    fn no_actives_is_an_error() {
        let c = Collection::new(vec![ds("a", Group::Pcba, &[("p", false)])]);
        assert!(matches!(active_occurrence_rate(&c, "a", &[]), Err(DataError::NoActives(_))));
    }

    #[test]
    fn intersections() {
        let x: Vec<(&str, bool)> = vec![("1", false), ("2", false), ("3", false), ("4", false)];
        let y: Vec<(&str, bool)> =
            vec![("3", false), ("4", false), ("5", false), ("6", false), ("7", false), ("8", false), ("9", false), ("10", false)];
        let z: Vec<(&str, bool)> = vec![("100", false)];
        let c = Collection::new(vec![ds("x", Group::Pcba, &x), ds("y", Group::Pcba, &y), ds("z", Group::Pcba, &z)]);
        let m = intersection_matrix(&c);
        assert_eq!(m[0][1], 0.5);
        assert_eq!(m[1][0], 0.25);
        assert_eq!(m[0][2], 0.0);
        assert_eq!(m[2][2], 1.0);

        // subset case
        let c = Collection::new(vec![ds("x", Group::Pcba, &x[..2]), ds("y", Group::Pcba, &x)]);
        let m = intersection_matrix(&c);
        assert_eq!((m[0][1], m[1][0]), (1.0, 0.5));
    }

    #[test]
    fn fingerprint_identity() {
        let mut a = ds("a", Group::Pcba, &[("a1", true)]);
        let mut b = ds("b", Group::Pcba, &[("b1", true)]);
        a.records[0].fingerprint.set(3);
        b.records[0].fingerprint.set(3);
        let mut c = Collection::new(vec![a, b]);
        assert_eq!(active_occurrence_rate(&c, "a", &[]).unwrap().mean, 0.0);
        c.identity = Identity::Fingerprint;
        assert_eq!(active_occurrence_rate(&c, "a", &[]).unwrap().mean, 1.0);
    }
}
