use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::MultiPopulationData;
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Per-population partition: feature-selection rows, then downstream
/// train/test rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitBundle {
    pub feature_selection: MultiPopulationData,
    pub downstream_train: MultiPopulationData,
    pub downstream_test: MultiPopulationData,
}

pub const MIN_SPLIT_ROWS: usize = 5;

/// `(feature_selection, downstream_train, downstream_test)` sizes for `n` rows:
/// floor of 60%, then floor of 80% of the remainder, the rest to test.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let fs = n * 6 / 10;
    let rest = n - fs;
    let train = rest * 8 / 10;
    (fs, train, rest - train)
}

/// Shuffled row indices of one population, cut into the three parts.
pub fn split_indices(n: usize, seed: u64, population: &str) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = rng::stream(Domain::Split, &[seed, rng::label_hash(population)]);
    idx.shuffle(&mut rng);
    let (fs, train, _) = split_sizes(n);
    let test = idx.split_off(fs + train);
    let train_idx = idx.split_off(fs);
    (idx, train_idx, test)
}

pub fn split_dataset(data: &MultiPopulationData, seed: u64) -> Result<SplitBundle> {
    let mut fs = Vec::new();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for p in &data.populations {
        if p.n_rows() < MIN_SPLIT_ROWS {
            return Err(Error::invalid_data(format!(
                "population `{}` has {} rows; at least {MIN_SPLIT_ROWS} are needed to split",
                p.id,
                p.n_rows()
            )));
        }
        let (a, b, c) = split_indices(p.n_rows(), seed, &p.id);
        fs.push(p.take_rows(&a)?);
        train.push(p.take_rows(&b)?);
        test.push(p.take_rows(&c)?);
    }
    let build = |pops| {
        MultiPopulationData::new(data.feature_names.clone(), data.target_name.clone(), pops)
    };
    Ok(SplitBundle {
        feature_selection: build(fs)?,
        downstream_train: build(train)?,
        downstream_test: build(test)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::PopulationDataset;
    use ndarray::{Array1, Array2};
    use proptest::prelude::*;

    fn tagged(n: usize) -> MultiPopulationData {
        // y carries the row identity
        let x = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        let y = Array1::from_iter((0..n).map(|i| i as f64));
        MultiPopulationData::new(
            vec!["a".into(), "b".into()],
            "y",
            vec![PopulationDataset::new("P", x, y).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn split_sizes_at_one_hundred() {
        assert_eq!(split_sizes(100), (60, 32, 8));
    }

    #[test]
    fn small_population_rounding() {
        assert_eq!(split_sizes(10), (6, 3, 1));
        assert_eq!(split_sizes(5), (3, 1, 1));
    }

    #[test]
    fn deterministic_given_seed() {
        let d = tagged(50);
        assert_eq!(split_dataset(&d, 9).unwrap(), split_dataset(&d, 9).unwrap());
        assert_ne!(
            split_dataset(&d, 9).unwrap().feature_selection,
            split_dataset(&d, 10).unwrap().feature_selection
        );
    }

    #[test]
    fn too_small_population_errors() {
        assert!(split_dataset(&tagged(4), 0).is_err());
    }

    proptest! {
        #[test]
        fn parts_partition_each_population(n in 5usize..200, seed in any::<u64>()) {
            let d = tagged(n);
            let s = split_dataset(&d, seed).unwrap();
            let mut ids: Vec<f64> = [&s.feature_selection, &s.downstream_train, &s.downstream_test]
                .iter()
                .flat_map(|part| part.populations[0].y.to_vec())
                .collect();
            ids.sort_by(f64::total_cmp);
            let expected: Vec<f64> = (0..n).map(|i| i as f64).collect();
            prop_assert_eq!(ids, expected);
            let (a, b, c) = split_sizes(n);
            prop_assert_eq!(s.feature_selection.populations[0].n_rows(), a);
            prop_assert_eq!(s.downstream_train.populations[0].n_rows(), b);
            prop_assert_eq!(s.downstream_test.populations[0].n_rows(), c);
        }
    }
}
