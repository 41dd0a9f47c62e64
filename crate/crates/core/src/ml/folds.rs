use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Fold index per sample. Each class is shuffled and dealt round-robin,
/// with the dealing position carried across classes so fold sizes differ by
/// at most one.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &y) in labels.iter().enumerate() {
        classes.entry(y).or_default().push(i);
    }
    if let Some((class, members)) = classes.iter().find(|(_, m)| m.len() < k) {
        return Err(Error::InvalidArgument(format!(
            "class {class} has {} samples, fewer than {k} folds",
            members.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for members in classes.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(folds)
}

/// Sample indices (train, test) of fold `f`.
pub fn split(folds: &[usize], f: usize) -> (Vec<usize>, Vec<usize>) {
    (0..folds.len()).partition(|&i| folds[i] != f)
}
