use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seed::derive_seed;

const FOLD_STREAM: u64 = 0x466f_6c64;

/// One cross-validation split, both sides in ascending index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified split. Each class is shuffled under its own derived seed and
/// dealt round-robin; the dealing position carries over between classes, so
/// fold sizes also differ by at most one overall.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Result<Vec<Fold>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {folds}")));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let mut assignment = vec![0usize; labels.len()];
    let mut dealt = 0usize;
    for (class, idx) in members.iter_mut().enumerate() {
        if idx.is_empty() {
            continue;
        }
        if idx.len() < folds {
            return Err(Error::ClassTooSmall { class, count: idx.len(), folds });
        }
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[FOLD_STREAM, class as u64])));
        for &i in idx.iter() {
            assignment[i] = dealt % folds;
            dealt += 1;
        }
    }
    Ok((0..folds)
        .map(|f| {
            let (test, train) = (0..labels.len()).partition(|&i| assignment[i] == f);
            Fold { train, test }
        })
        .collect())
}
