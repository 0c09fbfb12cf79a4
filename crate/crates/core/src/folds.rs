//! Cross-validation fold assignment.
//!
//! Entries are shuffled once with the seed and cut into `n_folds` windows of
//! `floor(n / n_folds)` entries. Fold `k` tests on window `k`, validates on
//! window `k + 1` (cyclically) and trains on everything else, including the
//! `n mod n_folds` leftover entries. With 600 entries and 6 folds this gives
//! 400/100/100 per fold and the six test windows partition the corpus.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Split {
    Train,
    Valid,
    Test,
    Unassigned,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
            Split::Unassigned => "unassigned",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            "unassigned" => Ok(Split::Unassigned),
            _ => Err(()),
        }
    }
}

/// How test windows are chosen across folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum FoldMode {
    /// One shuffle, rotating windows: full test coverage.
    #[default]
    Rotating,
    /// A fresh shuffle per fold (seeded with `seed + fold`), always taking
    /// the first two windows as test and validation.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FoldError {
    TooFewEntries { entries: usize, folds: usize },
    TooFewFolds(usize),
}

impl fmt::Display for FoldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoldError::TooFewEntries { entries, folds } => {
                write!(f, "{entries} entries cannot fill {folds} folds")
            }
            FoldError::TooFewFolds(n) => write!(f, "need at least 3 folds, got {n}"),
        }
    }
}

impl core::error::Error for FoldError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub fold_index: usize,
    /// Split of every entry, in input order.
    pub splits: Vec<(String, Split)>,
}

impl FoldAssignment {
    pub fn split_of(&self, id: &str) -> Option<Split> {
        self.splits.iter().find(|(i, _)| i == id).map(|(_, s)| *s)
    }

    /// Ids in `split`, in input order.
    pub fn ids(&self, split: Split) -> Vec<&str> {
        self.splits
            .iter()
            .filter(|(_, s)| *s == split)
            .map(|(i, _)| i.as_str())
            .collect()
    }

    pub fn id_to_split(&self) -> BTreeMap<&str, Split> {
        self.splits.iter().map(|(i, s)| (i.as_str(), *s)).collect()
    }

    pub fn count(&self, split: Split) -> usize {
        self.splits.iter().filter(|(_, s)| *s == split).count()
    }
}

pub fn split_folds<S: AsRef<str>>(
    ids: &[S],
    n_folds: usize,
    seed: u64,
    mode: FoldMode,
) -> Result<Vec<FoldAssignment>, FoldError> {
    if n_folds < 3 {
        return Err(FoldError::TooFewFolds(n_folds));
    }
    let n = ids.len();
    if n < n_folds {
        return Err(FoldError::TooFewEntries {
            entries: n,
            folds: n_folds,
        });
    }
    let window = n / n_folds;
    let shuffled = |seed: u64| {
        let mut order: Vec<usize> = (0..n).collect();
        SplitMix64::new(seed).shuffle(&mut order);
        order
    };
    let rotating = shuffled(seed);

    let folds = (0..n_folds)
        .map(|fold| {
            let (order, test_w, valid_w) = match mode {
                FoldMode::Rotating => (rotating.clone(), fold, (fold + 1) % n_folds),
                FoldMode::Independent => (shuffled(seed.wrapping_add(fold as u64)), 0, 1),
            };
            let mut split = vec![Split::Train; n];
            for &i in &order[test_w * window..(test_w + 1) * window] {
                split[i] = Split::Test;
            }
            for &i in &order[valid_w * window..(valid_w + 1) * window] {
                split[i] = Split::Valid;
            }
            FoldAssignment {
                fold_index: fold,
                splits: ids
                    .iter()
                    .zip(split)
                    .map(|(id, s)| (String::from(id.as_ref()), s))
                    .collect(),
            }
        })
        .collect();
    Ok(folds)
}
