//! Cross-validation fold construction.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::stream_rng;

/// Requested fold structure: k groups or leave-one-out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldSpec {
    KFold(usize),
    LeaveOneOut,
}

/// A shuffled partition of row indices into folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub leave_one_out: bool,
    /// Row index -> fold id.
    pub assignment: Vec<u32>,
}

impl FoldPlan {
    pub fn n_rows(&self) -> usize {
        self.assignment.len()
    }

    /// Row indices belonging to `fold`, ascending.
    pub fn fold_rows(&self, fold: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &f)| f as usize == fold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Row indices outside `fold`, ascending.
    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &f)| f as usize != fold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Builds a fold plan: shuffled partition with fold sizes differing by at
/// most one, deterministic in `(n, spec, seed)`.
pub fn make_folds(n: usize, spec: FoldSpec, seed: u64) -> Result<FoldPlan> {
    let (k, leave_one_out) = match spec {
        FoldSpec::KFold(k) => (k, false),
        FoldSpec::LeaveOneOut => (n, true),
    };
    if k < 2 || k > n {
        return Err(Error::FoldCount { k, n });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, 0));

    // First (n mod k) folds take one extra row.
    let base = n / k;
    let extra = n % k;
    let mut assignment = vec![0u32; n];
    let mut cursor = 0usize;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &row in &order[cursor..cursor + size] {
            assignment[row] = fold as u32;
        }
        cursor += size;
    }

    Ok(FoldPlan {
        k,
        seed,
        leave_one_out,
        assignment,
    })
}
