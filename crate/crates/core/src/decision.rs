//! Decision graph: the best gain of every epoch, and an automatic read of
//! where it falls off a cliff.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::medoids::{run, RunOptions};
use crate::mst::MinimaxMatrix;

/// Best gain of epochs `2..=k_max`; `values[i]` belongs to epoch `i + 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTrace {
    pub k_max: usize,
    pub values: Vec<f64>,
}

impl DecisionTrace {
    /// `epoch<TAB>max_r` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{}\t{v}", i + 2).unwrap();
        }
        out
    }
}

pub fn trace(mm: &MinimaxMatrix, k_max: usize) -> Result<DecisionTrace> {
    let n = mm.n();
    if k_max < 2 || k_max > n {
        return Err(Error::KMaxOutOfRange { k_max, n });
    }
    let model = run(mm, k_max, &RunOptions::default())?;
    Ok(DecisionTrace {
        k_max,
        values: model.gain_trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KEstimate {
    pub k: usize,
    /// Set when the trace is all zeros and carries no cliff.
    pub degenerate: bool,
}

pub const DEFAULT_EPS: f64 = 1e-12;

/// Picks the epoch `t` (3..=k_max) with the largest drop ratio
/// `max_r(t − 1) / (max_r(t) + eps)` and reports `k = t − 1`, the number of
/// medoids chosen before the drop.
pub fn estimate_k(tr: &DecisionTrace, eps: f64) -> Result<KEstimate> {
    let v = &tr.values;
    if v.len() < 2 {
        return Err(Error::TraceTooShort(v.len()));
    }
    if v.iter().all(|&x| x == 0.0) {
        return Ok(KEstimate {
            k: 1,
            degenerate: true,
        });
    }
    let mut best_epoch = 3;
    let mut best_ratio = f64::NEG_INFINITY;
    for (i, w) in v.windows(2).enumerate() {
        let ratio = w[0] / (w[1] + eps);
        if ratio > best_ratio {
            best_ratio = ratio;
            best_epoch = i + 3;
        }
    }
    Ok(KEstimate {
        k: best_epoch - 1,
        degenerate: false,
    })
}
