//! Exhaustive k-medoids over a minimax matrix, used to certify optimality
//! of the greedy search on small instances.

use crate::error::{Error, Result};
use crate::mst::MinimaxMatrix;
use crate::numeric::exact_sum;

/// Largest number of medoid subsets the oracle will enumerate.
pub const SUBSET_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_objective: f64,
    /// Every subset attaining the minimum, each sorted ascending, in
    /// lexicographic order.
    pub best_medoid_sets: Vec<Vec<usize>>,
    pub evaluated: u64,
}

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    c as u64
}

/// Sum over objects of the distance to the nearest medoid. Objects tied
/// between medoids contribute the tied minimum.
pub fn objective(mm: &MinimaxMatrix, medoids: &[usize]) -> f64 {
    exact_sum((0..mm.n()).map(|x| {
        let row = mm.row(x);
        medoids
            .iter()
            .map(|&m| row[m])
            .fold(f64::INFINITY, f64::min)
    }))
}

/// Enumerates every `k`-subset of objects and keeps the minimizers.
pub fn brute_force(mm: &MinimaxMatrix, k: usize) -> Result<OracleResult> {
    let n = mm.n();
    if k < 1 {
        return Err(Error::KTooSmall);
    }
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    if binomial(n, k) > SUBSET_LIMIT {
        return Err(Error::GuardExceeded {
            n,
            k,
            limit: SUBSET_LIMIT,
        });
    }
    let owned;
    let mm = if mm.mode() == crate::dataio::Mode::Similarity {
        owned = mm.clone().into_dissimilarity();
        &owned
    } else {
        mm
    };

    let mut subset: Vec<usize> = (0..k).collect();
    let mut best = f64::INFINITY;
    let mut sets = Vec::new();
    let mut evaluated = 0u64;
    loop {
        evaluated += 1;
        let e = objective(mm, &subset);
        if e < best {
            best = e;
            sets.clear();
        }
        if e == best {
            sets.push(subset.clone());
        }
        // next combination in lexicographic order
        let Some(i) = (0..k).rev().find(|&i| subset[i] < n - k + i) else {
            break;
        };
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    Ok(OracleResult {
        best_objective: best,
        best_medoid_sets: sets,
        evaluated,
    })
}

/// Checks that every medoid minimizes the summed distance to the members of
/// its induced cluster (objects whose nearest medoid is uniquely it).
pub fn medoids_are_central(mm: &MinimaxMatrix, medoids: &[usize]) -> bool {
    let n = mm.n();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); medoids.len()];
    for x in 0..n {
        let row = mm.row(x);
        let min = medoids
            .iter()
            .map(|&m| row[m])
            .fold(f64::INFINITY, f64::min);
        let hits: Vec<usize> = (0..medoids.len())
            .filter(|&t| row[medoids[t]] == min)
            .collect();
        if let [t] = hits[..] {
            members[t].push(x);
        }
    }
    medoids.iter().zip(&members).all(|(&m, cluster)| {
        let cost = |c: usize| exact_sum(cluster.iter().map(|&y| mm.get(y, c)));
        let own = cost(m);
        cluster.iter().all(|&c| own <= cost(c))
    })
}
