//! Globally optimal k-medoids over a minimax (ultrametric) distance.
//!
//! Under an ultrametric, everything outside a cluster sees all of its members
//! at the same distance. Two consequences drive the search:
//!
//! * a medoid has the smallest degree (row sum of distances) in its cluster,
//!   so the global minimum-degree object is always a medoid;
//! * a medoid's nearest lower-degree object (`nn`) is itself a medoid, so
//!   only objects whose `nn` is already a medoid need to be scored.
//!
//! Medoids are then added greedily by largest objective decrease, which
//! reaches the global minimum of the k-medoids objective.

use std::borrow::Cow;
use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::dataio::Mode;
use crate::error::{Error, Result};
use crate::metrics::Partition;
use crate::mst::{MinimaxMatrix, SpanningTree};
use crate::numeric::exact_sum;

/// Degrees with a strict total order: ascending degree, then index.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeTable {
    pub degrees: Vec<f64>,
    pub order: Vec<usize>,
    /// Inverse of `order`.
    pub rank: Vec<usize>,
}

/// Sums each row of the minimax matrix. Requires dissimilarity form.
pub fn compute_degrees(mm: &MinimaxMatrix) -> DegreeTable {
    debug_assert_eq!(mm.mode(), Mode::Dissimilarity);
    let n = mm.n();
    let degrees: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| exact_sum(mm.row(x).iter().copied()))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| degrees[a].total_cmp(&degrees[b]).then(a.cmp(&b)));
    let mut rank = vec![0; n];
    for (pos, &x) in order.iter().enumerate() {
        rank[x] = pos;
    }
    DegreeTable {
        degrees,
        order,
        rank,
    }
}

/// For every object, the nearest object that precedes it in degree order.
/// Distance ties go to the earlier object; `order[0]` has none.
pub fn compute_nn(dt: &DegreeTable, mm: &MinimaxMatrix) -> Vec<Option<usize>> {
    let n = mm.n();
    (0..n)
        .into_par_iter()
        .map(|x| {
            let row = mm.row(x);
            let mut best: Option<usize> = None;
            for &y in &dt.order[..dt.rank[x]] {
                if best.is_none_or(|b| row[y] < row[b]) {
                    best = Some(y);
                }
            }
            best
        })
        .collect()
}

/// Objective decrease from adding `x` as a medoid, given each object's
/// current nearest medoid `tau_prev`.
pub fn gain(x: usize, tau_prev: &[usize], mm: &MinimaxMatrix) -> f64 {
    let row = mm.row(x);
    exact_sum(
        tau_prev
            .iter()
            .enumerate()
            .map(|(y, &m)| (mm.get(y, m) - row[y]).max(0.0)),
    )
}

// Candidates with mathematically equal gains must compare equal so the
// degree-order tie-break decides, hence the correctly rounded sum.
#[inline]
fn gain_from_best(row: &[f64], best: &[f64]) -> f64 {
    exact_sum(
        best.iter()
            .zip(row)
            .map(|(b, d)| b - d)
            .filter(|&r| r > 0.0),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Score only objects whose `nn` is already a medoid.
    pub filter: bool,
    /// Distances within this margin of an object's minimum count as tied.
    pub tie_eps: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            filter: true,
            tie_eps: 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    /// Gain evaluations across all epochs.
    pub candidates_scored: usize,
    pub epoch_loop: Duration,
}

/// Result of a clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    /// Medoids in selection order; label `t` refers to `medoids[t]`.
    pub medoids: Vec<usize>,
    /// Nearest medoid of each object (first medoid among ties).
    pub tau: Vec<usize>,
    pub labels: Partition,
    pub noise: Vec<bool>,
    pub objective: f64,
    /// Winning gain of epochs `2..=k`.
    pub gain_trace: Vec<f64>,
    pub stats: RunStats,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.medoids.len()
    }

    pub fn noise_count(&self) -> usize {
        self.noise.iter().filter(|&&f| f).count()
    }
}

fn dissimilarity(mm: &MinimaxMatrix) -> Cow<'_, MinimaxMatrix> {
    match mm.mode() {
        Mode::Dissimilarity => Cow::Borrowed(mm),
        Mode::Similarity => Cow::Owned(mm.clone().into_dissimilarity()),
    }
}

/// Runs the medoid search for `k` clusters and assigns every object.
///
/// Similarity matrices are converted to dissimilarities first. Gain ties go
/// to the candidate earliest in degree order; an object switches medoid only
/// on strict improvement.
pub fn run(mm: &MinimaxMatrix, k: usize, opts: &RunOptions) -> Result<ClusterModel> {
    let n = mm.n();
    if k < 1 {
        return Err(Error::KTooSmall);
    }
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let mm = dissimilarity(mm);
    let mm = mm.as_ref();

    let dt = compute_degrees(mm);
    let nn = compute_nn(&dt, mm);

    let first = dt.order[0];
    let mut medoids = vec![first];
    let mut is_medoid = vec![false; n];
    is_medoid[first] = true;
    let mut best: Vec<f64> = mm.row(first).to_vec();
    let mut gain_trace = Vec::with_capacity(k - 1);
    let mut stats = RunStats::default();

    let started = Instant::now();
    let mut candidates = Vec::with_capacity(n);
    for _ in 2..=k {
        candidates.clear();
        candidates.extend(
            dt.order.iter().copied().filter(|&x| {
                !is_medoid[x] && (!opts.filter || nn[x].is_some_and(|m| is_medoid[m]))
            }),
        );
        stats.candidates_scored += candidates.len();

        let gains: Vec<f64> = candidates
            .par_iter()
            .map(|&x| gain_from_best(mm.row(x), &best))
            .collect();
        // candidates are in degree order, so the first maximum wins ties
        let (winner, top) =
            candidates
                .iter()
                .zip(&gains)
                .fold((usize::MAX, f64::NEG_INFINITY), |acc, (&x, &g)| {
                    if g > acc.1 {
                        (x, g)
                    } else {
                        acc
                    }
                });
        debug_assert!(winner != usize::MAX, "a non-medoid always qualifies");

        medoids.push(winner);
        is_medoid[winner] = true;
        gain_trace.push(top);
        for (b, &d) in best.iter_mut().zip(mm.row(winner)) {
            if d < *b {
                *b = d;
            }
        }
    }
    stats.epoch_loop = started.elapsed();

    let a = assign(mm, &medoids, opts.tie_eps);
    Ok(ClusterModel {
        objective: exact_sum(best.iter().copied()),
        medoids,
        tau: a.tau,
        labels: a.labels,
        noise: a.noise,
        gain_trace,
        stats,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub labels: Partition,
    pub noise: Vec<bool>,
    pub tau: Vec<usize>,
}

/// Labels each object with its unique nearest medoid. Objects whose minimum
/// is shared (within `tie_eps`) by two or more medoids become noise with
/// label `-1`. Medoids always carry their own label.
pub fn assign(mm: &MinimaxMatrix, medoids: &[usize], tie_eps: f64) -> Assignment {
    assert!(!medoids.is_empty(), "assign needs at least one medoid");
    let mm = dissimilarity(mm);
    let n = mm.n();
    let mut labels = vec![0i64; n];
    let mut noise = vec![false; n];
    let mut tau = vec![medoids[0]; n];
    for x in 0..n {
        let row = mm.row(x);
        let (mut arg, mut min) = (0, f64::INFINITY);
        for (t, &m) in medoids.iter().enumerate() {
            if row[m] < min {
                (arg, min) = (t, row[m]);
            }
        }
        tau[x] = medoids[arg];
        let ties = medoids.iter().filter(|&&m| row[m] <= min + tie_eps).count();
        if ties > 1 {
            labels[x] = -1;
            noise[x] = true;
        } else {
            labels[x] = arg as i64;
        }
    }
    for (t, &m) in medoids.iter().enumerate() {
        labels[m] = t as i64;
        noise[m] = false;
        tau[m] = m;
    }
    Assignment {
        labels: Partition::new(labels).expect("n ≥ 1"),
        noise,
        tau,
    }
}

/// What to do with objects equidistant from several medoids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseStrategy {
    /// Keep them apart under label `-1`.
    Separate,
    /// Attach them to clusters along spanning-tree edges, lightest first.
    #[default]
    MstMerge,
}

/// Edge in the merge queue, ordered by weight then endpoints.
#[derive(Debug, Clone, Copy)]
struct QueuedEdge {
    key: f64,
    a: usize,
    b: usize,
}

impl PartialEq for QueuedEdge {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueuedEdge {}

impl PartialOrd for QueuedEdge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueuedEdge {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
    }
}

/// Applies a noise strategy to a model produced by [`run`].
///
/// `mm` must be the matrix the model was computed from. Noise flags are kept
/// so the output still records which objects were ambiguous; the objective
/// is recomputed from the final labels.
pub fn resolve_noise(
    model: &ClusterModel,
    strategy: NoiseStrategy,
    tree: &SpanningTree,
    mm: &MinimaxMatrix,
) -> Result<ClusterModel> {
    let mut out = model.clone();
    if model.noise_count() == 0 {
        return Ok(out);
    }
    match strategy {
        NoiseStrategy::Separate => {
            let mut labels = model.labels.clone().into_inner();
            for (l, &f) in labels.iter_mut().zip(&model.noise) {
                if f {
                    *l = -1;
                }
            }
            out.labels = Partition::new(labels)?;
        }
        NoiseStrategy::MstMerge => {
            if model.noise.iter().all(|&f| f) {
                return Err(Error::AllNoise);
            }
            let mut labels = model.labels.clone().into_inner();
            let mut resolved: Vec<bool> = model.noise.iter().map(|&f| !f).collect();
            let mut queue: BinaryHeap<Reverse<QueuedEdge>> = tree
                .edges()
                .iter()
                .filter(|e| model.noise[e.u] || model.noise[e.v])
                .map(|e| {
                    let key = match tree.mode() {
                        Mode::Dissimilarity => e.w,
                        Mode::Similarity => -e.w,
                    };
                    Reverse(QueuedEdge {
                        key,
                        a: e.u.min(e.v),
                        b: e.u.max(e.v),
                    })
                })
                .collect();
            let mut deferred = Vec::new();
            while let Some(Reverse(e)) = queue.pop() {
                match (resolved[e.a], resolved[e.b]) {
                    (true, true) => {}
                    (false, false) => deferred.push(e),
                    (ra, _) => {
                        let (from, to) = if ra { (e.a, e.b) } else { (e.b, e.a) };
                        labels[to] = labels[from];
                        resolved[to] = true;
                        queue.extend(deferred.drain(..).map(Reverse));
                    }
                }
            }
            debug_assert!(deferred.is_empty() && resolved.iter().all(|&r| r));

            let mm = dissimilarity(mm);
            for (x, &l) in labels.iter().enumerate() {
                out.tau[x] = model.medoids[l as usize];
            }
            out.objective = exact_sum((0..labels.len()).map(|x| mm.get(x, out.tau[x])));
            out.labels = Partition::new(labels)?;
        }
    }
    Ok(out)
}
