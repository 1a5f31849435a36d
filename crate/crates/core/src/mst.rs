//! Spanning tree over the complete graph and the minimax distances it induces.
//!
//! The minimax distance between two objects is the smallest achievable
//! "largest hop" over all paths joining them. It equals the largest edge on
//! the unique path between them in a minimum spanning tree, so the whole
//! `n × n` matrix falls out of one tree walk per root. Similarity inputs use
//! the dual: a maximum spanning tree and the smallest edge on each path.
//!
//! Storage is a flat row-major `n × n` array, so memory grows as `8n²` bytes
//! per matrix.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataio::{DistanceMatrix, Mode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    n: usize,
    mode: Mode,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl SpanningTree {
    pub fn from_edges(n: usize, mode: Mode, edges: Vec<Edge>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            adjacency[e.u].push((e.v, e.w));
            adjacency[e.v].push((e.u, e.w));
        }
        Self {
            n,
            mode,
            edges,
            adjacency,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Edges in the order Prim added them; `v` is the newly attached vertex.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// `n − 1` lines of `u v w`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            writeln!(out, "{} {} {}", e.u, e.v, e.w).unwrap();
        }
        out
    }
}

/// Dense Prim from vertex 0: `O(n²)` time, `O(n)` scratch.
///
/// Among equally good candidate vertices the smallest index joins first, and
/// a vertex keeps its earliest parent on equal edge weights.
pub fn build_tree(dm: &DistanceMatrix) -> SpanningTree {
    let n = dm.n();
    let mode = dm.mode();
    let mut in_tree = vec![false; n];
    let mut key = vec![0.0; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));

    in_tree[0] = true;
    key.copy_from_slice(dm.row(0));

    for _ in 1..n {
        let mut next = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (next == usize::MAX || mode.better(key[v], key[next])) {
                next = v;
            }
        }
        in_tree[next] = true;
        edges.push(Edge {
            u: parent[next],
            v: next,
            w: key[next],
        });
        let row = dm.row(next);
        for v in 0..n {
            if !in_tree[v] && mode.better(row[v], key[v]) {
                key[v] = row[v];
                parent[v] = next;
            }
        }
    }
    SpanningTree::from_edges(n, mode, edges)
}

/// All-pairs minimax (or maximin) distances; an ultrametric.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxMatrix {
    n: usize,
    mode: Mode,
    values: Vec<f64>,
}

impl MinimaxMatrix {
    /// Wraps precomputed values without checking the ultrametric property;
    /// use [`verify_ultrametric`] for that.
    pub fn from_values(n: usize, mode: Mode, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n * n, "minimax matrix must be n × n");
        Self { n, mode, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Maps similarities to dissimilarities via `max_entry − s`; a no-op for
    /// matrices already in dissimilarity form. Orderings are reversed
    /// exactly, so every argmin/argmax is preserved.
    pub fn into_dissimilarity(self) -> Self {
        match self.mode {
            Mode::Dissimilarity => self,
            Mode::Similarity => {
                let top = self
                    .values
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
                let values = self.values.into_iter().map(|s| top - s).collect();
                Self {
                    n: self.n,
                    mode: Mode::Dissimilarity,
                    values,
                }
            }
        }
    }
}

/// Minimax matrix from one depth-first walk per root.
///
/// The diagonal is 0 for dissimilarities. For similarities it is the largest
/// entry of `dm`, so that converting to dissimilarities maps it to 0.
pub fn minimax_all_pairs(tree: &SpanningTree, dm: &DistanceMatrix) -> MinimaxMatrix {
    let n = tree.n();
    assert_eq!(n, dm.n(), "tree and matrix disagree on n");
    let mode = tree.mode();
    let self_value = match mode {
        Mode::Dissimilarity => 0.0,
        Mode::Similarity => dm.max_entry(),
    };
    let mut values = vec![0.0; n * n];
    values
        .par_chunks_mut(n)
        .enumerate()
        .for_each_init(Vec::new, |stack, (root, row)| {
            row[root] = self_value;
            stack.clear();
            stack.push((root, usize::MAX, f64::NAN));
            while let Some((x, from, extreme)) = stack.pop() {
                for &(y, w) in tree.neighbors(x) {
                    if y == from {
                        continue;
                    }
                    let e = if x == root {
                        w
                    } else {
                        match mode {
                            Mode::Dissimilarity => extreme.max(w),
                            Mode::Similarity => extreme.min(w),
                        }
                    };
                    row[y] = e;
                    stack.push((y, x, e));
                }
            }
        });
    MinimaxMatrix { n, mode, values }
}

/// A triple with `d(x, y)` exceeding `max(d(x, z), d(y, z))` (dissimilarity
/// form) or falling below `min(d(x, z), d(y, z))` (similarity form).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub dxy: f64,
    pub dxz: f64,
    pub dyz: f64,
}

/// Triples checked exhaustively up to this size, sampled above it.
pub const EXHAUSTIVE_LIMIT: usize = 200;
pub const SAMPLED_TRIPLES: usize = 100_000;

/// Checks the ultrametric inequality. Exhaustive for `n ≤ 200`, otherwise
/// `100 000` triples drawn with a fixed seed.
pub fn verify_ultrametric(mm: &MinimaxMatrix, tol: f64) -> Vec<Violation> {
    let n = mm.n();
    let mut found = Vec::new();
    if n < 3 {
        return found;
    }
    if n <= EXHAUSTIVE_LIMIT {
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    check_triple(mm, tol, [a, b, c], &mut found);
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut drawn = 0;
        while drawn < SAMPLED_TRIPLES {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            let c = rng.random_range(0..n);
            if a == b || b == c || a == c {
                continue;
            }
            let mut t = [a, b, c];
            t.sort_unstable();
            check_triple(mm, tol, t, &mut found);
            drawn += 1;
        }
    }
    found
}

fn check_triple(mm: &MinimaxMatrix, tol: f64, [a, b, c]: [usize; 3], found: &mut Vec<Violation>) {
    // each side against the two others; (x, y) is the offending side
    for (x, y, z) in [(a, b, c), (a, c, b), (b, c, a)] {
        let (dxy, dxz, dyz) = (mm.get(x, y), mm.get(x, z), mm.get(y, z));
        let bad = match mm.mode() {
            Mode::Dissimilarity => dxy > dxz.max(dyz) + tol,
            Mode::Similarity => dxy < dxz.min(dyz) - tol,
        };
        if bad {
            found.push(Violation {
                x,
                y,
                z,
                dxy,
                dxz,
                dyz,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{euclidean_matrix, PointSet};
    use proptest::prelude::*;

    fn chain() -> DistanceMatrix {
        let rows: Vec<Vec<f64>> = [0.0, 1.0, 3.0, 10.0, 11.5]
            .iter()
            .map(|&x| vec![x])
            .collect();
        euclidean_matrix(&PointSet::from_rows(&rows, None).unwrap())
    }

    #[test]
    fn chain_tree_matches_hand_run_prim() {
        let tree = build_tree(&chain());
        let got: Vec<_> = tree.edges().iter().map(|e| (e.u, e.v, e.w)).collect();
        assert_eq!(
            got,
            vec![(0, 1, 1.0), (1, 2, 2.0), (2, 3, 7.0), (3, 4, 1.5)]
        );
        assert_eq!(tree.dump(), "0 1 1\n1 2 2\n2 3 7\n3 4 1.5\n");
    }

    #[test]
    fn tiny_trees() {
        let one = DistanceMatrix::new(1, Mode::Dissimilarity, vec![0.0]).unwrap();
        assert!(build_tree(&one).edges().is_empty());
        let two = DistanceMatrix::new(2, Mode::Dissimilarity, vec![0.0, 5.0, 5.0, 0.0]).unwrap();
        let t = build_tree(&two);
        assert_eq!(t.edges(), &[Edge { u: 0, v: 1, w: 5.0 }]);
        let mm = minimax_all_pairs(&t, &two);
        assert_eq!(mm.values(), two.values());
        assert!(verify_ultrametric(&mm, 0.0).is_empty());
    }

    #[test]
    fn chain_minimax() {
        let dm = chain();
        let mm = minimax_all_pairs(&build_tree(&dm), &dm);
        assert_eq!(mm.get(0, 2), 2.0);
        assert_eq!(mm.get(0, 4), 7.0);
        assert_eq!(mm.get(3, 4), 1.5);
        for a in 0..3 {
            for b in 3..5 {
                assert_eq!(mm.get(a, b), 7.0);
                assert_eq!(mm.get(b, a), 7.0);
            }
        }
        for x in 0..5 {
            assert_eq!(mm.get(x, x), 0.0);
        }
        assert!(verify_ultrametric(&mm, 0.0).is_empty());
    }

    #[test]
    fn planted_violation_is_reported() {
        let v = vec![0.0, 5.0, 1.0, 5.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        let mm = MinimaxMatrix::from_values(3, Mode::Dissimilarity, v);
        let found = verify_ultrametric(&mm, 0.0);
        assert_eq!(found.len(), 1);
        assert_eq!((found[0].x, found[0].y, found[0].z), (0, 1, 2));
    }

    #[test]
    fn similarity_uses_maximum_tree_and_weakest_link() {
        // affinities: 0-1 strong, 1-2 medium, 0-2 weak
        let s = vec![1.0, 0.9, 0.1, 0.9, 1.0, 0.5, 0.1, 0.5, 1.0];
        let dm = DistanceMatrix::new(3, Mode::Similarity, s).unwrap();
        let tree = build_tree(&dm);
        let got: Vec<_> = tree.edges().iter().map(|e| (e.u, e.v, e.w)).collect();
        assert_eq!(got, vec![(0, 1, 0.9), (1, 2, 0.5)]);
        let mm = minimax_all_pairs(&tree, &dm);
        assert_eq!(mm.get(0, 2), 0.5);
        assert_eq!(mm.get(0, 0), 1.0);
        assert!(verify_ultrametric(&mm, 0.0).is_empty());
        let d = mm.into_dissimilarity();
        assert_eq!(d.get(0, 0), 0.0);
        assert_eq!(d.get(0, 1), 1.0 - 0.9);
        assert_eq!(d.get(0, 2), 0.5);
    }

    #[test]
    fn large_matrices_are_sampled() {
        let rows: Vec<Vec<f64>> = (0..250)
            .map(|i| vec![(i * i % 97) as f64, i as f64])
            .collect();
        let dm = euclidean_matrix(&PointSet::from_rows(&rows, None).unwrap());
        let mm = minimax_all_pairs(&build_tree(&dm), &dm);
        assert!(verify_ultrametric(&mm, 0.0).is_empty());
    }

    // Independent oracle: minimize the path maximum over every simple path.
    fn brute_minimax(dm: &DistanceMatrix) -> Vec<f64> {
        fn walk(
            dm: &DistanceMatrix,
            at: usize,
            to: usize,
            seen: &mut Vec<bool>,
            hop: f64,
            best: &mut f64,
        ) {
            if at == to {
                *best = best.min(hop);
                return;
            }
            for nxt in 0..dm.n() {
                if !seen[nxt] {
                    seen[nxt] = true;
                    walk(dm, nxt, to, seen, hop.max(dm.get(at, nxt)), best);
                    seen[nxt] = false;
                }
            }
        }
        let n = dm.n();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let mut seen = vec![false; n];
                    seen[i] = true;
                    let mut best = f64::INFINITY;
                    walk(dm, i, j, &mut seen, f64::NEG_INFINITY, &mut best);
                    out[i * n + j] = best;
                }
            }
        }
        out
    }

    fn prim_weight_reference(dm: &DistanceMatrix) -> f64 {
        use petgraph::algo::min_spanning_tree;
        use petgraph::data::Element;
        use petgraph::graph::UnGraph;
        let n = dm.n();
        let mut g = UnGraph::<(), f64>::new_undirected();
        let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(nodes[i], nodes[j], dm.get(i, j));
            }
        }
        min_spanning_tree(&g)
            .filter_map(|e| match e {
                Element::Edge { weight, .. } => Some(weight),
                _ => None,
            })
            .sum()
    }

    fn arb_points(max: usize) -> impl Strategy<Value = DistanceMatrix> {
        prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 1..=max)
            .prop_map(|pts| euclidean_matrix(&PointSet::from_rows(&pts, None).unwrap()))
    }

    // grid coordinates force many tied edge weights
    fn arb_grid_points(max: usize) -> impl Strategy<Value = DistanceMatrix> {
        prop::collection::vec(prop::collection::vec(0u8..4, 2), 1..=max).prop_map(|pts| {
            let rows: Vec<Vec<f64>> = pts
                .iter()
                .map(|p| p.iter().map(|&c| c as f64).collect())
                .collect();
            euclidean_matrix(&PointSet::from_rows(&rows, None).unwrap())
        })
    }

    proptest! {
        #[test]
        fn minimax_matches_path_enumeration(dm in arb_points(7)) {
            let mm = minimax_all_pairs(&build_tree(&dm), &dm);
            prop_assert_eq!(mm.values(), &brute_minimax(&dm)[..]);
        }

        #[test]
        fn minimax_matches_path_enumeration_with_ties(dm in arb_grid_points(7)) {
            let mm = minimax_all_pairs(&build_tree(&dm), &dm);
            prop_assert_eq!(mm.values(), &brute_minimax(&dm)[..]);
        }

        #[test]
        fn minimax_bounded_by_direct_edge(dm in arb_points(30)) {
            let tree = build_tree(&dm);
            let mm = minimax_all_pairs(&tree, &dm);
            let lightest = tree.edges().iter().map(|e| e.w).fold(f64::INFINITY, f64::min);
            for i in 0..dm.n() {
                for j in 0..dm.n() {
                    prop_assert!(mm.get(i, j) <= dm.get(i, j));
                    if i != j {
                        prop_assert!(mm.get(i, j) >= lightest);
                    }
                }
            }
            prop_assert!(verify_ultrametric(&mm, 0.0).is_empty());
        }

        #[test]
        fn tree_weight_matches_reference(dm in arb_grid_points(25)) {
            let ours = build_tree(&dm).total_weight();
            prop_assert!((ours - prim_weight_reference(&dm)).abs() <= 1e-9 * ours.max(1.0));
        }

        #[test]
        fn minimax_independent_of_tie_breaking(dm in arb_grid_points(20), shift in 0usize..20) {
            // relabel vertices so Prim starts elsewhere and meets ties in another order
            let n = dm.n();
            let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
            let mut v = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    v[perm[i] * n + perm[j]] = dm.get(i, j);
                }
            }
            let pdm = DistanceMatrix::new(n, Mode::Dissimilarity, v).unwrap();
            let mm = minimax_all_pairs(&build_tree(&dm), &dm);
            let pmm = minimax_all_pairs(&build_tree(&pdm), &pdm);
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(mm.get(i, j), pmm.get(perm[i], perm[j]));
                }
            }
        }
    }

    #[test]
    fn oracle_agrees_at_nine_points() {
        let rows: Vec<Vec<f64>> = (0..9)
            .map(|i| vec![((i * 37) % 11) as f64 / 3.0, ((i * 53) % 7) as f64])
            .collect();
        let dm = euclidean_matrix(&PointSet::from_rows(&rows, None).unwrap());
        let mm = minimax_all_pairs(&build_tree(&dm), &dm);
        assert_eq!(mm.values(), &brute_minimax(&dm)[..]);
    }
}
