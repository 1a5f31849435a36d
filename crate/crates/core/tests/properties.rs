use gopc::dataio::{euclidean_matrix, DistanceMatrix, Mode, PointSet};
use gopc::decision::{estimate_k, trace, DEFAULT_EPS};
use gopc::medoids::{compute_degrees, resolve_noise, run, NoiseStrategy, RunOptions};
use gopc::mst::{build_tree, minimax_all_pairs, MinimaxMatrix};
use gopc::oracle::{brute_force, medoids_are_central};
use gopc::synth::{generate, Family, GenSpec};
use proptest::prelude::*;

fn points(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, 2), 2..=max_n)
}

/// Points on a coarse grid, so equal edges and tied minimax values are common.
fn grid_points(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec((0..4u8).prop_map(f64::from), 2),
        2..=max_n,
    )
}

fn minimax(rows: &[Vec<f64>]) -> MinimaxMatrix {
    let dm = euclidean_matrix(&PointSet::from_rows(rows, None).unwrap());
    minimax_all_pairs(&build_tree(&dm), &dm)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn objective_matches_exhaustive_search(rows in points(10), k in 1usize..5) {
        let k = k.min(rows.len());
        let mm = minimax(&rows);
        let model = run(&mm, k, &RunOptions::default()).unwrap();
        let best = brute_force(&mm, k).unwrap();
        prop_assert_eq!(model.objective, best.best_objective);
        let mut ours = model.medoids.clone();
        ours.sort_unstable();
        prop_assert!(best.best_medoid_sets.contains(&ours));
    }

    #[test]
    fn objective_matches_on_tied_grids(rows in grid_points(10), k in 1usize..5) {
        let k = k.min(rows.len());
        let mm = minimax(&rows);
        let model = run(&mm, k, &RunOptions::default()).unwrap();
        prop_assert_eq!(model.objective, brute_force(&mm, k).unwrap().best_objective);
    }

    #[test]
    fn medoids_are_least_eccentric_members(rows in points(40), k in 1usize..8) {
        let k = k.min(rows.len());
        let mm = minimax(&rows);
        let model = run(&mm, k, &RunOptions::default()).unwrap();
        let degrees = compute_degrees(&mm).degrees;
        let labels = model.labels.labels();
        for x in (0..mm.n()).filter(|&x| !model.noise[x]) {
            let m = model.medoids[labels[x] as usize];
            prop_assert!(degrees[m] <= degrees[x]);
            for y in (0..mm.n()).filter(|&y| !model.noise[y] && labels[y] != labels[x]) {
                prop_assert_eq!(mm.get(y, m), mm.get(y, x));
            }
        }
        prop_assert!(medoids_are_central(&mm, &model.medoids));
    }

    #[test]
    fn similarity_input_gives_same_clustering(rows in points(15), k in 1usize..5) {
        let k = k.min(rows.len());
        let ps = PointSet::from_rows(&rows, None).unwrap();
        let dm = euclidean_matrix(&ps);
        let top = dm.max_entry() + 1.0;
        let sim: Vec<f64> = dm.values().iter().map(|d| top - d).collect();
        let sm = DistanceMatrix::new(dm.n(), Mode::Similarity, sim).unwrap();
        let a = run(&minimax_all_pairs(&build_tree(&dm), &dm), k, &RunOptions::default()).unwrap();
        let b = run(&minimax_all_pairs(&build_tree(&sm), &sm), k, &RunOptions::default()).unwrap();
        prop_assert_eq!(a.medoids, b.medoids);
        prop_assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn merge_keeps_clusters_connected_in_tree(rows in grid_points(20), k in 1usize..5) {
        let k = k.min(rows.len());
        let dm = euclidean_matrix(&PointSet::from_rows(&rows, None).unwrap());
        let tree = build_tree(&dm);
        let mm = minimax_all_pairs(&tree, &dm);
        let Ok(model) = run(&mm, k, &RunOptions::default()) else { return Ok(()) };
        let merged = resolve_noise(&model, NoiseStrategy::MstMerge, &tree, &mm).unwrap();
        let labels = merged.labels.labels();
        for x in (0..mm.n()).filter(|&x| model.noise[x]) {
            prop_assert!(labels[x] >= 0);
            prop_assert!(tree.neighbors(x).iter().any(|&(y, _)| labels[y] == labels[x]));
        }
    }
}

#[test]
fn decision_graph_recovers_blob_count() {
    for c in [2usize, 3, 5, 8] {
        for seed in 0..5 {
            let ps = generate(&GenSpec {
                family: Family::blobs(c),
                n: 80 * c,
                seed,
            })
            .unwrap();
            let dm = euclidean_matrix(&ps);
            let mm = minimax_all_pairs(&build_tree(&dm), &dm);
            let est = estimate_k(&trace(&mm, c + 5).unwrap(), DEFAULT_EPS).unwrap();
            assert_eq!(est.k, c, "c={c} seed={seed}");
            assert!(!est.degenerate);
        }
    }
}
