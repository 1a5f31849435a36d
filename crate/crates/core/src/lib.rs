//! Globally optimal path-based clustering.
//!
//! Objects are compared by their minimax path distance: the largest hop on
//! the best path between them through the complete graph. That distance is
//! read off a minimum spanning tree and forms an ultrametric, which makes the
//! k-medoids problem over it solvable to global optimality by a greedy
//! search (see [`medoids::run`]).
//!
//! ```
//! use gopc::dataio::{euclidean_matrix, PointSet};
//! use gopc::medoids::{run, RunOptions};
//! use gopc::mst::{build_tree, minimax_all_pairs};
//!
//! let rows: Vec<Vec<f64>> = [0.0, 1.0, 3.0, 10.0, 11.5].iter().map(|&x| vec![x]).collect();
//! let dm = euclidean_matrix(&PointSet::from_rows(&rows, None).unwrap());
//! let tree = build_tree(&dm);
//! let mm = minimax_all_pairs(&tree, &dm);
//! let model = run(&mm, 2, &RunOptions::default()).unwrap();
//! assert_eq!(model.labels.labels(), &[0, 0, 0, 1, 1]);
//! assert_eq!(model.objective, 4.5);
//! ```

pub mod cli;
pub mod dataio;
pub mod decision;
pub mod error;
pub mod medoids;
pub mod metrics;
pub mod mst;
pub mod numeric;
pub mod oracle;
pub mod synth;

pub use error::{Error, Result};
