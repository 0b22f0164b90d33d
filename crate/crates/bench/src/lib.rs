//! Shared fixtures for the benchmarks.

use mraqc::mra::{FunctionTree, MraConfig};
use mraqc::scf::ops::gaussian;

/// Normalized Gaussian projected at moderate accuracy.
pub fn gaussian_tree(alpha: f64, thresh: f64) -> FunctionTree {
    let cfg = MraConfig::new(7, thresh, 20.0);
    FunctionTree::project(gaussian(alpha, [0.1, -0.2, 0.3]), &cfg, 3).expect("projection succeeds")
}
