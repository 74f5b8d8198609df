use std::time::Instant;

use graph_uncertainty::graph::ring_graph;
use graph_uncertainty::spectral::{eig_sym, orthonormality_error, DEFAULT_EIG_TOL};

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let g = ring_graph(n, false).unwrap().add_chord(n / 2 - 1, n - 1, 1.0).unwrap();
    let start = Instant::now();
    let b = eig_sym(&g.laplacian(), DEFAULT_EIG_TOL).unwrap();
    println!("n = {n}: {:?}, orthonormality {:e}", start.elapsed(), orthonormality_error(&b));
}
