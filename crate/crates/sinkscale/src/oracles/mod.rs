//! Independent reference computations for tests: exact maximum matching,
//! plain dense re-evaluation of every metric, and generators for scalable
//! instances with a known witness.
//!
//! Nothing here calls into the engine or the divergence module.

pub mod dense;
mod generate;

pub use generate::{gen_scalable_instance, GeneratedInstance, GeneratorConfig};

use crate::matching::BipartiteGraph;

/// Size of a maximum matching, by augmenting paths from every left vertex.
pub fn max_matching_exact(g: &BipartiteGraph) -> usize {
    let adj = g.left_adjacency();
    let mut match_right: Vec<Option<usize>> = vec![None; g.n_right()];
    let mut size = 0;
    for u in 0..g.n_left() {
        let mut visited = vec![false; g.n_right()];
        if augment(u, &adj, &mut visited, &mut match_right) {
            size += 1;
        }
    }
    size
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    visited: &mut [bool],
    match_right: &mut [Option<usize>],
) -> bool {
    for &v in &adj[u] {
        if visited[v] {
            continue;
        }
        visited[v] = true;
        let free = match match_right[v] {
            None => true,
            Some(w) => augment(w, adj, visited, match_right),
        };
        if free {
            match_right[v] = Some(u);
            return true;
        }
    }
    false
}
