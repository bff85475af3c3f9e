//! Telling graphs with a perfect matching apart from graphs whose largest
//! matching is far from perfect, using nothing but Sinkhorn-Knopp on the
//! adjacency matrix.
//!
//! If some column-stochastic (or row-stochastic) `Y` supported on the edges
//! of an `n x n` bipartite graph has `l1` marginal error at most `nε`, then
//! every set `S` of left vertices has at least `|S| − nε` neighbours, and
//! the graph has a matching of size at least `n(1 − ε)`. Conversely a graph
//! with a perfect matching admits a doubly stochastic matrix on its edges,
//! so scaling its adjacency matrix reaches error `nε` within
//! `ceil(2 ln(1 + 2Δ) / ε²)` iterations.
//!
//! Graphs whose maximum matching lies strictly between `n(1 − ε)` and `n`
//! may receive either verdict.

use std::collections::HashSet;

use crate::error::{Axis, Error, Result};
use crate::instance::{iteration_budget, validate_instance, TargetVectors};
use crate::matrix::SparseNonnegMatrix;
use crate::sinkhorn::{run, Outcome, StoppingRule};

/// Tolerance on the unit sums of a stochastic matrix.
pub const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_left: usize,
    n_right: usize,
    edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    /// `edges` are 0-based `(left, right)` pairs without duplicates.
    pub fn new(n_left: usize, n_right: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n_left == 0 || n_right == 0 {
            return Err(Error::EmptyShape {
                n_rows: n_left,
                n_cols: n_right,
            });
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for &(row, col) in &edges {
            if row >= n_left || col >= n_right {
                return Err(Error::IndexOutOfRange {
                    row,
                    col,
                    n_rows: n_left,
                    n_cols: n_right,
                });
            }
            if !seen.insert((row, col)) {
                return Err(Error::DuplicateEntry { row, col });
            }
        }
        Ok(Self {
            n_left,
            n_right,
            edges,
        })
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Right neighbours of every left vertex, in edge order.
    pub fn left_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_left];
        for &(u, v) in &self.edges {
            adj[u].push(v);
        }
        adj
    }

    /// `true` if some vertex on either side has no edge.
    pub fn has_isolated_vertex(&self) -> bool {
        let mut left = vec![false; self.n_left];
        let mut right = vec![false; self.n_right];
        for &(u, v) in &self.edges {
            left[u] = true;
            right[v] = true;
        }
        left.contains(&false) || right.contains(&false)
    }
}

/// The 0/1 adjacency matrix, entries in edge order.
pub fn adjacency_matrix(g: &BipartiteGraph) -> Result<SparseNonnegMatrix> {
    SparseNonnegMatrix::new(
        g.n_left,
        g.n_right,
        g.edges.iter().map(|&(u, v)| (u, v, 1.0)),
    )
}

/// Matching bound extracted from a stochastic matrix.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HallCertificate {
    /// Side whose sums were compared against 1 (the non-stochastic side).
    pub measured: Axis,
    /// `l1` distance of the measured sums from the all-ones vector.
    pub error1: f64,
    /// `n − error1`: every bipartite graph containing the support of `Y`
    /// has a matching at least this large.
    pub matching_lower_bound: f64,
}

impl HallCertificate {
    /// Whether the certificate guarantees a matching of size `n − eps_times_n`.
    pub fn certifies(&self, eps_times_n: f64) -> bool {
        self.error1 <= eps_times_n
    }
}

/// For a column-stochastic `Y` returns the `l1` row-sum error (and the
/// column-sum error for a row-stochastic `Y`). When `Y` is both, the
/// smaller one is reported.
pub fn hall_deficiency_bound(y: &SparseNonnegMatrix) -> Result<HallCertificate> {
    let n = y.n_rows();
    if y.n_cols() != n {
        return Err(Error::NotSquare {
            n_rows: n,
            n_cols: y.n_cols(),
        });
    }
    let unit = |sums: &[f64]| sums.iter().all(|s| (s - 1.0).abs() <= STOCHASTIC_TOL);
    let l1 = |sums: &[f64]| sums.iter().map(|s| (s - 1.0).abs()).sum::<f64>();
    let rows = y.row_sums();
    let cols = y.col_sums();
    let mut best: Option<(Axis, f64)> = None;
    if unit(&cols) {
        best = Some((Axis::Row, l1(&rows)));
    }
    if unit(&rows) {
        let e = l1(&cols);
        if best.is_none_or(|(_, b)| e < b) {
            best = Some((Axis::Column, e));
        }
    }
    let (measured, error1) = best.ok_or(Error::NotStochastic)?;
    Ok(HallCertificate {
        measured,
        error1,
        matching_lower_bound: n as f64 - error1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    PerfectMatchingLikely,
    /// The largest matching is below `bound = n(1 − ε)`.
    MaxMatchingBelow {
        bound: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DistinguisherVerdict {
    pub verdict: Verdict,
    /// Iteration index of the accepting half-step, or the full budget.
    pub iterations_used: u64,
    pub budget: u64,
    /// Best `l1` error seen; `None` when no scaling was attempted because
    /// a vertex is isolated.
    pub achieved_error1: Option<f64>,
    /// Matching lower bound certified by the accepting iterate.
    pub certificate: Option<HallCertificate>,
}

/// `ceil(ln(1 + 2Δ) / (ε²/2))` where `Δ` is the largest left-degree of any
/// right vertex. Requires a graph without isolated vertices.
pub fn distinguisher_budget(g: &BipartiteGraph, eps: f64) -> Result<u64> {
    let inst = validate_instance(adjacency_matrix(g)?, &TargetVectors::uniform(g.n_left))?;
    iteration_budget(inst.params(), eps * eps / 2.0)
}

/// Runs Sinkhorn-Knopp on the adjacency matrix with uniform targets and
/// accepts as soon as some half-step has `l1` error at most `nε`.
pub fn distinguish(g: &BipartiteGraph, eps: f64) -> Result<DistinguisherVerdict> {
    let n = g.n_left;
    if g.n_right != n {
        return Err(Error::NotSquare {
            n_rows: n,
            n_cols: g.n_right,
        });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    let negative = Verdict::MaxMatchingBelow {
        bound: n as f64 * (1.0 - eps),
    };
    if g.has_isolated_vertex() {
        return Ok(DistinguisherVerdict {
            verdict: negative,
            iterations_used: 0,
            budget: 0,
            achieved_error1: None,
            certificate: None,
        });
    }

    let inst = validate_instance(adjacency_matrix(g)?, &TargetVectors::uniform(n))?;
    let budget = iteration_budget(inst.params(), eps * eps / 2.0)?;
    let rule = StoppingRule::l1(n as f64 * eps).with_max_iters(budget);
    let res = run(&inst, &rule, None)?;
    Ok(match res.outcome {
        Outcome::Converged { t, value, .. } => DistinguisherVerdict {
            verdict: Verdict::PerfectMatchingLikely,
            iterations_used: t,
            budget,
            achieved_error1: Some(value),
            certificate: hall_deficiency_bound(res.state.current()).ok(),
        },
        Outcome::BudgetExhausted { best, .. } => DistinguisherVerdict {
            verdict: negative,
            iterations_used: budget,
            budget,
            achieved_error1: Some(best),
            certificate: None,
        },
    })
}
