//! Sinkhorn-Knopp matrix scaling with convergence certificates.
//!
//! Given a non-negative matrix `A` and positive targets `r`, `c` with equal
//! sums, the engine alternately normalizes columns and rows of `A` and
//! tracks how far the current marginals are from the targets in `l1`, `l2`
//! and KL divergence. With a known feasible scaling `Z` of `A`, every run
//! can also be certified step by step through the potential `D(Z, ·)`.
//!
//! ```
//! use sinkscale::{run, validate_instance, SparseNonnegMatrix, StoppingRule, TargetVectors};
//!
//! let a = SparseNonnegMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 2.0]])?;
//! let inst = validate_instance(a, &TargetVectors::uniform(2))?;
//! let res = run(&inst, &StoppingRule::l2(1e-9), None)?;
//! assert!(res.outcome.converged());
//! let x = res.state.current().get(0, 0);
//! assert!((x - (2.0 - 2f64.sqrt())).abs() < 1e-8);
//! # Ok::<(), sinkscale::Error>(())
//! ```
//!
//! Modules:
//!
//! * [`matrix`], [`instance`]: sparse storage and validated instances.
//! * [`sinkhorn`]: the engine, stopping rules and the potential certificate.
//! * [`divergence`]: KL divergence and its Pinsker-type lower bounds.
//! * [`matching`]: the bipartite perfect-matching distinguisher.
//! * [`oracles`]: independent reference computations used by tests.
//! * [`verify`]: randomized sweeps over the divergence inequalities.
//! * [`io`], [`cli`]: file formats and the `sinkscale` command.

pub mod cli;
pub mod divergence;
pub mod error;
pub mod instance;
pub mod io;
pub mod matching;
pub mod matrix;
pub mod oracles;
pub mod sinkhorn;
pub mod verify;

pub use divergence::{
    gen_pinsker_rhs, hellinger_distance, kl_divergence, matrix_kl, pinsker_lower_bound,
    Distribution,
};
pub use error::{Axis, Error, Result};
pub use instance::{
    iteration_budget, validate_instance, InstanceParams, ScalingInstance, TargetVectors,
};
pub use matching::{distinguish, BipartiteGraph, DistinguisherVerdict, Verdict};
pub use matrix::SparseNonnegMatrix;
pub use sinkhorn::{
    certify_potential, run, IterationTrace, Metric, Outcome, Phase, RunResult, ScalingState,
    StoppingRule,
};
