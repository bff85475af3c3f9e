//! Divergences between probability vectors and between non-negative
//! matrices, together with the lower bounds on KL divergence used to turn a
//! small marginal divergence into a small `l1` or `l2` error.
//!
//! | Function | Quantity |
//! |----------|----------|
//! | [`kl_divergence`] | `Σ p_i ln(p_i / q_i)` |
//! | [`matrix_kl`] | `(1/h) Σ M_ij ln(M_ij / N_ij)` |
//! | [`pinsker_lower_bound`] | `½ ‖p − q‖₁²` |
//! | [`gen_pinsker_rhs`] | `(1 − a_θ)(Σ_{A_θ} |q_i − p_i| + (1/θ) Σ_{B_θ} (q_i − p_i)² / p_i)` |
//! | [`hellinger_distance`] | `(Σ (√p_i − √q_i)²)^½` |
//!
//! All logarithms are natural. A KL divergence is `+∞` whenever `p_i > 0`
//! and `q_i = 0`; terms with `p_i = 0` contribute nothing.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::matrix::SparseNonnegMatrix;

/// Tolerance on `|Σ p_i − 1|` accepted by [`Distribution::new`] for
/// vectors of up to 1000 entries. Longer vectors get `4 n ε` to absorb
/// summation rounding.
pub const DISTRIBUTION_SUM_TOL: f64 = 1e-12;

fn sum_tolerance(n: usize) -> f64 {
    DISTRIBUTION_SUM_TOL.max(4.0 * n as f64 * f64::EPSILON)
}

/// A finite probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Wraps `p`, checking that entries are finite, non-negative and sum to 1
    /// within [`DISTRIBUTION_SUM_TOL`] (scaled up for long vectors).
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        if let Some((i, x)) = p
            .iter()
            .enumerate()
            .find(|(_, x)| !(x.is_finite() && **x >= 0.0))
        {
            return Err(Error::InvalidDistribution(format!("entry {i} is {x}")));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > sum_tolerance(p.len()) {
            return Err(Error::InvalidDistribution(format!("entries sum to {s}")));
        }
        Ok(Self(p))
    }

    /// Normalizes non-negative weights with a positive total.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        let s: f64 = w.iter().sum();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidDistribution(format!("weights sum to {s}")));
        }
        Self::new(w.iter().map(|x| x / s).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn same_len(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    Ok(())
}

/// `Σ p_i ln(p_i/q_i)` on raw slices; lengths must already agree.
pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            acc += pi * (pi / qi).ln();
        }
    }
    acc
}

/// KL divergence `D(p‖q) = Σ p_i ln(p_i / q_i) ≥ 0`.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_len(&p.0, &q.0)?;
    Ok(kl_slices(&p.0, &q.0))
}

/// Matrix divergence `(1/h) Σ_ij M_ij ln(M_ij / N_ij)`.
///
/// A summand is 0 where `M_ij = 0` and `+∞` where `M_ij > 0 = N_ij`. The
/// value can be negative when `M` and `N` carry different total mass.
pub fn matrix_kl(m: &SparseNonnegMatrix, n: &SparseNonnegMatrix, h: f64) -> Result<f64> {
    if m.n_rows() != n.n_rows() || m.n_cols() != n.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", m.n_rows(), m.n_cols()),
            found: format!("{}x{}", n.n_rows(), n.n_cols()),
        });
    }
    let lookup: HashMap<(usize, usize), f64> = n.entries().map(|(i, j, v)| ((i, j), v)).collect();
    let mut acc = 0.0;
    for (i, j, mv) in m.entries() {
        match lookup.get(&(i, j)) {
            Some(&nv) => acc += mv * (mv / nv).ln(),
            None => return Ok(f64::INFINITY),
        }
    }
    Ok(acc / h)
}

/// Pinsker's lower bound `½ ‖p − q‖₁²` on `D(p‖q)`.
pub fn pinsker_lower_bound(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_len(&p.0, &q.0)?;
    let l1: f64 = p.0.iter().zip(&q.0).map(|(a, b)| (a - b).abs()).sum();
    Ok(0.5 * l1 * l1)
}

/// Right-hand side of the generalized Pinsker bound
/// `D(p‖q) ≥ (1 − a_θ)(Σ_{A_θ} |q_i − p_i| + (1/θ) Σ_{B_θ} (q_i − p_i)² / p_i)`.
///
/// `A_θ` holds the indices with `q_i > (1 + θ) p_i`, `B_θ` the rest. Indices
/// on the boundary `q_i = (1 + θ) p_i` go to `B_θ`; both summand forms equal
/// `θ p_i` there. An index with `p_i = 0 < q_i` is in `A_θ`.
pub fn gen_pinsker_rhs(p: &Distribution, q: &Distribution, theta: f64) -> Result<f64> {
    same_len(&p.0, &q.0)?;
    let consts = theta_constants(theta)?;
    Ok(gen_pinsker_slices(&p.0, &q.0, &consts))
}

pub(crate) fn gen_pinsker_slices(p: &[f64], q: &[f64], c: &ThetaConstants) -> f64 {
    let mut large = 0.0;
    let mut small = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            large += qi;
        } else if qi > (1.0 + c.theta) * pi {
            large += qi - pi;
        } else {
            let d = qi - pi;
            small += d * d / pi;
        }
    }
    (1.0 - c.a_theta) * (large + small / c.theta)
}

/// Hellinger distance `(Σ (√p_i − √q_i)²)^½` (no ½ normalization).
pub fn hellinger_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_len(&p.0, &q.0)?;
    Ok(hellinger_sq_slices(&p.0, &q.0).sqrt())
}

pub(crate) fn hellinger_sq_slices(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum()
}

/// `a_θ = ln(1+θ)/θ` and `b_θ = (1 − a_θ)/θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaConstants {
    pub theta: f64,
    pub a_theta: f64,
    pub b_theta: f64,
}

pub fn theta_constants(theta: f64) -> Result<ThetaConstants> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::NonpositiveTheta(theta));
    }
    let a_theta = theta.ln_1p() / theta;
    Ok(ThetaConstants {
        theta,
        a_theta,
        b_theta: (1.0 - a_theta) / theta,
    })
}

/// Default relative slack for the grid checks.
pub const GRID_SLACK: f64 = 1e-12;

/// Outcome of [`verify_theta_facts`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ThetaFactsReport {
    pub theta: f64,
    pub checked: usize,
    pub violations: usize,
    /// Largest `(1 + t) − bound` seen; non-positive when the facts hold.
    pub max_violation: f64,
}

/// Checks `(1 + t) ≤ e^{a_θ t}` for `t ≥ θ` and `(1 + t) ≤ e^{t − b_θ t²}`
/// for `t ≤ θ` on every grid point (both at `t = θ`). A point fails when
/// `(1 + t) − bound` exceeds `GRID_SLACK · max(1, bound)`.
pub fn verify_theta_facts(theta: f64, grid: &[f64]) -> Result<ThetaFactsReport> {
    let c = theta_constants(theta)?;
    let mut report = ThetaFactsReport {
        theta,
        checked: 0,
        violations: 0,
        max_violation: f64::NEG_INFINITY,
    };
    let check = |lhs: f64, bound: f64, report: &mut ThetaFactsReport| {
        let gap = lhs - bound;
        report.checked += 1;
        report.max_violation = report.max_violation.max(gap);
        if gap > GRID_SLACK * bound.abs().max(1.0) {
            report.violations += 1;
        }
    };
    for &t in grid {
        if t <= -1.0 {
            continue;
        }
        if t >= theta {
            check(1.0 + t, (c.a_theta * t).exp(), &mut report);
        }
        if t <= theta {
            check(1.0 + t, (t - c.b_theta * t * t).exp(), &mut report);
        }
    }
    Ok(report)
}

/// Outcome of [`verify_easier_inequalities`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EasierReport {
    pub checked: usize,
    pub violations: usize,
    /// Smallest margin seen for `z + z²/2 > (1+z)ln(1+z)`,
    /// `(1+z)ln(1+z) > z` and `ln(1+z) > z − z²/2`, in that order.
    pub min_margins: [f64; 3],
}

/// Checks the three elementary logarithm inequalities for every `z > 0` on
/// the grid. An inequality `lhs > rhs` holds when
/// `lhs − rhs + rel_slack · |rhs| > 0`; with `rel_slack = 0` it must hold
/// strictly.
pub fn verify_easier_inequalities(grid: &[f64], rel_slack: f64) -> EasierReport {
    let mut report = EasierReport {
        checked: 0,
        violations: 0,
        min_margins: [f64::INFINITY; 3],
    };
    for &z in grid.iter().filter(|z| **z > 0.0) {
        let l = z.ln_1p();
        let xlx = (1.0 + z) * l;
        let pairs = [(z + 0.5 * z * z, xlx), (xlx, z), (l, z - 0.5 * z * z)];
        for (k, (lhs, rhs)) in pairs.into_iter().enumerate() {
            let margin = lhs - rhs;
            report.checked += 1;
            report.min_margins[k] = report.min_margins[k].min(margin);
            if margin + rel_slack * rhs.abs() <= 0.0 {
                report.violations += 1;
            }
        }
    }
    report
}

/// `k` evenly spaced points in `(lo, hi]`.
pub fn open_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (1..=k)
        .map(|i| lo + (hi - lo) * i as f64 / k as f64)
        .collect()
}
