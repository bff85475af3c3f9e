use std::collections::HashMap;

use super::{Phase, ScalingState};
use crate::error::{Axis, Error, Result};
use crate::instance::{iteration_budget, InstanceParams, ScalingInstance};
use crate::matrix::SparseNonnegMatrix;

/// Absolute tolerance, in units of `ρ`, on a witness's row and column sums.
pub const WITNESS_MARGINAL_TOL: f64 = 1e-6;

/// `1 − ln 2`, the constant of the generalized Pinsker bound at `θ = 1`.
const PINSKER_L2_CONST: f64 = 1.0 - std::f64::consts::LN_2;

/// Quantity compared against the stopping threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// `l1` error of the measured marginal.
    L1,
    /// `l2` error of the measured marginal.
    L2,
    /// KL divergence of the normalized measured marginal.
    #[serde(rename = "kl")]
    KlMarginal,
}

/// When to stop: the first half-step whose metric is at most `threshold`,
/// or after iteration `max_iters`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub metric: Metric,
    /// `ε` for the error metrics, `δ` for [`Metric::KlMarginal`].
    pub threshold: f64,
    /// Overrides the KL level used to derive the default budget.
    pub budget_delta: Option<f64>,
    /// Explicit iteration cap; `None` derives it from the instance.
    pub max_iters: Option<u64>,
}

impl StoppingRule {
    pub fn new(metric: Metric, threshold: f64) -> Self {
        Self {
            metric,
            threshold,
            budget_delta: None,
            max_iters: None,
        }
    }

    pub fn l1(eps: f64) -> Self {
        Self::new(Metric::L1, eps)
    }

    pub fn l2(eps: f64) -> Self {
        Self::new(Metric::L2, eps)
    }

    pub fn kl(delta: f64) -> Self {
        Self::new(Metric::KlMarginal, delta)
    }

    pub fn with_max_iters(mut self, max_iters: u64) -> Self {
        self.max_iters = Some(max_iters);
        self
    }

    pub fn with_budget_delta(mut self, delta: f64) -> Self {
        self.budget_delta = Some(delta);
        self
    }

    /// The marginal-KL level that guarantees this rule's threshold:
    /// `ε²/(2h²)` for `l1` (Pinsker), `C / (2ρh(1/ε + 1/ε²))` with
    /// `C = 1 − ln 2` for `l2`, and the threshold itself for KL.
    pub fn derived_delta(&self, params: &InstanceParams) -> f64 {
        if let Some(d) = self.budget_delta {
            return d;
        }
        let eps = self.threshold;
        match self.metric {
            Metric::L1 => eps * eps / (2.0 * params.h * params.h),
            Metric::L2 => {
                PINSKER_L2_CONST / (2.0 * params.rho * params.h * (1.0 / eps + 1.0 / (eps * eps)))
            }
            Metric::KlMarginal => eps,
        }
    }

    /// Iteration cap: the explicit one, else the budget for [`derived_delta`](Self::derived_delta).
    pub fn resolved_max_iters(&self, params: &InstanceParams) -> Result<u64> {
        match self.max_iters {
            Some(n) => Ok(n),
            None => iteration_budget(params, self.derived_delta(params)),
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(match self.metric {
                Metric::KlMarginal => Error::NonpositiveDelta(self.threshold),
                _ => Error::NonpositiveEpsilon(self.threshold),
            });
        }
        Ok(())
    }
}

/// Measurements taken after one half-step.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HalfStepRecord {
    pub t: u64,
    pub phase: Phase,
    /// `l1` error of the measured marginal.
    pub err1: f64,
    /// `l2` error of the measured marginal.
    pub err2: f64,
    pub kl_row: f64,
    pub kl_col: f64,
    /// `D(Z, current)` when a witness `Z` was supplied.
    pub potential: Option<f64>,
}

impl HalfStepRecord {
    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::L1 => self.err1,
            Metric::L2 => self.err2,
            Metric::KlMarginal => match self.phase.measured_axis() {
                Axis::Row => self.kl_row,
                Axis::Column => self.kl_col,
            },
        }
    }
}

/// Records for `A(0), B(0), A(1), B(1), ...` up to the stopping half-step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<HalfStepRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&HalfStepRecord> {
        self.records.last()
    }

    pub fn potentials(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.potential).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    /// The half-step `(t, phase)` met the threshold; the returned state is
    /// that iterate.
    Converged { t: u64, phase: Phase, value: f64 },
    /// No half-step up to `B(max_iters)` met the threshold. `best` is the
    /// smallest metric value seen, at half-step `(best_t, best_phase)`.
    BudgetExhausted {
        max_iters: u64,
        best: f64,
        best_t: u64,
        best_phase: Phase,
    },
}

impl Outcome {
    pub fn converged(&self) -> bool {
        matches!(self, Outcome::Converged { .. })
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: ScalingState,
    pub trace: IterationTrace,
    pub outcome: Outcome,
    pub max_iters: u64,
}

/// A witness matrix aligned with the storage order of `A`.
struct AlignedWitness {
    /// `(position in A, Z value)` per stored entry of `Z`.
    entries: Vec<(usize, f64)>,
    h: f64,
}

impl AlignedWitness {
    fn new(instance: &ScalingInstance, z: &SparseNonnegMatrix) -> Result<Self> {
        let a = instance.matrix();
        if z.n_rows() != a.n_rows() || z.n_cols() != a.n_cols() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{} witness", a.n_rows(), a.n_cols()),
                found: format!("{}x{}", z.n_rows(), z.n_cols()),
            });
        }
        let index: HashMap<(usize, usize), usize> = a.position_index();
        let entries = z
            .entries()
            .map(|(row, col, v)| {
                index
                    .get(&(row, col))
                    .map(|&k| (k, v))
                    .ok_or(Error::WitnessSupportViolation { row, col })
            })
            .collect::<Result<Vec<_>>>()?;

        let tol = WITNESS_MARGINAL_TOL * instance.params().rho;
        let sides = [
            (Axis::Row, z.row_sums(), instance.row_targets()),
            (Axis::Column, z.col_sums(), instance.col_targets()),
        ];
        for (axis, sums, targets) in sides {
            for (index, (&found, &expected)) in sums.iter().zip(targets).enumerate() {
                if (found - expected).abs() > tol {
                    return Err(Error::WitnessInfeasible {
                        axis,
                        index,
                        expected,
                        found,
                    });
                }
            }
        }
        Ok(Self {
            entries,
            h: instance.params().h,
        })
    }

    /// `D(Z, current) = (1/h) Σ Z_ij ln(Z_ij / current_ij)`.
    fn potential(&self, current: &SparseNonnegMatrix) -> f64 {
        let values = current.values();
        let mut acc = 0.0;
        for &(k, z) in &self.entries {
            acc += z * (z / values[k]).ln();
        }
        acc / self.h
    }
}

fn measure(
    state: &ScalingState,
    instance: &ScalingInstance,
    witness: Option<&AlignedWitness>,
) -> HalfStepRecord {
    HalfStepRecord {
        t: state.t(),
        phase: state.phase(),
        err1: state.error_l1(instance),
        err2: state.error_l2(instance),
        kl_row: state.kl_row(instance),
        kl_col: state.kl_col(instance),
        potential: witness.map(|w| w.potential(state.current())),
    }
}

/// Runs Sinkhorn-Knopp from `A(0)`, measuring every half-step, until the
/// rule's metric drops to its threshold or `B(max_iters)` has been
/// measured.
///
/// With a witness `Z` (row sums `r`, column sums `c`, support inside `A`'s),
/// every record also carries the potential `D(Z, ·)`, which can then be
/// checked with [`certify_potential`](super::certify_potential).
pub fn run(
    instance: &ScalingInstance,
    rule: &StoppingRule,
    witness: Option<&SparseNonnegMatrix>,
) -> Result<RunResult> {
    rule.check()?;
    let max_iters = rule.resolved_max_iters(instance.params())?;
    let witness = witness
        .map(|z| AlignedWitness::new(instance, z))
        .transpose()?;

    let mut state = ScalingState::initialize(instance);
    let mut trace = IterationTrace::default();
    let mut best = (f64::INFINITY, 0, Phase::AfterColumnScale);
    loop {
        let record = measure(&state, instance, witness.as_ref());
        trace.records.push(record);
        let value = record.metric(rule.metric);
        if value <= rule.threshold {
            return Ok(RunResult {
                state,
                trace,
                outcome: Outcome::Converged {
                    t: record.t,
                    phase: record.phase,
                    value,
                },
                max_iters,
            });
        }
        // NaN never replaces the best value
        if value < best.0 {
            best = (value, record.t, record.phase);
        }
        if state.phase() == Phase::AfterRowScale && state.t() >= max_iters {
            return Ok(RunResult {
                state,
                trace,
                outcome: Outcome::BudgetExhausted {
                    max_iters,
                    best: best.0,
                    best_t: best.1,
                    best_phase: best.2,
                },
                max_iters,
            });
        }
        state.advance(instance)?;
    }
}
