use super::{IterationTrace, Phase};
use crate::instance::InstanceParams;

/// Absolute tolerance of every potential check.
pub const CERTIFY_TOL: f64 = 1e-9;

/// Checks on the potential `D(Z, ·)` recorded along a witnessed run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PotentialCertificate {
    /// `D(Z, A(0))`.
    pub initial_potential: f64,
    /// `ln(1 + 2Δρ/ν)`.
    pub initial_bound: f64,
    pub initial_within_bound: bool,
    pub min_potential: f64,
    pub nonnegative: bool,
    /// Largest `|D(Z, X_k) − D(Z, X_{k+1}) − KL_k|` over consecutive
    /// half-steps, where `KL_k` is the row-marginal divergence of an `A(t)`
    /// and the column-marginal divergence of a `B(t)`.
    pub max_drop_residual: f64,
    pub drops_match: bool,
    /// Largest increase of the potential between consecutive half-steps.
    pub max_increase: f64,
    pub monotone: bool,
}

impl PotentialCertificate {
    pub fn holds(&self) -> bool {
        self.initial_within_bound && self.nonnegative && self.drops_match && self.monotone
    }
}

/// Validates a witnessed trace: the initial potential is below
/// `ln(1 + 2Δρ/ν)`, the potential never goes negative, and each half-step
/// lowers it by exactly the marginal KL divergence of the iterate it
/// started from. Returns `None` when the trace carries no potentials.
pub fn certify_potential(
    trace: &IterationTrace,
    params: &InstanceParams,
) -> Option<PotentialCertificate> {
    let pots = trace.potentials()?;
    let first = *pots.first()?;
    let initial_bound = params.potential_bound();
    let min_potential = pots.iter().copied().fold(f64::INFINITY, f64::min);

    let mut max_drop_residual: f64 = 0.0;
    let mut max_increase = f64::NEG_INFINITY;
    for (k, pair) in trace.records.windows(2).enumerate() {
        let from = &pair[0];
        let drop = pots[k] - pots[k + 1];
        let kl = match from.phase {
            Phase::AfterColumnScale => from.kl_row,
            Phase::AfterRowScale => from.kl_col,
        };
        max_drop_residual = max_drop_residual.max((drop - kl).abs());
        max_increase = max_increase.max(-drop);
    }
    if pots.len() < 2 {
        max_increase = 0.0;
    }

    Some(PotentialCertificate {
        initial_potential: first,
        initial_bound,
        initial_within_bound: first <= initial_bound + CERTIFY_TOL,
        min_potential,
        nonnegative: min_potential >= -CERTIFY_TOL,
        max_drop_residual,
        drops_match: max_drop_residual <= CERTIFY_TOL,
        max_increase,
        monotone: max_increase <= CERTIFY_TOL,
    })
}
