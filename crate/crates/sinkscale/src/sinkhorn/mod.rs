//! The Sinkhorn-Knopp (RAS) alternating scaling engine.
//!
//! Starting from `A`, the engine first scales every column to its target,
//! producing `A(0)`. Each iteration `t` then scales rows to get `B(t)` and
//! columns again to get `A(t+1)`:
//!
//! ```text
//! A(0)_ij   = A_ij    / colsum_j(A)    * c_j
//! B(t)_ij   = A(t)_ij / rowsum_i(A(t)) * r_i
//! A(t+1)_ij = B(t)_ij / colsum_j(B(t)) * c_j
//! ```
//!
//! A column-scaled iterate is measured by its row sums against `r`, a
//! row-scaled iterate by its column sums against `c`.

mod certify;
mod run;

pub use certify::{certify_potential, PotentialCertificate, CERTIFY_TOL};
pub use run::{
    run, HalfStepRecord, IterationTrace, Metric, Outcome, RunResult, StoppingRule,
    WITNESS_MARGINAL_TOL,
};

use crate::divergence::kl_slices;
use crate::error::{Axis, Error, Result};
use crate::instance::ScalingInstance;
use crate::matrix::SparseNonnegMatrix;

/// Accumulated scalers are rebalanced when any factor leaves
/// `[SCALER_MIN, SCALER_MAX]`.
const SCALER_MIN: f64 = 1e-300;
const SCALER_MAX: f64 = 1e300;

/// Which normalization produced the current iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// `A(t)`: columns sum to `c`.
    AfterColumnScale,
    /// `B(t)`: rows sum to `r`.
    AfterRowScale,
}

impl Phase {
    /// Short label used in trace files: `A` or `B`.
    pub fn label(self) -> &'static str {
        match self {
            Phase::AfterColumnScale => "A",
            Phase::AfterRowScale => "B",
        }
    }

    /// The side whose sums are not yet on target.
    pub fn measured_axis(self) -> Axis {
        match self {
            Phase::AfterColumnScale => Axis::Row,
            Phase::AfterRowScale => Axis::Column,
        }
    }
}

/// The current iterate `diag(row_scaler) · A · diag(col_scaler)` together
/// with its scalers.
#[derive(Debug, Clone)]
pub struct ScalingState {
    current: SparseNonnegMatrix,
    phase: Phase,
    t: u64,
    row_scaler: Vec<f64>,
    col_scaler: Vec<f64>,
}

impl ScalingState {
    /// Column-scales `A` to produce `A(0)`.
    pub fn initialize(instance: &ScalingInstance) -> Self {
        let a = instance.matrix();
        let mut state = Self {
            current: a.clone(),
            phase: Phase::AfterRowScale,
            t: 0,
            row_scaler: vec![1.0; a.n_rows()],
            col_scaler: vec![1.0; a.n_cols()],
        };
        // validation guarantees non-empty columns
        state
            .scale_columns(instance.col_targets())
            .expect("validated instance has no empty column");
        state
    }

    pub fn current(&self) -> &SparseNonnegMatrix {
        &self.current
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Iteration index: `t` for both `A(t)` and `B(t)`.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn row_scaler(&self) -> &[f64] {
        &self.row_scaler
    }

    pub fn col_scaler(&self) -> &[f64] {
        &self.col_scaler
    }

    /// `A(t) -> B(t)`.
    ///
    /// # Panics
    /// If the state is not column-scaled.
    pub fn row_step(&mut self, instance: &ScalingInstance) -> Result<()> {
        assert_eq!(
            self.phase,
            Phase::AfterColumnScale,
            "row_step expects a column-scaled iterate"
        );
        let sums = self.current.row_sums();
        let factors = normalizers(&sums, instance.row_targets(), Axis::Row)?;
        for (v, &i) in self
            .current
            .values_mut()
            .iter_mut()
            .zip(instance.matrix().row_indices())
        {
            *v *= factors[i];
        }
        for (s, f) in self.row_scaler.iter_mut().zip(&factors) {
            *s *= f;
        }
        self.phase = Phase::AfterRowScale;
        self.rebalance();
        Ok(())
    }

    /// `B(t) -> A(t+1)`.
    ///
    /// # Panics
    /// If the state is not row-scaled.
    pub fn col_step(&mut self, instance: &ScalingInstance) -> Result<()> {
        assert_eq!(
            self.phase,
            Phase::AfterRowScale,
            "col_step expects a row-scaled iterate"
        );
        self.scale_columns(instance.col_targets())?;
        self.t += 1;
        Ok(())
    }

    /// Applies whichever half-step comes next.
    pub fn advance(&mut self, instance: &ScalingInstance) -> Result<()> {
        match self.phase {
            Phase::AfterColumnScale => self.row_step(instance),
            Phase::AfterRowScale => self.col_step(instance),
        }
    }

    fn scale_columns(&mut self, targets: &[f64]) -> Result<()> {
        let sums = self.current.col_sums();
        let factors = normalizers(&sums, targets, Axis::Column)?;
        let cols = self.current.col_indices().to_vec();
        for (v, j) in self.current.values_mut().iter_mut().zip(cols) {
            *v *= factors[j];
        }
        for (s, f) in self.col_scaler.iter_mut().zip(&factors) {
            *s *= f;
        }
        self.phase = Phase::AfterColumnScale;
        self.rebalance();
        Ok(())
    }

    /// Shifts a common factor between the two scalers so neither drifts out
    /// of floating-point range. The product `row_i * col_j` is unchanged.
    fn rebalance(&mut self) {
        let out_of_range = |v: &[f64]| v.iter().any(|&x| !(SCALER_MIN..=SCALER_MAX).contains(&x));
        if !out_of_range(&self.row_scaler) && !out_of_range(&self.col_scaler) {
            return;
        }
        let log_mid = |v: &[f64]| {
            let (lo, hi) = v
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                    (lo.min(x.ln()), hi.max(x.ln()))
                });
            0.5 * (lo + hi)
        };
        // equalize the log-midpoints of the two scalers
        let shift = (0.5 * (log_mid(&self.row_scaler) - log_mid(&self.col_scaler))).exp();
        for x in &mut self.row_scaler {
            *x /= shift;
        }
        for x in &mut self.col_scaler {
            *x *= shift;
        }
    }

    /// Row sums `r(t)` of the current iterate.
    pub fn row_marginal(&self) -> Vec<f64> {
        self.current.row_sums()
    }

    /// Column sums `c(t)` of the current iterate.
    pub fn col_marginal(&self) -> Vec<f64> {
        self.current.col_sums()
    }

    /// Deviation of the measured marginal from its target.
    fn deviation(&self, instance: &ScalingInstance) -> Vec<f64> {
        let (sums, target) = match self.phase.measured_axis() {
            Axis::Row => (self.row_marginal(), instance.row_targets()),
            Axis::Column => (self.col_marginal(), instance.col_targets()),
        };
        sums.iter().zip(target).map(|(s, t)| s - t).collect()
    }

    /// `‖r(t) − r‖₁` for `A(t)`, `‖c(t) − c‖₁` for `B(t)`.
    pub fn error_l1(&self, instance: &ScalingInstance) -> f64 {
        self.deviation(instance).iter().map(|d| d.abs()).sum()
    }

    /// `‖r(t) − r‖₂` for `A(t)`, `‖c(t) − c‖₂` for `B(t)`.
    pub fn error_l2(&self, instance: &ScalingInstance) -> f64 {
        self.deviation(instance)
            .iter()
            .map(|d| d * d)
            .sum::<f64>()
            .sqrt()
    }

    /// `D_KL(r/h ‖ r(t)/h)`.
    pub fn kl_row(&self, instance: &ScalingInstance) -> f64 {
        marginal_kl(
            &self.row_marginal(),
            instance.row_targets(),
            instance.params().h,
        )
    }

    /// `D_KL(c/h ‖ c(t)/h)`.
    pub fn kl_col(&self, instance: &ScalingInstance) -> f64 {
        marginal_kl(
            &self.col_marginal(),
            instance.col_targets(),
            instance.params().h,
        )
    }

    /// KL divergence of the measured marginal: [`kl_row`](Self::kl_row) for
    /// `A(t)`, [`kl_col`](Self::kl_col) for `B(t)`.
    pub fn kl_marginal(&self, instance: &ScalingInstance) -> f64 {
        match self.phase.measured_axis() {
            Axis::Row => self.kl_row(instance),
            Axis::Column => self.kl_col(instance),
        }
    }
}

fn normalizers(sums: &[f64], targets: &[f64], axis: Axis) -> Result<Vec<f64>> {
    sums.iter()
        .zip(targets)
        .enumerate()
        .map(|(index, (&s, &t))| {
            if s > 0.0 {
                Ok(t / s)
            } else {
                Err(Error::InternalZeroSum { axis, index })
            }
        })
        .collect()
}

fn marginal_kl(current: &[f64], target: &[f64], h: f64) -> f64 {
    let p: Vec<f64> = target.iter().map(|x| x / h).collect();
    let q: Vec<f64> = current.iter().map(|x| x / h).collect();
    kl_slices(&p, &q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{validate_instance, TargetVectors};
    use approx::assert_abs_diff_eq;

    fn instance(dense: &[Vec<f64>], targets: TargetVectors) -> ScalingInstance {
        validate_instance(SparseNonnegMatrix::from_dense(dense).unwrap(), &targets).unwrap()
    }

    fn two_by_two() -> ScalingInstance {
        instance(&[vec![1.0, 1.0], vec![1.0, 2.0]], TargetVectors::uniform(2))
    }

    fn assert_dense_eq(got: &[Vec<f64>], want: &[[f64; 2]; 2]) {
        for (g, w) in got.iter().zip(want) {
            for (a, b) in g.iter().zip(w) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn initialize_column_scales() {
        let inst = two_by_two();
        let s = ScalingState::initialize(&inst);
        assert_eq!(s.phase(), Phase::AfterColumnScale);
        assert_eq!(s.t(), 0);
        assert_dense_eq(
            &s.current().to_dense(),
            &[[0.5, 1.0 / 3.0], [0.5, 2.0 / 3.0]],
        );
        assert_eq!(s.row_scaler(), &[1.0, 1.0]);
        assert_eq!(s.col_scaler(), &[0.5, 1.0 / 3.0]);
    }

    #[test]
    fn initialize_leaves_column_feasible_matrix() {
        let inst = instance(
            &[vec![0.25, 0.5], vec![0.75, 0.5]],
            TargetVectors::uniform(2),
        );
        let s = ScalingState::initialize(&inst);
        assert_eq!(s.current(), inst.matrix());
        assert_eq!(s.col_scaler(), &[1.0, 1.0]);
    }

    #[test]
    fn one_by_one() {
        let t = TargetVectors::new(vec![3.0], vec![3.0]).unwrap();
        let inst = instance(&[vec![5.0]], t);
        let mut s = ScalingState::initialize(&inst);
        assert_eq!(s.current().values(), &[3.0]);
        s.row_step(&inst).unwrap();
        assert_eq!(s.current().values(), &[3.0]);
        s.col_step(&inst).unwrap();
        assert_eq!(s.current().values(), &[3.0]);
        assert_eq!(s.t(), 1);
    }

    #[test]
    fn row_then_column_step() {
        let inst = two_by_two();
        let mut s = ScalingState::initialize(&inst);
        s.row_step(&inst).unwrap();
        assert_eq!(s.phase(), Phase::AfterRowScale);
        assert_eq!(s.t(), 0);
        assert_dense_eq(
            &s.current().to_dense(),
            &[[3.0 / 5.0, 2.0 / 5.0], [3.0 / 7.0, 4.0 / 7.0]],
        );
        s.col_step(&inst).unwrap();
        assert_eq!(s.t(), 1);
        for c in s.col_marginal() {
            assert_abs_diff_eq!(c, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn feasible_state_is_fixed() {
        let inst = instance(&[vec![0.5, 0.5], vec![0.5, 0.5]], TargetVectors::uniform(2));
        let mut s = ScalingState::initialize(&inst);
        assert_eq!(s.error_l1(&inst), 0.0);
        assert_eq!(s.error_l2(&inst), 0.0);
        assert_eq!(s.kl_marginal(&inst), 0.0);
        s.row_step(&inst).unwrap();
        assert_eq!(s.current(), inst.matrix());
        assert_eq!(s.row_scaler(), &[1.0, 1.0]);
    }

    #[test]
    fn errors_of_initial_iterate() {
        let inst = two_by_two();
        let s = ScalingState::initialize(&inst);
        assert_abs_diff_eq!(s.error_l1(&inst), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.error_l2(&inst), 2f64.sqrt() / 6.0, epsilon = 1e-15);
        // ½ ln(6/5) + ½ ln(6/7)
        assert_abs_diff_eq!(
            s.kl_marginal(&inst),
            0.014_085_438_483_348_117,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(s.kl_col(&inst), 0.0, epsilon = 1e-15);
    }

    #[test]
    #[should_panic(expected = "row_step expects")]
    fn row_step_twice_panics() {
        let inst = two_by_two();
        let mut s = ScalingState::initialize(&inst);
        s.row_step(&inst).unwrap();
        let _ = s.row_step(&inst);
    }

    #[test]
    fn rebalance_keeps_products() {
        let inst = two_by_two();
        let mut s = ScalingState::initialize(&inst);
        s.row_scaler = vec![1e301, 2e301];
        s.col_scaler = vec![1e-302, 3e-302];
        let before: Vec<f64> = s
            .row_scaler
            .iter()
            .flat_map(|r| s.col_scaler.iter().map(move |c| r * c))
            .collect();
        s.rebalance();
        assert!(s.row_scaler.iter().all(|x| (1e-300..=1e300).contains(x)));
        assert!(s.col_scaler.iter().all(|x| (1e-300..=1e300).contains(x)));
        let after: Vec<f64> = s
            .row_scaler
            .iter()
            .flat_map(|r| s.col_scaler.iter().map(move |c| r * c))
            .collect();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() <= 1e-14 * a.abs());
        }
    }
}
