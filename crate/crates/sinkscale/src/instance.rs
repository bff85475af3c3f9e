//! Scaling instances: a matrix, its row and column targets, and the derived
//! parameters that enter every convergence bound.

use crate::error::{Axis, Error, Result};
use crate::matrix::SparseNonnegMatrix;

/// Relative tolerance on `|sum(r) - sum(c)|`.
pub const TARGET_SUM_RTOL: f64 = 1e-9;

/// Row targets `r` and column targets `c`. Entries are strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetVectors {
    rows: Vec<f64>,
    cols: Vec<f64>,
}

impl TargetVectors {
    pub fn new(rows: Vec<f64>, cols: Vec<f64>) -> Result<Self> {
        check_positive(&rows, Axis::Row)?;
        check_positive(&cols, Axis::Column)?;
        Ok(Self { rows, cols })
    }

    /// `r = 1_n`, `c = 1_n`: the doubly stochastic target.
    pub fn uniform(n: usize) -> Self {
        Self {
            rows: vec![1.0; n],
            cols: vec![1.0; n],
        }
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn cols(&self) -> &[f64] {
        &self.cols
    }
}

fn check_positive(v: &[f64], axis: Axis) -> Result<()> {
    match v
        .iter()
        .enumerate()
        .find(|(_, x)| !(x.is_finite() && **x > 0.0))
    {
        Some((index, &value)) => Err(Error::NonpositiveTarget { axis, index, value }),
        None => Ok(()),
    }
}

/// Parameters of an instance appearing in the iteration bounds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct InstanceParams {
    /// Common total mass `sum(r) = sum(c)`.
    pub h: f64,
    /// Largest target entry over both `r` and `c`.
    pub rho: f64,
    /// Smallest stored entry of the matrix divided by its largest.
    pub nu: f64,
    /// Largest number of stored entries in any column.
    pub delta_cols: usize,
}

impl InstanceParams {
    /// `ln(1 + 2 Δ ρ / ν)`: the upper bound on the initial potential.
    pub fn potential_bound(&self) -> f64 {
        (2.0 * self.delta_cols as f64 * self.rho / self.nu).ln_1p()
    }
}

/// Number of full iterations after which some half-step is guaranteed to
/// have a marginal KL divergence at most `delta`:
/// `ceil(ln(1 + 2 Δ ρ / ν) / delta)`.
pub fn iteration_budget(params: &InstanceParams, delta: f64) -> Result<u64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::NonpositiveDelta(delta));
    }
    let t = (params.potential_bound() / delta).ceil();
    // `as` saturates for budgets beyond u64.
    Ok((t as u64).max(1))
}

/// A validated matrix together with its targets.
///
/// The column targets are rescaled by `sum(r) / sum(c)` during validation so
/// both sides carry the same mass `h`.
#[derive(Debug, Clone)]
pub struct ScalingInstance {
    matrix: SparseNonnegMatrix,
    row_targets: Vec<f64>,
    col_targets: Vec<f64>,
    params: InstanceParams,
}

impl ScalingInstance {
    pub fn matrix(&self) -> &SparseNonnegMatrix {
        &self.matrix
    }

    pub fn row_targets(&self) -> &[f64] {
        &self.row_targets
    }

    pub fn col_targets(&self) -> &[f64] {
        &self.col_targets
    }

    pub fn params(&self) -> &InstanceParams {
        &self.params
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.n_cols()
    }

    /// Target distribution `r / h`.
    pub fn row_target_distribution(&self) -> Vec<f64> {
        self.row_targets.iter().map(|r| r / self.params.h).collect()
    }

    /// Target distribution `c / h`.
    pub fn col_target_distribution(&self) -> Vec<f64> {
        self.col_targets.iter().map(|c| c / self.params.h).collect()
    }
}

/// Checks shapes, rejects empty rows and columns, checks that target sums
/// agree and computes [`InstanceParams`].
pub fn validate_instance(
    matrix: SparseNonnegMatrix,
    targets: &TargetVectors,
) -> Result<ScalingInstance> {
    if targets.rows.len() != matrix.n_rows() || targets.cols.len() != matrix.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: format!(
                "targets of length {} and {}",
                matrix.n_rows(),
                matrix.n_cols()
            ),
            found: format!("{} and {}", targets.rows.len(), targets.cols.len()),
        });
    }
    if let Some(index) = matrix.row_counts().iter().position(|&k| k == 0) {
        return Err(Error::ZeroRowOrColumn {
            axis: Axis::Row,
            index,
        });
    }
    let col_counts = matrix.col_counts();
    if let Some(index) = col_counts.iter().position(|&k| k == 0) {
        return Err(Error::ZeroRowOrColumn {
            axis: Axis::Column,
            index,
        });
    }

    let row_sum: f64 = targets.rows.iter().sum();
    let col_sum: f64 = targets.cols.iter().sum();
    if (row_sum - col_sum).abs() > TARGET_SUM_RTOL * row_sum {
        return Err(Error::TargetSumMismatch { row_sum, col_sum });
    }
    let h = row_sum;
    let col_targets: Vec<f64> = if row_sum == col_sum {
        targets.cols.clone()
    } else {
        let k = row_sum / col_sum;
        targets.cols.iter().map(|c| c * k).collect()
    };

    let rho = targets
        .rows
        .iter()
        .chain(&col_targets)
        .copied()
        .fold(0.0, f64::max);
    let params = InstanceParams {
        h,
        rho,
        nu: matrix.min_value() / matrix.max_value(),
        delta_cols: col_counts.into_iter().max().unwrap_or(0),
    };

    Ok(ScalingInstance {
        matrix,
        row_targets: targets.rows.clone(),
        col_targets,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> SparseNonnegMatrix {
        SparseNonnegMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn identity_params() {
        let a = dense(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let inst = validate_instance(a, &TargetVectors::uniform(2)).unwrap();
        let p = inst.params();
        assert_eq!((p.h, p.rho, p.nu, p.delta_cols), (2.0, 1.0, 1.0, 1));
    }

    #[test]
    fn two_by_two_params() {
        let a = dense(&[&[1.0, 1.0], &[1.0, 2.0]]);
        let inst = validate_instance(a, &TargetVectors::uniform(2)).unwrap();
        let p = inst.params();
        assert_eq!((p.h, p.rho, p.nu, p.delta_cols), (2.0, 1.0, 0.5, 2));
    }

    #[test]
    fn zero_row_rejected() {
        let a = SparseNonnegMatrix::new(2, 2, [(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        let err = validate_instance(a, &TargetVectors::uniform(2)).unwrap_err();
        assert!(matches!(
            err,
            Error::ZeroRowOrColumn {
                axis: Axis::Row,
                index: 1
            }
        ));
        assert_eq!(err.to_string(), "row 2 has no stored entries");
    }

    #[test]
    fn zero_column_rejected() {
        let a = SparseNonnegMatrix::new(2, 2, [(0, 0, 1.0), (1, 0, 1.0)]).unwrap();
        let err = validate_instance(a, &TargetVectors::uniform(2)).unwrap_err();
        assert!(matches!(
            err,
            Error::ZeroRowOrColumn {
                axis: Axis::Column,
                index: 1
            }
        ));
    }

    #[test]
    fn shape_and_sum_errors() {
        let a = dense(&[&[1.0, 1.0], &[1.0, 2.0]]);
        let t = TargetVectors::new(vec![1.0; 3], vec![1.5; 2]).unwrap();
        assert!(matches!(
            validate_instance(a.clone(), &t),
            Err(Error::DimensionMismatch { .. })
        ));
        let t = TargetVectors::new(vec![1.0, 1.0], vec![1.0, 1.1]).unwrap();
        assert!(matches!(
            validate_instance(a, &t),
            Err(Error::TargetSumMismatch { .. })
        ));
        assert!(TargetVectors::new(vec![1.0, 0.0], vec![1.0]).is_err());
    }

    #[test]
    fn column_targets_rescaled_to_row_mass() {
        let a = dense(&[&[1.0, 1.0], &[1.0, 2.0]]);
        let t = TargetVectors::new(vec![1.0, 2.0], vec![1.5, 1.5 * (1.0 + 1e-10)]).unwrap();
        let inst = validate_instance(a, &t).unwrap();
        assert_eq!(inst.params().h, 3.0);
        let s: f64 = inst.col_targets().iter().sum();
        assert!((s - 3.0).abs() < 1e-15);
    }

    #[test]
    fn budgets() {
        let p = InstanceParams {
            h: 2.0,
            rho: 1.0,
            nu: 0.5,
            delta_cols: 2,
        };
        assert_eq!(iteration_budget(&p, 9f64.ln()).unwrap(), 1);
        assert_eq!(iteration_budget(&p, 0.01 / 8.0).unwrap(), 1758);
        let q = InstanceParams {
            h: 2.0,
            rho: 1.0,
            nu: 1.0,
            delta_cols: 1,
        };
        assert_eq!(iteration_budget(&q, 0.1).unwrap(), 11);
        assert!(matches!(
            iteration_budget(&q, 0.0),
            Err(Error::NonpositiveDelta(_))
        ));
        assert!(iteration_budget(&q, f64::NAN).is_err());
    }
}
