//! Straightforward dense-loop versions of the divergences and marginal
//! errors, for equivalence checks against the sparse paths. Inputs are
//! small dense matrices (`Vec<Vec<f64>>`) and plain slices; zeros are
//! ordinary entries.

/// `Σ p ln(p/q)` with `0 ln 0 = 0` and `p ln(p/0) = +∞`.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    let mut total = 0.0;
    for i in 0..p.len() {
        if p[i] == 0.0 {
            continue;
        }
        if q[i] == 0.0 {
            return f64::INFINITY;
        }
        total += p[i] * p[i].ln() - p[i] * q[i].ln();
    }
    total
}

/// `(1/h) Σ_ij M_ij ln(M_ij / N_ij)` over every dense cell.
pub fn matrix_kl(m: &[Vec<f64>], n: &[Vec<f64>], h: f64) -> f64 {
    assert_eq!(m.len(), n.len());
    let mut total = 0.0;
    for i in 0..m.len() {
        for j in 0..m[i].len() {
            let (a, b) = (m[i][j], n[i][j]);
            if a == 0.0 {
                continue;
            }
            if b == 0.0 {
                return f64::INFINITY;
            }
            total += a * (a.ln() - b.ln());
        }
    }
    total / h
}

pub fn row_sums(m: &[Vec<f64>]) -> Vec<f64> {
    m.iter().map(|row| row.iter().sum()).collect()
}

pub fn col_sums(m: &[Vec<f64>]) -> Vec<f64> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| m.iter().map(|row| row[j]).sum())
        .collect()
}

pub fn l1_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum()
}

pub fn l2_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn pinsker(p: &[f64], q: &[f64]) -> f64 {
    l1_distance(p, q).powi(2) / 2.0
}

pub fn hellinger_sq(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| a + b - 2.0 * (a * b).sqrt())
        .sum()
}

/// Generalized Pinsker right-hand side written through the ratios
/// `η_i = (q_i − p_i)/p_i`: the large set is `η_i > θ`; `p_i = 0` counts as
/// `η_i = +∞`.
pub fn gen_pinsker(p: &[f64], q: &[f64], theta: f64) -> f64 {
    let a = (1.0 + theta).ln() / theta;
    let b = (1.0 - a) / theta;
    let mut large = 0.0;
    let mut small = 0.0;
    for i in 0..p.len() {
        let eta = if p[i] == 0.0 {
            if q[i] == 0.0 {
                continue;
            }
            f64::INFINITY
        } else {
            (q[i] - p[i]) / p[i]
        };
        if eta > theta {
            large += q[i] - p[i];
        } else {
            small += p[i] * eta * eta;
        }
    }
    (1.0 - a) * large + b * small
}
