use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::TargetVectors;
use crate::matrix::SparseNonnegMatrix;

const MAX_ATTEMPTS: usize = 100;
const FIT_TOL: f64 = 1e-12;
const FIT_MAX_SWEEPS: usize = 50_000;

/// Parameters of a generated scalable instance. The same config always
/// produces the same instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n: usize,
    pub m: usize,
    /// Target fraction of stored entries; `1.0` gives a full matrix.
    pub density: f64,
    pub seed: u64,
    /// Range of the random row and column factors applied to the witness.
    pub perturbation: (f64, f64),
    /// `r = c = 1` (requires `n == m`); otherwise random integer targets
    /// with common sum `2 max(n, m)`.
    pub uniform_targets: bool,
}

impl GeneratorConfig {
    pub fn new(n: usize, m: usize, density: f64, seed: u64) -> Self {
        Self {
            n,
            m,
            density,
            seed,
            perturbation: (0.1, 10.0),
            uniform_targets: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    /// `diag(u) · Z · diag(v)`.
    pub matrix: SparseNonnegMatrix,
    /// A matrix with the target marginals on the same support.
    pub witness: SparseNonnegMatrix,
    pub targets: TargetVectors,
}

/// Builds a witness `Z` with exact marginals `(r, c)` and then hides it
/// behind random diagonal factors.
///
/// The support is a union of northwest-corner transport plans taken under
/// random row and column orders. Each plan is feasible for `(r, c)`, so
/// the union supports a matrix with exactly those marginals, and
/// proportional fitting of random positive values on it converges. The
/// fitted matrix is `Z`.
pub fn gen_scalable_instance(cfg: &GeneratorConfig) -> Result<GeneratedInstance> {
    let (n, m) = (cfg.n, cfg.m);
    if n == 0 || m == 0 {
        return Err(Error::EmptyShape {
            n_rows: n,
            n_cols: m,
        });
    }
    if cfg.uniform_targets && n != m {
        return Err(Error::NotSquare {
            n_rows: n,
            n_cols: m,
        });
    }
    let (lo, hi) = cfg.perturbation;
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::InvalidDistribution(format!(
            "perturbation range [{lo}, {hi}] must be positive and ordered"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let (r, c) = if cfg.uniform_targets {
        (vec![1.0; n], vec![1.0; m])
    } else {
        let total = 2 * n.max(m);
        (
            composition(&mut rng, total, n),
            composition(&mut rng, total, m),
        )
    };

    for _ in 0..MAX_ATTEMPTS {
        let support = random_support(&mut rng, &r, &c, cfg.density);
        let mut values: Vec<f64> = support.iter().map(|_| rng.random_range(0.5..2.0)).collect();
        if !fit(&support, &mut values, &r, &c) {
            continue;
        }
        let witness = SparseNonnegMatrix::new(
            n,
            m,
            support.iter().zip(&values).map(|(&(i, j), &v)| (i, j, v)),
        )?;
        let u: Vec<f64> = (0..n).map(|_| factor(&mut rng, lo, hi)).collect();
        let v: Vec<f64> = (0..m).map(|_| factor(&mut rng, lo, hi)).collect();
        let matrix = SparseNonnegMatrix::new(
            n,
            m,
            witness.entries().map(|(i, j, z)| (i, j, u[i] * z * v[j])),
        )?;
        return Ok(GeneratedInstance {
            matrix,
            witness,
            targets: TargetVectors::new(r, c)?,
        });
    }
    Err(Error::DegenerateSupport {
        attempts: MAX_ATTEMPTS,
    })
}

fn factor(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        // log-uniform
        (rng.random_range(lo.ln()..hi.ln())).exp()
    }
}

/// Random split of `total` into `parts` positive integers.
fn composition(rng: &mut ChaCha8Rng, total: usize, parts: usize) -> Vec<f64> {
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, total - 1, parts - 1)
        .into_iter()
        .map(|k| k + 1)
        .collect();
    cuts.sort_unstable();
    let mut prev = 0;
    let mut out = Vec::with_capacity(parts);
    for cut in cuts.into_iter().chain(std::iter::once(total)) {
        out.push((cut - prev) as f64);
        prev = cut;
    }
    out
}

fn random_support(rng: &mut ChaCha8Rng, r: &[f64], c: &[f64], density: f64) -> Vec<(usize, usize)> {
    let (n, m) = (r.len(), c.len());
    if density >= 1.0 {
        return (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    }
    let wanted = (density * (n * m) as f64).ceil() as usize;
    let mut cells = BTreeSet::new();
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..m).collect();
    // every plan adds at most n + m - 1 cells; stop once dense enough
    for _ in 0..(n * m) {
        rows.shuffle(rng);
        cols.shuffle(rng);
        northwest_corner(&rows, &cols, r, c, &mut cells);
        if cells.len() >= wanted {
            break;
        }
    }
    cells.into_iter().collect()
}

/// Adds the support of the northwest-corner plan for the given orders.
fn northwest_corner(
    rows: &[usize],
    cols: &[usize],
    r: &[f64],
    c: &[f64],
    cells: &mut BTreeSet<(usize, usize)>,
) {
    let mut row_left: Vec<f64> = rows.iter().map(|&i| r[i]).collect();
    let mut col_left: Vec<f64> = cols.iter().map(|&j| c[j]).collect();
    let (mut a, mut b) = (0, 0);
    while a < rows.len() && b < cols.len() {
        let x = row_left[a].min(col_left[b]);
        cells.insert((rows[a], cols[b]));
        row_left[a] -= x;
        col_left[b] -= x;
        // integer targets: the remainders are exact
        if row_left[a] == 0.0 {
            a += 1;
        } else {
            b += 1;
        }
        if a < rows.len() && b < cols.len() && col_left[b] == 0.0 {
            b += 1;
        }
    }
}

/// Proportional fitting on a fixed support until both marginals are within
/// `FIT_TOL · max target`. Returns `false` if that never happens.
fn fit(support: &[(usize, usize)], values: &mut [f64], r: &[f64], c: &[f64]) -> bool {
    let scale = r.iter().chain(c).copied().fold(0.0, f64::max);
    let mut sums_r = vec![0.0; r.len()];
    let mut sums_c = vec![0.0; c.len()];
    for _ in 0..FIT_MAX_SWEEPS {
        sums_r.iter_mut().for_each(|s| *s = 0.0);
        for (&(i, _), &v) in support.iter().zip(values.iter()) {
            sums_r[i] += v;
        }
        for (&(i, _), v) in support.iter().zip(values.iter_mut()) {
            *v *= r[i] / sums_r[i];
        }
        sums_c.iter_mut().for_each(|s| *s = 0.0);
        for (&(_, j), &v) in support.iter().zip(values.iter()) {
            sums_c[j] += v;
        }
        for (&(_, j), v) in support.iter().zip(values.iter_mut()) {
            *v *= c[j] / sums_c[j];
        }
        sums_r.iter_mut().for_each(|s| *s = 0.0);
        for (&(i, _), &v) in support.iter().zip(values.iter()) {
            sums_r[i] += v;
        }
        let worst = sums_r
            .iter()
            .zip(r)
            .map(|(s, t)| (s - t).abs())
            .fold(0.0, f64::max);
        if worst <= FIT_TOL * scale {
            return values.iter().all(|v| *v > 0.0);
        }
    }
    false
}
