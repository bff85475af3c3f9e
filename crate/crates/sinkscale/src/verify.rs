//! Randomized sweeps checking the KL lower bounds on many distribution
//! pairs, plus the grid checks of the elementary inequalities behind the
//! generalized Pinsker bound.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`, so a seed fully determines the sampled pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::divergence::{
    gen_pinsker_rhs, hellinger_distance, kl_divergence, open_grid, pinsker_lower_bound,
    theta_constants, verify_easier_inequalities, verify_theta_facts, Distribution, GRID_SLACK,
};
use crate::error::Result;

/// Relative tolerance of a bound check: `lhs ≥ rhs − VERIFY_TOL · max(1, rhs)`.
pub const VERIFY_TOL: f64 = 1e-12;

/// Number of points in each grid check.
pub const GRID_POINTS: usize = 10_000;

/// Sizes of sampled vectors, inclusive.
pub const MIN_SIZE: usize = 2;
pub const MAX_SIZE: usize = 64;

/// How a pair was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairFamily {
    /// Both vectors symmetric Dirichlet(1).
    Dirichlet,
    /// Dirichlet(1) with a random subset of entries zeroed.
    SparseDirichlet,
    /// Mass on complementary halves with a small leak.
    NearDisjoint,
    /// Uniform against uniform-plus-spike of height `1/√n`, either order.
    Spike,
}

/// Deterministic source of distribution pairs.
pub struct PairSampler {
    rng: ChaCha8Rng,
}

impl PairSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn size(&mut self, min: usize) -> usize {
        self.rng.random_range(min.max(MIN_SIZE)..=MAX_SIZE)
    }

    fn dirichlet(&mut self, k: usize) -> Distribution {
        loop {
            let w: Vec<f64> = (0..k).map(|_| self.rng.sample::<f64, _>(Exp1)).collect();
            if let Ok(d) = Distribution::from_weights(&w) {
                return d;
            }
        }
    }

    fn sparse_dirichlet(&mut self, k: usize) -> Distribution {
        loop {
            let w: Vec<f64> = (0..k)
                .map(|_| {
                    if self.rng.random_bool(0.3) {
                        0.0
                    } else {
                        self.rng.sample::<f64, _>(Exp1)
                    }
                })
                .collect();
            if let Ok(d) = Distribution::from_weights(&w) {
                return d;
            }
        }
    }

    pub fn sample(&mut self, family: PairFamily) -> (Distribution, Distribution) {
        match family {
            PairFamily::Dirichlet => {
                let k = self.size(MIN_SIZE);
                (self.dirichlet(k), self.dirichlet(k))
            }
            PairFamily::SparseDirichlet => {
                let k = self.size(MIN_SIZE);
                (self.sparse_dirichlet(k), self.sparse_dirichlet(k))
            }
            PairFamily::NearDisjoint => {
                let k = self.size(MIN_SIZE);
                let half = k / 2;
                let leak = 10f64.powf(self.rng.random_range(-9.0..-1.0));
                let mut p = vec![0.0; k];
                let mut q = vec![0.0; k];
                for i in 0..k {
                    let x: f64 = self.rng.sample(Exp1);
                    let y: f64 = self.rng.sample(Exp1);
                    if i < half {
                        p[i] = x;
                        q[i] = leak * y;
                    } else {
                        p[i] = leak * x;
                        q[i] = y;
                    }
                }
                (
                    Distribution::from_weights(&p).expect("positive weights"),
                    Distribution::from_weights(&q).expect("positive weights"),
                )
            }
            PairFamily::Spike => {
                let k = self.size(3);
                let p = Distribution::uniform(k);
                let q = spike_distribution(k).expect("k >= 3");
                if self.rng.random_bool(0.5) {
                    (p, q)
                } else {
                    (q, p)
                }
            }
        }
    }
}

/// `q_1 = 1/n + 1/√n`, `q_i = 1/n − 1/((n − 1)√n)` for `i > 1`. Needs `n ≥ 3`
/// for positive entries.
pub fn spike_distribution(n: usize) -> Result<Distribution> {
    let nf = n as f64;
    let rest = 1.0 / nf - 1.0 / ((nf - 1.0) * nf.sqrt());
    let mut q = vec![rest; n];
    q[0] = 1.0 / nf + 1.0 / nf.sqrt();
    Distribution::from_weights(&q)
}

/// Tally of one inequality across a sweep.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct InequalityTally {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    /// Smallest `lhs − rhs` seen (`null` if nothing was checked).
    pub worst_slack: Option<f64>,
}

impl InequalityTally {
    fn new(name: String) -> Self {
        Self {
            name,
            checked: 0,
            violations: 0,
            worst_slack: None,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64) {
        self.checked += 1;
        // +∞ on the left satisfies every bound
        let slack = if lhs == f64::INFINITY {
            f64::INFINITY
        } else {
            lhs - rhs
        };
        if slack.is_nan() || slack < -VERIFY_TOL * rhs.abs().max(1.0) {
            self.violations += 1;
        }
        if slack.is_finite() {
            self.worst_slack = Some(self.worst_slack.map_or(slack, |w| w.min(slack)));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Dirichlet(1) pairs.
    pub pairs: usize,
    /// Pairs drawn from the adversarial families, cycled in order.
    pub adversarial: usize,
    pub thetas: Vec<f64>,
    pub seed: u64,
}

impl SweepConfig {
    /// `pairs` Dirichlet pairs plus `pairs / 4` adversarial ones.
    pub fn new(pairs: usize, thetas: Vec<f64>, seed: u64) -> Self {
        Self {
            pairs,
            adversarial: pairs / 4,
            thetas,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GridSummary {
    pub checked: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepReport {
    pub schema: u32,
    pub seed: u64,
    pub pairs: usize,
    pub thetas: Vec<f64>,
    /// Bound checks performed on sampled pairs.
    pub checked: usize,
    pub violations: usize,
    pub worst_slack: Option<f64>,
    pub inequalities: Vec<InequalityTally>,
    pub grids: GridSummary,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.grids.violations == 0
    }
}

/// Checks, on every sampled pair, `KL ≥ 0`, Pinsker, the generalized
/// Pinsker bound for each `θ`, its `((1 − ln 2)/2) ‖p − q‖₁²` consequence at
/// `θ = 1`, and `KL ≥ Hellinger²`. Each `θ` is also checked on a grid over
/// `(−1, 100]`, and the three logarithm inequalities on a grid over
/// `(0, 100]`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    for &theta in &cfg.thetas {
        theta_constants(theta)?;
    }
    let mut nonneg = InequalityTally::new("kl_nonnegative".into());
    let mut pinsker = InequalityTally::new("pinsker".into());
    let mut gen: Vec<InequalityTally> = cfg
        .thetas
        .iter()
        .map(|t| InequalityTally::new(format!("gen_pinsker[theta={t}]")))
        .collect();
    let mut weak = InequalityTally::new("gen_pinsker_vs_weak_pinsker".into());
    let mut hell = InequalityTally::new("hellinger".into());
    let weak_const = (1.0 - std::f64::consts::LN_2) / 2.0;

    let adversarial = [
        PairFamily::SparseDirichlet,
        PairFamily::NearDisjoint,
        PairFamily::Spike,
    ];
    let families = std::iter::repeat_n(PairFamily::Dirichlet, cfg.pairs)
        .chain((0..cfg.adversarial).map(|k| adversarial[k % adversarial.len()]));
    let mut sampler = PairSampler::new(cfg.seed);
    let mut pairs = 0;
    for family in families {
        let (p, q) = sampler.sample(family);
        pairs += 1;
        let kl = kl_divergence(&p, &q)?;
        nonneg.record(kl, 0.0);
        let pin = pinsker_lower_bound(&p, &q)?;
        pinsker.record(kl, pin);
        for (tally, &theta) in gen.iter_mut().zip(&cfg.thetas) {
            tally.record(kl, gen_pinsker_rhs(&p, &q, theta)?);
        }
        weak.record(gen_pinsker_rhs(&p, &q, 1.0)?, weak_const * 2.0 * pin);
        let h = hellinger_distance(&p, &q)?;
        hell.record(kl, h * h);
    }

    let mut grids = GridSummary {
        checked: 0,
        violations: 0,
    };
    let t_grid = open_grid(-1.0, 100.0, GRID_POINTS);
    for &theta in &cfg.thetas {
        let r = verify_theta_facts(theta, &t_grid)?;
        grids.checked += r.checked;
        grids.violations += r.violations;
    }
    let e = verify_easier_inequalities(&open_grid(0.0, 100.0, GRID_POINTS), GRID_SLACK);
    grids.checked += e.checked;
    grids.violations += e.violations;

    let mut inequalities = vec![nonneg, pinsker];
    inequalities.extend(gen);
    inequalities.push(weak);
    inequalities.push(hell);
    let checked = inequalities.iter().map(|t| t.checked).sum();
    let violations = inequalities.iter().map(|t| t.violations).sum();
    let worst_slack = inequalities
        .iter()
        .filter_map(|t| t.worst_slack)
        .reduce(f64::min);
    Ok(SweepReport {
        schema: 1,
        seed: cfg.seed,
        pairs,
        thetas: cfg.thetas.clone(),
        checked,
        violations,
        worst_slack,
        inequalities,
        grids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sweep() {
        let r = run_sweep(&SweepConfig::new(0, vec![1.0], 1)).unwrap();
        assert_eq!(r.checked, 0);
        assert_eq!(r.pairs, 0);
        assert_eq!(r.worst_slack, None);
        assert!(r.passed());
    }

    #[test]
    fn bad_theta() {
        assert!(run_sweep(&SweepConfig::new(10, vec![-1.0], 1)).is_err());
    }

    #[test]
    fn small_sweep_is_clean_and_deterministic() {
        let cfg = SweepConfig::new(400, vec![0.5, 1.0, 4.0], 9);
        let a = run_sweep(&cfg).unwrap();
        assert!(a.passed(), "{a:?}");
        assert_eq!(a.pairs, 500);
        // 5 fixed inequalities minus 1 plus one per theta
        assert_eq!(a.checked, 500 * 7);
        assert_eq!(a, run_sweep(&cfg).unwrap());
    }

    #[test]
    fn families_produce_valid_pairs() {
        let mut s = PairSampler::new(3);
        for family in [
            PairFamily::Dirichlet,
            PairFamily::SparseDirichlet,
            PairFamily::NearDisjoint,
            PairFamily::Spike,
        ] {
            for _ in 0..50 {
                let (p, q) = s.sample(family);
                assert_eq!(p.len(), q.len());
                assert!((MIN_SIZE..=MAX_SIZE).contains(&p.len()));
            }
        }
    }

    #[test]
    fn spike_needs_three_points() {
        assert!(spike_distribution(2).is_err());
        let q = spike_distribution(100).unwrap();
        assert!((q.as_slice()[0] - 0.11).abs() < 1e-15);
    }
}
