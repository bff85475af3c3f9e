//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sinkscale::divergence::{
    open_grid, verify_easier_inequalities, verify_theta_facts, Distribution, GRID_SLACK,
};
use sinkscale::matching::{distinguish, BipartiteGraph, Verdict};
use sinkscale::oracles::{dense, gen_scalable_instance, max_matching_exact, GeneratorConfig};
use sinkscale::sinkhorn::{certify_potential, run, StoppingRule};
use sinkscale::verify::{run_sweep, spike_distribution, SweepConfig};
use sinkscale::{
    gen_pinsker_rhs, iteration_budget, pinsker_lower_bound, validate_instance, ScalingInstance,
    SparseNonnegMatrix, TargetVectors,
};

/// Result of one criterion: pass flag and a one-line detail.
type Check = (bool, String);

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

struct Witnessed {
    inst: ScalingInstance,
    witness: SparseNonnegMatrix,
}

/// 100 instances with `n, m ≤ 50` and a known feasible scaling.
fn witnessed_instances() -> Vec<Witnessed> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    (0..100)
        .map(|k| {
            let n = rng.random_range(1..=50);
            let mut cfg = GeneratorConfig::new(n, n, 1.0, k);
            if k % 4 == 0 {
                cfg.uniform_targets = true;
            } else {
                cfg.m = rng.random_range(1..=50);
            }
            cfg.density = rng.random_range(0.05..=1.0);
            let g = gen_scalable_instance(&cfg).expect("generator");
            Witnessed {
                inst: validate_instance(g.matrix, &g.targets).expect("valid instance"),
                witness: g.witness,
            }
        })
        .collect()
}

fn fixed_point() -> Check {
    let start = Instant::now();
    let a = SparseNonnegMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap();
    let inst = validate_instance(a, &TargetVectors::uniform(2)).unwrap();
    let res = run(&inst, &StoppingRule::l2(1e-9), None).unwrap();
    let s2 = 2f64.sqrt();
    let expected = [[2.0 - s2, s2 - 1.0], [s2 - 1.0, 2.0 - s2]];
    let got = res.state.current().to_dense();
    let dev = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (got[i][j] - expected[i][j]).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    (
        res.outcome.converged() && dev <= 1e-5 && within(elapsed, Duration::from_secs(1)),
        format!("2x2 fixed point, max deviation {dev:.2e} (limit 1e-5), {elapsed:.2?} (limit 1 s)"),
    )
}

fn drop_identity(instances: &[Witnessed]) -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut steps = 0;
    for w in instances {
        // 100 iterations: half-steps A(0), B(0), ..., B(99)
        let rule = StoppingRule::l1(f64::MIN_POSITIVE).with_max_iters(99);
        let res = run(&w.inst, &rule, Some(&w.witness)).unwrap();
        let cert = certify_potential(&res.trace, w.inst.params()).unwrap();
        worst = worst.max(cert.max_drop_residual);
        steps += res.trace.len();
    }
    let elapsed = start.elapsed();
    (
        worst <= 1e-9 && within(elapsed, Duration::from_secs(30)),
        format!(
            "potential drops equal marginal KL, worst residual {worst:.2e} (limit 1e-9) over {steps} half-steps, {elapsed:.2?} (limit 30 s)"
        ),
    )
}

fn initial_bound(instances: &[Witnessed]) -> Check {
    let mut worst_excess = f64::NEG_INFINITY;
    let mut min_pot = f64::INFINITY;
    for w in instances {
        let rule = StoppingRule::l1(f64::MIN_POSITIVE).with_max_iters(99);
        let res = run(&w.inst, &rule, Some(&w.witness)).unwrap();
        let cert = certify_potential(&res.trace, w.inst.params()).unwrap();
        worst_excess = worst_excess.max(cert.initial_potential - cert.initial_bound);
        min_pot = min_pot.min(cert.min_potential);
    }
    (
        worst_excess <= 1e-9 && min_pot >= -1e-9,
        format!(
            "initial potential within ln(1+2Δρ/ν): worst excess {worst_excess:.3e} (limit 1e-9), min potential {min_pot:.2e} (limit -1e-9)"
        ),
    )
}

fn kl_budget(instances: &[Witnessed]) -> Check {
    let mut failures = 0;
    let mut worst_ratio: f64 = 0.0;
    for delta in [1e-2, 1e-3] {
        for w in instances {
            let budget = iteration_budget(w.inst.params(), delta).unwrap();
            let res = run(&w.inst, &StoppingRule::kl(delta), None).unwrap();
            match res.outcome {
                sinkscale::Outcome::Converged { t, value, .. } if value <= delta && t <= budget => {
                    worst_ratio = worst_ratio.max(t as f64 / budget as f64);
                }
                _ => failures += 1,
            }
        }
    }
    (
        failures == 0,
        format!(
            "KL marginal <= δ within ceil(ln(1+2Δρ/ν)/δ) for δ in {{1e-2, 1e-3}}: {failures} failures of 200, worst t/budget {worst_ratio:.3}"
        ),
    )
}

fn stopping_rules(instances: &[Witnessed]) -> Check {
    let mut failures = 0;
    let mut runs = 0;
    for eps in [0.1, 0.01] {
        for w in instances {
            for rule in [StoppingRule::l1(eps), StoppingRule::l2(eps)] {
                runs += 1;
                let res = run(&w.inst, &rule, None).unwrap();
                if !res.outcome.converged() {
                    failures += 1;
                    continue;
                }
                // re-measure the returned iterate independently
                let y = res.state.current().to_dense();
                let (sums, targets) = match res.state.phase() {
                    sinkscale::Phase::AfterColumnScale => {
                        (dense::row_sums(&y), w.inst.row_targets())
                    }
                    sinkscale::Phase::AfterRowScale => (dense::col_sums(&y), w.inst.col_targets()),
                };
                let err = match rule.metric {
                    sinkscale::Metric::L1 => dense::l1_distance(&sums, targets),
                    _ => dense::l2_distance(&sums, targets),
                };
                if err > eps * (1.0 + 1e-9) {
                    failures += 1;
                }
            }
        }
    }
    (
        failures == 0,
        format!(
            "l1 and l2 stopping rules for ε in {{0.1, 0.01}}: {failures} failures of {runs} runs"
        ),
    )
}

fn inequality_sweep() -> Check {
    let start = Instant::now();
    let report = run_sweep(&SweepConfig::new(
        100_000,
        vec![0.1, 0.5, 1.0, 2.0, 10.0],
        1,
    ))
    .unwrap();
    let elapsed = start.elapsed();
    (
        report.violations == 0 && report.pairs >= 100_000 && within(elapsed, Duration::from_secs(60)),
        format!(
            "inequality sweep: {} violations in {} checks over {} pairs, {elapsed:.2?} (limit 60 s)",
            report.violations, report.checked, report.pairs
        ),
    )
}

fn spike_separation() -> Check {
    let n = 100;
    let p = Distribution::uniform(n);
    let q = spike_distribution(n).unwrap();
    let gp = gen_pinsker_rhs(&p, &q, 1.0).unwrap();
    let pin = pinsker_lower_bound(&p, &q).unwrap();
    let factor = gp / pin;
    (
        factor >= 3.0,
        format!("spike pair at n=100: generalized bound / Pinsker = {factor:.6} (required >= 3)"),
    )
}

fn grids() -> Check {
    let t_grid = open_grid(-1.0, 100.0, 10_000);
    let mut violations = 0;
    let mut checked = 0;
    for theta in [0.25, 1.0, 4.0] {
        let r = verify_theta_facts(theta, &t_grid).unwrap();
        violations += r.violations;
        checked += r.checked;
    }
    let e = verify_easier_inequalities(&open_grid(0.0, 100.0, 10_000), GRID_SLACK);
    violations += e.violations;
    checked += e.checked;
    (
        violations == 0,
        format!("elementary inequality grids: {violations} violations in {checked} checks"),
    )
}

/// Calls `f` on every graph whose left vertices have non-empty
/// neighbourhoods, up to reordering of the left side.
fn for_each_small_graph(n: usize, f: &mut impl FnMut(BipartiteGraph)) {
    fn rec(n: usize, min: u32, rows: &mut Vec<u32>, f: &mut impl FnMut(BipartiteGraph)) {
        if rows.len() == n {
            let edges = rows
                .iter()
                .enumerate()
                .flat_map(|(i, &mask)| {
                    (0..n)
                        .filter(move |j| mask >> j & 1 == 1)
                        .map(move |j| (i, j))
                })
                .collect();
            f(BipartiteGraph::new(n, n, edges).unwrap());
            return;
        }
        for mask in min..(1u32 << n) {
            rows.push(mask);
            rec(n, mask, rows, f);
            rows.pop();
        }
    }
    rec(n, 1, &mut Vec::new(), f);
}

fn random_graph(rng: &mut ChaCha8Rng, k: usize) -> BipartiteGraph {
    let n = rng.random_range(2..=64);
    let ln = (n as f64).ln();
    let mut edges = std::collections::BTreeSet::new();
    match k % 3 {
        // planted perfect matching plus noise
        0 => {
            let mut perm: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), rng);
            edges.extend(perm.iter().enumerate().map(|(i, &j)| (i, j)));
            let p = rng.random_range(0.0..(2.0 * ln / n as f64).min(1.0));
            for i in 0..n {
                for j in 0..n {
                    if rng.random_bool(p) {
                        edges.insert((i, j));
                    }
                }
            }
        }
        // sparse random graph near the matching threshold
        1 => {
            let p = rng.random_range(0.5 * ln / n as f64..=(2.0 * ln / n as f64).min(1.0));
            for i in 0..n {
                for j in 0..n {
                    if rng.random_bool(p) {
                        edges.insert((i, j));
                    }
                }
            }
        }
        // small vertex cover: max matching at most 2c
        _ => {
            let c = rng.random_range(1..=n.div_ceil(4));
            for i in 0..n {
                for j in 0..n {
                    if (i < c || j < c) && rng.random_bool(0.5) {
                        edges.insert((i, j));
                    }
                }
            }
        }
    }
    BipartiteGraph::new(n, n, edges.into_iter().collect()).unwrap()
}

fn matching_distinguisher() -> Check {
    let start = Instant::now();
    let mut graphs = 0usize;
    let mut unsound = 0usize;
    let mut incomplete = 0usize;
    let mut check = |g: &BipartiteGraph| {
        let n = g.n_left();
        let size = max_matching_exact(g);
        for eps in [0.5, 0.25] {
            let v = distinguish(g, eps).unwrap();
            let positive = v.verdict == Verdict::PerfectMatchingLikely;
            if positive && (size as f64) < (n as f64 * (1.0 - eps)).ceil() {
                unsound += 1;
            }
            if size == n && !(positive && v.iterations_used <= v.budget) {
                incomplete += 1;
            }
        }
    };
    for n in 1..=5 {
        for_each_small_graph(n, &mut |g| {
            graphs += 1;
            check(&g);
        });
    }
    let exhaustive = graphs;
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for k in 0..500 {
        check(&random_graph(&mut rng, k));
    }
    let elapsed = start.elapsed();
    (
        unsound == 0 && incomplete == 0 && within(elapsed, Duration::from_secs(120)),
        format!(
            "matching distinguisher on {exhaustive} exhaustive (n <= 5) and 500 random graphs: {unsound} unsound, {incomplete} incomplete, {elapsed:.2?} (limit 2 min)"
        ),
    )
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_sinkscale"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).display().to_string();
    let g = gen_scalable_instance(&GeneratorConfig::new(12, 9, 0.4, 3)).unwrap();
    let write = |path: &str, m: &SparseNonnegMatrix| {
        sinkscale::io::write_matrix_market(m, std::fs::File::create(path).unwrap()).unwrap()
    };
    write(&p("a.mtx"), &g.matrix);
    write(&p("z.mtx"), &g.witness);
    let lines = |v: &[f64]| v.iter().map(|x| format!("{x}\n")).collect::<String>();
    std::fs::write(p("r.txt"), lines(g.targets.rows())).unwrap();
    std::fs::write(p("c.txt"), lines(g.targets.cols())).unwrap();
    std::fs::write(p("g.txt"), "4 4\n1 1\n1 2\n2 2\n3 3\n4 4\n4 1\n").unwrap();

    let files = |k: usize| (p(&format!("trace{k}.csv")), p(&format!("out{k}.json")));
    let mut outputs = Vec::new();
    for k in 0..2 {
        let (trace, out) = files(k);
        let scale = run_cli(&[
            "--json",
            "scale",
            "--matrix",
            &p("a.mtx"),
            "--targets",
            &p("r.txt"),
            &p("c.txt"),
            "--metric",
            "l2",
            "--eps",
            "1e-6",
            "--witness",
            &p("z.mtx"),
            "--trace",
            &trace,
            "--out",
            &out,
        ]);
        let matching = run_cli(&[
            "--json",
            "match",
            "--graph",
            &p("g.txt"),
            "--eps",
            "0.25",
            "--oracle",
        ]);
        let verify = run_cli(&[
            "--seed", "5", "verify", "--pairs", "2000", "--theta", "0.5,1,3",
        ]);
        outputs.push((
            scale,
            matching,
            verify,
            std::fs::read(&trace).unwrap(),
            std::fs::read(&out).unwrap(),
        ));
    }
    let ok = outputs[0] == outputs[1]
        && outputs[0].0 .0 == 0
        && outputs[0].1 .0 == 0
        && outputs[0].2 .0 == 0
        && !outputs[0].3.is_empty();
    (
        ok,
        format!(
            "scale, match and verify produce byte-identical output on repeat runs (exit codes {}, {}, {})",
            outputs[0].0 .0, outputs[0].1 .0, outputs[0].2 .0
        ),
    )
}

fn main() {
    // skip when invoked for test listing
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let instances = witnessed_instances();
    let criteria: Vec<Criterion> = vec![
        ("fixed point", Box::new(fixed_point)),
        (
            "potential drop identity",
            Box::new(|| drop_identity(&instances)),
        ),
        (
            "initial potential bound",
            Box::new(|| initial_bound(&instances)),
        ),
        ("KL iteration budget", Box::new(|| kl_budget(&instances))),
        (
            "l1/l2 stopping rules",
            Box::new(|| stopping_rules(&instances)),
        ),
        ("inequality sweep", Box::new(inequality_sweep)),
        ("spike separation", Box::new(spike_separation)),
        ("elementary grids", Box::new(grids)),
        ("matching distinguisher", Box::new(matching_distinguisher)),
        ("CLI determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check();
        println!(
            "{:>2}. {} {name}: {detail}",
            k + 1,
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
