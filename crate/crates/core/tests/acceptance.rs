//! Acceptance suite. Prints one line per criterion and a summary.
//!
//! `cargo test --release --test acceptance -- 2 5` runs a subset.
//! `UFOREST_ACCEPTANCE_STRICT=1` turns any FAIL into a nonzero exit.
//! `UFOREST_CONNECTOME_CSV` (and optionally `UFOREST_CONNECTOME_LABEL`,
//! default `type`) enables criterion 10.

mod common;

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use uforest::baselines::{ksg_mi, KnnIndex, KsgParams, Neighbor};
use uforest::experiments::{
    posterior_curves, sweep, write_curves, write_decomposition, Estimator, FIG4_SUBSETS,
};
use uforest::forest::{finite_sample_correct, TreePosterior};
use uforest::inference::{
    mi_decomposition, permutation_test, DecompositionRow, PermutationTestResult,
};
use uforest::io::{load_csv, save_csv, write_results, ResultRow, RunConfig};
use uforest::sim::{sample, truth};
use uforest::tree::{fit_tree, TreeParams};
use uforest::{ForestConfig, LabeledDataset, SettingKind, SimSetting};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

struct Outcome {
    status: Status,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome {
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

/// A sweep run by a criterion, kept for the determinism check.
struct Recorded {
    criterion: usize,
    config: RunConfig,
    rows: Vec<ResultRow>,
}

#[derive(Default)]
struct Suite {
    sweeps: Vec<Recorded>,
}

const TRIALS: usize = 20;
const N_GRID: [usize; 5] = [500, 1000, 2000, 4000, 6000];
const MU_GRID: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];

fn config(seed: u64, estimators: &[Estimator]) -> RunConfig {
    RunConfig {
        estimators: estimators.to_vec(),
        trials: TRIALS,
        seed,
        timing: false,
        ..RunConfig::default()
    }
}

impl Suite {
    fn sweep(&mut self, criterion: usize, config: RunConfig) -> Vec<ResultRow> {
        let rows = sweep(&config).expect("sweep");
        self.sweeps.push(Recorded {
            criterion,
            config,
            rows: rows.clone(),
        });
        rows
    }
}

fn mean_of(
    rows: &[ResultRow],
    estimator: Estimator,
    pick: impl Fn(&ResultRow) -> bool,
    value: fn(&ResultRow) -> f64,
) -> f64 {
    let v: Vec<f64> = rows
        .iter()
        .filter(|r| r.estimator == estimator.name() && pick(r))
        .map(value)
        .collect();
    assert!(!v.is_empty());
    v.iter().sum::<f64>() / v.len() as f64
}

fn spherical_truth(mu: f64, d: usize) -> uforest::TruthValues {
    truth(&SimSetting::new(SettingKind::Spherical, mu, 0.5, d).unwrap()).unwrap()
}

fn c1(suite: &mut Suite) -> Outcome {
    let start = Instant::now();
    let cfg = RunConfig {
        mu: 0.0,
        grid_mu: vec![0.0],
        grid_n: vec![6000],
        ..config(1, &[Estimator::Uf])
    };
    let rows = suite.sweep(1, cfg);
    let h = mean_of(&rows, Estimator::Uf, |_| true, |r| r.h_y_given_x);
    let mi = mean_of(&rows, Estimator::Uf, |_| true, |r| r.mi);
    let secs = start.elapsed().as_secs_f64();
    let ln2 = 2f64.ln();
    outcome(
        (h - ln2).abs() <= 0.02 && mi.abs() <= 0.02 && secs <= 120.0,
        format!("mu=0, n=6000: mean H(Y|X) {h:.4} vs log 2 {ln2:.4} (tol 0.02), mean I {mi:+.4} (tol 0.02), {secs:.0}s (limit 120s)"),
    )
}

fn c2(suite: &mut Suite) -> Outcome {
    let start = Instant::now();
    let cfg = RunConfig {
        grid_n: N_GRID.to_vec(),
        ..config(2, &[Estimator::Uf, Estimator::Cart])
    };
    let rows = suite.sweep(2, cfg);
    let t = spherical_truth(1.0, 1).h_y_given_x;
    let errors: Vec<f64> = N_GRID
        .iter()
        .map(|&n| (mean_of(&rows, Estimator::Uf, |r| r.n == n, |r| r.h_y_given_x) - t).abs())
        .collect();
    let rises: Vec<f64> = errors
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&d| d > 0.0)
        .collect();
    let monotone = rises.is_empty() || (rises.len() == 1 && rises[0] <= 0.005);
    let last = errors[errors.len() - 1];
    let cart = mean_of(&rows, Estimator::Cart, |r| r.n == 6000, |r| r.h_y_given_x);
    let secs = start.elapsed().as_secs_f64();
    let errs: Vec<String> = errors.iter().map(|e| format!("{e:.4}")).collect();
    outcome(
        monotone && last <= 0.03 && t - cart > 0.05 && secs <= 900.0,
        format!(
            "truth {t:.4}; UF |error| over n = [{}] (monotone: {monotone}, last <= 0.03: {}); CART at 6000 {cart:.4}, {:.4} below truth (> 0.05 needed); {secs:.0}s (limit 900s)",
            errs.join(", "),
            last <= 0.03,
            t - cart
        ),
    )
}

fn c3(suite: &mut Suite) -> Outcome {
    let start = Instant::now();
    let high = suite.sweep(
        3,
        RunConfig {
            grid_n: vec![6000],
            grid_d: vec![20],
            ..config(3, &[Estimator::Uf])
        },
    );
    let mid = suite.sweep(
        3,
        RunConfig {
            grid_n: vec![6000],
            grid_d: vec![16],
            ..config(33, &[Estimator::Uf, Estimator::Ksg, Estimator::MixedKsg])
        },
    );
    let t = spherical_truth(1.0, 1).mi_normalized;
    let dev = |rows: &[ResultRow], e: Estimator| {
        (mean_of(rows, e, |_| true, |r| r.mi_normalized) - t).abs()
    };
    let uf20 = dev(&high, Estimator::Uf);
    let (uf16, ksg16, mixed16) = (
        dev(&mid, Estimator::Uf),
        dev(&mid, Estimator::Ksg),
        dev(&mid, Estimator::MixedKsg),
    );
    let secs = start.elapsed().as_secs_f64();
    outcome(
        uf20 <= 0.1 && ksg16 > uf16 && mixed16 > uf16 && secs <= 1200.0,
        format!(
            "normalized truth {t:.4}; UF d=20 deviation {uf20:.4} (tol 0.1); d=16 deviations UF {uf16:.4}, KSG {ksg16:.4}, mixed KSG {mixed16:.4}; {secs:.0}s (limit 1200s)"
        ),
    )
}

fn c4(suite: &mut Suite) -> Outcome {
    let start = Instant::now();
    let cfg = RunConfig {
        grid_n: vec![3000],
        grid_mu: MU_GRID.to_vec(),
        ..config(4, &[Estimator::Uf])
    };
    let rows = suite.sweep(4, cfg);
    let means: Vec<f64> = MU_GRID
        .iter()
        .map(|&mu| {
            mean_of(
                &rows,
                Estimator::Uf,
                |r| r.mu == Some(mu),
                |r| r.h_y_given_x,
            )
        })
        .collect();
    let truths: Vec<f64> = MU_GRID
        .iter()
        .map(|&mu| spherical_truth(mu, 1).h_y_given_x)
        .collect();
    let non_increasing = means.windows(2).all(|w| w[1] <= w[0]);
    let worst = means
        .iter()
        .zip(&truths)
        .map(|(m, t)| (m - t).abs())
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    let pairs: Vec<String> = means
        .iter()
        .zip(&truths)
        .map(|(m, t)| format!("{m:.4}/{t:.4}"))
        .collect();
    outcome(
        non_increasing && worst <= 0.05 && secs <= 600.0,
        format!(
            "estimate/truth over mu = [{}]; non-increasing: {non_increasing}; worst |error| {worst:.4} (tol 0.05); {secs:.0}s (limit 600s)",
            pairs.join(", ")
        ),
    )
}

fn fig1_grid() -> Vec<f64> {
    (0..=60).map(|i| -3.0 + 0.1 * i as f64).collect()
}

fn c5() -> Outcome {
    let start = Instant::now();
    let setting = SimSetting::new(SettingKind::Spherical, 1.0, 0.5, 1).unwrap();
    let grid = fig1_grid();
    let points = posterior_curves(
        &[Estimator::Uf, Estimator::Cart],
        &setting,
        6000,
        TRIALS,
        &grid,
        1,
        &ForestConfig::default(),
        5,
    )
    .unwrap();
    let (uf, cart) = points.split_at(grid.len());
    let wins = uf
        .iter()
        .zip(cart)
        .filter(|(u, c)| u.variance <= c.variance)
        .count();
    let share = wins as f64 / grid.len() as f64;
    let tails = uf
        .iter()
        .zip(cart)
        .filter(|(u, c)| u.x.abs() > 1.45 && u.variance > c.variance)
        .count();
    outcome(
        share >= 0.8,
        format!(
            "UF variance <= CART variance at {wins}/{} grid points ({:.0}%, need 80%); {tails} of the losses at |x| > 1.45; {:.0}s",
            grid.len(),
            100.0 * share,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn c6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_ratio, mut worst_sum, mut worst_large) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let k = rng.random_range(2..=10);
        let n = rng.random_range(1..=100);
        let kappa = rng.random_range(0.1..=10.0);
        let active = rng.random_range(1..=k);
        let mut counts = vec![0usize; k];
        for _ in 0..n {
            counts[rng.random_range(0..active)] += 1;
        }
        let raw = TreePosterior::from_counts(&counts, k).unwrap();
        let change = |c: &TreePosterior| {
            raw.row(0)
                .iter()
                .zip(c.row(0))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let corrected = finite_sample_correct(&raw, kappa).unwrap();
        worst_ratio = worst_ratio.max(change(&corrected) / (k as f64 / (kappa * n as f64)));
        worst_sum = worst_sum.max((corrected.row(0).iter().sum::<f64>() - 1.0).abs());
        let large = finite_sample_correct(&raw, kappa * 1e8).unwrap();
        worst_large = worst_large.max(change(&large));
    }
    outcome(
        worst_ratio <= 1.0 && worst_sum <= 1e-12 && worst_large < 1e-6,
        format!(
            "1000 leaves: max change / (K/(kappa N)) {worst_ratio:.4} (<= 1), max |row sum - 1| {worst_sum:.1e} (<= 1e-12), max change at kappa*1e8 {worst_large:.1e} (< 1e-6)"
        ),
    )
}

fn brute_knn(
    points: &[f64],
    dim: usize,
    q: &[f64],
    k: usize,
    exclude: Option<usize>,
) -> Vec<Neighbor> {
    let mut all: Vec<Neighbor> = (0..points.len() / dim)
        .filter(|&i| Some(i) != exclude)
        .map(|i| Neighbor {
            index: i,
            dist: points[i * dim..(i + 1) * dim]
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        })
        .collect();
    all.sort_by(|a, b| a.dist.total_cmp(&b.dist).then(a.index.cmp(&b.index)));
    all.truncate(k);
    all
}

fn c7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut knn_ok = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=500);
        let dim = [1, 2, 3, 5, 8, 17][rng.random_range(0..6)];
        let grid = rng.random::<bool>();
        let points: Vec<f64> = (0..n * dim)
            .map(|_| {
                let v: f64 = rng.random_range(-1.0..1.0);
                if grid {
                    (v * 4.0).round()
                } else {
                    v
                }
            })
            .collect();
        let index = KnnIndex::new(points.clone(), dim).unwrap();
        let k = rng.random_range(1..n.min(12));
        let mut ok = true;
        for i in 0..n.min(60) {
            let q = &points[i * dim..(i + 1) * dim];
            ok &= index.knn(q, k, Some(i)).unwrap() == brute_knn(&points, dim, q, k, Some(i));
            let r = brute_knn(&points, dim, q, k, Some(i))[k - 1].dist;
            let brute_count = (0..n)
                .filter(|&j| {
                    brute_knn(&points[j * dim..(j + 1) * dim], dim, q, 1, None)[0].dist < r
                })
                .count();
            ok &= index.count_within(q, r, true) == brute_count;
        }
        let q: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect();
        ok &= index.knn(&q, k, None).unwrap() == brute_knn(&points, dim, &q, k, None);
        knn_ok += usize::from(ok);
    }

    let mut tree_ok = 0;
    for seed in 0..20 {
        let (xs, ys, k, data) = common::random_instance(1000 + seed);
        let params = TreeParams {
            n_candidate_features: Some(data.n_features()),
            ..TreeParams::default()
        };
        let tree = fit_tree(&data, &params, seed).unwrap();
        let rows: Vec<usize> = (0..xs.len()).collect();
        tree_ok += usize::from(common::same_shape(
            &tree,
            0,
            &common::oracle(&xs, &ys, &rows, k, 1),
        ));
    }

    let n = 6000;
    let mut ksg = Vec::new();
    for (i, rho) in [0.0f64, 0.3, 0.6, 0.9].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(70 + i as u64);
        let (mut x, mut y) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for _ in 0..n {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            x.push(a);
            y.push(rho * a + (1.0 - rho * rho).sqrt() * b);
        }
        let est = ksg_mi(&x, &y, n, &KsgParams::default()).unwrap();
        let exact = -0.5 * (1.0 - rho * rho).ln();
        ksg.push((rho, est, exact));
    }
    let ksg_ok = ksg.iter().all(|(_, e, t)| (e - t).abs() <= 0.05);
    let shown: Vec<String> = ksg
        .iter()
        .map(|(r, e, t)| format!("rho {r}: {e:.4}/{t:.4}"))
        .collect();
    outcome(
        knn_ok == 100 && tree_ok == 20 && ksg_ok,
        format!(
            "k-NN matches brute force on {knn_ok}/100 instances; fit_tree matches exhaustive CART on {tree_ok}/20; KSG estimate/exact [{}] (tol 0.05)",
            shown.join(", ")
        ),
    )
}

fn chain_rule_gap(rows: &[DecompositionRow]) -> f64 {
    rows.iter()
        .map(|r| (r.i_in + r.i_cond - r.i_total).abs())
        .fold(0.0, f64::max)
}

fn named_dataset(seed: u64) -> LabeledDataset {
    let data = sample(
        &SimSetting::new(SettingKind::ThreeClass, 1.0, 1.0 / 3.0, 4).unwrap(),
        600,
        seed,
    )
    .unwrap();
    let labels = data.labels().unwrap().to_vec();
    let features: Vec<f64> = (0..data.n_rows())
        .flat_map(|i| {
            let r = data.row(i);
            [(r[0] * 2.0).round(), r[1], (r[2] * 3.0).round().abs(), r[3]]
        })
        .collect();
    LabeledDataset::new(
        features,
        ["cluster", "dist", "claw", "age"]
            .map(String::from)
            .to_vec(),
        labels,
        ["KC", "MBON", "PN"].map(String::from).to_vec(),
    )
    .unwrap()
}

fn decomposition_inputs() -> (LabeledDataset, LabeledDataset) {
    let simulated = sample(
        &SimSetting::new(SettingKind::Spherical, 1.0, 0.5, 4).unwrap(),
        800,
        8,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    save_csv(&named_dataset(8), &path).unwrap();
    (simulated, load_csv(&path, Some("y")).unwrap())
}

fn small_forest() -> ForestConfig {
    ForestConfig {
        n_trees: 100,
        ..ForestConfig::default()
    }
}

fn c8() -> Outcome {
    let (simulated, table) = decomposition_inputs();
    let sim_subsets: Vec<Vec<&str>> = vec![
        vec![],
        vec!["x1"],
        vec!["x1", "x2"],
        vec!["x2", "x3", "x4"],
        vec!["x1", "x2", "x3", "x4"],
    ];
    let a = mi_decomposition(&simulated, &sim_subsets, &small_forest(), 8).unwrap();
    let fig4: Vec<Vec<&str>> = FIG4_SUBSETS.iter().map(|s| s.to_vec()).collect();
    let b = mi_decomposition(&table, &fig4, &small_forest(), 8).unwrap();
    let gap = chain_rule_gap(&a).max(chain_rule_gap(&b));
    outcome(
        gap <= 1e-12,
        format!(
            "{} simulated + {} CSV rows, max |i_in + i_cond - i_total| = {gap:.1e} (<= 1e-12)",
            a.len(),
            b.len()
        ),
    )
}

fn c9() -> Outcome {
    let start = Instant::now();
    let config = ForestConfig::default();
    let null_setting = SimSetting::new(SettingKind::Spherical, 0.0, 0.5, 1).unwrap();
    let meta = 50;
    let mut rejections = 0;
    for t in 0..meta {
        let data = sample(&null_setting, 200, 900 + t).unwrap();
        let r = permutation_test(&data, &config, 199, t).unwrap();
        rejections += usize::from(r.p_value <= 0.05);
    }
    let rate = rejections as f64 / meta as f64;
    let strong = SimSetting::new(SettingKind::Spherical, 10.0, 0.5, 1).unwrap();
    let p_values: Vec<f64> = (0..5)
        .map(|t| {
            permutation_test(&sample(&strong, 1000, 950 + t).unwrap(), &config, 99, t)
                .unwrap()
                .p_value
        })
        .collect();
    let floor = p_values.iter().all(|&p| p == 0.01);
    outcome(
        (0.01..=0.09).contains(&rate) && floor,
        format!(
            "null (mu=0, n=200, R=199): {rejections}/{meta} rejections at 0.05, rate {rate:.2} (need [0.01, 0.09]); mu=10, n=1000, R=99: p = {p_values:?} (need 0.01 each); {:.0}s",
            start.elapsed().as_secs_f64()
        ),
    )
}

fn c10() -> Outcome {
    let Ok(path) = std::env::var("UFOREST_CONNECTOME_CSV") else {
        return Outcome {
            status: Status::Skip,
            detail: "UFOREST_CONNECTOME_CSV not set".into(),
        };
    };
    let label = std::env::var("UFOREST_CONNECTOME_LABEL").unwrap_or_else(|_| "type".into());
    let data = match load_csv(&path, Some(&label)) {
        Ok(d) if d.is_labeled() => d,
        Ok(_) => return outcome(false, format!("{path} has no '{label}' column")),
        Err(e) => return outcome(false, e.to_string()),
    };
    let config = ForestConfig::default();
    let rows = match mi_decomposition(&data, &[vec!["cluster"]], &config, 10) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let r = &rows[0];
    let (n_in, n_cond, n_total) = r.normalized();
    let close = |a: f64, b: f64| (a - b).abs() <= 0.05;
    let raw_ok = close(r.i_total, 0.917) && close(r.i_in, 0.800) && close(r.i_cond, 0.116);
    let norm_ok = close(n_total, 0.917) && close(n_in, 0.800) && close(n_cond, 0.116);
    let test = permutation_test(&data, &config, 1000, 10).unwrap();
    let p_ok = test.p_value == 1.0 / 1001.0;
    outcome(
        (raw_ok || norm_ok) && p_ok,
        format!(
            "{{cluster}}: raw ({:.3}, {:.3}, {:.3}), normalized ({n_in:.3}, {n_cond:.3}, {n_total:.3}) vs (0.800, 0.116, 0.917) tol 0.05; p {:.4} (R=1000)",
            r.i_in, r.i_cond, r.i_total, test.p_value
        ),
    )
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn csv_of(rows: &[ResultRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_results(rows, &mut buf).unwrap();
    buf
}

fn perm_csv(r: &PermutationTestResult) -> Vec<u8> {
    let mut s = format!("{:?},{:?}\n", r.observed, r.p_value);
    for v in &r.null_values {
        s += &format!("{v:?}\n");
    }
    s.into_bytes()
}

/// Every recorded sweep is re-run with its first two trials under one and
/// four worker threads. Both must match each other and the same trials of
/// the full run byte for byte. Curve, decomposition and permutation outputs
/// are compared across thread counts at reduced size.
fn c11(suite: &Suite) -> Outcome {
    let start = Instant::now();
    let short = 2;
    let mut checked = Vec::new();
    let mut failed = Vec::new();
    for rec in &suite.sweeps {
        let cfg = RunConfig {
            trials: short,
            ..rec.config.clone()
        };
        let one = in_pool(1, || sweep(&cfg).unwrap());
        let four = in_pool(4, || sweep(&cfg).unwrap());
        let per_trial = rec.config.estimators.len();
        let block = rec.config.trials * per_trial;
        let prefix: Vec<ResultRow> = rec
            .rows
            .chunks(block)
            .flat_map(|c| c[..short * per_trial].iter().cloned())
            .collect();
        let (a, b, c) = (csv_of(&one), csv_of(&four), csv_of(&prefix));
        let name = format!("c{}", rec.criterion);
        if a == b && a == c {
            checked.push(name);
        } else {
            failed.push(name);
        }
    }

    let setting = SimSetting::new(SettingKind::Spherical, 1.0, 0.5, 1).unwrap();
    let curves = |threads| {
        in_pool(threads, || {
            let pts = posterior_curves(
                &[Estimator::Uf, Estimator::Cart],
                &setting,
                6000,
                short,
                &fig1_grid(),
                1,
                &ForestConfig::default(),
                5,
            )
            .unwrap();
            let mut buf = Vec::new();
            write_curves(&pts, &mut buf).unwrap();
            buf
        })
    };
    let mut compare = |name: &str, a: Vec<u8>, b: Vec<u8>| {
        if a == b {
            checked.push(name.to_string());
        } else {
            failed.push(name.to_string());
        }
    };
    compare("c5", curves(1), curves(4));

    let (simulated, table) = decomposition_inputs();
    let decomp = |threads| {
        in_pool(threads, || {
            let mut buf = Vec::new();
            for (data, subsets) in [
                (&simulated, vec![vec!["x1".to_string()]]),
                (
                    &table,
                    FIG4_SUBSETS
                        .iter()
                        .map(|s| s.iter().map(|f| f.to_string()).collect())
                        .collect(),
                ),
            ] {
                let rows = mi_decomposition(data, &subsets, &small_forest(), 8).unwrap();
                write_decomposition(&rows, &mut buf).unwrap();
            }
            buf
        })
    };
    compare("c8", decomp(1), decomp(4));

    let null = sample(
        &SimSetting::new(SettingKind::Spherical, 0.0, 0.5, 1).unwrap(),
        200,
        900,
    )
    .unwrap();
    let perm = |threads| {
        in_pool(threads, || {
            perm_csv(&permutation_test(&null, &ForestConfig::default(), 199, 0).unwrap())
        })
    };
    compare("c9", perm(1), perm(4));

    let ksg = |threads| {
        in_pool(threads, || {
            let d = named_dataset(3);
            let y: Vec<f64> = d.labels().unwrap().iter().map(|&c| c as f64).collect();
            format!(
                "{:?}",
                ksg_mi(d.features(), &y, d.n_rows(), &KsgParams::default()).unwrap()
            )
            .into_bytes()
        })
    };
    compare("c7", ksg(1), ksg(4));

    outcome(
        failed.is_empty(),
        format!(
            "identical across 1 and 4 threads: [{}]; differing: [{}]; {:.0}s",
            checked.join(", "),
            failed.join(", "),
            start.elapsed().as_secs_f64()
        ),
    )
}

const TITLES: [&str; 11] = [
    "independence baseline",
    "consistency in n",
    "high-dimension robustness",
    "effect-size sweep",
    "posterior variance",
    "correction bound",
    "oracle equivalence",
    "chain-rule identity",
    "permutation calibration",
    "connectome regression",
    "determinism",
];

fn main() {
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let wanted = |c: usize| selected.is_empty() || selected.contains(&c);
    let strict = std::env::var("UFOREST_ACCEPTANCE_STRICT").is_ok_and(|v| v != "0");
    let mut suite = Suite::default();
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let total = Instant::now();

    for c in 1..=11 {
        if !wanted(c) {
            continue;
        }
        let o = match c {
            1 => c1(&mut suite),
            2 => c2(&mut suite),
            3 => c3(&mut suite),
            4 => c4(&mut suite),
            5 => c5(),
            6 => c6(),
            7 => c7(),
            8 => c8(),
            9 => c9(),
            10 => c10(),
            _ => c11(&suite),
        };
        println!(
            "criterion {c:>2} {} {}: {}",
            o.status,
            TITLES[c - 1],
            o.detail
        );
        results.push((c, o));
    }

    let count = |s: Status| results.iter().filter(|(_, o)| o.status == s).count();
    let failed: Vec<String> = results
        .iter()
        .filter(|(_, o)| o.status == Status::Fail)
        .map(|(c, _)| c.to_string())
        .collect();
    println!(
        "acceptance: {} passed, {} failed, {} skipped in {:.0}s{}",
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Skip),
        total.elapsed().as_secs_f64(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" (failed: {})", failed.join(", "))
        }
    );
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}
