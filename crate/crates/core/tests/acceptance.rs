//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance` runs everything; pass criterion numbers
//! (`cargo test --test acceptance -- 1 3`) to run a subset.

mod common;

use std::time::Instant;

use common::oracle::treernn_probs;
use common::props::{check_distances, check_pipeline};
use common::{mutag_dir, random_connected_graph, random_feature_map, random_model, stars_and_paths, EDGE_LABELS, NODE_LABELS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treernn_core::harness::{prepare, prepare_graphs, run_cv_prepared, CvReport, ExperimentConfig};
use treernn_core::nn::{
    adam_step, backward_acc, build_model, cross_entropy, forward, grad_check, Adam, AdamConfig, FeatureMap, Gradients, Pooling, Variant,
};

const CHANNELS: usize = NODE_LABELS + EDGE_LABELS;
const MUTAG_SEEDS: [u64; 3] = [0, 1, 2];
/// The overfit smoke test is about capacity and gradient plumbing, not the
/// training recipe, so it uses a larger step than the cross-validation runs.
const OVERFIT_LR: f64 = 1e-2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// CPU seconds spent in `f`, falling back to wall clock off Linux.
fn cpu_time<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let (before, started) = (cpu_seconds(), Instant::now());
    let out = f();
    let secs = before.zip(cpu_seconds()).map_or(started.elapsed().as_secs_f64(), |(a, b)| b - a);
    (out, secs)
}

/// User plus system CPU seconds of this process.
fn cpu_seconds() -> Option<f64> {
    let stat = std::fs::read_to_string("/proc/self/stat").ok()?;
    // fields after the parenthesised command name; utime and stime are 14 and 15
    let rest = &stat[stat.rfind(')')? + 2..];
    let fields: Vec<&str> = rest.split_whitespace().collect();
    let ticks: f64 = fields.get(11)?.parse::<f64>().ok()? + fields.get(12)?.parse::<f64>().ok()?;
    Some(ticks / 100.0)
}

fn properties() -> Outcome {
    let (failures, secs) = cpu_time(property_failures);
    outcome(
        failures.is_empty() && secs < 30.0,
        format!(
            "600 graphs x 4 seeds, brute-force distances for n <= 8, {} failures, {secs:.1} CPU-s (limit 30){}",
            failures.len(),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn property_failures() -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    for i in 0..600u64 {
        let n = rng.gen_range(1..=12);
        let extra = rng.gen_range(0..=n);
        let g = random_connected_graph(n, extra, rng.gen());
        for _ in 0..4 {
            if let Err(e) = check_pipeline(&g, rng.gen(), 12) {
                failures.push(format!("graph {i}: {e}"));
            }
        }
        if n <= 8 {
            if let Err(e) = check_distances(&g) {
                failures.push(format!("graph {i} distances: {e}"));
            }
        }
    }
    failures
}

fn gradients() -> Outcome {
    let ((worst, failed, parts), secs) = cpu_time(gradient_sweep);
    outcome(
        failed.is_empty() && secs < 120.0,
        format!(
            "4 variants x 10 instances, worst rel. error {worst:.2e} (limit 1e-4) [{}], failed {failed:?}, {secs:.1} CPU-s (limit 120)",
            parts.join(", ")
        ),
    )
}

fn gradient_sweep() -> (f64, Vec<String>, Vec<String>) {
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    let mut parts = Vec::new();
    for v in Variant::ALL {
        let mut variant_worst = 0.0f64;
        for seed in 0..10u64 {
            let x = random_feature_map(4, 5, 1000 + seed);
            let m = random_model(v, CHANNELS, 2, seed);
            let r = grad_check(&m, &x, (seed % 2) as usize, 1e-4, 1e-4).expect("grad check runs");
            variant_worst = variant_worst.max(r.max_rel_error());
            if !r.passed() {
                let b = r.blocks.iter().max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error)).expect("model has blocks");
                failed.push(format!(
                    "{v}/seed {seed}: {:?}[{}] rel {:.2e} abs {:.1e}",
                    b.role, b.worst_index, b.max_rel_error, b.max_abs_error
                ));
            }
        }
        worst = worst.max(variant_worst);
        parts.push(format!("{v} {variant_worst:.1e}"));
    }
    (worst, failed, parts)
}

fn oracle() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let (h, w) = match seed {
            17 => (1, 4),
            18 => (2, 3),
            _ => (4, 5),
        };
        let x = random_feature_map(h, w, 500 + seed);
        let mut m = random_model(Variant::TreeRnn, CHANNELS, 3, 40 + seed);
        if seed % 4 == 3 {
            m = m.with_pooling(Pooling::AllSteps);
        }
        let got = forward(&m, &x).expect("forward runs").probs;
        let want = treernn_probs(&m, &x);
        for (a, b) in got.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(worst <= 1e-10, format!("20 instances, max |difference| {worst:.2e} (limit 1e-10)"))
}

fn overfit() -> Outcome {
    let xs: Vec<FeatureMap> = (0..8).map(|i| random_feature_map(4, 5, 100 + i)).collect();
    let ys: Vec<usize> = (0..8).map(|i| i % 2).collect();
    let mut all = true;
    let mut parts = Vec::new();
    for v in Variant::ALL {
        let mut m = build_model(v, CHANNELS, 2, 3).expect("model builds");
        let mut adam = Adam::new(m.parameter_count(), AdamConfig { lr: OVERFIT_LR, ..Default::default() });
        let mut grads = Gradients::zeros_like(&m);
        let mut reached = None;
        for step in 1..=200 {
            grads.values_mut().fill(0.0);
            let mut total = 0.0;
            for (x, &y) in xs.iter().zip(&ys) {
                let f = forward(&m, x).expect("forward runs");
                total += cross_entropy(&f.logits, y);
                backward_acc(&m, x, &f, y, &mut grads).expect("backward runs");
            }
            if total / 8.0 < 0.05 {
                reached = Some(step - 1);
                break;
            }
            grads.scale(1.0 / 8.0);
            adam_step(&mut m, &grads, &mut adam);
        }
        all &= reached.is_some();
        parts.push(match reached {
            Some(s) => format!("{v} after {s} steps"),
            None => format!("{v} not within 200"),
        });
    }
    outcome(all, format!("loss < 0.05 on 8 images, lr {OVERFIT_LR}: {}", parts.join(", ")))
}

fn separable() -> Outcome {
    let (r, cpu) = cpu_time(|| {
        let data = prepare_graphs("stars-paths", stars_and_paths(), 1, 0).expect("fixture prepares");
        let cfg = ExperimentConfig { dataset: "stars-paths".into(), epochs: 50, ..Default::default() };
        run_cv_prepared(&cfg, &data).expect("cv runs")
    });
    outcome(
        r.summary.mean_best == 1.0 && cpu < 300.0,
        format!("40 graphs, 10 folds, 50 epochs: mean best {:.2}%, {cpu:.1} CPU-s (limit 300)", 100.0 * r.summary.mean_best),
    )
}

struct MutagRuns {
    /// Mean best accuracy per seed for TreeRNN at 1x and 11x.
    one: Vec<f64>,
    eleven: Vec<f64>,
    cpu_seconds: f64,
}

fn mutag_runs() -> MutagRuns {
    let ((one, eleven), cpu_seconds) = cpu_time(|| {
        let (mut one, mut eleven) = (Vec::new(), Vec::new());
        for seed in MUTAG_SEEDS {
            for aug in [1, 11] {
                let cfg = ExperimentConfig { aug, seed, ..Default::default() };
                let data = prepare(&mutag_dir(), &cfg).expect("MUTAG prepares");
                let r = run_cv_prepared(&cfg, &data).expect("cv runs");
                eprintln!(
                    "  MUTAG treernn aug {aug:>2} seed {seed}: best {:.2} ± {:.2}%, final {:.2}% ({:.0}s)",
                    100.0 * r.summary.mean_best,
                    100.0 * r.summary.std_best,
                    100.0 * r.summary.mean_final,
                    r.wall_clock_seconds
                );
                if aug == 1 { &mut one } else { &mut eleven }.push(r.summary.mean_best);
            }
        }
        (one, eleven)
    });
    MutagRuns { one, eleven, cpu_seconds }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn augmentation_trend(runs: &MutagRuns) -> Outcome {
    let (one, eleven) = (mean(&runs.one), mean(&runs.eleven));
    let minutes = runs.cpu_seconds / 60.0;
    let pass = eleven >= one + 0.02 && eleven >= 0.85 && minutes <= 60.0;
    outcome(
        pass,
        format!(
            "3 seeds, 50 epochs: 1x {:.2}%, 11x {:.2}% (gain {:+.2} points, need +2 and 11x >= 85%), {minutes:.1} CPU-min (limit 60)",
            100.0 * one,
            100.0 * eleven,
            100.0 * (eleven - one)
        ),
    )
}

fn operator_order(runs: &MutagRuns) -> Outcome {
    let mut mlp = Vec::new();
    for seed in MUTAG_SEEDS {
        let cfg = ExperimentConfig { variant: Variant::MlpOnly, seed, ..Default::default() };
        let data = prepare(&mutag_dir(), &cfg).expect("MUTAG prepares");
        mlp.push(run_cv_prepared(&cfg, &data).expect("cv runs").summary.mean_best);
    }
    let (tree, mlp) = (mean(&runs.one), mean(&mlp));
    outcome(tree >= mlp, format!("1x, 50 epochs, 3 seeds: treernn {:.2}% vs mlponly {:.2}%", 100.0 * tree, 100.0 * mlp))
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig { aug: 3, epochs: 3, seed: 11, ..Default::default() };
    let run = || -> CvReport {
        let data = prepare(&mutag_dir(), &cfg).expect("MUTAG prepares");
        run_cv_prepared(&cfg, &data).expect("cv runs")
    };
    let (a, b) = (run().without_timing().to_json(), run().without_timing().to_json());
    outcome(a == b, format!("MUTAG treernn aug 3, 3 epochs, two full runs: {} report bytes, identical {}", a.len(), a == b))
}

fn main() {
    // Criterion numbers requested on the command line; libtest flags are ignored.
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |n: usize| wanted.is_empty() || wanted.contains(&n);
    let names = [
        "property suite",
        "gradient suite",
        "oracle forward equivalence",
        "overfit smoke",
        "separable-fixture CV",
        "MUTAG augmentation trend",
        "operator ordering",
        "determinism",
    ];
    let mut results: Vec<(usize, Outcome, f64)> = Vec::new();
    let mut timed = |n: usize, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        println!("[{}] {n}. {}: {} ({secs:.1}s)", if o.pass { "PASS" } else { "FAIL" }, names[n - 1], o.detail);
        results.push((n, o, secs));
    };
    if want(1) {
        timed(1, &mut properties);
    }
    if want(2) {
        timed(2, &mut gradients);
    }
    if want(3) {
        timed(3, &mut oracle);
    }
    if want(4) {
        timed(4, &mut overfit);
    }
    if want(5) {
        timed(5, &mut separable);
    }
    if want(6) || want(7) {
        let runs = mutag_runs();
        if want(6) {
            timed(6, &mut || augmentation_trend(&runs));
        }
        if want(7) {
            timed(7, &mut || operator_order(&runs));
        }
    }
    if want(8) {
        timed(8, &mut determinism);
    }
    let failed: Vec<usize> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!(", failing {failed:?}") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
