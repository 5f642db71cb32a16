use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treernn_core::harness::{
    augmented_image, load_graphs, load_prepared, prepare, run_cv_observed, save_prepared, CvReport, ExperimentConfig, PreparedData,
    Progress,
};
use treernn_core::nn::{build_model, grad_check, FeatureMap, Pooling, Variant};
use treernn_core::{build_tree, project, Connectivity, GraphImage, Order};

#[derive(Parser)]
#[command(name = "treernn", version, about = "Graph classification through BFS-tree images and a 2D recurrent network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a dataset, profile it and write its images to a binary cache.
    Prepare(PrepareArgs),
    /// Run stratified cross-validation and report accuracies.
    Train(TrainArgs),
    /// Compare analytic gradients with central differences on a seeded instance.
    Gradcheck(GradcheckArgs),
    /// Show one graph's image and optionally dump it as a PPM file.
    Inspect(InspectArgs),
    /// Render a JSON report as a CSV table.
    Report(ReportArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Dataset name, the directory under the data root holding the TU files.
    #[arg(long)]
    dataset: Option<String>,
    /// Root directory of the datasets.
    #[arg(long, env = "TREERNN_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,
    /// Reject disconnected graphs (the default).
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Keep only the largest component of a disconnected graph.
    #[arg(long)]
    lenient: bool,
}

impl DataArgs {
    fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(d) = &self.dataset {
            config.dataset = d.clone();
        }
        if self.strict {
            config.connectivity = Connectivity::Strict;
        }
        if self.lenient {
            config.connectivity = Connectivity::Lenient;
        }
    }
}

#[derive(Args)]
struct PrepareArgs {
    #[command(flatten)]
    data: DataArgs,
    /// TOML experiment config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Images per graph: the canonical one plus `aug - 1` shuffled copies.
    #[arg(long)]
    aug: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cache file to write; the provenance goes to `<out>.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Read images from a cache written by `prepare` instead of the dataset.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// treernn, mlponly, conv2d or rowrnn.
    #[arg(long)]
    variant: Option<Variant>,
    /// final_row or all_steps (TreeRNN only).
    #[arg(long)]
    pooling: Option<Pooling>,
    #[arg(long)]
    aug: Option<usize>,
    /// Draw fresh augmented copies every epoch.
    #[arg(long)]
    aug_online: bool,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    folds: Option<usize>,
    /// Where to write the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress per-epoch progress on stderr.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "treernn")]
    variant: Variant,
    #[arg(long, default_value_t = 4)]
    height: usize,
    #[arg(long, default_value_t = 5)]
    width: usize,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Index of the graph within the dataset.
    #[arg(long, default_value_t = 0)]
    graph: usize,
    /// Augmented copy to show; 0 is the canonical image.
    #[arg(long, default_value_t = 0)]
    copy: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// PPM (P6) file to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON report written by `train --out`.
    input: PathBuf,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Prepare(a) => cmd_prepare(a).map(|_| true),
        Command::Train(a) => cmd_train(a).map(|_| true),
        Command::Gradcheck(a) => cmd_gradcheck(a),
        Command::Inspect(a) => cmd_inspect(a).map(|_| true),
        Command::Report(a) => cmd_report(a).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn base_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(ExperimentConfig::default()),
    }
}

fn cmd_prepare(a: PrepareArgs) -> Result<()> {
    let mut config = base_config(a.config.as_deref())?;
    a.data.apply(&mut config);
    if let Some(k) = a.aug {
        config.aug = k;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    let data = prepare(&a.data.data_dir, &config)?;
    save_prepared(&a.out, &data)?;
    let p = &data.info.profile;
    println!(
        "{}: {} graphs, {} classes, {} images of {}x{}x{} -> {}",
        p.name,
        p.graph_count,
        p.class_count,
        data.images.len(),
        p.max_tree_depth.unwrap_or(0),
        p.max_nodes,
        p.channels(),
        a.out.display()
    );
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let mut config = base_config(a.config.as_deref())?;
    let cached = a.cache.as_deref().map(load_prepared).transpose()?;
    if let (Some(data), None) = (&cached, &a.config) {
        // the cache knows what it holds
        config.dataset = data.info.dataset.clone();
        config.connectivity = data.info.connectivity;
        config.seed = data.info.seed;
    }
    a.data.apply(&mut config);
    if let Some(v) = a.variant {
        config.variant = v;
    }
    if let Some(p) = a.pooling {
        config.pooling = p;
    }
    if let Some(k) = a.aug {
        config.aug = k;
    }
    config.aug_online |= a.aug_online;
    if let Some(e) = a.epochs {
        config.epochs = e;
    }
    if let Some(b) = a.batch {
        config.batch_size = b;
    }
    if let Some(lr) = a.lr {
        config.lr = lr;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(f) = a.folds {
        config.folds = f;
    }
    config.validate()?;

    let data: PreparedData = match cached {
        Some(d) => d,
        None => prepare(&a.data.data_dir, &config)?,
    };
    let quiet = a.quiet;
    let report = run_cv_observed(&config, &data, &mut |p| {
        if quiet {
            return;
        }
        match p {
            Progress::Epoch { fold, epoch, train_loss, test_accuracy } => {
                eprintln!("fold {fold} epoch {epoch:>4}  loss {train_loss:.4}  test {:.2}%", 100.0 * test_accuracy)
            }
            Progress::Fold { fold, best_accuracy, seconds } => {
                eprintln!("fold {fold} best {:.2}% ({seconds:.1}s)", 100.0 * best_accuracy)
            }
        }
    })?;
    if let Some(out) = &a.out {
        std::fs::write(out, report.to_json() + "\n").with_context(|| format!("writing {}", out.display()))?;
    }
    let s = &report.summary;
    println!(
        "{} {} aug {}: best {:.2} ± {:.2}%, final {:.2} ± {:.2}% over {} folds, {} parameters, {:.1}s",
        config.dataset,
        config.variant,
        config.aug,
        100.0 * s.mean_best,
        100.0 * s.std_best,
        100.0 * s.mean_final,
        100.0 * s.std_final,
        report.folds.len(),
        report.parameter_count,
        report.wall_clock_seconds
    );
    Ok(())
}

const NODE_LABELS: usize = 7;
const EDGE_LABELS: usize = 4;

/// One-hot node and edge blocks per pixel, roughly a third of pixels empty.
fn random_instance(h: usize, w: usize, seed: u64) -> Result<FeatureMap> {
    let c = NODE_LABELS + EDGE_LABELS;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.0; h * w * c];
    for px in data.chunks_exact_mut(c) {
        if rng.gen_bool(0.3) {
            continue;
        }
        px[rng.gen_range(0..NODE_LABELS)] = 1.0;
        px[NODE_LABELS + rng.gen_range(0..EDGE_LABELS)] = 1.0;
    }
    Ok(FeatureMap::new(h, w, c, data)?)
}

fn cmd_gradcheck(a: GradcheckArgs) -> Result<bool> {
    if a.height == 0 || a.width == 0 {
        bail!("image must have at least one row and one column");
    }
    let x = random_instance(a.height, a.width, a.seed)?;
    let mut m = build_model(a.variant, x.channels(), 2, a.seed)?;
    m.randomize_biases(a.seed ^ 0xb1a5, 0.1);
    let label = (a.seed % 2) as usize;
    let r = grad_check(&m, &x, label, a.epsilon, a.tolerance)?;
    println!("{} on {}x{}x{}, seed {}, label {label}, loss {:.6}", a.variant, a.height, a.width, x.channels(), a.seed, r.loss);
    for b in &r.blocks {
        println!(
            "  {:<12} checked {:>6}  skipped {:>4}  max rel {:.3e}  max abs {:.3e}",
            format!("{:?}", b.role),
            b.checked,
            b.skipped,
            b.max_rel_error,
            b.max_abs_error
        );
    }
    println!("max relative error: {:.3e} (tolerance {:.0e}) {}", r.max_rel_error(), r.tolerance, if r.passed() { "PASS" } else { "FAIL" });
    Ok(r.passed())
}

fn cmd_inspect(a: InspectArgs) -> Result<()> {
    let mut config = ExperimentConfig::default();
    a.data.apply(&mut config);
    let (graphs, profile) = load_graphs(&a.data.data_dir, &config.dataset, config.connectivity)?;
    let Some(g) = graphs.get(a.graph) else {
        bail!("{} has {} graphs, no graph {}", config.dataset, graphs.len(), a.graph);
    };
    let (tree, img): (_, GraphImage) = if a.copy == 0 {
        let t = build_tree(g, config.connectivity, Order::Canonical)?;
        let img = project(&t, g, &profile, Order::Canonical)?;
        (t, img)
    } else {
        augmented_image(g, &profile, a.seed, a.graph, a.copy, None)?
    };
    println!(
        "graph {} (class {}): {} nodes, {} edges, root {}, depth {}, image {}x{}x{}",
        a.graph,
        g.graph_label(),
        g.node_count(),
        g.edges().len(),
        tree.root(),
        tree.depth(),
        img.height(),
        img.width(),
        img.channels()
    );
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for r in 0..img.height() {
        let row: String = (0..img.width())
            .map(|c| match img.source_node(r, c) {
                Some(v) => char::from_digit((v % 36) as u32, 36).unwrap_or('#'),
                None => '.',
            })
            .collect();
        writeln!(out, "{row}")?;
    }
    if let Some(path) = &a.out {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        img.write_ppm(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let report = CvReport::from_json(&text)?;
    if !report.is_consistent() {
        eprintln!("warning: summary does not match the per-fold results");
    }
    match &a.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            report.write_csv(BufWriter::new(file))?;
        }
        None => report.write_csv(io::stdout().lock())?,
    }
    Ok(())
}
