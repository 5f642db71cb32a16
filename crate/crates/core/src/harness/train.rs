use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::augment::{augment_dataset, augmented_image, profile_depth};
use super::config::ExperimentConfig;
use super::folds::stratified_folds;
use super::report::{CvReport, FoldReport, Summary, SCHEMA_VERSION};
use crate::cache::{read_image_cache, write_image_cache, ImageLabel};
use crate::dataset::{apply_connectivity, load_dataset, Connectivity, DatasetProfile, Graph};
use crate::error::{Error, Result};
use crate::nn::{adam_step, backward_acc, build_model, cross_entropy, forward, predict, Adam, AdamConfig, FeatureMap, Gradients, Model};
use crate::projection::GraphImage;
use crate::seed::derive_seed;

const TRAIN_STREAM: u64 = 0x5472_6169;
const INIT_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;

/// How a set of images was produced. Stored next to an image cache so that a
/// later training run can check it is reading what it would have generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareInfo {
    pub dataset: String,
    pub connectivity: Connectivity,
    pub aug: usize,
    pub seed: u64,
    pub profile: DatasetProfile,
}

/// Images ready for cross-validation: for every graph its canonical image
/// (copy 0) and augmented copies `1..aug`.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub info: PrepareInfo,
    pub images: Vec<GraphImage>,
    pub labels: Vec<ImageLabel>,
    /// Source graphs, needed for online augmentation only.
    pub graphs: Option<Vec<Graph>>,
}

/// Loads a dataset, applies the connectivity policy and fills in `D_max`.
pub fn load_graphs(data_dir: &Path, dataset: &str, connectivity: Connectivity) -> Result<(Vec<Graph>, DatasetProfile)> {
    let (graphs, mut profile) = load_dataset(data_dir, dataset)?;
    let graphs = apply_connectivity(graphs, &mut profile, connectivity)?;
    profile_depth(&graphs, &mut profile)?;
    Ok((graphs, profile))
}

/// Profiles in-memory graphs and generates `aug` images per graph.
pub fn prepare_graphs(name: &str, graphs: Vec<Graph>, aug: usize, seed: u64) -> Result<PreparedData> {
    let mut profile = DatasetProfile::from_graphs(name, &graphs);
    profile_depth(&graphs, &mut profile)?;
    prepare_profiled(graphs, profile, Connectivity::Strict, aug, seed)
}

fn prepare_profiled(
    graphs: Vec<Graph>,
    profile: DatasetProfile,
    connectivity: Connectivity,
    aug: usize,
    seed: u64,
) -> Result<PreparedData> {
    let (images, labels) = augment_dataset(&graphs, &profile, aug, seed)?;
    Ok(PreparedData {
        info: PrepareInfo { dataset: profile.name.clone(), connectivity, aug, seed, profile },
        images,
        labels,
        graphs: Some(graphs),
    })
}

/// Loads and prepares the dataset named by `config`.
pub fn prepare(data_dir: &Path, config: &ExperimentConfig) -> Result<PreparedData> {
    config.validate()?;
    let (graphs, profile) = load_graphs(data_dir, &config.dataset, config.connectivity)?;
    prepare_profiled(graphs, profile, config.connectivity, config.aug, config.seed)
}

/// Sidecar path holding the [`PrepareInfo`] of an image cache.
pub fn sidecar_path(cache: &Path) -> PathBuf {
    let mut name = cache.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Writes the images to `cache` and their provenance to its sidecar.
pub fn save_prepared(cache: &Path, data: &PreparedData) -> Result<()> {
    write_image_cache(cache, &data.images, &data.labels)?;
    let side = sidecar_path(cache);
    let json = serde_json::to_string_pretty(&data.info).map_err(|e| Error::Cache(e.to_string()))?;
    fs::write(&side, json + "\n").map_err(|e| Error::io(&side, e))
}

/// Reads what [`save_prepared`] wrote. The source graphs are not stored, so
/// online augmentation cannot run from a cache.
pub fn load_prepared(cache: &Path) -> Result<PreparedData> {
    let side = sidecar_path(cache);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let info: PrepareInfo = serde_json::from_str(&text).map_err(|e| Error::Cache(format!("{}: {e}", side.display())))?;
    let (images, labels) = read_image_cache(cache)?;
    if images.len() != info.profile.graph_count * info.aug {
        return Err(Error::Cache(format!(
            "{} images, sidecar promises {} graphs x {} copies",
            images.len(),
            info.profile.graph_count,
            info.aug
        )));
    }
    Ok(PreparedData { info, images, labels, graphs: None })
}

/// Per-epoch observations, for progress output.
#[derive(Debug, Clone, Copy)]
pub enum Progress {
    Epoch { fold: usize, epoch: usize, train_loss: f64, test_accuracy: f64 },
    Fold { fold: usize, best_accuracy: f64, seconds: f64 },
}

/// Loads, prepares and cross-validates in one call.
pub fn run_cv(data_dir: &Path, config: &ExperimentConfig) -> Result<CvReport> {
    run_cv_prepared(config, &prepare(data_dir, config)?)
}

pub fn run_cv_prepared(config: &ExperimentConfig, data: &PreparedData) -> Result<CvReport> {
    run_cv_observed(config, data, &mut |_| {})
}

struct Layout {
    canonical: Vec<usize>,
    /// `copies[g][j - 1]` is the image of copy `j` of graph `g`.
    copies: Vec<Vec<usize>>,
    classes: Vec<usize>,
}

fn layout(data: &PreparedData, want: usize) -> Result<Layout> {
    let graphs = data.info.profile.graph_count;
    let mut canonical = vec![usize::MAX; graphs];
    let mut copies = vec![vec![usize::MAX; want.saturating_sub(1)]; graphs];
    let mut classes = vec![0; graphs];
    for (i, l) in data.labels.iter().enumerate() {
        let (g, v) = (l.graph_id as usize, l.variant as usize);
        if g >= graphs {
            return Err(Error::Cache(format!("image {i} names graph {g} of {graphs}")));
        }
        match v {
            0 => {
                canonical[g] = i;
                classes[g] = l.class as usize;
            }
            v if v < want => copies[g][v - 1] = i,
            _ => {}
        }
    }
    if let Some(g) = canonical.iter().position(|&i| i == usize::MAX) {
        return Err(Error::Cache(format!("graph {g} has no canonical image")));
    }
    if copies.iter().flatten().any(|&i| i == usize::MAX) {
        return Err(Error::Config(format!("prepared data holds {} copies per graph, the run needs {want}", data.info.aug)));
    }
    Ok(Layout { canonical, copies, classes })
}

fn check_compatible(config: &ExperimentConfig, data: &PreparedData) -> Result<()> {
    let info = &data.info;
    let mismatch =
        |what: &str, have: String, want: String| Err(Error::Config(format!("prepared data has {what} {have}, config asks for {want}")));
    if info.dataset != config.dataset {
        return mismatch("dataset", info.dataset.clone(), config.dataset.clone());
    }
    if info.connectivity != config.connectivity {
        return mismatch("connectivity", format!("{:?}", info.connectivity), format!("{:?}", config.connectivity));
    }
    let needs_copies = config.aug > 1 && !config.aug_online;
    if needs_copies && info.seed != config.seed {
        return mismatch("augmentation seed", info.seed.to_string(), config.seed.to_string());
    }
    if config.aug_online && config.aug > 1 && data.graphs.is_none() {
        return Err(Error::Config("online augmentation needs the source graphs, not an image cache".into()));
    }
    Ok(())
}

fn accuracy(m: &Model, xs: &[FeatureMap], idx: &[usize], classes: &[usize], graph_of: &[usize]) -> Result<f64> {
    let mut correct = 0usize;
    for (&i, &g) in idx.iter().zip(graph_of) {
        if predict(m, &xs[i])? == classes[g] {
            correct += 1;
        }
    }
    Ok(correct as f64 / idx.len() as f64)
}

/// One epoch of mini-batch Adam over `samples` (feature map, label) in the
/// given order. Each batch gradient is the mean of per-sample gradients,
/// accumulated in ascending sample position. Returns the mean loss.
fn train_epoch(m: &mut Model, adam: &mut Adam, samples: &[(&FeatureMap, usize)], order: &[usize], batch: usize) -> Result<f64> {
    let mut total = 0.0;
    let mut grads = Gradients::zeros_like(m);
    for chunk in order.chunks(batch) {
        let mut idx = chunk.to_vec();
        idx.sort_unstable();
        grads.values_mut().fill(0.0);
        for &i in &idx {
            let (x, y) = samples[i];
            let fwd = forward(m, x)?;
            total += cross_entropy(&fwd.logits, y);
            backward_acc(m, x, &fwd, y, &mut grads)?;
        }
        grads.scale(1.0 / idx.len() as f64);
        adam_step(m, &grads, adam);
    }
    Ok(total / order.len() as f64)
}

/// Cross-validation with a callback per epoch and per fold.
pub fn run_cv_observed(config: &ExperimentConfig, data: &PreparedData, observe: &mut dyn FnMut(Progress)) -> Result<CvReport> {
    config.validate()?;
    check_compatible(config, data)?;
    let started = Instant::now();
    let profile = &data.info.profile;
    let fixed_copies = if config.aug_online { 1 } else { config.aug };
    let lay = layout(data, fixed_copies)?;
    let xs = data.images.iter().map(FeatureMap::from_image).collect::<Result<Vec<_>>>()?;
    let classes = profile.class_count.max(lay.classes.iter().max().map_or(0, |c| c + 1));
    let folds = stratified_folds(&lay.classes, config.folds, config.seed)?;

    let mut reports = Vec::with_capacity(folds.len());
    let mut parameter_count = 0;
    for (f, fold) in folds.iter().enumerate() {
        let fold_started = Instant::now();
        let fold_seed = derive_seed(config.seed, &[TRAIN_STREAM, f as u64]);
        let mut model =
            build_model(config.variant, profile.channels(), classes, derive_seed(fold_seed, &[INIT_STREAM]))?.with_pooling(config.pooling);
        parameter_count = model.parameter_count();
        let mut adam = Adam::new(model.parameter_count(), AdamConfig { lr: config.lr, ..AdamConfig::default() });
        let test_idx: Vec<usize> = fold.test.iter().map(|&g| lay.canonical[g]).collect();
        let mut pool: Vec<(&FeatureMap, usize)> = Vec::new();
        for &g in &fold.train {
            pool.push((&xs[lay.canonical[g]], lay.classes[g]));
            pool.extend(lay.copies[g].iter().map(|&i| (&xs[i], lay.classes[g])));
        }

        let mut test_accuracy = Vec::with_capacity(config.epochs.max(1));
        let mut train_loss = Vec::with_capacity(config.epochs);
        if config.epochs == 0 {
            test_accuracy.push(accuracy(&model, &xs, &test_idx, &lay.classes, &fold.test)?);
        }
        let mut online: Vec<FeatureMap> = Vec::new();
        for epoch in 0..config.epochs {
            let mut samples = pool.clone();
            if config.aug_online && config.aug > 1 {
                let graphs = data.graphs.as_ref().expect("checked above");
                online.clear();
                let mut labels = Vec::new();
                for &g in &fold.train {
                    for copy in 1..config.aug {
                        let (_, img) = augmented_image(&graphs[g], profile, config.seed, g, copy, Some(epoch))?;
                        online.push(FeatureMap::from_image(&img)?);
                        labels.push(lay.classes[g]);
                    }
                }
                samples.extend(online.iter().zip(labels));
            }
            let mut order: Vec<usize> = (0..samples.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(fold_seed, &[SHUFFLE_STREAM, epoch as u64])));
            let loss = train_epoch(&mut model, &mut adam, &samples, &order, config.batch_size)?;
            let acc = accuracy(&model, &xs, &test_idx, &lay.classes, &fold.test)?;
            train_loss.push(loss);
            test_accuracy.push(acc);
            observe(Progress::Epoch { fold: f, epoch: epoch + 1, train_loss: loss, test_accuracy: acc });
        }
        let train_images = pool.len() + if config.aug_online { fold.train.len() * (config.aug - 1) } else { 0 };
        let seconds = fold_started.elapsed().as_secs_f64();
        let report = FoldReport::from_traces(f, fold_seed, train_images, fold.test.len(), test_accuracy, train_loss, seconds);
        observe(Progress::Fold { fold: f, best_accuracy: report.best_accuracy, seconds });
        reports.push(report);
    }

    Ok(CvReport {
        schema_version: SCHEMA_VERSION,
        build_id: crate::BUILD_ID.to_string(),
        config: config.clone(),
        config_hash: config.hash(),
        profile: profile.clone(),
        parameter_count,
        summary: Summary::from_folds(&reports),
        folds: reports,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}
