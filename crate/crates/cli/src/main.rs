use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use patchtda::alpha::{alpha_persistence, AlphaOptions, DEFAULT_MAX_POINTS_4D};
use patchtda::bench::{bench_ph, BenchOptions};
use patchtda::cubical::cubical_persistence;
use patchtda::io::{
    load_barcode, load_features, load_mask, load_points, load_volume, save_barcode, save_features,
    save_mask, save_point_cloud, save_volume, write_text, FeatureRow,
};
use patchtda::ml::{
    cross_validate, cv_csv, grid_csv, parse_grid_ids, pca_trials, rank, select_top, stage1_trials,
    ClassifierKind, CvOptions, Dataset, Depth, RankMetric, TrialSpec,
};
use patchtda::patch::{parse_stats, PatchConfig, PointCloud, Stat};
use patchtda::phantom::{random_sphere, SphereSpec};
use patchtda::pipeline::{
    barcode_features, extract_features, grid_search, load_samples, resample_pair,
    sample_point_cloud, FeatureOptions, Manifest, Method, TargetSpacing,
};
use patchtda::preprocess::{mask_and_crop, DEFAULT_PAD};
use patchtda::vectorize::EssentialPolicy;
use patchtda::{Error, Parallelism};

/// Topological features of masked 3D volumes.
#[derive(Parser, Debug)]
#[command(name = "patchtda", version, about)]
struct Cli {
    /// Worker threads for batch commands (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode a masked volume as a patch point cloud.
    Pointcloud(PointcloudArgs),
    /// Persistence barcodes of a point cloud or, with --cubical, of a volume.
    Ph(PhArgs),
    /// Vectorize a barcode file into one feature row.
    Features(FeaturesArgs),
    /// Batch features for every sample of a manifest.
    Pipeline(PipelineArgs),
    /// Stratified cross-validation of a feature table.
    Cv(CvArgs),
    /// Grid search over patch sizes and encoders.
    Gridsearch(GridArgs),
    /// Time patch-based against cubical persistence.
    Bench(BenchArgs),
    /// Write a synthetic sphere phantom.
    Phantom(PhantomArgs),
}

#[derive(Args, Debug, Clone)]
struct EncoderArgs {
    /// Patch edge length in voxels.
    #[arg(long, value_parser = clap::value_parser!(u64).range(3..=10))]
    patch_size: u64,
    /// Comma-separated statistics (2 or 3 of mean, median, mode, std, iqr,
    /// entropy, range, min, max).
    #[arg(long, value_parser = parse_stat_list, conflicts_with = "pca", required_unless_present = "pca")]
    stats: Option<StatList>,
    /// Number of principal components instead of statistics.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=3))]
    pca: Option<u64>,
    /// Keep raw axis scales instead of min-max normalizing each axis.
    #[arg(long)]
    no_normalize: bool,
}

impl EncoderArgs {
    fn config(&self) -> PatchConfig {
        let n = self.patch_size as usize;
        let mut cfg = match (&self.stats, self.pca) {
            (_, Some(k)) => PatchConfig::pca(n, k as usize),
            (Some(s), None) => PatchConfig::stats(n, s.0.clone()),
            (None, None) => unreachable!("clap requires one encoder"),
        };
        cfg.normalize_axes = !self.no_normalize;
        cfg
    }
}

#[derive(Debug, Clone)]
struct StatList(Vec<Stat>);

fn parse_stat_list(s: &str) -> Result<StatList, String> {
    let stats = parse_stats(s).map_err(|e| e.to_string())?;
    PatchConfig::stats(3, stats.clone())
        .validate()
        .map_err(|e| e.to_string())?;
    Ok(StatList(stats))
}

fn parse_spacing(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{p}` is not a number"))
        })
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        &[z, y, x] if parts.iter().all(|v| v.is_finite() && *v > 0.0) => Ok([z, y, x]),
        _ => Err("expected three positive numbers `z,y,x`".into()),
    }
}

fn parse_target(s: &str) -> Result<TargetSpacing, String> {
    if s == "auto" {
        Ok(TargetSpacing::Average)
    } else {
        parse_spacing(s).map(TargetSpacing::Fixed)
    }
}

#[derive(Args, Debug)]
struct SeedArgs {
    /// Master seed for jitter, folds and inner CV.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Upper limit on points triangulated in four dimensions.
    #[arg(long, default_value_t = DEFAULT_MAX_POINTS_4D)]
    max_points_4d: usize,
}

impl SeedArgs {
    fn alpha(&self) -> AlphaOptions {
        AlphaOptions {
            seed: self.seed,
            max_points_4d: self.max_points_4d,
        }
    }
}

#[derive(Args, Debug)]
struct PointcloudArgs {
    #[arg(long)]
    volume: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[command(flatten)]
    encoder: EncoderArgs,
    /// Crop padding around the mask bounding box, in voxels.
    #[arg(long, default_value_t = DEFAULT_PAD)]
    pad: usize,
    /// Resample to this spacing `z,y,x` before cropping.
    #[arg(long, value_parser = parse_spacing)]
    target_spacing: Option<[f64; 3]>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PhArgs {
    /// Point cloud CSV.
    #[arg(long, conflicts_with_all = ["cubical", "volume", "mask"], required_unless_present = "cubical")]
    pointcloud: Option<PathBuf>,
    /// Cubical filtration of a masked volume.
    #[arg(long, requires_all = ["volume", "mask"])]
    cubical: bool,
    #[arg(long)]
    volume: Option<PathBuf>,
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Mask and crop the volume (as `pointcloud` does) before filtering.
    #[arg(long, requires = "cubical")]
    crop: bool,
    #[command(flatten)]
    seed: SeedArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FeaturesArgs {
    #[arg(long)]
    barcodes: PathBuf,
    /// Row id (defaults to the barcode file stem).
    #[arg(long)]
    id: Option<String>,
    #[arg(long, default_value = "")]
    label: String,
    /// Leave essential bars out instead of closing them at the largest
    /// finite value.
    #[arg(long)]
    drop_essential: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// JSON array of {volume, mask, label}.
    #[arg(long)]
    manifest: PathBuf,
    /// Resample every sample to `auto` (mean spacing) or `z,y,x`.
    #[arg(long, value_parser = parse_target)]
    target_spacing: Option<TargetSpacing>,
    #[arg(long, default_value_t = DEFAULT_PAD)]
    pad: usize,
    #[arg(long)]
    drop_essential: bool,
    #[command(flatten)]
    seed: SeedArgs,
}

impl DataArgs {
    fn policy(&self) -> EssentialPolicy {
        if self.drop_essential {
            EssentialPolicy::Drop
        } else {
            EssentialPolicy::Substitute
        }
    }
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Cubical baseline instead of patch point clouds.
    #[arg(long, conflicts_with_all = ["patch_size", "stats", "pca"])]
    cubical: bool,
    #[arg(long, value_parser = clap::value_parser!(u64).range(3..=10), required_unless_present = "cubical")]
    patch_size: Option<u64>,
    #[arg(long, value_parser = parse_stat_list, conflicts_with = "pca")]
    stats: Option<StatList>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=3))]
    pca: Option<u64>,
    #[arg(long)]
    no_normalize: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CvArgs {
    #[arg(long)]
    features: PathBuf,
    /// lr, knn or all.
    #[arg(long, default_value = "all", value_parser = parse_classifiers)]
    classifier: Classifiers,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Three hyperparameter values per classifier instead of one.
    #[arg(long)]
    deep: bool,
    /// Also write the full reports as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone)]
struct Classifiers(Vec<ClassifierKind>);

fn parse_classifiers(s: &str) -> Result<Classifiers, String> {
    if s == "all" {
        return Ok(Classifiers(ClassifierKind::ALL.to_vec()));
    }
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<ClassifierKind>()
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()
        .map(Classifiers)
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    data: DataArgs,
    /// 1: all stat trials, shallow tuning. 2: the top 5% of stage 1, deep tuning.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), default_value_t = 1)]
    stage: u8,
    /// Stage-1 table to promote from (stage 1 is rerun when absent).
    #[arg(long = "from")]
    from: Option<PathBuf>,
    /// Eight PCA trials (3 components) with deep tuning instead of stats.
    #[arg(long, conflicts_with_all = ["stage", "from"])]
    pca: bool,
    /// Metric averaged across classifiers to rank trials.
    #[arg(long, default_value = "auc")]
    rank_metric: RankMetric,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    volume: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[command(flatten)]
    encoder: EncoderArgs,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Time persistence only, building the point cloud beforehand.
    #[arg(long)]
    exclude_pointcloud: bool,
    #[arg(long, default_value_t = DEFAULT_PAD)]
    pad: usize,
    #[command(flatten)]
    seed: SeedArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PhantomArgs {
    #[arg(long, default_value_t = 32)]
    size: usize,
    /// Dark core inside the ball.
    #[arg(long)]
    hollow: bool,
    /// Randomize radius, centre and intensities from this seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_volume: PathBuf,
    #[arg(long)]
    out_mask: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let jobs = cli.jobs;
    match Parallelism::with_jobs(jobs, || run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

fn run(command: Command) -> patchtda::Result<()> {
    match command {
        Command::Pointcloud(a) => pointcloud(a),
        Command::Ph(a) => ph(a),
        Command::Features(a) => features(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Cv(a) => cv(a),
        Command::Gridsearch(a) => gridsearch(a),
        Command::Bench(a) => bench(a),
        Command::Phantom(a) => phantom(a),
    }
}

fn pointcloud(a: PointcloudArgs) -> patchtda::Result<()> {
    let mut v = load_volume(&a.volume)?;
    let mut m = load_mask(&a.mask)?;
    if let Some(t) = a.target_spacing {
        (v, m) = resample_pair(&v, &m, t)?;
    }
    let pc = sample_point_cloud(&v, &m, &a.encoder.config(), a.pad, Parallelism::default())?;
    save_point_cloud(&pc, &a.out)
}

fn ph(a: PhArgs) -> patchtda::Result<()> {
    let barcodes = if a.cubical {
        let v = load_volume(a.volume.as_ref().expect("clap requires --volume"))?;
        let m = load_mask(a.mask.as_ref().expect("clap requires --mask"))?;
        if a.crop {
            let c = mask_and_crop(&v, &m, DEFAULT_PAD)?;
            cubical_persistence(&c.volume, Some(&c.mask))?
        } else {
            cubical_persistence(&v, Some(&m))?
        }
    } else {
        let path = a.pointcloud.as_ref().expect("clap requires --pointcloud");
        let rows = load_points(path)?;
        if rows.is_empty() {
            return Err(Error::Format(format!("{}: no points", path.display())));
        }
        alpha_persistence(&PointCloud::from_rows(&rows)?, &a.seed.alpha())?
    };
    save_barcode(&barcodes, &a.out)
}

fn file_stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn features(a: FeaturesArgs) -> patchtda::Result<()> {
    let b = load_barcode(&a.barcodes)?;
    let policy = if a.drop_essential {
        EssentialPolicy::Drop
    } else {
        EssentialPolicy::Substitute
    };
    let row = FeatureRow {
        id: a.id.unwrap_or_else(|| file_stem(&a.barcodes)),
        values: barcode_features(&b, policy),
        label: a.label,
    };
    save_features(&[row], &a.out)
}

fn load_data(d: &DataArgs) -> patchtda::Result<Vec<patchtda::pipeline::Sample>> {
    let manifest = Manifest::load(&d.manifest)?;
    load_samples(
        &manifest,
        d.target_spacing.unwrap_or_default(),
        Parallelism::default(),
    )
}

fn pipeline(a: PipelineArgs) -> patchtda::Result<()> {
    let samples = load_data(&a.data)?;
    let method = if a.cubical {
        Method::Cubical
    } else {
        let encoder = EncoderArgs {
            patch_size: a.patch_size.expect("clap requires --patch-size"),
            stats: a.stats.clone(),
            pca: a.pca,
            no_normalize: a.no_normalize,
        };
        if encoder.stats.is_none() && encoder.pca.is_none() {
            return Err(Error::InvalidArgument("give --stats or --pca".into()));
        }
        Method::Patch(encoder.config())
    };
    let opts = FeatureOptions {
        method,
        pad: a.data.pad,
        alpha: a.data.seed.alpha(),
        policy: a.data.policy(),
    };
    let rows = extract_features(&samples, &opts, Parallelism::default())?;
    save_features(&rows, &a.out)
}

fn cv(a: CvArgs) -> patchtda::Result<()> {
    let rows = load_features(&a.features)?;
    let mut labels: Vec<&str> = rows.iter().map(|r| r.label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    let data = Dataset {
        x: rows.iter().map(|r| r.values.clone()).collect(),
        y: rows
            .iter()
            .map(|r| {
                labels
                    .binary_search(&r.label.as_str())
                    .expect("label listed")
            })
            .collect(),
    };
    let opts = CvOptions {
        folds: a.folds,
        seed: a.seed,
        depth: if a.deep { Depth::Deep } else { Depth::Shallow },
        classifiers: a.classifier.0.clone(),
        config: Some(file_stem(&a.features)),
        par: Parallelism::default(),
    };
    let reports = cross_validate(&data, &opts)?;
    write_text(&a.out, &cv_csv(&reports))?;
    if let Some(json) = &a.json {
        let text =
            serde_json::to_string_pretty(&reports).map_err(|e| Error::Format(e.to_string()))?;
        write_text(json, &text)?;
    }
    Ok(())
}

fn gridsearch(a: GridArgs) -> patchtda::Result<()> {
    let samples = load_data(&a.data)?;
    let base = FeatureOptions {
        method: Method::Cubical,
        pad: a.data.pad,
        alpha: a.data.seed.alpha(),
        policy: a.data.policy(),
    };
    let cv = |depth| CvOptions {
        folds: a.folds,
        seed: a.data.seed.seed,
        depth,
        ..CvOptions::default()
    };
    let par = Parallelism::default();
    let mut results = if a.pca {
        grid_search(&samples, &pca_trials(), &base, &cv(Depth::Deep), par)?
    } else if a.stage == 1 {
        grid_search(&samples, &stage1_trials(), &base, &cv(Depth::Shallow), par)?
    } else {
        let all = stage1_trials();
        let promoted: Vec<TrialSpec> = match &a.from {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
                parse_grid_ids(&text)?
                    .into_iter()
                    .take(patchtda::ml::top_count(all.len()))
                    .map(|id| {
                        all.get(id)
                            .cloned()
                            .ok_or_else(|| Error::Format(format!("unknown trial id {id}")))
                    })
                    .collect::<patchtda::Result<_>>()?
            }
            None => {
                let stage1 = grid_search(&samples, &all, &base, &cv(Depth::Shallow), par)?;
                select_top(&stage1, a.rank_metric)
            }
        };
        grid_search(&samples, &promoted, &base, &cv(Depth::Deep), par)?
    };
    rank(&mut results, a.rank_metric);
    write_text(&a.out, &grid_csv(&results, a.rank_metric))
}

fn bench(a: BenchArgs) -> patchtda::Result<()> {
    let v = load_volume(&a.volume)?;
    let m = load_mask(&a.mask)?;
    let c = mask_and_crop(&v, &m, a.pad)?;
    let opts = BenchOptions {
        trials: a.trials,
        include_pointcloud: !a.exclude_pointcloud,
        alpha: a.seed.alpha(),
    };
    let report = bench_ph(&c.volume, &c.mask, &a.encoder.config(), &opts)?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Format(e.to_string()))?;
    write_text(&a.out, &text)
}

fn phantom(a: PhantomArgs) -> patchtda::Result<()> {
    if a.size < 4 {
        return Err(Error::InvalidArgument(
            "phantom size must be at least 4".into(),
        ));
    }
    let (v, m) = match a.seed {
        Some(seed) => random_sphere(a.size, a.hollow, seed)?,
        None => {
            let mut spec = SphereSpec::solid(a.size, a.size as f64 * 0.35);
            if a.hollow {
                spec.core_radius = Some(spec.radius * 0.5);
            }
            spec.render()?
        }
    };
    save_volume(&v, &a.out_volume)?;
    save_mask(&m, &a.out_mask)
}
