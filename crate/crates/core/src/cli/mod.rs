//! The `distdiv` command line.

mod svg;

pub use svg::{canvas_transform, emit_svg_scatter, param_colors, render_svg, DEFAULT_COLOR};

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baselines::{gaussian_cross_divergences, gaussian_divergence_matrix};
use crate::dataset::{
    format_sig9, load_dataset, load_keyed_table, load_labels, load_matrix, save_dataset, save_matrix, write_table,
    Dataset,
};
use crate::error::{Error, Result};
use crate::estimators::{
    cross_divergences, divergence_matrix, CrossDivergences, DivergenceMatrix, EstimatorConfig, DEFAULT_ALPHA,
    DEFAULT_K,
};
use crate::oracle::run_suite;
use crate::synth::{
    gen_gaussian_classes, gen_noisy_sine, gen_param_grid, gen_sine_anomaly_scenario, SynthFamily, SynthOutput,
    DEFAULT_GRID_SAMPLES, DEFAULT_SINE_SAMPLES,
};
use crate::tasks::{
    anomaly_scores, anomaly_split, auc, cluster_trace_accuracy, cross_validate, mds_embed, spectral_cluster,
    DEFAULT_K_ANOM, DEFAULT_K_VOTE,
};

#[derive(Debug, Parser)]
#[command(name = "distdiv", version, about = "Nonparametric divergences between sample groups")]
struct Cli {
    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pairwise divergence matrix of a group container
    Estimate(EstimateArgs),
    /// Classical MDS coordinates of a divergence matrix
    Embed(EmbedArgs),
    /// Spectral clustering of a divergence matrix
    Cluster(ClusterArgs),
    /// Cross-validated k-NN classification of labeled groups
    Classify(ClassifyArgs),
    /// Score test groups by divergence to training groups
    Anomaly(AnomalyArgs),
    /// Write a synthetic group container
    Synth(SynthArgs),
    /// Run the oracle self-check suite
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Estimator {
    Renyi,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Baseline {
    None,
    Gaussian,
}

#[derive(Debug, Clone, Args)]
struct EstimatorArgs {
    #[arg(long, value_enum, default_value_t = Estimator::Renyi)]
    estimator: Estimator,
    /// Order of the Rényi divergence
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Nearest-neighbor rank
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Average the two directed divergences
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    symmetrize: bool,
    /// Replace the nonparametric estimator by a fitted single gaussian
    #[arg(long, value_enum, default_value_t = Baseline::None)]
    baseline: Baseline,
    /// Drop exact duplicate rows within each group
    #[arg(long)]
    dedup: bool,
}

impl EstimatorArgs {
    fn config(&self) -> Result<EstimatorConfig> {
        let cfg = match self.estimator {
            Estimator::Renyi => EstimatorConfig::renyi(self.alpha, self.k),
            Estimator::L2 => EstimatorConfig::l2(self.k),
        }
        .with_symmetrize(self.symmetrize);
        cfg.validate()?;
        Ok(cfg)
    }

    fn prepare(&self, ds: Dataset) -> Dataset {
        if self.dedup {
            ds.dedup()
        } else {
            ds
        }
    }

    fn matrix(&self, ds: &Dataset) -> Result<DivergenceMatrix> {
        let cfg = self.config()?;
        match self.baseline {
            Baseline::None => divergence_matrix(ds, &cfg),
            Baseline::Gaussian => gaussian_divergence_matrix(ds, &cfg),
        }
    }

    fn cross(&self, rows: &Dataset, cols: &Dataset) -> Result<CrossDivergences> {
        let cfg = self.config()?;
        match self.baseline {
            Baseline::None => cross_divergences(rows, cols, &cfg),
            Baseline::Gaussian => gaussian_cross_divergences(rows, cols, &cfg),
        }
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Group directory or single id-keyed CSV
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also draw the first two axes as an SVG scatter plot
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Per-group parameters (`id,p1,p2,...`) used to color the scatter plot
    #[arg(long)]
    color_by: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    clusters: usize,
    #[arg(long)]
    out: PathBuf,
    /// `id,label` file; prints trace accuracy when given
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long)]
    input: PathBuf,
    /// `id,label` file; defaults to the container's own labels
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = DEFAULT_K_VOTE)]
    kvote: usize,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AnomalyArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K_ANOM)]
    kanom: usize,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[arg(long)]
    out: PathBuf,
    /// `id,anomalous` file (1/0 or true/false); prints AUC when given
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Ugrid,
    Ggrid,
    Bgrid,
    Sine,
    SineAnom,
    /// Labeled 1-D gaussian classes
    Classes,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    out: PathBuf,
    /// Points per group (family default when omitted)
    #[arg(long)]
    samples: Option<usize>,
    /// Number of sine groups
    #[arg(long, default_value_t = 60)]
    groups: usize,
    /// Normal groups in the anomaly scenario
    #[arg(long, default_value_t = 40)]
    normal: usize,
    /// Anomalous groups in the anomaly scenario
    #[arg(long, default_value_t = 10)]
    anomalies: usize,
    /// Share of normal groups used for training in the anomaly scenario
    #[arg(long, default_value_t = 0.75)]
    train_fraction: f64,
    /// Class means for the `classes` family
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 1.0, 2.0, 3.0])]
    class_means: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    class_std: f64,
    #[arg(long, default_value_t = 20)]
    groups_per_class: usize,
}

/// Parses `args` (program name first) and runs the subcommand, writing
/// reports to `out` and diagnostics to `err`. Returns the process exit code:
/// 0 on success, 1 for invalid input or flags, 2 when a computation fails.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

/// [`run_with`] on the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let seed = cli.seed;
    match cli.command {
        Command::Estimate(a) => estimate(a, out),
        Command::Embed(a) => embed(a, out),
        Command::Cluster(a) => cluster(a, seed, out),
        Command::Classify(a) => classify(a, seed, out),
        Command::Anomaly(a) => anomaly(a, out),
        Command::Synth(a) => synth(a, seed, out),
        Command::Verify => verify(out),
    }
}

fn say(out: &mut dyn Write, text: std::fmt::Arguments) {
    let _ = out.write_fmt(text);
    let _ = out.write_all(b"\n");
}

fn estimate(a: EstimateArgs, out: &mut dyn Write) -> Result<i32> {
    a.estimator.config()?;
    let ds = a.estimator.prepare(load_dataset(&a.input)?);
    let w = a.estimator.matrix(&ds)?;
    save_matrix(&w, &a.out)?;
    say(out, format_args!("wrote {0}x{0} matrix to {1}", w.len(), a.out.display()));
    Ok(0)
}

fn embed(a: EmbedArgs, out: &mut dyn Write) -> Result<i32> {
    if a.out.is_none() && a.svg.is_none() {
        return Err(Error::Config("nothing to write: give --out and/or --svg".into()));
    }
    if a.svg.is_some() && a.dims < 2 {
        return Err(Error::Config("--svg needs --dims of at least 2".into()));
    }
    let w = load_matrix(&a.matrix)?;
    let params = a.color_by.as_ref().map(|p| load_params(p, w.ids())).transpose()?;
    let e = mds_embed(&w, a.dims)?;
    if let Some(path) = &a.out {
        let header: Vec<String> = std::iter::once("id".to_string())
            .chain((1..=a.dims).map(|i| format!("x{i}")))
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = e
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                std::iter::once(id.clone())
                    .chain(e.coords.row(i).iter().map(|&v| format_sig9(v)))
                    .collect()
            })
            .collect();
        write_table(path, &header, &rows)?;
        say(out, format_args!("wrote {} coordinates to {}", e.ids.len(), path.display()));
    }
    if let Some(path) = &a.svg {
        let coords: Vec<[f64; 2]> = (0..e.ids.len()).map(|i| [e.coords[(i, 0)], e.coords[(i, 1)]]).collect();
        let colors = params.as_deref().map(param_colors);
        emit_svg_scatter(&coords, colors.as_deref(), path)?;
        say(out, format_args!("wrote scatter plot to {}", path.display()));
    }
    Ok(0)
}

/// Numeric parameter rows for `ids`, in that order.
fn load_params(path: &Path, ids: &[String]) -> Result<Vec<Vec<f64>>> {
    let table = load_keyed_table(path)?;
    ids.iter()
        .map(|id| {
            let cells = table
                .get(id)
                .ok_or_else(|| Error::Contract(format!("{} has no row for `{id}`", path.display())))?;
            cells
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    c.parse::<f64>().map_err(|_| Error::Parse {
                        path: path.to_path_buf(),
                        row: 0,
                        column: j + 2,
                        message: format!("`{c}` for `{id}` is not a number"),
                    })
                })
                .collect()
        })
        .collect()
}

fn lookup<'a, V>(table: &'a BTreeMap<String, V>, ids: &[String], path: &Path) -> Result<Vec<&'a V>> {
    ids.iter()
        .map(|id| {
            table
                .get(id)
                .ok_or_else(|| Error::Contract(format!("{} has no entry for `{id}`", path.display())))
        })
        .collect()
}

fn cluster(a: ClusterArgs, seed: u64, out: &mut dyn Write) -> Result<i32> {
    let w = load_matrix(&a.matrix)?;
    let truth = a.truth.as_ref().map(|p| load_labels(p).map(|t| (t, p.clone()))).transpose()?;
    let assignment = spectral_cluster(&w, a.clusters, seed)?;
    let rows: Vec<Vec<String>> = assignment
        .ids
        .iter()
        .zip(&assignment.cluster)
        .map(|(id, c)| vec![id.clone(), c.to_string()])
        .collect();
    write_table(&a.out, &["id", "cluster"], &rows)?;
    say(out, format_args!("wrote {} assignments to {}", rows.len(), a.out.display()));
    if let Some((table, path)) = truth {
        let labels = lookup(&table, w.ids(), &path)?;
        let acc = cluster_trace_accuracy(&labels, &assignment)?;
        say(out, format_args!("trace accuracy: {}", format_sig9(acc)));
    }
    Ok(0)
}

fn classify(a: ClassifyArgs, seed: u64, out: &mut dyn Write) -> Result<i32> {
    a.estimator.config()?;
    let mut ds = load_dataset(&a.input)?;
    if let Some(path) = &a.labels {
        let table = load_labels(path)?;
        lookup(&table, &ds.ids(), path)?;
        ds = ds.with_labels(&table);
    }
    let labels = ds.labels()?;
    let ds = a.estimator.prepare(ds);
    let w = a.estimator.matrix(&ds)?;
    let cv = cross_validate(&w, &labels, a.folds, a.kvote, seed)?;
    let rows: Vec<Vec<String>> = (0..cv.ids.len())
        .map(|i| vec![cv.ids[i].clone(), cv.truth[i].clone(), cv.predicted[i].clone(), cv.fold[i].to_string()])
        .collect();
    write_table(&a.out, &["id", "label", "predicted", "fold"], &rows)?;
    say(out, format_args!("wrote {} predictions to {}", rows.len(), a.out.display()));
    say(out, format_args!("cv accuracy: {}", format_sig9(cv.accuracy)));
    Ok(0)
}

fn parse_flag(cell: &str) -> Option<bool> {
    match cell.to_ascii_lowercase().as_str() {
        "1" | "true" | "anomaly" | "anomalous" => Some(true),
        "0" | "false" | "normal" => Some(false),
        _ => None,
    }
}

fn anomaly(a: AnomalyArgs, out: &mut dyn Write) -> Result<i32> {
    a.estimator.config()?;
    let train = a.estimator.prepare(load_dataset(&a.train)?);
    let test = a.estimator.prepare(load_dataset(&a.test)?);
    if train.dim() != test.dim() {
        return Err(Error::DimensionMismatch {
            group: test.group(0).id().to_string(),
            expected: train.dim(),
            found: test.dim(),
        });
    }
    let truth = match &a.truth {
        None => None,
        Some(path) => {
            let table = load_keyed_table(path)?;
            let cells = lookup(&table, &test.ids(), path)?;
            let flags = cells
                .iter()
                .zip(test.ids())
                .map(|(c, id)| {
                    c.first().and_then(|v| parse_flag(v)).ok_or_else(|| Error::Parse {
                        path: path.clone(),
                        row: 0,
                        column: 2,
                        message: format!("flag for `{id}` must be 1/0 or true/false"),
                    })
                })
                .collect::<Result<Vec<bool>>>()?;
            Some(flags)
        }
    };
    let w = a.estimator.cross(&test, &train)?;
    let scores = anomaly_scores(&w, a.kanom)?;
    let rows: Vec<Vec<String>> = scores
        .ids
        .iter()
        .zip(&scores.score)
        .map(|(id, s)| vec![id.clone(), format_sig9(*s)])
        .collect();
    write_table(&a.out, &["id", "score"], &rows)?;
    say(out, format_args!("wrote {} scores to {}", rows.len(), a.out.display()));
    if let Some(flags) = truth {
        say(out, format_args!("AUC: {}", format_sig9(auc(&scores.score, &flags)?)));
    }
    Ok(0)
}

fn write_params(s: &SynthOutput, indices: &[usize], dir: &Path) -> Result<()> {
    let mut header = vec!["id"];
    header.extend(s.param_names.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = indices
        .iter()
        .map(|&i| {
            std::iter::once(s.dataset.group(i).id().to_string())
                .chain(s.params[i].iter().map(|v| v.to_string()))
                .collect()
        })
        .collect();
    write_table(dir.join("params.csv"), &header, &rows)
}

fn synth(a: SynthArgs, seed: u64, out: &mut dyn Write) -> Result<i32> {
    let grid_samples = a.samples.unwrap_or(DEFAULT_GRID_SAMPLES);
    let sine_samples = a.samples.unwrap_or(DEFAULT_SINE_SAMPLES);
    let s = match a.family {
        Family::Ugrid => gen_param_grid(SynthFamily::UniformGrid, seed, grid_samples)?,
        Family::Ggrid => gen_param_grid(SynthFamily::GaussianGrid, seed, grid_samples)?,
        Family::Bgrid => gen_param_grid(SynthFamily::BetaGrid, seed, grid_samples)?,
        Family::Sine => gen_noisy_sine(a.groups, sine_samples, seed)?,
        Family::SineAnom => {
            if !(a.train_fraction > 0.0 && a.train_fraction < 1.0) {
                return Err(Error::Config(format!(
                    "--train-fraction must be in (0, 1), got {}",
                    a.train_fraction
                )));
            }
            gen_sine_anomaly_scenario(a.normal, a.anomalies, sine_samples, seed)?
        }
        Family::Classes => {
            gen_gaussian_classes(&a.class_means, a.class_std, a.groups_per_class, a.samples.unwrap_or(1000), seed)?
        }
    };
    let all: Vec<usize> = (0..s.dataset.len()).collect();
    match &s.anomalous {
        None => {
            save_dataset(&s.dataset, &a.out)?;
            write_params(&s, &all, &a.out)?;
            say(out, format_args!("wrote {} groups to {}", s.dataset.len(), a.out.display()));
        }
        Some(flags) => {
            let (train, test) = anomaly_split(flags, a.train_fraction, seed);
            if train.is_empty() || test.is_empty() {
                return Err(Error::Config("split leaves the train or test side empty".into()));
            }
            let (train_dir, test_dir) = (a.out.join("train"), a.out.join("test"));
            save_dataset(&s.dataset.subset(&train)?, &train_dir)?;
            save_dataset(&s.dataset.subset(&test)?, &test_dir)?;
            write_params(&s, &train, &train_dir)?;
            write_params(&s, &test, &test_dir)?;
            let rows: Vec<Vec<String>> = test
                .iter()
                .map(|&i| vec![s.dataset.group(i).id().to_string(), u8::from(flags[i]).to_string()])
                .collect();
            write_table(test_dir.join("flags.csv"), &["id", "anomalous"], &rows)?;
            say(
                out,
                format_args!(
                    "wrote {} training and {} test groups under {}",
                    train.len(),
                    test.len(),
                    a.out.display()
                ),
            );
        }
    }
    Ok(0)
}

fn verify(out: &mut dyn Write) -> Result<i32> {
    let outcomes = run_suite();
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        say(out, format_args!("{status}  {:width$}  {}", o.name, o.detail));
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    say(out, format_args!("{} of {} checks passed", outcomes.len() - failed, outcomes.len()));
    Ok(if failed == 0 { 0 } else { 2 })
}
