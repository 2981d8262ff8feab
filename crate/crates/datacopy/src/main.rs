use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use datacopy::error::{CliError, Result};
use datacopy::io::{load_point_set, save_point_set};
use datacopy::report::{
    emit_report, partition_to_json, report_to_json, to_json, FrechetJson, GlobalReportJson,
    KmmdJson, NdbJson, NnJson, PrJson,
};
use datacopy::sweep::{parse_sigmas, run_sweep, summarize, summary_csv, sweep_csv, SweepConfig};
use datacopy_core::baselines::{
    binning_ndb, frechet_gaussian, kmmd_three_sample, precision_recall_kmeans, two_sample_nn,
    Bandwidth, DEFAULT_PERMUTATIONS, DEFAULT_PR_RESOLUTION,
};
use datacopy_core::copy_detector::{ct_test, global_test, DEFAULT_MIN_CELL, DEFAULT_SIGNIFICANCE};
use datacopy_core::dataset::generate_moons;
use datacopy_core::partition::{fit_kmeans, DEFAULT_MAX_ITERS};
use datacopy_core::{CopyConfig, Metric, PointSet, Role, Seed, Tau};

/// Detect training-data copying in generative models from samples.
#[derive(Debug, Parser)]
#[command(name = "datacopy", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a two-moons sample as CSV.
    Moons {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cell-partitioned copying test and representation counts.
    Test(TestArgs),
    /// Global copying test on distances to the training set.
    Global {
        #[command(flatten)]
        sets: ThreeSets,
        #[arg(long, default_value = "squared-euclidean", value_parser = parse_metric)]
        metric: Metric,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Comparison baselines.
    #[command(subcommand)]
    Baseline(Baseline),
    /// Sweep a Gaussian KDE bandwidth and record every statistic.
    KdeSweep(SweepArgs),
}

#[derive(Debug, Args)]
struct ThreeSets {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    gen: PathBuf,
}

#[derive(Debug, Args)]
struct DetectorFlags {
    /// Number of k-means cells fitted on the training set.
    #[arg(long, default_value_t = 10)]
    cells: usize,
    /// Minimum generated mass for a cell, or "auto" for min-cell / m.
    #[arg(long, default_value = "auto", value_parser = parse_tau)]
    tau: Tau,
    #[arg(long, default_value_t = DEFAULT_MIN_CELL)]
    min_cell: usize,
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
    significance: f64,
    #[arg(long, default_value = "squared-euclidean", value_parser = parse_metric)]
    metric: Metric,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl DetectorFlags {
    fn config(&self) -> CopyConfig {
        CopyConfig {
            tau: self.tau,
            min_cell: self.min_cell,
            significance: self.significance,
            metric: self.metric,
        }
    }
}

#[derive(Debug, Args)]
struct TestArgs {
    #[command(flatten)]
    sets: ThreeSets,
    #[command(flatten)]
    flags: DetectorFlags,
    /// Report JSON path; printed to stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the fitted partition as JSON.
    #[arg(long)]
    partition_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Baseline {
    /// Leave-one-out 1-NN accuracy over pooled training and generated points.
    Nn {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        gen: PathBuf,
        #[arg(long, default_value = "squared-euclidean", value_parser = parse_metric)]
        metric: Metric,
        /// Draw |gen| training points first when the sizes differ.
        #[arg(long)]
        subsample: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fréchet distance between Gaussian fits of two samples.
    Frechet {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cell-occupancy z-tests of the generated sample against the training set.
    Ndb {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        gen: PathBuf,
        #[arg(long, default_value_t = 10)]
        cells: usize,
        #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
        significance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Precision/recall curve over k-means cells of the pooled sample.
    Pr {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        gen: PathBuf,
        #[arg(long, default_value_t = 20)]
        cells: usize,
        #[arg(long, default_value_t = DEFAULT_PR_RESOLUTION)]
        resolution: usize,
        /// Number of clusterings to average over.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Three-sample kernel MMD comparison.
    Kmmd {
        #[command(flatten)]
        sets: ThreeSets,
        /// RBF bandwidth, or "median" for the median pairwise distance.
        #[arg(long, default_value = "median", value_parser = parse_bandwidth)]
        bandwidth: Bandwidth,
        #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
        permutations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Held-out points for the bandwidth log-likelihood column.
    #[arg(long)]
    validation: PathBuf,
    /// "lo:hi:N" for N log-spaced values, or a comma-separated list.
    #[arg(long, default_value = "0.01:10:20")]
    sigmas: String,
    /// Generated points per trial.
    #[arg(long, default_value_t = 1000)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    permutations: usize,
    #[command(flatten)]
    flags: DetectorFlags,
    #[arg(long)]
    out: PathBuf,
    /// Per-sigma means and standard deviations; defaults to
    /// `<out stem>_summary.csv` next to `--out`.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn parse_metric(s: &str) -> std::result::Result<Metric, String> {
    Metric::parse(s)
        .ok_or_else(|| format!("unknown metric {s:?}; use squared-euclidean or euclidean"))
}

fn parse_tau(s: &str) -> std::result::Result<Tau, String> {
    if s == "auto" {
        return Ok(Tau::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(Tau::Value(v)),
        _ => Err(format!(
            "tau must be \"auto\" or a number in [0, 1], got {s:?}"
        )),
    }
}

fn parse_bandwidth(s: &str) -> std::result::Result<Bandwidth, String> {
    if s == "median" {
        return Ok(Bandwidth::Median);
    }
    match s.parse::<f64>() {
        Ok(h) if h > 0.0 && h.is_finite() => Ok(Bandwidth::Fixed(h)),
        _ => Err(format!(
            "bandwidth must be \"median\" or a positive number, got {s:?}"
        )),
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_three(sets: &ThreeSets) -> Result<(PointSet, PointSet, PointSet)> {
    Ok((
        load_point_set(&sets.train, Role::Train)?,
        load_point_set(&sets.test, Role::Test)?,
        load_point_set(&sets.gen, Role::Generated)?,
    ))
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

fn default_summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    out.with_file_name(format!("{stem}_summary.csv"))
}

fn run_test(args: &TestArgs) -> Result<()> {
    let (train, test, gen) = load_three(&args.sets)?;
    let part = fit_kmeans(
        &train,
        args.flags.cells,
        Seed(args.flags.seed),
        DEFAULT_MAX_ITERS,
    )?;
    if let Some(p) = &args.partition_out {
        write_or_print(Some(p), &partition_to_json(&part)?)?;
    }
    let report = ct_test(&train, &test, &gen, &part, &args.flags.config())?;
    match &args.report {
        Some(p) => {
            emit_report(&report, p)?;
            let included = report.cells.iter().filter(|c| c.included_in_ct).count();
            eprintln!(
                "c_t = {:.4} over {included}/{} cells; global z_u = {:.4}",
                report.c_t, report.params.k, report.global.z_u
            );
            Ok(())
        }
        None => write_or_print(None, &report_to_json(&report)?),
    }
}

fn run_baseline(b: &Baseline) -> Result<()> {
    match b {
        Baseline::Nn {
            train,
            gen,
            metric,
            subsample,
            seed,
            out,
        } => {
            let mut train = load_point_set(train, Role::Train)?;
            let gen = load_point_set(gen, Role::Generated)?;
            if train.len() != gen.len() {
                if !subsample {
                    return Err(CliError::Usage(format!(
                        "the NN test needs equal sizes but train has {} points and gen has {}; \
                         pass --subsample to draw {} training points",
                        train.len(),
                        gen.len(),
                        gen.len()
                    )));
                }
                train = train.subsample(gen.len(), Seed(*seed))?;
            }
            let r = two_sample_nn(&train, &gen, *metric)?;
            write_or_print(out.as_deref(), &to_json(&NnJson::from(&r))?)
        }
        Baseline::Frechet { a, b, out } => {
            let a = load_point_set(a, Role::Train)?;
            let b = load_point_set(b, Role::Generated)?;
            let frechet = frechet_gaussian(&a, &b)?;
            write_or_print(out.as_deref(), &to_json(&FrechetJson { frechet })?)
        }
        Baseline::Ndb {
            train,
            gen,
            cells,
            significance,
            seed,
            out,
        } => {
            let train = load_point_set(train, Role::Train)?;
            let gen = load_point_set(gen, Role::Generated)?;
            let part = fit_kmeans(&train, *cells, Seed(*seed), DEFAULT_MAX_ITERS)?;
            let r = binning_ndb(&train, &gen, &part, *significance)?;
            write_or_print(out.as_deref(), &to_json(&NdbJson::from(&r))?)
        }
        Baseline::Pr {
            train,
            gen,
            cells,
            resolution,
            repeats,
            seed,
            out,
        } => {
            let train = load_point_set(train, Role::Train)?;
            let gen = load_point_set(gen, Role::Generated)?;
            let c =
                precision_recall_kmeans(&train, &gen, *cells, *resolution, *repeats, Seed(*seed))?;
            write_or_print(out.as_deref(), &to_json(&PrJson::from(&c))?)
        }
        Baseline::Kmmd {
            sets,
            bandwidth,
            permutations,
            seed,
            out,
        } => {
            let (train, test, gen) = load_three(sets)?;
            let r = kmmd_three_sample(&train, &test, &gen, *bandwidth, *permutations, Seed(*seed))?;
            write_or_print(out.as_deref(), &to_json(&KmmdJson::from(&r))?)
        }
    }
}

fn run_sweep_cmd(args: &SweepArgs) -> Result<()> {
    let sigmas = parse_sigmas(&args.sigmas)?;
    if same_file(&args.train, &args.validation) {
        eprintln!("warning: --train and --validation are the same file; the log-likelihood column will favour the smallest sigma");
    }
    let train = load_point_set(&args.train, Role::Train)?;
    let test = load_point_set(&args.test, Role::Test)?;
    let validation = load_point_set(&args.validation, Role::Validation)?;
    let config = SweepConfig {
        sigmas,
        m: args.m,
        trials: args.trials,
        cells: args.flags.cells,
        permutations: args.permutations,
        copy: args.flags.config(),
        seed: Seed(args.flags.seed),
    };
    let rows = run_sweep(&train, &test, &validation, &config)?;
    write_or_print(Some(&args.out), &sweep_csv(&rows))?;
    let summary_path = args
        .summary
        .clone()
        .unwrap_or_else(|| default_summary_path(&args.out));
    write_or_print(Some(&summary_path), &summary_csv(&summarize(&rows)))?;
    eprintln!(
        "wrote {} rows to {} and the summary to {}",
        rows.len(),
        args.out.display(),
        summary_path.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Moons {
            n,
            noise,
            seed,
            out,
        } => {
            if !(noise >= 0.0 && noise.is_finite()) {
                return Err(CliError::Usage(format!(
                    "--noise must be a nonnegative number, got {noise}"
                )));
            }
            save_point_set(&generate_moons(n, noise, Seed(seed))?, &out)
        }
        Command::Test(args) => run_test(&args),
        Command::Global {
            sets,
            metric,
            report,
        } => {
            let (train, test, gen) = load_three(&sets)?;
            let g = global_test(&train, &test, &gen, metric)?;
            let json = GlobalReportJson {
                global: (&g).into(),
                metric: metric.as_str().to_string(),
            };
            write_or_print(report.as_deref(), &to_json(&json)?)
        }
        Command::Baseline(b) => run_baseline(&b),
        Command::KdeSweep(args) => run_sweep_cmd(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
