//! Command implementations for the `prevalence` binary.
//!
//! Exit codes: 0 on success, 1 on input errors, 2 when the method itself
//! reports incompatibility (boundary or degenerate total-odds status,
//! constant likelihood ratio during calibration).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use prevalence::io::{read_edges_file, read_scores, LabelMode};
use prevalence::sim::{self, Binning, MonteCarloSummary, Scenario};
use prevalence::solver::{self, LambdaSample, DEFAULT_TOL};
use prevalence::{
    estimators, lambda_of, posterior0, target_weights, BiasBounds, BinEdges, BinnedConditionals,
    Error, ScoredDataset, SolutionCase, TargetDistribution,
};

pub const DEFAULT_BINS: usize = 20;
pub const DEFAULT_SMOOTHING: f64 = 0.5;

#[derive(Debug, Parser)]
#[command(name = "prevalence", version, about = "Estimate class priors under dataset shift")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the target prior by total probability, total odds and the debiased estimator.
    Estimate {
        #[command(flatten)]
        data: DataArgs,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recalibrate bin posteriors to an externally given target prior.
    Calibrate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        target_prior: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo scenario; writes `<prefix>_summary.json` and `<prefix>_methods.csv`.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        out: String,
    },
    /// Tabulate F(p) on a uniform grid of [0, 1].
    Curve {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Labeled training scores (`score,label`).
    pub train: PathBuf,
    /// Target scores (`score[,label]`; labels ignored).
    pub test: PathBuf,
    /// Number of equal-frequency bins on the pooled training scores.
    #[arg(long, conflicts_with = "edges")]
    pub bins: Option<usize>,
    /// JSON array of bin edges.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Pseudo count added to every bin and class.
    #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
    pub smoothing: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Label value of class A (default: lexicographically first label).
    #[arg(long)]
    pub positive_label: Option<String>,
}

/// Result of a command: text for stdout and the process exit code.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub binning: String,
    pub smoothing: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub bins: usize,
    pub p0: f64,
    pub overlap: f64,
    pub i_factor: f64,
    pub edges: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub mean_lambda: f64,
    pub mean_inv_lambda: f64,
    pub case: SolutionCase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    /// `null` when the likelihood ratio is degenerate.
    pub p1_total_odds: Option<f64>,
    pub status: SolutionCase,
    pub residual: Option<f64>,
    pub iterations: usize,
    pub p_total_probability: f64,
    /// Debiased estimate clamped to `[0, 1]`; `null` when `f_A == f_Ac`.
    pub p_debiased: Option<f64>,
    pub p_debiased_raw: Option<f64>,
    /// Bounds at `q = p1_total_odds`.
    pub bias_bounds: Option<BiasBounds>,
    pub diagnostics: Diagnostics,
    pub model: ModelSummary,
    pub settings: Settings,
    pub train: InputDigest,
    pub test: InputDigest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRow {
    pub bin: usize,
    pub lower: f64,
    pub upper: f64,
    pub weight: f64,
    pub lambda: f64,
    pub posterior0: f64,
    pub posterior1: f64,
    pub naive: f64,
    pub naive_valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub target_prior: f64,
    pub c: f64,
    pub achieved_mean: f64,
    pub naive_scale: f64,
    pub naive_all_valid: bool,
    pub bins: Vec<BinRow>,
    pub settings: Settings,
    pub train: InputDigest,
    pub test: InputDigest,
}

/// Parsed inputs shared by the data commands.
pub struct Prepared {
    pub model: BinnedConditionals,
    pub target: TargetDistribution,
    pub settings: Settings,
    pub train: InputDigest,
    pub test: InputDigest,
}

fn digest(path: &Path, bytes: &[u8], records: usize) -> InputDigest {
    let hash = Sha256::digest(bytes);
    let hex = hash.iter().map(|b| format!("{b:02x}")).collect::<String>();
    InputDigest {
        path: path.display().to_string(),
        sha256: hex,
        records,
    }
}

fn load(path: &Path, mode: &LabelMode) -> anyhow::Result<(ScoredDataset, Vec<u8>)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let data = read_scores(bytes.as_slice(), &path.display().to_string(), mode)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok((data, bytes))
}

/// Reads both files, bins and fits the training model, and bins the target.
pub fn prepare(args: &DataArgs) -> anyhow::Result<Prepared> {
    let train_mode = LabelMode::Classes {
        positive: args.positive_label.clone(),
    };
    let (train, train_bytes) = load(&args.train, &train_mode)?;
    let (test, test_bytes) = load(&args.test, &LabelMode::Ignore)?;

    let (edges, binning) = match (&args.edges, args.bins) {
        (Some(path), _) => (
            read_edges_file(path).with_context(|| format!("reading edges {}", path.display()))?,
            format!("edges:{}", path.display()),
        ),
        (None, bins) => {
            let bins = bins.unwrap_or(DEFAULT_BINS);
            let scores: Vec<f64> = train.scores().collect();
            (
                BinEdges::equal_frequency(&scores, bins)?,
                format!("equal_frequency:{bins}"),
            )
        }
    };
    let model = prevalence::fit_binned(&train, &edges, args.smoothing)?;
    let target = target_weights(&test, &edges)?;
    Ok(Prepared {
        model,
        target,
        settings: Settings {
            binning,
            smoothing: args.smoothing,
            tol: args.tol,
        },
        train: digest(&args.train, &train_bytes, train.len()),
        test: digest(&args.test, &test_bytes, test.len()),
    })
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn estimate_report(p: &Prepared) -> anyhow::Result<EstimateReport> {
    let est = estimators::total_odds(&p.model, &p.target, p.settings.tol)?;
    let tp = estimators::total_probability(&p.model, &p.target)?;
    let debiased_raw = match estimators::debiased_total_probability(&p.model, &p.target) {
        Ok(v) => Some(v),
        Err(Error::DegenerateOverlap) => None,
        Err(e) => return Err(e.into()),
    };
    let model_bounds = estimators::bias_bounds(&p.model, p.model.p0());
    Ok(EstimateReport {
        p1_total_odds: finite(est.p1),
        status: est.status,
        residual: finite(est.residual),
        iterations: est.iterations,
        p_total_probability: tp,
        p_debiased: debiased_raw.map(|d| d.clamp(0.0, 1.0)),
        p_debiased_raw: debiased_raw,
        bias_bounds: finite(est.p1).map(|q| estimators::bias_bounds(&p.model, q)),
        diagnostics: Diagnostics {
            mean_lambda: est.diagnostics.mean_lambda,
            mean_inv_lambda: est.diagnostics.mean_inv_lambda,
            case: est.diagnostics.case,
        },
        model: ModelSummary {
            bins: p.model.bins(),
            p0: p.model.p0(),
            overlap: model_bounds.overlap,
            i_factor: model_bounds.i_factor,
            edges: p.model.edges().as_slice().to_vec(),
        },
        settings: p.settings.clone(),
        train: p.train.clone(),
        test: p.test.clone(),
    })
}

pub fn calibration_report(p: &Prepared, target_prior: f64) -> prevalence::Result<CalibrationReport> {
    let cal = estimators::recalibrate_posteriors(&p.model, &p.target, target_prior, p.settings.tol)?;
    let naive = estimators::naive_scaled_posterior(&p.model, &p.target, target_prior)?;
    let edges = p.model.edges().as_slice();
    let bins = lambda_of(&p.model)
        .into_iter()
        .zip(posterior0(&p.model))
        .enumerate()
        .map(|(k, (lambda, post0))| BinRow {
            bin: k,
            lower: edges[k],
            upper: edges[k + 1],
            weight: p.target.weights()[k],
            lambda,
            posterior0: post0,
            posterior1: cal.posterior1[k],
            naive: naive.posterior[k],
            naive_valid: naive.valid[k],
        })
        .collect();
    Ok(CalibrationReport {
        target_prior,
        c: cal.c,
        achieved_mean: cal.achieved_mean,
        naive_scale: naive.scale,
        naive_all_valid: naive.all_valid(),
        bins,
        settings: p.settings.clone(),
        train: p.train.clone(),
        test: p.test.clone(),
    })
}

/// `p,F,case,root` rows on `grid` uniform points of `[0, 1]`.
pub fn curve_csv(p: &Prepared, grid: usize) -> anyhow::Result<String> {
    if grid < 2 {
        bail!("grid must have at least 2 points");
    }
    let s = LambdaSample::new(lambda_of(&p.model), p.target.weights().to_vec())?;
    let est = solver::solve_total_odds(&s, p.settings.tol, solver::DEFAULT_MAX_ITER)?;
    let root = finite(est.p1).map(|r| r.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["p", "F", "case", "root"])?;
    for i in 0..grid {
        let x = i as f64 / (grid - 1) as f64;
        let f = solver::f_eval(x, &s);
        w.write_record([x.to_string(), f.to_string(), est.status.as_str().to_string(), root.clone()])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Scenario document for `simulate`: the scenario plus binning settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(flatten)]
    pub scenario: Scenario,
    #[serde(default)]
    pub bins: Option<usize>,
    #[serde(default)]
    pub edges: Option<Vec<f64>>,
    #[serde(default)]
    pub pseudo_count: Option<f64>,
}

pub fn simulate(path: &Path) -> anyhow::Result<MonteCarloSummary> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ScenarioFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let binning = match file.edges {
        Some(e) => Binning::Fixed(BinEdges::new(e)?),
        None => Binning::EqualFrequency(file.bins.unwrap_or(DEFAULT_BINS)),
    };
    let summary = sim::run_monte_carlo(
        &file.scenario,
        &binning,
        file.pseudo_count.unwrap_or(DEFAULT_SMOOTHING),
    )?;
    Ok(summary)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<String> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            Ok(String::new())
        }
        None => Ok(text.to_string()),
    }
}

/// Executes a parsed command. `Err` means an input error (exit code 1).
pub fn execute(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Estimate { data, out } => {
            let prepared = prepare(data)?;
            let report = estimate_report(&prepared)?;
            let json = serde_json::to_string_pretty(&report)? + "\n";
            let exit_code = if report.status == SolutionCase::Interior { 0 } else { 2 };
            Ok(Outcome {
                stdout: emit(out.as_deref(), &json)?,
                exit_code,
            })
        }
        Command::Calibrate {
            data,
            target_prior,
            out,
        } => {
            if !(*target_prior > 0.0 && *target_prior < 1.0) {
                bail!("--target-prior must lie in (0,1), got {target_prior}");
            }
            let prepared = prepare(data)?;
            match calibration_report(&prepared, *target_prior) {
                Ok(report) => {
                    let json = serde_json::to_string_pretty(&report)? + "\n";
                    Ok(Outcome {
                        stdout: emit(out.as_deref(), &json)?,
                        exit_code: 0,
                    })
                }
                Err(Error::DegenerateLambda) => Ok(Outcome {
                    stdout: format!("error: {}\n", Error::DegenerateLambda),
                    exit_code: 2,
                }),
                Err(e) => Err(e.into()),
            }
        }
        Command::Simulate { scenario, out } => {
            let summary = simulate(scenario)?;
            let json = serde_json::to_string_pretty(&summary)? + "\n";
            fs::write(format!("{out}_summary.json"), &json)?;
            let mut csv_file = fs::File::create(format!("{out}_methods.csv"))?;
            summary.write_methods_csv(&mut csv_file)?;
            csv_file.flush()?;
            Ok(Outcome {
                stdout: json,
                exit_code: 0,
            })
        }
        Command::Curve { data, grid, out } => {
            let prepared = prepare(data)?;
            let text = curve_csv(&prepared, *grid)?;
            Ok(Outcome {
                stdout: emit(out.as_deref(), &text)?,
                exit_code: 0,
            })
        }
    }
}
