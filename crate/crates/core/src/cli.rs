//! Command-line front end: `synth`, `fit`, `predict`, `cv` and `rank`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 solver failure. Diagnostics are a single line on stderr.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cv::{repeated_kfold_cv, CvConfig, DEFAULT_LAMBDA_GRID};
use crate::dataset::Hyperparams;
use crate::error::{Error, Result};
use crate::io::{load_csv, load_model, save_model, write_csv};
use crate::optimizer::fit;
use crate::synth::{generate_synthetic, SynthConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "jointsel", version, about = "Joint sparse classification and conversion-time regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic cohort CSV
    Synth(SynthArgs),
    /// Fit a model and write it to a model file
    Fit(FitArgs),
    /// Predict labels, scores and conversion times for a dataset
    Predict(PredictArgs),
    /// Repeated stratified k-fold cross-validation over a lambda grid
    Cv(CvArgs),
    /// Rank features by coefficient row norm
    Rank(RankArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 322)]
    n_negative: usize,
    #[arg(long, default_value_t = 86)]
    n_positive: usize,
    #[arg(long, default_value_t = 390)]
    d: usize,
    #[arg(long, default_value_t = 10)]
    support: usize,
    #[arg(long, default_value_t = 1.0)]
    noise_class: f64,
    #[arg(long, default_value_t = 1.0)]
    noise_time: f64,
    #[arg(long, default_value_t = 5.64)]
    mean_days: f64,
    #[arg(long, default_value_t = 34.0 / 86.0)]
    frac_admission: f64,
    /// Plain Gaussian features instead of density/volume/mass triplets
    #[arg(long)]
    plain: bool,
    #[arg(long)]
    negatives_have_times: bool,
    /// Also write the planted coefficients (index,name,w,v)
    #[arg(long)]
    planted_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 50)]
    k: usize,
    #[arg(long)]
    no_sample_selection: bool,
    #[arg(long)]
    no_standardize: bool,
    #[arg(long)]
    intercept: bool,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn hyperparams(&self, lambda: f64) -> Hyperparams {
        Hyperparams {
            lambda,
            k: self.k,
            max_outer_iters: self.max_iters,
            outer_tol: self.tol,
            standardize: !self.no_standardize,
            sample_selection_enabled: !self.no_sample_selection,
            fit_intercept: self.intercept,
            seed: self.seed,
            ..Hyperparams::default()
        }
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Defaults to stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CvArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated lambda values
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Single lambda (alternative to --grid)
    #[arg(long, conflicts_with = "grid")]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 20)]
    repeats: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Per-cell report CSV
    #[arg(long)]
    out: PathBuf,
    /// Summary text (defaults to stdout)
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Per-feature selection counts at the best lambda
    #[arg(long)]
    freq_out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct RankArgs {
    #[arg(long)]
    model: PathBuf,
    /// Selection-frequency CSV written by `cv --freq-out`
    #[arg(long)]
    freq: Option<PathBuf>,
    /// Defaults to stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => write_text(p, text),
        None => stdout.write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn synth(a: SynthArgs, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let cfg = SynthConfig {
        n_negative: a.n_negative,
        n_positive: a.n_positive,
        d: a.d,
        support_size: a.support,
        noise_sd_class: a.noise_class,
        noise_sd_time: a.noise_time,
        mean_conversion_days: a.mean_days,
        frac_severe_at_admission: a.frac_admission,
        use_radiomics_structure: !a.plain,
        negatives_have_times: a.negatives_have_times,
        seed: a.seed,
        ..SynthConfig::default()
    };
    let (ds, planted) = generate_synthetic(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
    write_csv(&ds, &a.out)?;
    if let Some(p) = &a.planted_out {
        let mut s = String::from("index,name,w,v\n");
        for i in 0..ds.n_features() {
            let _ = writeln!(s, "{},{},{},{}", i, ds.feature_name(i), planted.w[i], planted.v[i]);
        }
        write_text(p, &s)?;
    }
    let _ = writeln!(
        stdout,
        "wrote {} samples ({} positive) x {} features to {}",
        ds.n_samples(),
        ds.class_count(1),
        ds.n_features(),
        a.out.display()
    );
    Ok(())
}

fn fit_cmd(a: FitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    let hp = a.solver.hyperparams(a.lambda);
    hp.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let ds = load_csv(&a.data)?;
    let report = fit(&ds, &hp)?;
    for w in &report.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    save_model(&report.model, &a.out)?;
    let mut s = String::new();
    for v in &report.objective_trace {
        let _ = writeln!(s, "{v}");
    }
    emit(None, &s, stdout)?;
    Ok(())
}

fn predict_cmd(a: PredictArgs, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let model = load_model(&a.model)?;
    let ds = load_csv(&a.data)?;
    let preds = model.predict_dataset(&ds)?;
    // time_pred is only clinically meaningful for predicted positives
    let mut s = String::from("id,label_pred,score,time_pred\n");
    for (j, p) in preds.iter().enumerate() {
        let _ = writeln!(s, "{},{},{},{}", ds.sample_id(j), p.label, p.score, p.time);
    }
    emit(a.out.as_deref(), &s, stdout)?;
    Ok(())
}

fn cv_cmd(a: CvArgs, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let grid = match (&a.grid, a.lambda) {
        (Some(g), _) => g.clone(),
        (None, Some(l)) => vec![l],
        (None, None) => DEFAULT_LAMBDA_GRID.to_vec(),
    };
    let hp = a.solver.hyperparams(grid[0]);
    for &l in &grid {
        hp.clone()
            .with_lambda(l)
            .validate()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if a.folds < 2 || a.repeats == 0 || a.jobs == 0 {
        return Err(Failure::Usage("--folds must be >= 2, --repeats and --jobs >= 1".into()));
    }
    let ds = load_csv(&a.data)?;
    let cfg = CvConfig {
        folds: a.folds,
        repeats: a.repeats,
        seed: a.solver.seed,
        jobs: a.jobs,
    };
    let report = repeated_kfold_cv(&ds, &hp, &grid, &cfg)?;
    report.write_csv(&a.out)?;
    if let (Some(p), Some(best)) = (&a.freq_out, report.best_lambda) {
        write_text(p, &report.selection_frequency_csv(best).unwrap_or_default())?;
    }
    emit(a.summary.as_deref(), &report.summary_text(), stdout)?;
    Ok(())
}

fn parse_freq(path: &Path) -> Result<Vec<(usize, usize, usize)>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |line: usize, msg: &str| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.to_string(),
    };
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 4 {
            return Err(bad(i + 1, "expected index,name,count,total"));
        }
        let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad(i + 1, "invalid integer"));
        rows.push((num(fields[0])?, num(fields[fields.len() - 2])?, num(fields[fields.len() - 1])?));
    }
    Ok(rows)
}

fn rank_cmd(a: RankArgs, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let model = load_model(&a.model)?;
    let freq = a.freq.as_deref().map(parse_freq).transpose()?;
    let mut s = String::from("rank,index,name,row_norm");
    if freq.is_some() {
        s.push_str(",selection_count,selection_total");
    }
    s.push('\n');
    for (r, f) in model.feature_ranking().iter().enumerate() {
        let _ = write!(s, "{},{},{},{}", r + 1, f.index, f.name, f.norm);
        if let Some(rows) = &freq {
            match rows.iter().find(|row| row.0 == f.index) {
                Some(&(_, c, t)) => {
                    let _ = write!(s, ",{c},{t}");
                }
                None => s.push_str(",NA,NA"),
            }
        }
        s.push('\n');
    }
    emit(a.out.as_deref(), &s, stdout)?;
    Ok(())
}

/// Runs the CLI on `argv` (including the program name), writing to the given
/// streams, and returns the process exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("usage error");
                    let _ = writeln!(stderr, "{first}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a, stdout),
        Command::Fit(a) => fit_cmd(a, stdout, stderr),
        Command::Predict(a) => predict_cmd(a, stdout),
        Command::Cv(a) => cv_cmd(a, stdout),
        Command::Rank(a) => rank_cmd(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_solver_failure() {
                EXIT_SOLVER
            } else {
                EXIT_DATA
            }
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
