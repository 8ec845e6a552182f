use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use sectorcoint_core::cointegration::{embedded_critical_values, DecisionRule, GhModel, GhOptions, GhStatistic, Trim};
use sectorcoint_core::ingest::{load_csv, Transform};
use sectorcoint_core::montecarlo::simulate_critical_values;
use sectorcoint_core::{Error, Result};

use crate::config::{Overrides, PipelineConfig, UnitRootSettings};
use crate::demo::{write_demo, DEMO_SEED};
use crate::stages::{gh_index, gh_row, run_pipeline, run_stage, unitroot_row, Stage, GH_COLUMNS, TABLE1_COLUMNS};
use crate::table::{num, Frame, Table, VERSION};

#[derive(Parser, Debug)]
#[command(
    name = "sectorcoint",
    version,
    about = "Inflation uncertainty, break cointegration and short-run dynamics for sector indexes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Pipeline configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `out_dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master seed; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Add industrial production to every regression.
    #[arg(long)]
    with_output: bool,
    /// Break trimming fractions, e.g. `0.15,0.85`.
    #[arg(long, value_name = "A,B", value_parser = parse_trim)]
    trim: Option<Trim>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            seed: self.seed,
            with_output: self.with_output,
            trim: self.trim,
        }
    }
}

#[derive(Args, Debug)]
struct StageArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct UnitrootArgs {
    #[command(flatten)]
    common: Common,
    /// Test a single `date,value` CSV instead of the configured data.
    #[arg(long, value_name = "CSV")]
    input: Option<PathBuf>,
    /// Transform applied to `--input` before testing.
    #[arg(long, default_value = "none", value_parser = parse_transform)]
    transform: Transform,
    #[arg(long, default_value = "date")]
    date_column: String,
    #[arg(long, default_value = "value")]
    value_column: String,
}

#[derive(Args, Debug)]
struct GhArgs {
    #[command(flatten)]
    common: Common,
    /// Wide CSV (`date,y,x1,...`) to test instead of the configured data.
    #[arg(long, value_name = "CSV")]
    input: Option<PathBuf>,
    /// Restrict `--input` mode to one model (LS, LST, RS, RST).
    #[arg(long, value_parser = parse_model)]
    model: Option<GhModel>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_model)]
    model: GhModel,
    /// Number of stochastic regressors.
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 160)]
    n: usize,
    #[arg(long, default_value_t = 5000)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV; standard output when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DemoArgs {
    #[arg(long, default_value = "data/demo", value_name = "DIR")]
    out: PathBuf,
    #[arg(long, default_value_t = DEMO_SEED)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load the manifest into data.csv and provenance.csv.
    Fetch(StageArgs),
    /// Estimate the UC-SV model on inflation; writes ucsv.csv with U.
    Ucsv(StageArgs),
    /// ADF and PP tests in levels and differences (Table 1).
    Unitroot(UnitrootArgs),
    /// Gregory-Hansen tests for every index and model, plus decisions.
    Gh(GhArgs),
    /// Break-dummy long-run fits and Wald tests for cointegrated indexes.
    Fit(StageArgs),
    /// Error-correction models for cointegrated indexes.
    Ecm(StageArgs),
    /// First-differenced VAR for indexes without cointegration.
    Var(StageArgs),
    /// CUSUM and CUSUM-of-squares paths for each error-correction model.
    Cusum(StageArgs),
    /// Markdown summary of all tables.
    Report(StageArgs),
    /// Every stage in order, publishing only on success.
    Pipeline(StageArgs),
    /// Simulated Gregory-Hansen critical values.
    SimulateCv(SimulateArgs),
    /// Write the synthetic demo dataset.
    DemoData(DemoArgs),
}

fn parse_trim(s: &str) -> std::result::Result<Trim, String> {
    let (a, b) = s.split_once(',').ok_or("expected two fractions `a,b`")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    Trim::new(a, b).map_err(|e| e.to_string())
}

fn parse_model(s: &str) -> std::result::Result<GhModel, String> {
    GhModel::from_str(s).map_err(|e| e.to_string())
}

fn parse_transform(s: &str) -> std::result::Result<Transform, String> {
    match s {
        "log" => Ok(Transform::Log),
        "yoy" => Ok(Transform::Yoy),
        "none" => Ok(Transform::None),
        "mom_ann" => Ok(Transform::MomAnn),
        other => Err(format!("unknown transform '{other}' (log, yoy, none, mom_ann)")),
    }
}

enum Failure {
    Usage(clap::Error),
    Stage(String),
}

impl From<crate::stages::StageError> for Failure {
    fn from(e: crate::stages::StageError) -> Self {
        Failure::Stage(e.to_string())
    }
}

fn stage_failure(stage: &str, e: Error) -> Failure {
    Failure::Stage(format!("stage `{stage}` failed: {e}"))
}

fn load_config(common: &Common, sub: &str) -> std::result::Result<PipelineConfig, Failure> {
    let Some(path) = &common.config else {
        let mut cmd = Cli::command();
        let msg = format!("`{sub}` needs --config <PATH>");
        return Err(Failure::Usage(cmd.error(ErrorKind::MissingRequiredArgument, msg)));
    };
    PipelineConfig::load(path, &common.overrides()).map_err(|e| stage_failure(sub, e))
}

fn report_written(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn staged(common: &Common, stage: Stage) -> std::result::Result<(), Failure> {
    let cfg = load_config(common, stage.name())?;
    report_written(&run_stage(&cfg, stage)?);
    Ok(())
}

fn unitroot_single(a: &UnitrootArgs, input: &Path) -> Result<()> {
    let raw = load_csv(input, &a.date_column, &a.value_column)?;
    let s = a.transform.apply(&raw)?;
    let mut t = Table::new(&TABLE1_COLUMNS);
    t.push(unitroot_row(&s, &UnitRootSettings::default())?);
    emit(&t.to_csv(), a.common.out.as_deref())
}

fn gh_single(a: &GhArgs, input: &Path) -> Result<()> {
    let text = fs::read_to_string(input).map_err(|e| Error::Config(format!("{}: {e}", input.display())))?;
    let frame = Frame::parse(&input.display().to_string(), &text)?;
    let (y, xs) = frame
        .series
        .split_first()
        .filter(|(_, xs)| !xs.is_empty())
        .ok_or_else(|| Error::InvalidInput("need a response column and at least one regressor".into()))?;
    let models: Vec<GhModel> = a.model.map_or_else(|| GhModel::ALL.to_vec(), |m| vec![m]);
    let opts = GhOptions {
        trim: a.common.trim.unwrap_or_default(),
        ..GhOptions::default()
    };
    let (results, decision) = gh_index(y, xs, &models, &opts, DecisionRule::default())?;
    let mut cols = GH_COLUMNS.to_vec();
    cols.push("passes");
    let mut t = Table::new(&cols);
    for (r, v) in results.iter().zip(&decision.verdicts) {
        let mut row = gh_row(y.id(), r);
        row.push(v.passes.to_string());
        t.push(row);
    }
    emit(&t.to_csv(), a.common.out.as_deref())
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let table = simulate_critical_values(a.model, a.m, a.n, a.reps, a.seed)?;
    let mut out = format!(
        "# sectorcoint {VERSION} simulate-cv model={} m={} n={} reps={} seed={}\n",
        a.model.label(),
        a.m,
        a.n,
        a.reps,
        a.seed
    );
    let mut t = Table::new(&["statistic", "cv1", "cv5", "cv10", "published_cv1", "published_cv5", "published_cv10"]);
    for stat in GhStatistic::ALL {
        let cv = table.get(stat);
        let mut row = vec![stat.to_string(), num(cv.one), num(cv.five), num(cv.ten)];
        match embedded_critical_values(a.model, a.m, stat) {
            Some(p) => row.extend([p.one, p.five, p.ten].map(num)),
            None => row.extend([String::new(), String::new(), String::new()]),
        }
        t.push(row);
    }
    out.push_str(&t.to_csv());
    emit(&out, a.out.as_deref())
}

fn dispatch(cmd: Command) -> std::result::Result<(), Failure> {
    match cmd {
        Command::Fetch(a) => staged(&a.common, Stage::Fetch),
        Command::Ucsv(a) => staged(&a.common, Stage::Ucsv),
        Command::Unitroot(a) => match &a.input {
            Some(input) => unitroot_single(&a, input).map_err(|e| stage_failure("unitroot", e)),
            None => staged(&a.common, Stage::Unitroot),
        },
        Command::Gh(a) => match &a.input {
            Some(input) => gh_single(&a, input).map_err(|e| stage_failure("gh", e)),
            None => staged(&a.common, Stage::Gh),
        },
        Command::Fit(a) => staged(&a.common, Stage::Fit),
        Command::Ecm(a) => staged(&a.common, Stage::Ecm),
        Command::Var(a) => staged(&a.common, Stage::Var),
        Command::Cusum(a) => staged(&a.common, Stage::Cusum),
        Command::Report(a) => staged(&a.common, Stage::Report),
        Command::Pipeline(a) => {
            let cfg = load_config(&a.common, "pipeline")?;
            report_written(&run_pipeline(&cfg)?);
            Ok(())
        }
        Command::SimulateCv(a) => simulate(&a).map_err(|e| stage_failure("simulate-cv", e)),
        Command::DemoData(a) => {
            let files = write_demo(&a.out, a.seed).map_err(|e| stage_failure("demo-data", e))?;
            report_written(&files);
            Ok(())
        }
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code: 0 success, 1 stage failure, 2 usage error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(e)) => {
            let _ = e.print();
            2
        }
        Err(Failure::Stage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}
