//! Pipeline stages. Each stage reads the artifacts of earlier stages from the
//! output directory and writes its own, so running the stages one by one
//! produces exactly the bytes of a one-shot pipeline run.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use sectorcoint_core::cointegration::{
    decide, fit_break_regression, gh_test, post_break_restrictions, wald_test, Decision, DecisionRule, GhModel,
    GhOptions, GhResult,
};
use sectorcoint_core::dynamics::{fit_ecm, fit_var_diff, EcmFit};
use sectorcoint_core::inference::{CriticalValues, Level};
use sectorcoint_core::ingest::{atomic_write, materialize};
use sectorcoint_core::series::{diff, MonthIndex, TimeSeries};
use sectorcoint_core::stability::{cusum, cusum_sq, recursive_residuals, CusumPath, CusumKind};
use sectorcoint_core::ucsv::estimate_ucsv;
use sectorcoint_core::unitroot::{adf_test_with, pp_test};
use sectorcoint_core::{Error, Result};

use crate::config::{PipelineConfig, UnitRootSettings};
use crate::table::{fixed, month, num, p_stars, Frame, Stamp, Table, VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Fetch,
    Ucsv,
    Unitroot,
    Gh,
    Fit,
    Ecm,
    Var,
    Cusum,
    Report,
}

impl Stage {
    pub const PIPELINE: [Stage; 9] = [
        Stage::Fetch,
        Stage::Ucsv,
        Stage::Unitroot,
        Stage::Gh,
        Stage::Fit,
        Stage::Ecm,
        Stage::Var,
        Stage::Cusum,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Fetch => "fetch",
            Stage::Ucsv => "ucsv",
            Stage::Unitroot => "unitroot",
            Stage::Gh => "gh",
            Stage::Fit => "fit",
            Stage::Ecm => "ecm",
            Stage::Var => "var",
            Stage::Cusum => "cusum",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("stage `{stage}` failed: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

pub const DATA: &str = "data.csv";
pub const PROVENANCE: &str = "provenance.csv";
pub const UCSV: &str = "ucsv.csv";
pub const TABLE1: &str = "table1_unitroot.csv";
pub const DECISIONS: &str = "decisions.csv";
pub const RESIDUALS: &str = "ecm_residuals.csv";
pub const SIGNS: &str = "sign_check.csv";
pub const CUSUM_PATHS: &str = "cusum_paths.csv";
pub const CUSUM_SUMMARY: &str = "cusum_summary.csv";
pub const SUMMARY: &str = "summary.md";

/// Table numbers shift by three when industrial production is included.
fn table_name(base: u8, with_output: bool, stem: &str) -> String {
    let n = if with_output { base + 3 } else { base };
    format!("table{n}_{stem}.csv")
}

pub const TABLE1_COLUMNS: [&str; 13] = [
    "variable",
    "adf_level",
    "adf_level_stars",
    "adf_level_lags",
    "adf_diff",
    "adf_diff_stars",
    "adf_diff_lags",
    "pp_level",
    "pp_level_stars",
    "pp_diff",
    "pp_diff_stars",
    "pp_bandwidth",
    "nobs",
];

pub const GH_COLUMNS: [&str; 22] = [
    "index",
    "model",
    "adf",
    "adf_stars",
    "adf_lags",
    "adf_break",
    "zt",
    "zt_stars",
    "zt_break",
    "za",
    "za_stars",
    "za_break",
    "adf_cv1",
    "adf_cv5",
    "adf_cv10",
    "zt_cv1",
    "zt_cv5",
    "zt_cv10",
    "za_cv1",
    "za_cv5",
    "za_cv10",
    "cv_source",
];

const DECISION_COLUMNS: [&str; 8] = [
    "index",
    "model",
    "adf_reject",
    "zt_reject",
    "za_reject",
    "passes",
    "cointegrated",
    "representative",
];

const COEF_COLUMNS: [&str; 6] = ["term", "estimate", "std_error", "t_stat", "p_value", "stars"];

/// One Table-1 row: ADF and PP on the level and on the first difference.
pub fn unitroot_row(s: &TimeSeries, settings: &UnitRootSettings) -> Result<Vec<String>> {
    let d = diff(s)?;
    let adf = |x: &TimeSeries| adf_test_with(x, settings.trend, settings.lag_rule, settings.max_lags);
    let pp = |x: &TimeSeries| pp_test(x, settings.trend, settings.pp_bandwidth);
    let (al, ad, pl, pd) = (adf(s)?, adf(&d)?, pp(s)?, pp(&d)?);
    let stars = |l: Option<Level>| l.map_or("", Level::stars).to_string();
    Ok(vec![
        s.id().to_string(),
        fixed(al.statistic),
        stars(al.reject_at),
        al.chosen_lags_or_bandwidth.to_string(),
        fixed(ad.statistic),
        stars(ad.reject_at),
        ad.chosen_lags_or_bandwidth.to_string(),
        fixed(pl.statistic),
        stars(pl.reject_at),
        fixed(pd.statistic),
        stars(pd.reject_at),
        pl.chosen_lags_or_bandwidth.to_string(),
        s.len().to_string(),
    ])
}

fn level_stars(cv: &CriticalValues, stat: f64) -> String {
    cv.reject_at(stat).map_or("", Level::stars).to_string()
}

/// One Table-2 row per model result.
pub fn gh_row(index: &str, r: &GhResult) -> Vec<String> {
    let cv = &r.critical_values;
    let simulated = [&cv.adf, &cv.z_t, &cv.z_alpha]
        .iter()
        .any(|c| c.source != sectorcoint_core::cointegration::CvSource::Embedded);
    let mut row = vec![
        index.to_string(),
        r.model.label().to_string(),
        fixed(r.adf.statistic),
        level_stars(&cv.adf.values, r.adf.statistic),
        r.adf_lags.to_string(),
        month(r.adf.break_date),
        fixed(r.z_t.statistic),
        level_stars(&cv.z_t.values, r.z_t.statistic),
        month(r.z_t.break_date),
        fixed(r.z_alpha.statistic),
        level_stars(&cv.z_alpha.values, r.z_alpha.statistic),
        month(r.z_alpha.break_date),
    ];
    for c in [&cv.adf, &cv.z_t, &cv.z_alpha] {
        row.extend([c.values.one, c.values.five, c.values.ten].map(num));
    }
    row.push(if simulated { "simulated" } else { "embedded" }.to_string());
    row
}

/// Runs all requested models on one index and applies the decision rule.
pub fn gh_index(
    y: &TimeSeries,
    xs: &[TimeSeries],
    models: &[GhModel],
    opts: &GhOptions,
    rule: DecisionRule,
) -> Result<(Vec<GhResult>, Decision)> {
    let results: Vec<GhResult> = models.iter().map(|&m| gh_test(y, xs, m, opts)).collect::<Result<_>>()?;
    let decision = decide(&results, rule);
    Ok((results, decision))
}

fn flag(b: bool) -> String {
    b.to_string()
}

/// Per-index cointegration verdict read back from `decisions.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexVerdict {
    pub index: String,
    pub cointegrated: bool,
    pub passing: Vec<GhModel>,
    pub representative: Option<GhModel>,
}

fn parse_bool(s: &str) -> Result<bool> {
    s.parse()
        .map_err(|_| Error::InvalidInput(format!("expected true/false, got '{s}'")))
}

fn read_verdicts(t: &Table) -> Result<Vec<IndexVerdict>> {
    let (ci, cm, cp, cc, cr) = (
        t.col("index")?,
        t.col("model")?,
        t.col("passes")?,
        t.col("cointegrated")?,
        t.col("representative")?,
    );
    let mut out: Vec<IndexVerdict> = Vec::new();
    for r in &t.rows {
        if out.last().map(|v| v.index != r[ci]).unwrap_or(true) {
            out.push(IndexVerdict {
                index: r[ci].clone(),
                cointegrated: parse_bool(&r[cc])?,
                passing: Vec::new(),
                representative: if r[cr].is_empty() {
                    None
                } else {
                    Some(GhModel::from_str(&r[cr])?)
                },
            });
        }
        if parse_bool(&r[cp])? {
            let v = out.last_mut().expect("pushed above");
            v.passing.push(GhModel::from_str(&r[cm])?);
        }
    }
    Ok(out)
}

/// Coefficient rows shared by the long-run, ECM and VAR tables.
fn coef_cells(c: &sectorcoint_core::cointegration::Coefficient) -> Vec<String> {
    vec![
        c.name.clone(),
        fixed(c.estimate),
        fixed(c.std_error),
        fixed(c.t_stat),
        fixed(c.p_value),
        p_stars(c.p_value).to_string(),
    ]
}

/// The aligned inputs every estimation stage works on.
struct Inputs {
    indexes: Vec<TimeSeries>,
    inflation: TimeSeries,
    uncertainty: TimeSeries,
    output: Option<TimeSeries>,
}

impl Inputs {
    /// `[I, U, (IP)]`.
    fn regressors(&self) -> Vec<TimeSeries> {
        let mut v = vec![self.inflation.clone(), self.uncertainty.clone()];
        v.extend(self.output.clone());
        v
    }

    fn index(&self, id: &str) -> Result<&TimeSeries> {
        self.indexes
            .iter()
            .find(|s| s.id() == id)
            .ok_or_else(|| Error::InvalidInput(format!("index '{id}' not in the data")))
    }
}

/// A configured run writing into one directory.
pub struct Run<'a> {
    pub cfg: &'a PipelineConfig,
    pub stamp: Stamp,
    pub dir: PathBuf,
}

impl<'a> Run<'a> {
    pub fn new(cfg: &'a PipelineConfig, dir: PathBuf) -> Result<Self> {
        Ok(Self {
            cfg,
            stamp: Stamp {
                hash: cfg.hash()?,
                seed: cfg.seed,
            },
            dir,
        })
    }

    fn read(&self, name: &str) -> Result<String> {
        let path = self.dir.join(name);
        let text = fs::read_to_string(&path).map_err(|e| {
            Error::InvalidInput(format!(
                "cannot read {} ({e}); run the earlier stages first",
                path.display()
            ))
        })?;
        Ok(self.stamp.verify(name, &text)?.to_string())
    }

    fn frame(&self, name: &str) -> Result<Frame> {
        Frame::parse(name, &self.read(name)?)
    }

    fn table(&self, name: &str) -> Result<Table> {
        Table::parse(name, &self.read(name)?)
    }

    fn gh_name(&self) -> String {
        table_name(2, self.cfg.with_output, "gh")
    }

    fn longrun_name(&self) -> String {
        table_name(3, self.cfg.with_output, "longrun")
    }

    fn wald_name(&self) -> String {
        table_name(3, self.cfg.with_output, "wald")
    }

    fn ecm_name(&self) -> String {
        table_name(4, self.cfg.with_output, "ecm")
    }

    fn var_name(&self) -> String {
        table_name(4, self.cfg.with_output, "var")
    }

    fn inputs(&self) -> Result<Inputs> {
        let data = self.frame(DATA)?;
        let ucsv = self.frame(UCSV)?;
        let roles = &self.cfg.series;
        let inflation = data.get(&roles.inflation)?.clone();
        let uncertainty = ucsv.get("U")?.clone();
        if uncertainty.start() != inflation.start() || uncertainty.len() != inflation.len() {
            return Err(Error::Alignment(format!("{UCSV} does not cover the sample of {DATA}")));
        }
        let output = if self.cfg.with_output {
            Some(data.get(&roles.output)?.clone())
        } else {
            None
        };
        let indexes = if roles.indexes.is_empty() {
            data.series
                .iter()
                .filter(|s| s.id() != roles.inflation && s.id() != roles.output)
                .cloned()
                .collect()
        } else {
            roles
                .indexes
                .iter()
                .map(|id| data.get(id).cloned())
                .collect::<Result<Vec<_>>>()?
        };
        if indexes.is_empty() {
            return Err(Error::InvalidInput("no stock indexes in the data".into()));
        }
        Ok(Inputs {
            indexes,
            inflation,
            uncertainty,
            output,
        })
    }

    fn verdicts(&self) -> Result<Vec<IndexVerdict>> {
        read_verdicts(&self.table(DECISIONS)?)
    }

    /// Computes a stage's artifacts; nothing is written on error.
    pub fn compute(&self, stage: Stage) -> Result<Vec<(String, String)>> {
        match stage {
            Stage::Fetch => self.fetch(),
            Stage::Ucsv => self.ucsv(),
            Stage::Unitroot => self.unitroot(),
            Stage::Gh => self.gh(),
            Stage::Fit => self.fit(),
            Stage::Ecm => self.ecm(),
            Stage::Var => self.var(),
            Stage::Cusum => self.cusum(),
            Stage::Report => self.report(),
        }
    }

    /// Computes and writes a stage; returns the files written.
    pub fn execute(&self, stage: Stage) -> std::result::Result<Vec<PathBuf>, StageError> {
        let wrap = |source| StageError { stage, source };
        let outputs = self.compute(stage).map_err(wrap)?;
        fs::create_dir_all(&self.dir).map_err(|e| {
            wrap(Error::Config(format!("cannot create {}: {e}", self.dir.display())))
        })?;
        let mut written = Vec::with_capacity(outputs.len());
        for (name, body) in outputs {
            let path = self.dir.join(&name);
            let bytes = format!("{}{}", self.stamp.header(), body);
            if let Err(e) = atomic_write(&path, bytes.as_bytes()) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(wrap(e));
            }
            written.push(path);
        }
        Ok(written)
    }

    fn fetch(&self) -> Result<Vec<(String, String)>> {
        let manifest = self.cfg.load_manifest()?;
        let m = materialize(&manifest)?;
        let roles = &self.cfg.series;
        m.get(&roles.inflation)
            .ok_or_else(|| Error::InvalidInput(format!("manifest has no inflation series '{}'", roles.inflation)))?;
        if self.cfg.with_output && m.get(&roles.output).is_none() {
            return Err(Error::InvalidInput(format!(
                "output series '{}' is required when industrial production is enabled",
                roles.output
            )));
        }
        for id in &roles.indexes {
            m.get(id)
                .ok_or_else(|| Error::InvalidInput(format!("manifest has no index '{id}'")))?;
        }
        let frame = Frame { series: m.series.clone() };
        Ok(vec![(DATA.into(), frame.to_csv()), (PROVENANCE.into(), m.report())])
    }

    fn ucsv(&self) -> Result<Vec<(String, String)>> {
        let data = self.frame(DATA)?;
        let pi = data.get(&self.cfg.series.inflation)?;
        let post = estimate_ucsv(pi, &self.cfg.ucsv_config())?;
        let frame = Frame {
            series: vec![
                post.pi.clone().with_id("pi"),
                post.trend.clone().with_id("trend"),
                post.gap.clone().with_id("gap"),
                post.abs_gap.clone().with_id("abs_gap"),
                post.sigma_eta.clone().with_id("sigma_eta"),
                post.sigma_eps.clone().with_id("sigma_eps"),
                post.sigma_eta.clone().with_id("U"),
            ],
        };
        Ok(vec![(UCSV.into(), frame.to_csv())])
    }

    fn unitroot(&self) -> Result<Vec<(String, String)>> {
        let inp = self.inputs()?;
        let mut t = Table::new(&TABLE1_COLUMNS);
        let mut vars: Vec<&TimeSeries> = inp.indexes.iter().collect();
        vars.push(&inp.inflation);
        vars.push(&inp.uncertainty);
        vars.extend(inp.output.as_ref());
        for s in vars {
            t.push(unitroot_row(s, &self.cfg.unitroot)?);
        }
        Ok(vec![(TABLE1.into(), t.to_csv())])
    }

    fn gh(&self) -> Result<Vec<(String, String)>> {
        let inp = self.inputs()?;
        let xs = inp.regressors();
        let opts = self.cfg.gh_options()?;
        let rule = self.cfg.decision_rule();
        let per_index: Vec<(Vec<GhResult>, Decision)> = inp
            .indexes
            .par_iter()
            .map(|y| gh_index(y, &xs, &GhModel::ALL, &opts, rule))
            .collect::<Result<_>>()?;
        let mut table = Table::new(&GH_COLUMNS);
        let mut decisions = Table::new(&DECISION_COLUMNS);
        for (y, (results, decision)) in inp.indexes.iter().zip(&per_index) {
            let rep = decision.representative().map_or(String::new(), |m| m.label().to_string());
            for (r, v) in results.iter().zip(&decision.verdicts) {
                table.push(gh_row(y.id(), r));
                decisions.push(vec![
                    y.id().to_string(),
                    v.model.label().to_string(),
                    flag(v.rejects[0]),
                    flag(v.rejects[1]),
                    flag(v.rejects[2]),
                    flag(v.passes),
                    flag(decision.cointegrated),
                    rep.clone(),
                ]);
            }
        }
        Ok(vec![(self.gh_name(), table.to_csv()), (DECISIONS.into(), decisions.to_csv())])
    }

    /// Z_t break date per (index, model) from the Table-2 artifact.
    fn zt_breaks(&self) -> Result<HashMap<(String, GhModel), MonthIndex>> {
        let t = self.table(&self.gh_name())?;
        let (ci, cm, cb) = (t.col("index")?, t.col("model")?, t.col("zt_break")?);
        t.rows
            .iter()
            .map(|r| Ok(((r[ci].clone(), GhModel::from_str(&r[cm])?), MonthIndex::from_str(&r[cb])?)))
            .collect()
    }

    fn fit(&self) -> Result<Vec<(String, String)>> {
        let inp = self.inputs()?;
        let xs = inp.regressors();
        let breaks = self.zt_breaks()?;
        let cov = self.cfg.short_run.covariance;
        let mut head = vec!["index", "model", "break"];
        head.extend(COEF_COLUMNS);
        head.extend(["r_squared", "nobs"]);
        let mut longrun = Table::new(&head);
        let mut wald = Table::new(&[
            "index",
            "model",
            "break",
            "restriction",
            "statistic",
            "df",
            "p_value",
            "stars",
        ]);
        let mut signs = Table::new(&["index", "model", "inflation_coef", "uncertainty_coef", "both_negative"]);
        let mut residuals = Vec::new();
        for v in self.verdicts()?.iter().filter(|v| v.cointegrated) {
            let y = inp.index(&v.index)?;
            for &model in &v.passing {
                let date = *breaks
                    .get(&(v.index.clone(), model))
                    .ok_or_else(|| Error::InvalidInput(format!("no break date for {} {}", v.index, model.label())))?;
                let fit = fit_break_regression(y, &xs, model, date, cov)?;
                let prefix = [v.index.clone(), model.label().to_string(), month(date)];
                for c in &fit.coefficients {
                    let mut row = prefix.to_vec();
                    row.extend(coef_cells(c));
                    row.extend([fixed(fit.r_squared), fit.nobs.to_string()]);
                    longrun.push(row);
                }
                for (label, restriction) in post_break_restrictions(&fit)? {
                    let w = wald_test(&fit, &restriction)?;
                    let mut row = prefix.to_vec();
                    row.extend([label, fixed(w.statistic), w.df.to_string(), fixed(w.p_value)]);
                    row.push(p_stars(w.p_value).to_string());
                    wald.push(row);
                }
                if model == GhModel::LST {
                    let est = |id: &str| fit.index_of(id).map(|j| fit.coefficients[j].estimate);
                    let (a1, a2) = (est(inp.inflation.id()), est(inp.uncertainty.id()));
                    if let (Some(a1), Some(a2)) = (a1, a2) {
                        signs.push(vec![
                            v.index.clone(),
                            model.label().to_string(),
                            fixed(a1),
                            fixed(a2),
                            flag(a1 < 0.0 && a2 < 0.0),
                        ]);
                    }
                }
                if Some(model) == v.representative {
                    residuals.push(fit.residuals.clone().with_id(v.index.clone()));
                }
            }
        }
        let frame = Frame { series: residuals };
        Ok(vec![
            (self.longrun_name(), longrun.to_csv()),
            (self.wald_name(), wald.to_csv()),
            (SIGNS.into(), signs.to_csv()),
            (RESIDUALS.into(), frame.to_csv()),
        ])
    }

    /// ECM fits for every cointegrated index, with the representative model.
    fn ecm_fits(&self, inp: &Inputs) -> Result<Vec<(IndexVerdict, EcmFit)>> {
        let resid = self.frame(RESIDUALS)?;
        let extra = self.cfg.short_run.ecm_extra_lags;
        self.verdicts()?
            .into_iter()
            .filter(|v| v.cointegrated)
            .map(|v| {
                let y = inp.index(&v.index)?;
                let e = resid.get(&v.index)?;
                let fit = fit_ecm(y, &inp.inflation, &inp.uncertainty, e, inp.output.as_ref(), extra)?;
                Ok((v, fit))
            })
            .collect()
    }

    fn ecm(&self) -> Result<Vec<(String, String)>> {
        let inp = self.inputs()?;
        let mut head = vec!["index", "model"];
        head.extend(COEF_COLUMNS);
        head.extend(["r_squared", "nobs"]);
        let mut t = Table::new(&head);
        for (v, fit) in self.ecm_fits(&inp)? {
            let model = v.representative.map_or("", GhModel::label);
            for c in &fit.coefficients {
                let mut row = vec![v.index.clone(), model.to_string()];
                row.extend(coef_cells(c));
                row.extend([fixed(fit.r_squared), fit.nobs.to_string()]);
                t.push(row);
            }
        }
        Ok(vec![(self.ecm_name(), t.to_csv())])
    }

    fn var(&self) -> Result<Vec<(String, String)>> {
        let inp = self.inputs()?;
        let p = self.cfg.short_run.var_lags;
        let mut head = vec!["index", "equation"];
        head.extend(COEF_COLUMNS);
        head.extend(["r_squared", "nobs", "spectral_radius", "stable"]);
        let mut t = Table::new(&head);
        for v in self.verdicts()?.iter().filter(|v| !v.cointegrated) {
            let mut set = vec![inp.index(&v.index)?.clone()];
            set.extend(inp.regressors());
            let fit = fit_var_diff(&set, p)?;
            for eq in &fit.equations {
                for c in &eq.coefficients {
                    let mut row = vec![v.index.clone(), eq.dependent.clone()];
                    row.extend(coef_cells(c));
                    row.extend([
                        fixed(eq.r_squared),
                        eq.nobs.to_string(),
                        fixed(fit.spectral_radius),
                        flag(fit.stable),
                    ]);
                    t.push(row);
                }
            }
        }
        Ok(vec![(self.var_name(), t.to_csv())])
    }

    fn cusum(&self) -> Result<Vec<(String, String)>> {
        let inp = self.inputs()?;
        let level = self.cfg.cusum.level;
        let mut paths = Table::new(&["index", "kind", "r", "date", "statistic", "lower", "upper"]);
        let mut summary = Table::new(&["index", "kind", "level", "bound_constant", "breached", "first_breach"]);
        for (v, fit) in self.ecm_fits(&inp)? {
            let w = recursive_residuals(&fit.response, &fit.design)?;
            let (k, n) = (fit.design.cols(), fit.response.len());
            let date = |r: usize| fit.start.plus(r as i64 - 1);
            for path in [cusum(&w, k, n, level)?, cusum_sq(&w, k, n, level)?] {
                let kind = kind_name(&path);
                for i in 0..path.r.len() {
                    paths.push(vec![
                        v.index.clone(),
                        kind.into(),
                        path.r[i].to_string(),
                        month(date(path.r[i])),
                        num(path.statistics[i]),
                        num(path.lower[i]),
                        num(path.upper[i]),
                    ]);
                }
                summary.push(vec![
                    v.index.clone(),
                    kind.into(),
                    level.to_string(),
                    fixed(path.bound_constant),
                    flag(path.breached),
                    path.first_breach.map_or(String::new(), |r| month(date(r))),
                ]);
            }
        }
        Ok(vec![
            (CUSUM_PATHS.into(), paths.to_csv()),
            (CUSUM_SUMMARY.into(), summary.to_csv()),
        ])
    }

    fn report(&self) -> Result<Vec<(String, String)>> {
        let data = self.frame(DATA)?;
        let first = data
            .series
            .first()
            .ok_or_else(|| Error::InvalidInput(format!("{DATA} holds no series")))?;
        let ip = self.cfg.with_output;
        let n2 = if ip { 5 } else { 2 };
        let mut md = String::new();
        md.push_str(&format!(
            "\n- version: {VERSION}\n- config hash: {}\n- seed: {}\n- sample: {} to {} ({} observations)\n- industrial production: {}\n- decision rule: at least {} of ADF, Zt, Za reject at {}\n",
            self.stamp.hash,
            self.stamp.seed,
            first.start(),
            first.end(),
            first.len(),
            if ip { "included" } else { "excluded" },
            self.cfg.decision.min_rejections,
            self.cfg.decision.level,
        ));

        md.push_str("\n## Data provenance\n\n");
        md.push_str(&self.table(PROVENANCE)?.markdown(&[
            "id",
            "source",
            "location",
            "rows_loaded",
            "transform",
            "rows_used",
        ])?);

        md.push_str("\n## Table 1. Unit root tests\n\n");
        let t1 = starred(
            &self.table(TABLE1)?,
            &[
                ("variable", None),
                ("adf_level", Some("adf_level_stars")),
                ("adf_diff", Some("adf_diff_stars")),
                ("pp_level", Some("pp_level_stars")),
                ("pp_diff", Some("pp_diff_stars")),
            ],
        )?;
        md.push_str(&t1);

        md.push_str(&format!("\n## Table {n2}. Gregory-Hansen cointegration tests\n\n"));
        let t2 = self.table(&self.gh_name())?;
        md.push_str(&starred(
            &t2,
            &[
                ("index", None),
                ("model", None),
                ("adf", Some("adf_stars")),
                ("adf_break", None),
                ("zt", Some("zt_stars")),
                ("za", Some("za_stars")),
                ("zt_break", None),
            ],
        )?);
        md.push_str("\nCritical values used (1%, 5%, 10%):\n\n");
        let mut seen = Vec::new();
        let mut cvs = Table::new(&["model", "ADF", "Zt", "Za", "source"]);
        let col = |n: &str| t2.col(n);
        for r in &t2.rows {
            let model = &r[col("model")?];
            if seen.contains(model) {
                continue;
            }
            seen.push(model.clone());
            let triple = |s: &str| -> Result<String> {
                let cells: Vec<String> = ["1", "5", "10"]
                    .iter()
                    .map(|l| Ok(short(&r[col(&format!("{s}_cv{l}"))?])))
                    .collect::<Result<_>>()?;
                Ok(cells.join(", "))
            };
            cvs.push(vec![
                model.clone(),
                triple("adf")?,
                triple("zt")?,
                triple("za")?,
                r[col("cv_source")?].clone(),
            ]);
        }
        md.push_str(&cvs.markdown(&["model", "ADF", "Zt", "Za", "source"])?);

        md.push_str("\n## Cointegration decisions\n\n");
        let mut dec = Table::new(&["index", "cointegrated", "passing models", "representative"]);
        for v in self.verdicts()? {
            let passing: Vec<&str> = v.passing.iter().map(|m| m.label()).collect();
            dec.push(vec![
                v.index.clone(),
                if v.cointegrated { "yes" } else { "no" }.into(),
                passing.join(" "),
                v.representative.map_or("", GhModel::label).into(),
            ]);
        }
        md.push_str(&dec.markdown(&["index", "cointegrated", "passing models", "representative"])?);

        let n3 = n2 + 1;
        md.push_str(&format!(
            "\n## Table {n3}. Long-run equations\n\nBreak dates come from the Zt minimiser; Dum is one after the break date.\n\n"
        ));
        md.push_str(&coefficient_block(&self.table(&self.longrun_name())?, &["index", "model", "break"])?);
        md.push_str("\nWald tests of zero post-break slopes:\n\n");
        md.push_str(&starred(
            &self.table(&self.wald_name())?,
            &[
                ("index", None),
                ("model", None),
                ("restriction", None),
                ("statistic", None),
                ("p_value", Some("stars")),
            ],
        )?);
        md.push_str("\nSign check for GH-LST fits (inflation and uncertainty slopes both negative):\n\n");
        md.push_str(&self.table(SIGNS)?.markdown(&[
            "index",
            "model",
            "inflation_coef",
            "uncertainty_coef",
            "both_negative",
        ])?);

        let n4 = n2 + 2;
        md.push_str(&format!("\n## Table {n4}. Short-run dynamics\n\nError-correction models:\n\n"));
        md.push_str(&coefficient_block(&self.table(&self.ecm_name())?, &["index", "model"])?);
        md.push_str(&format!(
            "\nFirst-differenced VAR({}) for indexes without cointegration:\n\n",
            self.cfg.short_run.var_lags
        ));
        md.push_str(&coefficient_block(
            &self.table(&self.var_name())?,
            &["index", "equation", "spectral_radius", "stable"],
        )?);

        md.push_str(&format!(
            "\n## Stability of the error-correction models\n\nCUSUM and CUSUM of squares at the {} level; paths in `{CUSUM_PATHS}`.\n\n",
            self.cfg.cusum.level
        ));
        md.push_str(&self.table(CUSUM_SUMMARY)?.markdown(&[
            "index",
            "kind",
            "bound_constant",
            "breached",
            "first_breach",
        ])?);
        Ok(vec![(SUMMARY.into(), md)])
    }
}

fn kind_name(p: &CusumPath) -> &'static str {
    match p.kind {
        CusumKind::Cusum => "cusum",
        CusumKind::CusumSq => "cusum_sq",
    }
}

/// Two-decimal rendering of a stored number.
fn short(cell: &str) -> String {
    cell.parse::<f64>().map_or_else(|_| cell.to_string(), |x| format!("{x:.2}"))
}

/// Markdown with value columns joined to their star columns.
fn starred(t: &Table, spec: &[(&str, Option<&str>)]) -> Result<String> {
    let mut out = Table::new(&spec.iter().map(|(c, _)| *c).collect::<Vec<_>>());
    let idx: Vec<(usize, Option<usize>)> = spec
        .iter()
        .map(|(c, s)| Ok((t.col(c)?, s.map(|s| t.col(s)).transpose()?)))
        .collect::<Result<_>>()?;
    for r in &t.rows {
        out.push(
            idx.iter()
                .map(|(v, s)| match s {
                    Some(s) => format!("{}{}", short(&r[*v]), r[*s]),
                    None => r[*v].clone(),
                })
                .collect(),
        );
    }
    let cols: Vec<&str> = spec.iter().map(|(c, _)| *c).collect();
    out.markdown(&cols)
}

/// Groups coefficient rows by the key columns: one sub-table per group.
fn coefficient_block(t: &Table, keys: &[&str]) -> Result<String> {
    if t.rows.is_empty() {
        return Ok("(none)\n".into());
    }
    let key_idx: Vec<usize> = keys.iter().map(|k| t.col(k)).collect::<Result<_>>()?;
    let (term, est, se, stars) = (t.col("term")?, t.col("estimate")?, t.col("std_error")?, t.col("stars")?);
    let r2 = t.col("r_squared")?;
    let nobs = t.col("nobs")?;
    let mut out = String::new();
    let mut start = 0;
    while start < t.rows.len() {
        let key: Vec<&str> = key_idx.iter().map(|&i| t.rows[start][i].as_str()).collect();
        let end = (start..t.rows.len())
            .find(|&i| key_idx.iter().zip(&key).any(|(&c, k)| t.rows[i][c] != *k))
            .unwrap_or(t.rows.len());
        let labels: Vec<String> = keys.iter().zip(&key).map(|(k, v)| format!("{k} {v}")).collect();
        out.push_str(&format!(
            "{} (R2 {}, n = {}):\n\n",
            labels.join(", "),
            short(&t.rows[start][r2]),
            t.rows[start][nobs]
        ));
        let mut sub = Table::new(&["term", "estimate", "std. error"]);
        for r in &t.rows[start..end] {
            sub.push(vec![
                r[term].clone(),
                format!("{:.3}{}", r[est].parse::<f64>().unwrap_or(f64::NAN), r[stars]),
                format!("({:.3})", r[se].parse::<f64>().unwrap_or(f64::NAN)),
            ]);
        }
        out.push_str(&sub.markdown(&["term", "estimate", "std. error"])?);
        out.push('\n');
        start = end;
    }
    Ok(out)
}

/// Runs a single stage against the configured output directory.
pub fn run_stage(cfg: &PipelineConfig, stage: Stage) -> std::result::Result<Vec<PathBuf>, StageError> {
    let run = Run::new(cfg, cfg.out_path()).map_err(|source| StageError { stage, source })?;
    run.execute(stage)
}

fn staging_dir(out: &Path) -> PathBuf {
    let name = out.file_name().map_or("out".into(), |n| n.to_string_lossy().into_owned());
    out.with_file_name(format!(".{name}.partial"))
}

/// Every stage in order inside a staging directory; on success the files
/// move to the output directory, on failure the staging directory is removed.
pub fn run_pipeline(cfg: &PipelineConfig) -> std::result::Result<Vec<PathBuf>, StageError> {
    let out = cfg.out_path();
    let staging = staging_dir(&out);
    let _ = fs::remove_dir_all(&staging);
    let run = Run::new(cfg, staging.clone()).map_err(|source| StageError {
        stage: Stage::Fetch,
        source,
    })?;
    let mut names = Vec::new();
    for stage in Stage::PIPELINE {
        match run.execute(stage) {
            Ok(files) => names.extend(files.into_iter().filter_map(|p| p.file_name().map(|n| n.to_owned()))),
            Err(e) => {
                let _ = fs::remove_dir_all(&staging);
                return Err(e);
            }
        }
    }
    let publish = || -> Result<Vec<PathBuf>> {
        fs::create_dir_all(&out).map_err(|e| Error::Config(format!("cannot create {}: {e}", out.display())))?;
        let mut moved = Vec::with_capacity(names.len());
        for n in &names {
            let target = out.join(n);
            fs::rename(staging.join(n), &target)
                .map_err(|e| Error::Config(format!("cannot move {} into place: {e}", target.display())))?;
            moved.push(target);
        }
        Ok(moved)
    };
    let result = publish().map_err(|source| StageError {
        stage: Stage::Report,
        source,
    });
    let _ = fs::remove_dir_all(&staging);
    result
}
