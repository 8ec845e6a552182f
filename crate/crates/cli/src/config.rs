//! Pipeline configuration (TOML) and its content hash.
//!
//! ```toml
//! seed = 20260101
//! manifest = "manifest.toml"
//! out_dir = "out"
//! with_output = false
//!
//! [series]
//! inflation = "I"
//! output = "IP"
//! indexes = ["DJUSBM", "DJUSNC"]
//!
//! [ucsv]
//! gamma = 0.04
//! n_draws = 5000
//! burn_in = 1000
//!
//! [gh]
//! trim = [0.15, 0.85]
//! lag_rule = "bic"
//!
//! [decision]
//! level = "10%"
//! min_rejections = 2
//!
//! [short_run]
//! var_lags = 2
//!
//! [cusum]
//! level = "5%"
//! ```
//!
//! Every table except the top-level `seed` and `manifest` keys is optional.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sectorcoint_core::cointegration::{DecisionRule, GhOptions, Trim};
use sectorcoint_core::ingest::{DatasetManifest, Source};
use sectorcoint_core::inference::Level;
use sectorcoint_core::linalg::CovarianceKind;
use sectorcoint_core::ucsv::UcsvConfig;
use sectorcoint_core::unitroot::{LagRule, TrendSpec};
use sectorcoint_core::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesRoles {
    pub inflation: String,
    pub output: String,
    /// Empty means every manifest series other than inflation and output.
    pub indexes: Vec<String>,
}

impl Default for SeriesRoles {
    fn default() -> Self {
        Self {
            inflation: "I".into(),
            output: "IP".into(),
            indexes: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UcsvSettings {
    pub gamma: f64,
    pub n_draws: usize,
    pub burn_in: usize,
}

impl Default for UcsvSettings {
    fn default() -> Self {
        let d = UcsvConfig::default();
        Self {
            gamma: d.gamma,
            n_draws: d.n_draws,
            burn_in: d.burn_in,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnitRootSettings {
    pub trend: TrendSpec,
    pub lag_rule: LagRule,
    pub max_lags: Option<usize>,
    pub pp_bandwidth: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GhSettings {
    pub trim: [f64; 2],
    pub bandwidth: Option<usize>,
    pub lag_rule: LagRule,
    pub max_lags: Option<usize>,
}

impl Default for GhSettings {
    fn default() -> Self {
        let t = Trim::default();
        Self {
            trim: [t.lower, t.upper],
            bandwidth: None,
            lag_rule: LagRule::Bic,
            max_lags: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecisionSettings {
    pub level: Level,
    pub min_rejections: usize,
}

impl Default for DecisionSettings {
    fn default() -> Self {
        let r = DecisionRule::default();
        Self {
            level: r.level,
            min_rejections: r.min_rejections,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShortRunSettings {
    pub var_lags: usize,
    pub ecm_extra_lags: usize,
    /// Coefficient covariance for the long-run fits.
    pub covariance: CovarianceKind,
}

impl Default for ShortRunSettings {
    fn default() -> Self {
        Self {
            var_lags: 2,
            ecm_extra_lags: 0,
            covariance: CovarianceKind::Conventional,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CusumSettings {
    pub level: Level,
}

impl Default for CusumSettings {
    fn default() -> Self {
        Self { level: Level::Five }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub manifest: PathBuf,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Adds industrial production to every regression.
    #[serde(default)]
    pub with_output: bool,
    #[serde(default)]
    pub series: SeriesRoles,
    #[serde(default)]
    pub ucsv: UcsvSettings,
    #[serde(default)]
    pub unitroot: UnitRootSettings,
    #[serde(default)]
    pub gh: GhSettings,
    #[serde(default)]
    pub decision: DecisionSettings,
    #[serde(default)]
    pub short_run: ShortRunSettings,
    #[serde(default)]
    pub cusum: CusumSettings,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub with_output: bool,
    pub trim: Option<Trim>,
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads, applies overrides and validates. The manifest must exist.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.out_dir = out.clone();
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if o.with_output {
            self.with_output = true;
        }
        if let Some(t) = o.trim {
            self.gh.trim = [t.lower, t.upper];
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ucsv_config().validate()?;
        self.trim()?;
        if self.short_run.var_lags == 0 {
            return Err(Error::Config("short_run.var_lags must be at least 1".into()));
        }
        if !(1..=3).contains(&self.decision.min_rejections) {
            return Err(Error::Config("decision.min_rejections must lie in 1..=3".into()));
        }
        let manifest = self.manifest_path();
        if !manifest.is_file() {
            return Err(Error::Config(format!("manifest {} not found", manifest.display())));
        }
        Ok(())
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.resolve(&self.manifest)
    }

    /// Output directory, relative paths taken from the config's directory.
    pub fn out_path(&self) -> PathBuf {
        self.resolve(&self.out_dir)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn load_manifest(&self) -> Result<DatasetManifest> {
        DatasetManifest::load(&self.manifest_path())
    }

    pub fn trim(&self) -> Result<Trim> {
        Trim::new(self.gh.trim[0], self.gh.trim[1])
    }

    pub fn gh_options(&self) -> Result<GhOptions> {
        Ok(GhOptions {
            trim: self.trim()?,
            bandwidth: self.gh.bandwidth,
            lag_rule: self.gh.lag_rule,
            max_lags: self.gh.max_lags,
        })
    }

    pub fn ucsv_config(&self) -> UcsvConfig {
        UcsvConfig {
            gamma: self.ucsv.gamma,
            n_draws: self.ucsv.n_draws,
            burn_in: self.ucsv.burn_in,
            seed: self.seed,
        }
    }

    pub fn decision_rule(&self) -> DecisionRule {
        DecisionRule {
            level: self.decision.level,
            min_rejections: self.decision.min_rejections,
        }
    }

    /// SHA-256 over the effective settings (output directory excluded), the
    /// manifest text and every CSV file the manifest names.
    pub fn hash(&self) -> Result<String> {
        let mut effective = self.clone();
        effective.out_dir = PathBuf::new();
        let settings = toml::to_string(&effective).map_err(|e| Error::Config(e.to_string()))?;
        let manifest_path = self.manifest_path();
        let manifest_text = fs::read(&manifest_path).map_err(|e| Error::Config(format!("{}: {e}", manifest_path.display())))?;
        let mut h = Sha256::new();
        h.update(b"settings\n");
        h.update(settings.as_bytes());
        h.update(b"manifest\n");
        h.update(&manifest_text);
        let manifest = self.load_manifest()?;
        for e in manifest.series.iter().filter(|e| e.source == Source::Csv) {
            if let Some(p) = &e.path {
                if let Ok(bytes) = fs::read(manifest.resolve(p)) {
                    h.update(e.id.as_bytes());
                    h.update(b"\n");
                    h.update(&bytes);
                }
            }
        }
        Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }
}
