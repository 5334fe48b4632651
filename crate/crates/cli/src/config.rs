use std::path::{Path, PathBuf};

use bbnf_core::billiard::FitOptions;
use bbnf_core::classical::Branch;
use bbnf_core::domain::DomainSpec;
use bbnf_core::wave::MpsOptions;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classify,
    Nf,
    Invert,
    Qnf,
    Spectrum,
    Wavetrace,
    Oracle,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Classify => "classify",
            Task::Nf => "nf",
            Task::Invert => "invert",
            Task::Qnf => "qnf",
            Task::Spectrum => "spectrum",
            Task::Wavetrace => "wavetrace",
            Task::Oracle => "oracle",
        }
    }
}

/// Everything a run needs. Missing keys take the defaults below; unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    /// Normal-form order `n` (classical) or `K` (semiclassical).
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub invert: InvertConfig,
    #[serde(default)]
    pub qnf: QnfConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub wavetrace: TraceConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

fn default_order() -> usize {
    2
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvertConfig {
    /// Target coefficients `b₀, …, bₙ`.
    pub b: Vec<f64>,
    pub branch: Branch,
    pub scale: f64,
    /// Number of random elliptic jets pushed through forward map and inverse.
    pub sweep: usize,
    /// Relative tolerance for the round trip.
    pub tol: f64,
}

impl Default for InvertConfig {
    fn default() -> Self {
        Self { b: Vec::new(), branch: Branch::Elliptic, scale: 1.0, sweep: 0, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QnfConfig {
    /// JSON symbol jet; relative paths are taken from the config file's directory.
    pub jet: Option<PathBuf>,
    pub nodes: usize,
}

impl Default for QnfConfig {
    fn default() -> Self {
        Self { jet: None, nodes: bbnf_core::series::DEFAULT_NODES }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Lowest `count` eigenvalues per symmetry class; overrides `k_max`.
    pub count: Option<usize>,
    /// All eigenvalues with frequency below `k_max`.
    pub k_max: f64,
    pub mps: MpsOptions,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { count: None, k_max: 20.0, mps: MpsOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    /// Kernel width `W`; `24/k_top` when absent.
    pub width: Option<f64>,
    pub t_max: f64,
    pub dt: f64,
    /// Peaks below this fraction of the tallest are dropped.
    pub threshold: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self { width: None, t_max: 6.0, dt: 0.005, threshold: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Seeds of the invariant circles in the linear normal coordinate.
    pub radii: Vec<f64>,
    pub fit: FitOptions,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { radii: (1..=8).map(|i| 0.005 * i as f64).collect(), fit: FitOptions::default() }
    }
}

/// Values given on the command line. A config file overrides them key by key.
#[derive(Debug, Default, Clone)]
pub struct Flags {
    pub out: Option<PathBuf>,
    pub order: Option<usize>,
    pub seed: Option<u64>,
    pub jet: Option<Vec<f64>>,
    pub ellipse: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
}

impl Flags {
    fn table(&self, task: Task) -> Result<toml::Table, String> {
        let mut t = toml::Table::new();
        t.insert("task".into(), task.name().into());
        if let Some(out) = &self.out {
            t.insert("out".into(), out.display().to_string().into());
        }
        if let Some(n) = self.order {
            t.insert("order".into(), (n as i64).into());
        }
        if let Some(s) = self.seed {
            let s = i64::try_from(s).map_err(|_| "seed must fit in 63 bits".to_string())?;
            t.insert("seed".into(), s.into());
        }
        let floats = |v: &[f64]| toml::Value::Array(v.iter().map(|&x| x.into()).collect());
        if let Some(c) = &self.jet {
            let mut d = toml::Table::new();
            d.insert("kind".into(), "jet".into());
            d.insert("coeffs".into(), floats(c));
            t.insert("domain".into(), d.into());
        }
        if let Some(e) = &self.ellipse {
            if self.jet.is_some() {
                return Err("give either --jet or --ellipse".into());
            }
            let [a, b] = e[..] else {
                return Err("--ellipse takes two semi-axes".into());
            };
            let mut d = toml::Table::new();
            d.insert("kind".into(), "ellipse".into());
            d.insert("semi_x".into(), a.into());
            d.insert("semi_y".into(), b.into());
            t.insert("domain".into(), d.into());
        }
        if let Some(b) = &self.b {
            let mut inv = toml::Table::new();
            inv.insert("b".into(), floats(b));
            t.insert("invert".into(), inv.into());
        }
        Ok(t)
    }
}

/// Builds the config for `task` from flags and an optional TOML file.
pub fn load(task: Task, flags: &Flags, file: Option<&Path>) -> Result<RunConfig, String> {
    let mut table = flags.table(task)?;
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut from_file: toml::Table = text.parse().map_err(|e| format!("{}: {e}", path.display()))?;
        if let Some(t) = from_file.get("task") {
            if t.as_str() != Some(task.name()) {
                return Err(format!("config task {t} does not match subcommand {}", task.name()));
            }
        }
        if let Some(toml::Value::String(jet)) = from_file.get_mut("qnf").and_then(|q| q.get_mut("jet")) {
            let p = Path::new(jet.as_str());
            if p.is_relative() {
                let base = path.parent().unwrap_or(Path::new(""));
                *jet = base.join(p).display().to_string();
            }
        }
        merge(&mut table, from_file);
    }
    let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| e.to_string())?;
    cfg.validate()?;
    Ok(cfg)
}

/// Overlays `top` on `base`, descending into tables except `domain`, which is
/// replaced whole since its variants have different keys.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) if k != "domain" => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        let needs_domain = matches!(self.task, Task::Classify | Task::Nf | Task::Spectrum | Task::Wavetrace | Task::Oracle);
        if needs_domain && self.domain.is_none() {
            return Err(format!("task {} needs a domain (--jet, --ellipse or [domain])", self.task.name()));
        }
        if self.task == Task::Invert && self.invert.b.is_empty() && self.invert.sweep == 0 {
            return Err("invert needs b coefficients (--b or [invert] b) or a sweep count".into());
        }
        if self.task == Task::Qnf && self.qnf.jet.is_none() {
            return Err("qnf needs a symbol jet file ([qnf] jet)".into());
        }
        if self.task == Task::Qnf && self.order == 0 {
            return Err("qnf order must be at least 1".into());
        }
        if self.qnf.nodes < 9 {
            return Err("qnf nodes must be at least 9".into());
        }
        if !(self.spectrum.k_max > 0.0) || self.spectrum.count == Some(0) {
            return Err("spectrum needs k_max > 0 and count ≥ 1".into());
        }
        let w = &self.wavetrace;
        if !(w.t_max > 0.0 && w.dt > 0.0 && w.dt < w.t_max && (0.0..=1.0).contains(&w.threshold)) || w.width.is_some_and(|x| !(x > 0.0)) {
            return Err("wavetrace needs 0 < dt < t_max, threshold in [0, 1] and a positive width".into());
        }
        if !(self.invert.tol > 0.0 && self.invert.scale > 0.0) {
            return Err("invert needs positive tol and scale".into());
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
