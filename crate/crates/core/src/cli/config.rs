//! Experiment configuration: a TOML file whose leaves can be overridden by
//! dotted paths, deserialized with field paths attached to every error.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::Potential;
use crate::observables::{Atom, Density, FiberGrid, GlobalObservable, LocalObservable, SpectralMeasure, DEFAULT_L_MAX};
use crate::symbolic::{build_sft, RealTable, SftSpace};
use crate::systems::{System, SystemPreset};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_system")]
    pub system: SystemConfig,
    #[serde(default)]
    pub observables: ObservablesConfig,
    pub experiment: ExperimentBlock,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Either a named preset or an explicit shift, potential and cocycle.
/// Tables list values over admissible words in lexicographic order. A
/// missing section means `bernoulli_s1`.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub preset: Option<String>,
    pub alphabet: Option<usize>,
    pub transitions: Option<Vec<Vec<u8>>>,
    pub theta: Option<f64>,
    pub potential: Option<Vec<f64>>,
    pub potential_depth: Option<usize>,
    pub cocycle: Option<Vec<f64>>,
    pub cocycle_depth: Option<usize>,
    /// Depth of the Gibbs data.
    pub m: Option<usize>,
    /// Subtract the mean of the cocycle (custom systems only).
    pub center: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesConfig {
    #[serde(default)]
    pub phi: PhiConfig,
    #[serde(default)]
    pub psi: PsiConfig,
}

/// Global observable: a preset, or word-independent atoms plus a tabulated density.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PhiConfig {
    pub preset: Option<String>,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// `[location, weight]` pairs.
    pub atoms: Option<Vec<[f64; 2]>>,
    pub density_nodes: Option<Vec<f64>>,
    pub density_values: Option<Vec<f64>>,
}

impl Default for PhiConfig {
    fn default() -> Self {
        PhiConfig {
            preset: Some("cosine".into()),
            omega: 1.0,
            amplitude: 1.0,
            atoms: None,
            density_nodes: None,
            density_values: None,
        }
    }
}

/// Local observable: a preset, or per-word piecewise-linear fiber profiles.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PsiConfig {
    pub preset: Option<String>,
    pub depth: Option<usize>,
    pub nodes: Option<Vec<f64>>,
    /// One row of values at `nodes` per word of depth `depth`.
    pub values: Option<Vec<Vec<f64>>>,
}

impl Default for PsiConfig {
    fn default() -> Self {
        PsiConfig { preset: Some("gaussian_bump".into()), depth: None, nodes: None, values: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Gibbs,
    Spectrum,
    Correlate,
    Cancel,
    Access,
    Rates,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Gibbs => "gibbs",
            Kind::Spectrum => "spectrum",
            Kind::Correlate => "correlate",
            Kind::Cancel => "cancel",
            Kind::Access => "access",
            Kind::Rates => "rates",
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    /// Lags of correlation series; Birkhoff length for `cancel` and `access`.
    #[serde(default = "default_n")]
    pub n: Vec<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Frequencies of the eigenvalue curve; defaults to `[-0.25, 0.25]` in steps of 0.01.
    pub xi: Option<Vec<f64>>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_decay_xi")]
    pub decay_xi: Vec<f64>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Correlation estimators: any of `exact`, `direct`, `spectral`.
    #[serde(default = "default_estimators")]
    pub estimators: Vec<String>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Search or enumeration budget; each kind has its own default.
    pub budget: Option<u64>,
    #[serde(default = "default_max_pairs")]
    pub max_pairs: usize,
    pub prefix_slack: Option<usize>,
    /// Frequency of the `cancel` experiment.
    #[serde(default = "one")]
    pub cancel_xi: f64,
    /// `H` for the `cancel` experiment; calibrated when absent.
    pub h: Option<f64>,
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_max_radius")]
    pub max_radius: f64,
    #[serde(default = "default_max_period")]
    pub max_period: usize,
    pub window: Option<[usize; 2]>,
    #[serde(default)]
    pub rapid_levels: Vec<u32>,
    #[serde(default = "default_lf_k")]
    pub lf_k: u32,
    #[serde(default = "default_lf_eps")]
    pub lf_eps: f64,
    pub exponent_range: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default)]
    pub plots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_dir(), plots: false }
    }
}

fn default_system() -> SystemConfig {
    SystemConfig { preset: Some("bernoulli_s1".into()), ..SystemConfig::default() }
}
fn one() -> f64 {
    1.0
}
fn default_n() -> Vec<usize> {
    vec![0, 1, 2, 4, 8]
}
fn default_alpha() -> f64 {
    0.4
}
fn default_kappa() -> f64 {
    0.3
}
fn default_decay_xi() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 1.0, 2.0, 4.0]
}
fn default_n_max() -> usize {
    200
}
fn default_estimators() -> Vec<String> {
    vec!["spectral".into()]
}
fn default_samples() -> usize {
    100_000
}
fn default_max_pairs() -> usize {
    4
}
fn default_draws() -> usize {
    100
}
fn default_max_radius() -> f64 {
    0.1
}
fn default_max_period() -> usize {
    8
}
fn default_lf_k() -> u32 {
    4
}
fn default_lf_eps() -> f64 {
    0.1
}
fn default_dir() -> String {
    "out".into()
}

fn config_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), message: message.into() }
}

/// Sets `path = value` in a TOML table, creating intermediate tables. The
/// value is read as a TOML literal, falling back to a bare string.
pub fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) =
        assignment.split_once('=').ok_or_else(|| config_err(assignment, "override must have the form key=value"))?;
    let path = path.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(config_err(path, "empty key segment"));
    }
    let mut table = root;
    for (i, key) in keys[..keys.len() - 1].iter().enumerate() {
        let entry = table.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| config_err(&keys[..=i].join("."), "is not a table"))?;
    }
    table.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

/// Parses TOML text, applies overrides and deserializes.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_err("<file>", e.message()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let value = toml::Value::Table(table);
    let config: ExperimentConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        config_err(&path, e.into_inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err("<file>", format!("{}: {e}", path.display())))?;
    parse_config(&text, overrides)
}

impl ExperimentConfig {
    /// Range and reference checks that the types alone do not enforce.
    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if !(e.alpha > 0.0 && e.alpha < 0.5) {
            return Err(config_err("experiment.alpha", format!("{} is outside (0, 1/2)", e.alpha)));
        }
        if e.n.is_empty() {
            return Err(config_err("experiment.n", "must not be empty"));
        }
        if e.n.windows(2).any(|p| p[1] <= p[0]) {
            return Err(config_err("experiment.n", "must be strictly increasing"));
        }
        if !(e.kappa > 0.0) {
            return Err(config_err("experiment.kappa", "must be positive"));
        }
        if let Some(xi) = &e.xi {
            if let Some(bad) = xi.iter().find(|x| x.abs() >= e.kappa) {
                return Err(config_err("experiment.xi", format!("{bad} lies outside (-kappa, kappa)")));
            }
        }
        for (i, est) in e.estimators.iter().enumerate() {
            if !["exact", "direct", "spectral"].contains(&est.as_str()) {
                return Err(config_err(&format!("experiment.estimators[{i}]"), format!("unknown estimator {est:?}")));
            }
        }
        if e.estimators.is_empty() {
            return Err(config_err("experiment.estimators", "must not be empty"));
        }
        if e.samples < 2 {
            return Err(config_err("experiment.samples", "need at least 2"));
        }
        if e.max_pairs == 0 {
            return Err(config_err("experiment.max_pairs", "must be positive"));
        }
        if matches!(e.kind, Kind::Cancel | Kind::Access) && e.n[0] == 0 {
            return Err(config_err("experiment.n", "the first entry is the Birkhoff length and must be positive"));
        }
        if let Some(h) = e.h {
            if !(h >= 1.0) {
                return Err(config_err("experiment.h", "must be at least 1"));
            }
        }
        if let Some([lo, hi]) = e.window {
            if lo > hi {
                return Err(config_err("experiment.window", "lower end exceeds upper end"));
            }
        }
        if let Some(p) = &self.system.preset {
            if SystemPreset::from_name(p).is_none() {
                return Err(config_err("system.preset", format!("unknown system preset {p:?}")));
            }
        } else if self.system.alphabet.is_none() || self.system.transitions.is_none() || self.system.cocycle.is_none() {
            return Err(config_err("system", "give either preset or alphabet, transitions and cocycle"));
        }
        if let Some(p) = &self.observables.phi.preset {
            if !crate::observables::GLOBAL_PRESETS.iter().any(|(n, _)| n == p) {
                return Err(config_err("observables.phi.preset", format!("unknown global observable {p:?}")));
            }
        } else if self.observables.phi.atoms.is_none() && self.observables.phi.density_nodes.is_none() {
            return Err(config_err("observables.phi", "give a preset, atoms or a tabulated density"));
        }
        if let Some(p) = &self.observables.psi.preset {
            if !crate::observables::LOCAL_PRESETS.iter().any(|(n, _)| n == p) {
                return Err(config_err("observables.psi.preset", format!("unknown local observable {p:?}")));
            }
        } else if self.observables.psi.nodes.is_none() || self.observables.psi.values.is_none() {
            return Err(config_err("observables.psi", "give a preset or nodes and values"));
        }
        Ok(())
    }

    pub fn build_system(&self) -> Result<System> {
        let s = &self.system;
        let m = s.m.unwrap_or(2);
        if let Some(p) = &s.preset {
            let preset =
                SystemPreset::from_name(p).ok_or_else(|| config_err("system.preset", format!("unknown {p:?}")))?;
            return preset.build_at(m).map_err(|e| config_err("system", e.to_string()));
        }
        let alphabet = s.alphabet.unwrap_or(2);
        let transitions: Vec<Vec<bool>> =
            s.transitions.clone().unwrap_or_default().iter().map(|row| row.iter().map(|&b| b != 0).collect()).collect();
        let theta = s.theta.unwrap_or(0.5);
        let sft =
            build_sft(alphabet, transitions, theta).map_err(|e| config_err("system.transitions", e.to_string()))?;
        let table = |path: &str, values: Vec<f64>, depth: usize| -> Result<RealTable> {
            let space = sft.words(depth).map_err(|e| config_err(path, e.to_string()))?;
            RealTable::new(space, values).map_err(|e| config_err(path, e.to_string()))
        };
        let pd = s.potential_depth.unwrap_or(1);
        let potential: Potential = match &s.potential {
            Some(v) => table("system.potential", v.clone(), pd)?,
            None => RealTable::constant(sft.words(1)?, 0.0),
        };
        let cocycle = table("system.cocycle", s.cocycle.clone().unwrap_or_default(), s.cocycle_depth.unwrap_or(2))?;
        System::assemble("custom", sft, potential, cocycle, m, s.center.unwrap_or(true))
            .map_err(|e| config_err("system", e.to_string()))
    }

    pub fn build_phi(&self, sft: &SftSpace) -> Result<GlobalObservable> {
        let p = &self.observables.phi;
        match p.preset.as_deref() {
            Some("constant_one") => GlobalObservable::constant(sft, p.amplitude),
            Some("cosine") => GlobalObservable::cosine(sft, p.omega, p.amplitude),
            Some("gaussian") => GlobalObservable::gaussian(sft),
            Some("inverse_abs") => GlobalObservable::inverse_abs(sft),
            Some(other) => Err(config_err("observables.phi.preset", format!("unknown {other:?}"))),
            None => {
                let atoms = p
                    .atoms
                    .clone()
                    .unwrap_or_default()
                    .into_iter()
                    .map(|[location, w]| Atom { location, weight: w.into() })
                    .collect();
                let density = match (&p.density_nodes, &p.density_values) {
                    (Some(nodes), Some(values)) => {
                        if nodes.len() != values.len() || nodes.windows(2).any(|w| w[1] <= w[0]) {
                            return Err(config_err(
                                "observables.phi.density_nodes",
                                "nodes must increase and match values",
                            ));
                        }
                        Some(Density::Tabulated {
                            nodes: nodes.clone(),
                            values: values.iter().map(|&v| v.into()).collect(),
                        })
                    }
                    (None, None) => None,
                    _ => return Err(config_err("observables.phi.density_values", "nodes and values go together")),
                };
                GlobalObservable::uniform("table", sft, SpectralMeasure { atoms, density })
            }
        }
    }

    pub fn build_psi(&self, sft: &SftSpace) -> Result<LocalObservable> {
        let p = &self.observables.psi;
        match p.preset.as_deref() {
            Some("gaussian_bump") => LocalObservable::gaussian_bump(sft),
            Some("mollified_indicator") => LocalObservable::mollified_indicator(sft),
            Some(other) => Err(config_err("observables.psi.preset", format!("unknown {other:?}"))),
            None => {
                let nodes = p.nodes.clone().unwrap_or_default();
                let rows = p.values.clone().unwrap_or_default();
                let space = sft.words(p.depth.unwrap_or(0))?;
                if rows.len() != space.len() {
                    return Err(config_err(
                        "observables.psi.values",
                        format!("need {} rows, got {}", space.len(), rows.len()),
                    ));
                }
                if nodes.len() < 2
                    || nodes.windows(2).any(|w| w[1] <= w[0])
                    || rows.iter().any(|r| r.len() != nodes.len())
                {
                    return Err(config_err(
                        "observables.psi.nodes",
                        "nodes must increase and every row must match them",
                    ));
                }
                let index = |w: &crate::symbolic::Word| space.index_of(w.symbols()).expect("word of the space");
                LocalObservable::from_fn(
                    "table",
                    space.clone(),
                    FiberGrid::default(),
                    sft.theta(),
                    DEFAULT_L_MAX,
                    |w, r| interpolate(&nodes, &rows[index(w)], r),
                )
            }
        }
    }
}

/// Piecewise-linear interpolation, zero outside the nodes.
fn interpolate(nodes: &[f64], values: &[f64], r: f64) -> f64 {
    if r < nodes[0] || r > nodes[nodes.len() - 1] {
        return 0.0;
    }
    let j = nodes.partition_point(|x| *x <= r).clamp(1, nodes.len() - 1);
    let t = (r - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
    values[j - 1] + t * (values[j] - values[j - 1])
}
