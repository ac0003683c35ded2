//! Run configuration: one TOML file, dotted-key overrides, strict
//! validation into the core model types.

use std::path::Path;

use serde::Deserialize;

use intermit_core::bounds::{InitialData, ModelSpec, ProfileKind, Sigma, SublinearQuery};
use intermit_core::error::CoreError;
use intermit_core::levy::LevySymbol;
use intermit_core::simulator::{GridSpec, HolderOptions, SimOptions};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; generated (and reported) when absent.
    pub seed: Option<u64>,
    pub generator: GeneratorConfig,
    pub sigma: SigmaConfig,
    pub u0: U0Config,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub renewal: RenewalConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum GeneratorConfig {
    Brownian { kappa: f64 },
    Stable { kappa: f64, alpha: f64 },
    SumStable { terms: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaConfig {
    Linear {
        lambda: f64,
    },
    Clipped {
        floor: f64,
        cap: f64,
    },
    General {
        sigma0: f64,
        lip: f64,
        q_inf: f64,
        q_asymp: f64,
        bound_sup: Option<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum U0Config {
    Constant { eta: f64 },
    CosineBump { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub points: usize,
    pub dt: f64,
    pub t_max: f64,
    pub ensemble: usize,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_record_every() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(default = "default_p_list")]
    pub p_list: Vec<usize>,
    #[serde(default = "default_beta_list")]
    pub beta_list: Vec<f64>,
    #[serde(default)]
    pub sublinear: Option<SublinearConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SublinearConfig {
    pub a_onset: f64,
    pub q0: f64,
    pub beta: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            p_list: default_p_list(),
            beta_list: default_beta_list(),
            sublinear: None,
        }
    }
}

fn default_p_list() -> Vec<usize> {
    vec![2, 4]
}

fn default_beta_list() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0]
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// Window for the growth-rate fit; last half of the run when absent.
    pub fit_window: Option<(f64, f64)>,
    #[serde(default)]
    pub zero_noise: bool,
    #[serde(default)]
    pub holder: Option<HolderConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderConfig {
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
    #[serde(default = "default_holder_members")]
    pub members: usize,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    #[serde(default = "default_snapshot_gap")]
    pub snapshot_gap: f64,
    #[serde(default = "default_spatial_lags")]
    pub spatial_lags: Vec<usize>,
    #[serde(default = "default_temporal_lag_steps")]
    pub temporal_lag_steps: Vec<usize>,
    #[serde(default = "default_temporal_window")]
    pub temporal_window: f64,
    #[serde(default = "default_probes")]
    pub probes: usize,
}

fn default_burn_in() -> f64 {
    5.0
}
fn default_holder_members() -> usize {
    48
}
fn default_snapshots() -> usize {
    4
}
fn default_snapshot_gap() -> f64 {
    0.5
}
fn default_spatial_lags() -> Vec<usize> {
    vec![4, 8, 16]
}
fn default_temporal_lag_steps() -> Vec<usize> {
    vec![4, 8, 16, 32]
}
fn default_temporal_window() -> f64 {
    3.2
}
fn default_probes() -> usize {
    8
}

impl HolderConfig {
    pub fn to_options(&self) -> HolderOptions {
        HolderOptions {
            burn_in: self.burn_in,
            members: self.members,
            snapshots: self.snapshots,
            snapshot_gap: self.snapshot_gap,
            spatial_lags: self.spatial_lags.clone(),
            temporal_lag_steps: self.temporal_lag_steps.clone(),
            temporal_window: self.temporal_window,
            probes: self.probes,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenewalConfig {
    #[serde(default = "default_renewal_step")]
    pub step: f64,
    #[serde(default = "default_renewal_t_max")]
    pub t_max: f64,
    /// Defaults to sigma.lambda for a linear sigma.
    pub lambda: Option<f64>,
    /// Defaults to the u0 lower level.
    pub eta: Option<f64>,
}

impl Default for RenewalConfig {
    fn default() -> Self {
        RenewalConfig {
            step: default_renewal_step(),
            t_max: default_renewal_t_max(),
            lambda: None,
            eta: None,
        }
    }
}

fn default_renewal_step() -> f64 {
    0.02
}
fn default_renewal_t_max() -> f64 {
    120.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_out_dir(),
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

fn default_out_dir() -> String {
    "out".to_string()
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

impl RunConfig {
    /// Parse a config file, then apply `--set key=value` overrides
    /// (dotted paths into the TOML tree).
    pub fn load(path: &Path, sets: &[String]) -> Result<Self, CoreError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CoreError::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut value: toml::Value = toml::from_str(&text).map_err(|e| {
            CoreError::config(format!("{}: {e}", path.display()))
        })?;
        for set in sets {
            apply_set(&mut value, set)?;
        }
        value.try_into().map_err(|e| {
            CoreError::config(format!("{}: {e}", path.display()))
        })
    }

    pub fn symbol(&self) -> Result<LevySymbol, CoreError> {
        match &self.generator {
            GeneratorConfig::Brownian { kappa } => LevySymbol::brownian(*kappa),
            GeneratorConfig::Stable { kappa, alpha } => LevySymbol::stable(*kappa, *alpha),
            GeneratorConfig::SumStable { terms } => LevySymbol::sum_stable(terms.clone()),
        }
    }

    pub fn sigma(&self) -> Result<Sigma, CoreError> {
        match &self.sigma {
            SigmaConfig::Linear { lambda } => Sigma::linear(*lambda),
            SigmaConfig::Clipped { floor, cap } => Sigma::clipped(*floor, *cap),
            SigmaConfig::General {
                sigma0,
                lip,
                q_inf,
                q_asymp,
                bound_sup,
            } => {
                if !(*lip > 0.0) {
                    return Err(CoreError::config(format!(
                        "sigma.lip must be positive, got {lip}"
                    )));
                }
                Ok(Sigma::General {
                    sigma0: *sigma0,
                    lip: *lip,
                    q_inf: *q_inf,
                    q_asymp: *q_asymp,
                    bound_sup: *bound_sup,
                })
            }
        }
    }

    pub fn u0(&self) -> Result<InitialData, CoreError> {
        match &self.u0 {
            U0Config::Constant { eta } => InitialData::constant(*eta),
            U0Config::CosineBump { lower, upper } => {
                InitialData::bounded_profile(*lower, *upper, ProfileKind::CosineBump)
            }
        }
    }

    pub fn model(&self) -> Result<ModelSpec, CoreError> {
        Ok(ModelSpec::new(self.symbol()?, self.sigma()?, self.u0()?))
    }

    /// Grid with the resolved seed; errors when the `[grid]` table is
    /// missing (simulation commands need it).
    pub fn grid(&self, seed: u64) -> Result<GridSpec, CoreError> {
        let g = self.grid.as_ref().ok_or_else(|| {
            CoreError::config("missing [grid] table required for simulation".to_string())
        })?;
        let grid = GridSpec {
            length: g.length,
            points: g.points,
            dt: g.dt,
            t_max: g.t_max,
            ensemble: g.ensemble,
            seed,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            record_every: self.grid.as_ref().map_or(1, |g| g.record_every.max(1)),
            fit_window: self.simulate.fit_window,
            zero_noise: self.simulate.zero_noise,
        }
    }

    pub fn sublinear_query(&self) -> Option<SublinearQuery> {
        self.bounds.sublinear.map(|s| SublinearQuery {
            a_onset: s.a_onset,
            q0: s.q0,
            beta: s.beta,
        })
    }
}

/// Apply one `key.path=value` override; the value is parsed as a TOML
/// literal, falling back to a bare string.
fn apply_set(root: &mut toml::Value, set: &str) -> Result<(), CoreError> {
    let (path, raw) = set.split_once('=').ok_or_else(|| {
        CoreError::config(format!("--set needs KEY=VALUE, got {set:?}"))
    })?;
    // Parse the value as a TOML literal by wrapping it in a document;
    // anything that fails (bare words) becomes a string.
    let parsed: toml::Value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key v just inserted"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut cursor = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if i + 1 == parts.len() {
            match cursor {
                toml::Value::Table(t) => {
                    t.insert(part.to_string(), parsed);
                    return Ok(());
                }
                _ => {
                    return Err(CoreError::config(format!(
                        "--set {path}: {part} is not a table"
                    )))
                }
            }
        }
        cursor = match cursor {
            toml::Value::Table(t) => t
                .entry(part.to_string())
                .or_insert(toml::Value::Table(Default::default())),
            _ => {
                return Err(CoreError::config(format!(
                    "--set {path}: {part} is not a table"
                )))
            }
        };
    }
    unreachable!("split always yields at least one part")
}
