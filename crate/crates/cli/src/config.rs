//! Project configuration: one JSON document driving every workflow, with
//! dotted-path overrides from the command line.
//!
//! The schema is strict (unknown keys are rejected) so a typo in a config
//! file fails loudly instead of silently using a default.

use std::path::{Path, PathBuf};

use paramp_core::network::FrequencyGrid;
use paramp_core::paramp::PumpedResonator;
use paramp_core::taper::TaperDesignSpec;
use paramp_core::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub taper: Option<TaperConfig>,
    pub resonator: Option<PumpedResonator>,
    pub environment: Option<EnvironmentConfig>,
    #[serde(default)]
    pub frequency_grid: FrequencyGridConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub gain: GainConfig,
    #[serde(default)]
    pub tune_curve: TuneCurveConfig,
    pub output_dir: Option<PathBuf>,
}

/// Taper design inputs; `eps_eff` defaults to (eps_r + 1)/2 when omitted.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaperConfig {
    pub z_source: f64,
    pub z_load: f64,
    pub gamma_max: f64,
    pub f_cutoff: f64,
    #[serde(default)]
    pub eps_eff: Option<f64>,
    pub gap: f64,
    pub substrate_eps_r: f64,
}

impl TaperConfig {
    pub fn to_spec(self) -> TaperDesignSpec {
        TaperDesignSpec {
            z_source: self.z_source,
            z_load: self.z_load,
            gamma_max: self.gamma_max,
            f_cutoff: self.f_cutoff,
            eps_eff: self
                .eps_eff
                .unwrap_or_else(|| TaperDesignSpec::default_eps_eff(self.substrate_eps_r)),
            gap: self.gap,
            substrate_eps_r: self.substrate_eps_r,
        }
    }
}

/// Which environment the resonator sees.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvironmentConfig {
    /// Fixed real impedance (ohm).
    Constant { impedance: f64 },
    /// Look back through the synthesized taper into a real termination.
    Taper {
        #[serde(default = "default_termination")]
        termination: f64,
    },
}

fn default_termination() -> f64 {
    50.0
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyGridConfig {
    #[serde(default = "default_grid_start")]
    pub start_hz: f64,
    #[serde(default = "default_grid_stop")]
    pub stop_hz: f64,
    #[serde(default = "default_grid_points")]
    pub points: usize,
}

fn default_grid_start() -> f64 {
    0.1e9
}
fn default_grid_stop() -> f64 {
    12e9
}
fn default_grid_points() -> usize {
    2001
}

impl Default for FrequencyGridConfig {
    fn default() -> Self {
        FrequencyGridConfig {
            start_hz: default_grid_start(),
            stop_hz: default_grid_stop(),
            points: default_grid_points(),
        }
    }
}

impl FrequencyGridConfig {
    pub fn to_grid(self) -> Result<FrequencyGrid> {
        FrequencyGrid::linspace(self.start_hz, self.stop_hz, self.points)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default = "default_n_segments")]
    pub n_segments: usize,
    #[serde(default = "default_profile_samples")]
    pub profile_samples: usize,
    /// Port references for the mixed-reference S-parameters; defaults to
    /// (50, z_load of the taper).
    #[serde(default)]
    pub port_refs: Option<(f64, f64)>,
}

fn default_n_segments() -> usize {
    400
}
fn default_profile_samples() -> usize {
    401
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_segments: default_n_segments(),
            profile_samples: default_profile_samples(),
            port_refs: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainConfig {
    /// When set, the pump amplitude of each model is tuned so its peak gain
    /// hits this value (dB) instead of using `resonator.pump_amplitude`.
    #[serde(default)]
    pub target_peak_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneCurveConfig {
    #[serde(default = "default_tune_start")]
    pub start_phi0: f64,
    #[serde(default = "default_tune_stop")]
    pub stop_phi0: f64,
    #[serde(default = "default_tune_points")]
    pub points: usize,
}

fn default_tune_start() -> f64 {
    -0.5
}
fn default_tune_stop() -> f64 {
    0.5
}
fn default_tune_points() -> usize {
    201
}

impl Default for TuneCurveConfig {
    fn default() -> Self {
        TuneCurveConfig {
            start_phi0: default_tune_start(),
            stop_phi0: default_tune_stop(),
            points: default_tune_points(),
        }
    }
}

impl ProjectConfig {
    /// Load a config file and apply `--set key=value` overrides (dotted
    /// paths into the JSON document; values parsed as JSON, falling back to
    /// strings).
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut doc: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::ParseError(format!("{}: {e}", path.display())))?;
        for entry in overrides {
            apply_override(&mut doc, entry)?;
        }
        serde_json::from_value(doc)
            .map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))
    }

    pub fn taper_spec(&self) -> Result<TaperDesignSpec> {
        let spec = self
            .taper
            .ok_or_else(|| Error::InvalidSpec("config has no `taper` section".into()))?
            .to_spec();
        spec.validate()?;
        Ok(spec)
    }

    pub fn resonator(&self) -> Result<PumpedResonator> {
        let r = self
            .resonator
            .ok_or_else(|| Error::InvalidSpec("config has no `resonator` section".into()))?;
        r.validate()?;
        Ok(r)
    }

    pub fn environment(&self) -> Result<EnvironmentConfig> {
        self.environment
            .ok_or_else(|| Error::InvalidSpec("config has no `environment` section".into()))
    }
}

fn apply_override(doc: &mut serde_json::Value, entry: &str) -> Result<()> {
    let (path, raw_value) = entry.split_once('=').ok_or_else(|| {
        Error::InvalidSpec(format!("override {entry:?} is not of the form key=value"))
    })?;
    let value = serde_json::from_str(raw_value)
        .unwrap_or_else(|_| serde_json::Value::String(raw_value.to_string()));
    let mut node = doc;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, segment) in segments.iter().enumerate() {
        if segment.is_empty() {
            return Err(Error::InvalidSpec(format!(
                "override {entry:?} has an empty path segment"
            )));
        }
        let obj = node.as_object_mut().ok_or_else(|| {
            Error::InvalidSpec(format!("override path {path:?} descends into a non-object"))
        })?;
        if i == segments.len() - 1 {
            obj.insert(segment.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(segment.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!("split produces at least one segment")
}
