//! TOML configuration with unit-bearing values and `--set` overrides.
//!
//! ```toml
//! [nd]
//! radius = "25 nm"
//! nv_distance = "1 nm"
//! nv_angle = "45 deg"
//!
//! [field]
//! b0 = "10 G"
//! b_grad = "0.2 G/nm"
//! ramp = "quadratic"
//!
//! [sequence]
//! t_pulse = "25 us"
//! arm1 = "-,0,-"
//! arm2 = "0,-,0"
//!
//! [environment]
//! g_xi = "9.8 m/s^2"
//! rotational = "thermal"
//! t_theta = "100 nK"
//!
//! [numerics]
//! steps_per_pulse = 2000
//! ```
//!
//! Every key is optional and falls back to the base scenario. Changing
//! `nv_angle` without `theta0` keeps the bias at the preparation angle α/2.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use sgi_core::experiments::{RampMode, RotationalState};
use sgi_core::{LambdaMode, Scenario, SpinLabel};

use crate::units::{self, Dim};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub nd: NdSection,
    pub field: FieldSection,
    pub sequence: SequenceSection,
    pub environment: EnvironmentSection,
    pub numerics: NumericsSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NdSection {
    pub radius: Option<Quantity>,
    pub density: Option<Quantity>,
    pub nv_distance: Option<Quantity>,
    pub nv_angle: Option<Quantity>,
    pub diamagnetic: Option<bool>,
    pub chi_per_mass: Option<Quantity>,
    pub mu: Option<Quantity>,
    pub zfs: Option<Quantity>,
    pub epsilon: Option<Quantity>,
    /// "unity" or "exact"
    pub lambda: Option<String>,
    pub transverse_shifts: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSection {
    pub b0: Option<Quantity>,
    pub theta0: Option<Quantity>,
    pub b_grad: Option<Quantity>,
    /// "constant" or "quadratic"
    pub ramp: Option<String>,
}

/// "<number> <unit>", or a bare number, which only zero satisfies.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Text(String),
    Number(f64),
}

impl Quantity {
    fn text(&self) -> String {
        match self {
            Quantity::Text(t) => t.clone(),
            Quantity::Number(x) => x.to_string(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpinList {
    Text(String),
    Numbers(Vec<i8>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SequenceSection {
    pub t_pulse: Option<Quantity>,
    pub t_delay: Option<Quantity>,
    pub arm1: Option<SpinList>,
    pub arm2: Option<SpinList>,
    pub pulse_multiples: Option<Vec<f64>>,
    /// Replace |0⟩ by |+⟩ in both arms.
    pub symmetric: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentSection {
    pub g_xi: Option<Quantity>,
    pub g_zeta: Option<Quantity>,
    /// "ground" or "thermal"
    pub rotational: Option<String>,
    pub t_theta: Option<Quantity>,
    pub theta_offset: Option<Quantity>,
    pub theta_dot_offset: Option<Quantity>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    pub steps_per_pulse: Option<u32>,
    pub record_stride: Option<usize>,
    pub seed: Option<u64>,
    pub mc_samples: Option<usize>,
}

/// Settings that live next to the physics but are not part of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub seed: u64,
    pub mc_samples: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self { seed: 20_240_601, mc_samples: 100_000 }
    }
}

pub fn parse_spins(text: &str) -> Result<Vec<SpinLabel>, String> {
    text.split(',')
        .map(|t| match t.trim() {
            "-" | "-1" | "minus" => Ok(SpinLabel::Minus),
            "0" | "zero" => Ok(SpinLabel::Zero),
            "+" | "+1" | "1" | "plus" => Ok(SpinLabel::Plus),
            other => Err(format!("unknown spin label '{other}' (use -, 0 or +)")),
        })
        .collect()
}

fn spin_list(list: &SpinList) -> Result<Vec<SpinLabel>, String> {
    match list {
        SpinList::Text(t) => parse_spins(t),
        SpinList::Numbers(v) => v.iter().map(|&p| SpinLabel::try_from(p)).collect(),
    }
}

/// Reads `path` (if any) and applies `key=value` overrides, where `key` is
/// `section.name` and `value` is TOML or a bare string.
pub fn load(path: Option<&Path>, sets: &[String]) -> Result<ConfigFile, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| err(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let name = path.map_or("<config>".to_string(), |p| p.display().to_string());
    // Parsed once as-is so that file errors carry their line numbers.
    let from_file: ConfigFile = toml::from_str(&text).map_err(|e| err(format!("{name}: {e}")))?;
    if sets.is_empty() {
        return Ok(from_file);
    }
    let mut table: toml::Table = toml::from_str(&text).map_err(|e| err(format!("{name}: {e}")))?;
    for s in sets {
        let (key, value) = s.split_once('=').ok_or_else(|| err(format!("--set '{s}': expected section.key=value")))?;
        let (section, field) =
            key.trim().split_once('.').ok_or_else(|| err(format!("--set '{s}': key must be section.name")))?;
        let value = value.trim();
        let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.trim_matches('"').to_string()));
        let entry = table.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        entry
            .as_table_mut()
            .ok_or_else(|| err(format!("--set '{s}': '{section}' is not a section")))?
            .insert(field.to_string(), parsed);
    }
    ConfigFile::deserialize(toml::Value::Table(table)).map_err(|e| err(format!("--set overrides: {e}")))
}

fn quantity(slot: &mut f64, value: &Option<Quantity>, key: &str, dim: Dim) -> Result<(), ConfigError> {
    if let Some(v) = value {
        *slot = units::parse(&v.text(), dim).map_err(|e| err(format!("{key}: {e}")))?;
    }
    Ok(())
}

impl ConfigFile {
    /// Overlays the configured values on `base`.
    pub fn apply(&self, base: &Scenario) -> Result<(Scenario, RunSettings), ConfigError> {
        let mut s = base.clone();
        let nd = &self.nd;
        quantity(&mut s.nd.radius, &nd.radius, "nd.radius", Dim::Length)?;
        quantity(&mut s.nd.density, &nd.density, "nd.density", Dim::Density)?;
        quantity(&mut s.nd.nv_distance, &nd.nv_distance, "nd.nv_distance", Dim::Length)?;
        quantity(&mut s.nd.nv_angle, &nd.nv_angle, "nd.nv_angle", Dim::Angle)?;
        quantity(&mut s.nd.chi_per_mass, &nd.chi_per_mass, "nd.chi_per_mass", Dim::SusceptibilityPerMass)?;
        quantity(&mut s.nd.nv.mu, &nd.mu, "nd.mu", Dim::MagneticMoment)?;
        quantity(&mut s.nd.nv.zfs, &nd.zfs, "nd.zfs", Dim::Energy)?;
        if let Some(e) = &nd.epsilon {
            let v = units::parse(&e.text(), Dim::Energy).map_err(|e| err(format!("nd.epsilon: {e}")))?;
            s.nd.nv.epsilon = Complex64::new(v, 0.0);
        }
        if let Some(d) = nd.diamagnetic {
            s.nd.diamagnetic_enabled = d;
        }
        if let Some(t) = nd.transverse_shifts {
            s.nd.nv.transverse_shifts = t;
        }
        if let Some(l) = &nd.lambda {
            s.nd.nv.lambda_mode = match l.as_str() {
                "unity" => LambdaMode::Unity,
                "exact" => LambdaMode::Exact,
                other => return Err(err(format!("nd.lambda: '{other}' is not one of unity, exact"))),
            };
        }

        let f = &self.field;
        quantity(&mut s.field.b0, &f.b0, "field.b0", Dim::Field)?;
        quantity(&mut s.field.b_grad, &f.b_grad, "field.b_grad", Dim::Gradient)?;
        match &f.theta0 {
            Some(_) => quantity(&mut s.field.theta0, &f.theta0, "field.theta0", Dim::Angle)?,
            None if nd.nv_angle.is_some() => s.field.theta0 = s.nd.nv_angle / 2.0,
            None => {}
        }
        if let Some(r) = &f.ramp {
            s.ramp = match r.as_str() {
                "constant" => RampMode::Constant,
                "quadratic" => RampMode::Compensating,
                other => return Err(err(format!("field.ramp: '{other}' is not one of constant, quadratic"))),
            };
        }

        let q = &self.sequence;
        quantity(&mut s.sequence.t_pulse, &q.t_pulse, "sequence.t_pulse", Dim::Time)?;
        quantity(&mut s.sequence.t_delay, &q.t_delay, "sequence.t_delay", Dim::Time)?;
        if let Some(m) = &q.pulse_multiples {
            s.sequence.pulse_multiples = m.clone();
        }
        if let Some(a) = &q.arm1 {
            s.sequence.arm1 = spin_list(a).map_err(|e| err(format!("sequence.arm1: {e}")))?;
        }
        if let Some(a) = &q.arm2 {
            s.sequence.arm2 = spin_list(a).map_err(|e| err(format!("sequence.arm2: {e}")))?;
        }
        if q.symmetric == Some(true) {
            s.sequence = s.sequence.with_symmetric();
        }

        let e = &self.environment;
        quantity(&mut s.field.g_xi, &e.g_xi, "environment.g_xi", Dim::Acceleration)?;
        quantity(&mut s.field.g_zeta, &e.g_zeta, "environment.g_zeta", Dim::Acceleration)?;
        quantity(&mut s.preparation.theta_offset, &e.theta_offset, "environment.theta_offset", Dim::Angle)?;
        quantity(
            &mut s.preparation.theta_dot_offset,
            &e.theta_dot_offset,
            "environment.theta_dot_offset",
            Dim::AngularRate,
        )?;
        let t_theta = match &e.t_theta {
            Some(t) => {
                Some(units::parse(&t.text(), Dim::Temperature).map_err(|x| err(format!("environment.t_theta: {x}")))?)
            }
            None => None,
        };
        match (e.rotational.as_deref(), t_theta) {
            (Some("ground"), _) => s.preparation.rotational = RotationalState::GroundState,
            (Some("thermal"), Some(t_theta)) | (None, Some(t_theta)) => {
                s.preparation.rotational = RotationalState::Thermal { t_theta }
            }
            (Some("thermal"), None) => return Err(err("environment.rotational = thermal needs environment.t_theta")),
            (Some(other), _) => {
                return Err(err(format!("environment.rotational: '{other}' is not one of ground, thermal")))
            }
            (None, None) => {}
        }

        let n = &self.numerics;
        if let Some(v) = n.steps_per_pulse {
            s.numerics.steps_per_pulse = v;
        }
        if let Some(v) = n.record_stride {
            s.numerics.record_stride = v;
        }
        let mut settings = RunSettings::default();
        if let Some(v) = n.seed {
            settings.seed = v;
        }
        if let Some(v) = n.mc_samples {
            settings.mc_samples = v;
        }
        Ok((s, settings))
    }
}
