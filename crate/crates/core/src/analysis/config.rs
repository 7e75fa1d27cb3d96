//! Run configuration: a flat TOML file, overridden field by field from the
//! command line.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{InitialState, IntegratorConfig, Method};
use crate::error::{Error, Result};
use crate::protocol::ModulationProtocol;
use crate::units::{khz, us};

use super::cfi::{CfiVariant, DEFAULT_FLOOR};
use super::presets::{PresetOptions, Sign};
use super::sweep::linspace;

/// Values as written in the file; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub j_pin_khz: Option<f64>,
    pub j_tail_khz: Option<f64>,
    pub t_total_us: Option<f64>,
    pub beta_p: Option<Vec<f64>>,
    pub delta_range: Option<String>,
    pub delta_khz: Option<f64>,
    pub init: Option<InitialState>,
    pub sign: Option<String>,
    pub workers: Option<usize>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_step_us: Option<f64>,
    pub method: Option<Method>,
    pub oracle_steps: Option<usize>,
    pub record_stride: Option<usize>,
    pub cfi_floor: Option<f64>,
    pub cfi_variant: Option<CfiVariant>,
    pub geometry_points: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// `LO:HI:N`, frequencies in kHz (Δ/2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaRange {
    pub lo_khz: f64,
    pub hi_khz: f64,
    pub n: usize,
}

impl FromStr for DeltaRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("delta range {s:?} is not LO:HI:N"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [lo, hi, n] = parts.as_slice() else { return Err(bad()) };
        let r = DeltaRange {
            lo_khz: lo.parse().map_err(|_| bad())?,
            hi_khz: hi.parse().map_err(|_| bad())?,
            n: n.parse().map_err(|_| bad())?,
        };
        if !(r.lo_khz.is_finite() && r.hi_khz.is_finite()) || r.n == 0 || (r.n > 1 && !(r.hi_khz > r.lo_khz)) {
            return Err(Error::InvalidParameter(format!("delta range {s:?} needs LO < HI and N >= 1")));
        }
        Ok(r)
    }
}

impl DeltaRange {
    /// Detunings in rad/s.
    pub fn values(&self) -> Vec<f64> {
        linspace(khz(self.lo_khz), khz(self.hi_khz), self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignChoice {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "both")]
    Both,
}

impl FromStr for SignChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" => Ok(SignChoice::Plus),
            "-" => Ok(SignChoice::Minus),
            "both" => Ok(SignChoice::Both),
            _ => Err(Error::InvalidParameter(format!("sign must be +, - or both, got {s:?}"))),
        }
    }
}

impl SignChoice {
    pub fn signs(self) -> Vec<Sign> {
        match self {
            SignChoice::Plus => vec![Sign::Plus],
            SignChoice::Minus => vec![Sign::Minus],
            SignChoice::Both => vec![Sign::Plus, Sign::Minus],
        }
    }

    /// Whether a detuning of this sign is kept; zero only under `Both`.
    pub fn keeps(self, delta: f64) -> bool {
        match self {
            SignChoice::Plus => delta > 0.0,
            SignChoice::Minus => delta < 0.0,
            SignChoice::Both => true,
        }
    }
}

pub fn parse_initial(s: &str) -> Result<InitialState> {
    match s {
        "phi1" => Ok(InitialState::Phi1),
        "phi2" => Ok(InitialState::Phi2),
        _ => Err(Error::InvalidParameter(format!("init must be phi1 or phi2, got {s:?}"))),
    }
}

pub fn parse_beta_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad beta_p value {x:?}"))))
        .collect()
}

/// Fully resolved settings, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub j_pin_khz: f64,
    pub j_tail_khz: f64,
    pub t_total_us: f64,
    pub beta_p: Vec<f64>,
    pub delta_range: DeltaRange,
    pub delta_khz: f64,
    pub init: InitialState,
    pub sign: SignChoice,
    pub workers: Option<usize>,
    pub rtol: f64,
    pub atol: f64,
    pub max_step_us: f64,
    pub method: Method,
    pub oracle_steps: usize,
    pub record_stride: usize,
    pub cfi_floor: f64,
    pub cfi_variant: CfiVariant,
    pub geometry_points: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            j_pin_khz: 4.0,
            j_tail_khz: 30.0,
            t_total_us: 200.0,
            beta_p: vec![0.75],
            delta_range: DeltaRange { lo_khz: -3.0, hi_khz: 3.0, n: 41 },
            delta_khz: 2.0,
            init: InitialState::Phi2,
            sign: SignChoice::Both,
            workers: None,
            rtol: 1e-10,
            atol: 1e-12,
            max_step_us: 0.2,
            method: Method::AdaptiveRk,
            oracle_steps: 20_000,
            record_stride: 1,
            cfi_floor: DEFAULT_FLOOR,
            cfi_variant: CfiVariant::Population,
            geometry_points: 401,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub beta_p: Option<Vec<f64>>,
    pub delta_range: Option<DeltaRange>,
    pub init: Option<InitialState>,
    pub sign: Option<SignChoice>,
    pub workers: Option<usize>,
}

impl Settings {
    pub fn resolve(file: ConfigFile, over: Overrides) -> Result<Self> {
        let d = Settings::default();
        let delta_range = match (over.delta_range, file.delta_range) {
            (Some(r), _) => r,
            (None, Some(s)) => s.parse()?,
            (None, None) => d.delta_range,
        };
        let sign = match (over.sign, file.sign) {
            (Some(s), _) => s,
            (None, Some(s)) => s.parse()?,
            (None, None) => d.sign,
        };
        let s = Settings {
            j_pin_khz: file.j_pin_khz.unwrap_or(d.j_pin_khz),
            j_tail_khz: file.j_tail_khz.unwrap_or(d.j_tail_khz),
            t_total_us: file.t_total_us.unwrap_or(d.t_total_us),
            beta_p: over.beta_p.or(file.beta_p).unwrap_or(d.beta_p),
            delta_range,
            delta_khz: file.delta_khz.unwrap_or(d.delta_khz),
            init: over.init.or(file.init).unwrap_or(d.init),
            sign,
            workers: over.workers.or(file.workers),
            rtol: file.rtol.unwrap_or(d.rtol),
            atol: file.atol.unwrap_or(d.atol),
            // default tracks T/1000 when T changes
            max_step_us: file.max_step_us.unwrap_or(file.t_total_us.unwrap_or(d.t_total_us) / 1000.0),
            method: file.method.unwrap_or(d.method),
            oracle_steps: file.oracle_steps.unwrap_or(d.oracle_steps),
            record_stride: file.record_stride.unwrap_or(d.record_stride),
            cfi_floor: file.cfi_floor.unwrap_or(d.cfi_floor),
            cfi_variant: file.cfi_variant.unwrap_or(d.cfi_variant),
            geometry_points: file.geometry_points.unwrap_or(d.geometry_points),
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        self.protocol()?;
        self.integrator().validate()?;
        if self.beta_p.is_empty() {
            return Err(Error::InvalidParameter("beta_p list is empty".into()));
        }
        if let Some(b) = self.beta_p.iter().find(|b| !(**b >= 0.0 && **b < 1.0)) {
            return Err(Error::InvalidParameter(format!("beta_p = {b} outside [0, 1)")));
        }
        if !self.delta_khz.is_finite() {
            return Err(Error::InvalidParameter("delta_khz must be finite".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        if !(self.cfi_floor > 0.0) {
            return Err(Error::InvalidParameter("cfi_floor must be positive".into()));
        }
        if self.geometry_points < 2 {
            return Err(Error::InvalidParameter("geometry_points must be at least 2".into()));
        }
        Ok(())
    }

    pub fn protocol(&self) -> Result<ModulationProtocol> {
        ModulationProtocol::new(khz(self.j_pin_khz), khz(self.j_tail_khz), us(self.t_total_us))
    }

    pub fn integrator(&self) -> IntegratorConfig {
        let t_total = us(self.t_total_us);
        IntegratorConfig {
            method: self.method,
            rtol: self.rtol,
            atol: self.atol,
            max_step: us(self.max_step_us),
            min_step: t_total * 1e-12,
            record_stride: self.record_stride,
            oracle_steps: self.oracle_steps,
        }
    }

    /// Detuning grid in rad/s, filtered by the sign choice.
    pub fn delta_values(&self) -> Vec<f64> {
        self.delta_range.values().into_iter().filter(|d| self.sign.keeps(*d)).collect()
    }

    /// Single-run detuning in rad/s: |delta_khz| with the chosen sign, or
    /// as written under `both`.
    pub fn single_delta(&self) -> f64 {
        let mag = khz(self.delta_khz.abs());
        match self.sign {
            SignChoice::Plus => mag,
            SignChoice::Minus => -mag,
            SignChoice::Both => khz(self.delta_khz),
        }
    }

    /// The sole β_p for single-run commands.
    pub fn single_beta(&self) -> Result<f64> {
        match self.beta_p.as_slice() {
            [b] => Ok(*b),
            _ => Err(Error::InvalidParameter(format!("this command takes one beta_p value, got {}", self.beta_p.len()))),
        }
    }

    pub fn preset_options(&self) -> Result<PresetOptions> {
        Ok(PresetOptions {
            protocol: self.protocol()?,
            integrator: self.integrator(),
            init: self.init,
            floor: self.cfi_floor,
            variant: self.cfi_variant,
        })
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("settings always serialize")
    }
}
