//! Bundled scenarios: the Hermitian/non-Hermitian detuning sweep and the
//! amplification-ratio table against β_p for both signs of Δ.

use crate::dynamics::{InitialState, IntegratorConfig};
use crate::error::{Error, Result};
use crate::protocol::ModulationProtocol;
use crate::units::{khz, to_khz};

use super::cfi::{amplification_ratio, cfi_with, CfiReport, CfiVariant, Ratio, DEFAULT_FLOOR};
use super::sweep::{linspace, sweep, SweepResult, SweepSpec};

pub const GRID_POINTS: usize = 41;
pub const HALF_RANGE_KHZ: f64 = 3.0;
pub const FIGURE2_BETAS: [f64; 2] = [0.0, 0.75];
/// The first entry is the Hermitian reference.
pub const FIGURE3_BETAS: [f64; 7] = [0.0, 0.1, 0.3, 0.5, 0.65, 0.75, 0.8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Settings shared by the presets.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PresetOptions {
    pub protocol: ModulationProtocol,
    pub integrator: IntegratorConfig,
    pub init: InitialState,
    pub floor: f64,
    pub variant: CfiVariant,
}

impl Default for PresetOptions {
    fn default() -> Self {
        let protocol = ModulationProtocol::standard();
        PresetOptions {
            protocol,
            integrator: IntegratorConfig::for_duration(protocol.t_total),
            init: InitialState::Phi2,
            floor: DEFAULT_FLOOR,
            variant: CfiVariant::Population,
        }
    }
}

/// 41 points over ±2π·3 kHz.
pub fn symmetric_grid() -> Vec<f64> {
    linspace(khz(-HALF_RANGE_KHZ), khz(HALF_RANGE_KHZ), GRID_POINTS)
}

/// 41 magnitudes k·(3 kHz)/41, k = 1..41, with the given sign, ascending.
pub fn one_sided_grid(sign: Sign) -> Vec<f64> {
    let mags = (1..=GRID_POINTS).map(|k| khz(HALF_RANGE_KHZ * k as f64 / GRID_POINTS as f64));
    match sign {
        Sign::Plus => mags.collect(),
        Sign::Minus => {
            let mut v: Vec<f64> = mags.map(|m| -m).collect();
            v.reverse();
            v
        }
    }
}

/// CFI of each β_p row with θ = Δ/2π in kHz. A row with failed cells is an
/// error.
pub fn row_cfi(result: &SweepResult, floor: f64, variant: CfiVariant) -> Result<Vec<CfiReport>> {
    let theta: Vec<f64> = result.delta_values.iter().map(|d| to_khz(*d)).collect();
    (0..result.beta_p_values.len())
        .map(|i| {
            let failures = result.row(i).iter().filter(|c| !c.status.is_ok()).count();
            if failures > 0 {
                return Err(Error::SweepFailed { beta_p: result.beta_p_values[i], failures });
            }
            cfi_with(&theta, &result.p_z_row(i), floor, variant)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Figure2 {
    pub sweep: SweepResult,
    /// One report per β_p row.
    pub cfi: Vec<CfiReport>,
    /// I_{0.75}/I_0.
    pub ratio: Ratio,
}

pub fn figure2(opts: &PresetOptions) -> Result<Figure2> {
    let spec = SweepSpec {
        beta_p_values: FIGURE2_BETAS.to_vec(),
        delta_values: symmetric_grid(),
        init_state: opts.init,
        integrator: opts.integrator,
        protocol: opts.protocol,
    };
    let sweep = sweep(&spec)?;
    let cfi = row_cfi(&sweep, opts.floor, opts.variant)?;
    let ratio = amplification_ratio(cfi[1].i, cfi[0].i);
    Ok(Figure2 { sweep, cfi, ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AmplificationRow {
    pub beta_p: f64,
    pub sign: Sign,
    pub i: f64,
    pub i_zero: f64,
    pub ratio: Ratio,
    pub floor_hits: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Figure3 {
    pub sweeps: Vec<(Sign, SweepResult)>,
    /// Rows for every non-reference β_p, grouped by sign.
    pub table: Vec<AmplificationRow>,
}

impl Figure3 {
    pub fn ratios(&self, sign: Sign) -> Vec<(f64, f64)> {
        self.table.iter().filter(|r| r.sign == sign).map(|r| (r.beta_p, r.ratio.value())).collect()
    }
}

/// Amplification ratios relative to β_p = 0 over the one-sided grids.
/// `betas[0]` must be 0.
pub fn figure3_with(opts: &PresetOptions, betas: &[f64], signs: &[Sign]) -> Result<Figure3> {
    if betas.first() != Some(&0.0) {
        return Err(Error::InvalidParameter("the first beta_p must be the Hermitian reference 0".into()));
    }
    let mut sweeps = Vec::new();
    let mut table = Vec::new();
    for &sign in signs {
        let spec = SweepSpec {
            beta_p_values: betas.to_vec(),
            delta_values: one_sided_grid(sign),
            init_state: opts.init,
            integrator: opts.integrator,
            protocol: opts.protocol,
        };
        let result = sweep(&spec)?;
        let reports = row_cfi(&result, opts.floor, opts.variant)?;
        let i_zero = reports[0].i;
        for (b, r) in betas.iter().zip(&reports).skip(1) {
            table.push(AmplificationRow {
                beta_p: *b,
                sign,
                i: r.i,
                i_zero,
                ratio: amplification_ratio(r.i, i_zero),
                floor_hits: r.floor_hits,
            });
        }
        sweeps.push((sign, result));
    }
    Ok(Figure3 { sweeps, table })
}

pub fn figure3(opts: &PresetOptions) -> Result<Figure3> {
    figure3_with(opts, &FIGURE3_BETAS, &[Sign::Plus, Sign::Minus])
}
