//! Grids of (β_p, Δ) runs.

use rayon::prelude::*;

use crate::dynamics::{evolve_lab, prepare_initial, InitialState, IntegratorConfig};
use crate::error::{Error, Result};
use crate::model::EP_GUARD;
use crate::protocol::{max_adiabaticity, Drive, ModulationProtocol, SystemParams};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepSpec {
    pub beta_p_values: Vec<f64>,
    /// Signed detunings, rad/s, strictly increasing.
    pub delta_values: Vec<f64>,
    pub init_state: InitialState,
    pub integrator: IntegratorConfig,
    /// J_p, J_l and T; γ = β_p·J_p per row.
    pub protocol: ModulationProtocol,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if let Some(b) = self.beta_p_values.iter().find(|b| !(**b >= 0.0 && 1.0 - **b * **b >= EP_GUARD && **b < 1.0)) {
            return Err(Error::InvalidParameter(format!("beta_p = {b} outside [0, 1) or within the EP guard")));
        }
        if self.delta_values.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidParameter("detuning values must be finite".into()));
        }
        if let Some(i) = (1..self.delta_values.len()).find(|&i| !(self.delta_values[i] > self.delta_values[i - 1])) {
            return Err(Error::UnsortedGrid { index: i });
        }
        self.integrator.validate()
    }

    pub fn len(&self) -> usize {
        self.beta_p_values.len() * self.delta_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum CellStatus {
    Ok,
    Failed(String),
}

impl CellStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, CellStatus::Ok)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepCell {
    pub beta_p: f64,
    pub delta: f64,
    /// NaN where the run failed.
    pub p_z_final: f64,
    pub pop_branch1_final: f64,
    pub pop_branch2_final: f64,
    pub max_adiabaticity: f64,
    pub status: CellStatus,
}

/// Cells in row-major (β_p, then Δ) order.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    pub beta_p_values: Vec<f64>,
    pub delta_values: Vec<f64>,
}

impl SweepResult {
    pub fn row(&self, beta_index: usize) -> &[SweepCell] {
        let n = self.delta_values.len();
        &self.cells[beta_index * n..(beta_index + 1) * n]
    }

    pub fn row_for(&self, beta_p: f64) -> Option<&[SweepCell]> {
        self.beta_p_values.iter().position(|b| *b == beta_p).map(|i| self.row(i))
    }

    pub fn p_z_row(&self, beta_index: usize) -> Vec<f64> {
        self.row(beta_index).iter().map(|c| c.p_z_final).collect()
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| !c.status.is_ok()).count()
    }
}

fn run_cell(spec: &SweepSpec, beta_p: f64, delta: f64) -> SweepCell {
    let adiab = max_adiabaticity(&spec.protocol, delta).map(|a| a.0).unwrap_or(f64::NAN);
    let outcome = (|| {
        let sys = SystemParams::with_pin_beta(beta_p, spec.protocol, delta)?;
        let init = prepare_initial(spec.init_state, &sys.frame(0.0, None)?);
        let traj = evolve_lab(&sys, init, &spec.integrator.endpoints_only())?;
        let (b1, b2) = traj.final_branch_populations()?;
        Ok::<_, Error>((traj.final_p_z(), b1, b2))
    })();
    match outcome {
        Ok((p, b1, b2)) => SweepCell {
            beta_p,
            delta,
            p_z_final: p,
            pop_branch1_final: b1,
            pop_branch2_final: b2,
            max_adiabaticity: adiab,
            status: CellStatus::Ok,
        },
        Err(e) => SweepCell {
            beta_p,
            delta,
            p_z_final: f64::NAN,
            pop_branch1_final: f64::NAN,
            pop_branch2_final: f64::NAN,
            max_adiabaticity: adiab,
            status: CellStatus::Failed(e.to_string()),
        },
    }
}

/// Run every grid cell on the current rayon pool. Per-cell failures are
/// recorded in the cell status; only an invalid spec is an error.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let pairs: Vec<(f64, f64)> = spec
        .beta_p_values
        .iter()
        .flat_map(|&b| spec.delta_values.iter().map(move |&d| (b, d)))
        .collect();
    let cells = pairs.par_iter().map(|&(b, d)| run_cell(spec, b, d)).collect();
    Ok(SweepResult { cells, beta_p_values: spec.beta_p_values.clone(), delta_values: spec.delta_values.clone() })
}

/// Run `f` on a dedicated pool of `workers` threads (the global pool when
/// `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidParameter("workers must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = (n - 1) as f64;
            (0..n)
                .map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * (k as f64 / last) })
                .collect()
        }
    }
}
