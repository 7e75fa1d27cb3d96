//! Direction dependence of the response: ±Δ pairs and round trips.

use crate::dynamics::{decompose, evolve_lab, prepare_initial, InitialState, IntegratorConfig};
use crate::error::{Error, Result};
use crate::protocol::{Drive, ReversedLeg, SystemParams};

use super::sweep::{sweep, SweepResult, SweepSpec};

/// Relative tolerance when matching +Δ with −Δ.
const PAIR_TOL: f64 = 1e-12;

/// Responses at +|Δ| and −|Δ| for one β_p.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ChiralityRow {
    pub beta_p: f64,
    pub delta_abs: f64,
    pub p_z_plus: f64,
    pub p_z_minus: f64,
    /// |p_z⁺ − p_z⁻|
    pub asymmetry: f64,
    /// Final occupation of the branch not initially prepared, at ±|Δ|.
    pub transfer_plus: f64,
    pub transfer_minus: f64,
    /// |transfer⁺ − transfer⁻|
    pub transfer_asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ChiralityTable {
    pub init: InitialState,
    pub rows: Vec<ChiralityRow>,
}

impl ChiralityTable {
    fn rows_for(&self, beta_p: f64) -> impl Iterator<Item = &ChiralityRow> {
        self.rows.iter().filter(move |r| r.beta_p == beta_p)
    }

    pub fn max_asymmetry(&self, beta_p: f64) -> f64 {
        self.rows_for(beta_p).map(|r| r.asymmetry).fold(0.0, f64::max)
    }

    pub fn max_transfer_asymmetry(&self, beta_p: f64) -> f64 {
        self.rows_for(beta_p).map(|r| r.transfer_asymmetry).fold(0.0, f64::max)
    }

    /// +1 if transfer is larger for +Δ at most grid magnitudes, −1 if for
    /// −Δ, 0 on a tie.
    pub fn favored_sign(&self, beta_p: f64) -> i32 {
        let score: i32 = self
            .rows_for(beta_p)
            .map(|r| (r.transfer_plus - r.transfer_minus).partial_cmp(&0.0).map_or(0, |o| o as i32))
            .sum();
        score.signum()
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ChiralityReport {
    pub tables: Vec<ChiralityTable>,
}

impl ChiralityReport {
    pub fn table(&self, init: InitialState) -> Option<&ChiralityTable> {
        self.tables.iter().find(|t| t.init == init)
    }
}

/// Indices (i⁺, i⁻) of matching ±Δ pairs, by increasing |Δ|. Zero is skipped.
pub fn pair_indices(deltas: &[f64]) -> Result<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    let mut used = vec![false; deltas.len()];
    for (i, &d) in deltas.iter().enumerate() {
        if d <= 0.0 {
            continue;
        }
        let j = deltas
            .iter()
            .position(|&e| e < 0.0 && (e + d).abs() <= PAIR_TOL * d)
            .ok_or(Error::AsymmetricGrid)?;
        used[i] = true;
        used[j] = true;
        pairs.push((i, j));
    }
    let unpaired_negative = deltas.iter().zip(&used).any(|(d, u)| *d < 0.0 && !u);
    if pairs.is_empty() || unpaired_negative {
        return Err(Error::AsymmetricGrid);
    }
    Ok(pairs)
}

fn transfer(init: InitialState, b1: f64, b2: f64) -> f64 {
    match init {
        InitialState::Phi1 => b2,
        _ => b1,
    }
}

fn table_from(result: &SweepResult, init: InitialState, pairs: &[(usize, usize)]) -> ChiralityTable {
    let mut rows = Vec::new();
    for (bi, &beta_p) in result.beta_p_values.iter().enumerate() {
        let row = result.row(bi);
        for &(ip, im) in pairs {
            let (p, m) = (&row[ip], &row[im]);
            let tp = transfer(init, p.pop_branch1_final, p.pop_branch2_final);
            let tm = transfer(init, m.pop_branch1_final, m.pop_branch2_final);
            rows.push(ChiralityRow {
                beta_p,
                delta_abs: p.delta,
                p_z_plus: p.p_z_final,
                p_z_minus: m.p_z_final,
                asymmetry: (p.p_z_final - m.p_z_final).abs(),
                transfer_plus: tp,
                transfer_minus: tm,
                transfer_asymmetry: (tp - tm).abs(),
            });
        }
    }
    ChiralityTable { init, rows }
}

/// Sweep the spec once per initial state and tabulate ±Δ asymmetries.
pub fn chirality_report(spec: &SweepSpec, inits: &[InitialState]) -> Result<ChiralityReport> {
    let pairs = pair_indices(&spec.delta_values)?;
    let mut tables = Vec::with_capacity(inits.len());
    for &init in inits {
        let s = SweepSpec { init_state: init, ..spec.clone() };
        tables.push(table_from(&sweep(&s)?, init, &pairs));
    }
    Ok(ChiralityReport { tables })
}

/// Branch populations after each leg of one round-trip ordering.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RoundTrip {
    /// Sign of Δ on the first leg.
    pub first_sign: i8,
    pub after_first: (f64, f64),
    pub after_return: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RoundTripReport {
    pub beta_p: f64,
    pub delta_abs: f64,
    pub init: InitialState,
    pub initial: (f64, f64),
    /// +|Δ| out, then the reversed leg.
    pub plus_first: RoundTrip,
    /// −|Δ| out, then the reversed leg.
    pub minus_first: RoundTrip,
}

impl RoundTripReport {
    /// Final occupation of the initially prepared branch for each ordering.
    pub fn restoration(&self) -> (f64, f64) {
        let pick = |p: (f64, f64)| match self.init {
            InitialState::Phi1 => p.0,
            _ => p.1,
        };
        (pick(self.plus_first.after_return), pick(self.minus_first.after_return))
    }
}

fn one_round_trip(sys: &SystemParams, init: InitialState, cfg: &IntegratorConfig, sign: i8) -> Result<RoundTrip> {
    let out = SystemParams { delta: sys.delta.abs() * sign as f64, ..*sys };
    let back = ReversedLeg(out);
    let psi0 = prepare_initial(init, &out.frame(0.0, None)?);
    let cfg = cfg.endpoints_only();
    let first = evolve_lab(&out, psi0, &cfg)?;
    let second = evolve_lab(&back, first.final_psi(), &cfg)?;
    Ok(RoundTrip {
        first_sign: sign,
        after_first: first.final_branch_populations()?,
        after_return: second.final_branch_populations()?,
    })
}

/// Run the protocol out and back in both orderings. The return leg replays
/// the J schedule backwards with Δ negated, continuing Φ from ΔT.
pub fn nonreciprocity_roundtrip(sys: &SystemParams, init: InitialState, cfg: &IntegratorConfig) -> Result<RoundTripReport> {
    let f0 = sys.frame(0.0, None)?;
    let psi0 = prepare_initial(init, &f0);
    let initial = crate::dynamics::branch_populations(&decompose(&psi0, &f0, &f0.metric()?))?;
    Ok(RoundTripReport {
        beta_p: sys.beta_pin(),
        delta_abs: sys.delta.abs(),
        init,
        initial,
        plus_first: one_round_trip(sys, init, cfg, 1)?,
        minus_first: one_round_trip(sys, init, cfg, -1)?,
    })
}
