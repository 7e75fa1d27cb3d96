//! Time evolution under H_PT(t).
//!
//! Two independent routes are provided: the lab-frame Schrödinger equation
//! iψ' = H(t)ψ, and the eigenbasis amplitude equation α' = i(A − H^CPT)α
//! with a numerically evaluated connection. The lab frame can be integrated
//! adaptively or with fixed-step matrix exponentials, which serves as the
//! oracle for the other two.

mod integrator;

pub use integrator::{dormand_prince, piecewise_exponential};

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::geometry::berry_connection_numeric;
use crate::linalg::{CMat2, CVec2, Complex, I};
use crate::model::{cpt_inner, EigenFrame};
use crate::protocol::Drive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Embedded Runge–Kutta 4(5) with error control.
    AdaptiveRk,
    /// exp(−iH(t_mid)dt) steps at a fixed step count.
    PiecewiseExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    /// s
    pub max_step: f64,
    /// s; adaptive steps below this abort with `StepUnderflow`.
    pub min_step: f64,
    /// Record every n-th step; the final state is always recorded.
    pub record_stride: usize,
    /// Step count for [`Method::PiecewiseExponential`].
    pub oracle_steps: usize,
}

/// Upper bound on the eigenbasis connection stencil, s.
pub const MAX_CONNECTION_STENCIL: f64 = 1e-8;

impl IntegratorConfig {
    /// rtol 1e−10, atol 1e−12, max step T/1000, 20000 oracle steps.
    pub fn for_duration(t_total: f64) -> Self {
        Self {
            method: Method::AdaptiveRk,
            rtol: 1e-10,
            atol: 1e-12,
            max_step: t_total / 1000.0,
            min_step: t_total * 1e-12,
            record_stride: 1,
            oracle_steps: 20_000,
        }
    }

    pub fn with_method(self, method: Method) -> Self {
        Self { method, ..self }
    }

    /// Record only the initial and final states.
    pub fn endpoints_only(self) -> Self {
        Self { record_stride: usize::MAX, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("rtol and atol must be positive");
        }
        if !(self.min_step > 0.0 && self.min_step <= self.max_step) {
            return bad("need 0 < min_step <= max_step");
        }
        if self.record_stride == 0 {
            return bad("record_stride must be at least 1");
        }
        if self.oracle_steps == 0 {
            return bad("oracle_steps must be at least 1");
        }
        Ok(())
    }
}

/// Recorded evolution. All sequences share the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Lab-frame state, not renormalized.
    pub psi: Vec<CVec2>,
    /// (α₁, α₂) against the frame at the same time.
    pub alpha: Vec<[Complex; 2]>,
    pub p_z: Vec<f64>,
    pub frames: Vec<EigenFrame>,
}

impl Trajectory {
    fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            psi: Vec::with_capacity(n),
            alpha: Vec::with_capacity(n),
            p_z: Vec::with_capacity(n),
            frames: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, t: f64, psi: CVec2, alpha: [Complex; 2], frame: EigenFrame) -> Result<()> {
        self.p_z.push(population_z(&psi)?);
        self.times.push(t);
        self.psi.push(psi);
        self.alpha.push(alpha);
        self.frames.push(frame);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_p_z(&self) -> f64 {
        *self.p_z.last().expect("trajectory has at least the initial point")
    }

    pub fn final_psi(&self) -> CVec2 {
        *self.psi.last().expect("trajectory has at least the initial point")
    }

    /// Normalized (|α₁|², |α₂|²) at every recorded time.
    pub fn branch_populations(&self) -> Result<Vec<(f64, f64)>> {
        self.alpha.iter().map(branch_populations).collect()
    }

    pub fn final_branch_populations(&self) -> Result<(f64, f64)> {
        branch_populations(self.alpha.last().expect("trajectory has at least the initial point"))
    }
}

/// Named initial states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    Phi1,
    Phi2,
    Ket0,
    Ket1,
    MinusX,
    PlusX,
}

pub fn prepare_initial(which: InitialState, frame0: &EigenFrame) -> CVec2 {
    match which {
        InitialState::Phi1 => frame0.phi1,
        InitialState::Phi2 => frame0.phi2,
        InitialState::Ket0 => CVec2::real(1.0, 0.0),
        InitialState::Ket1 => CVec2::real(0.0, 1.0),
        InitialState::MinusX => CVec2::real(FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
        InitialState::PlusX => CVec2::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    }
}

/// αₙ = ⟨φₙ|ψ⟩^CPT.
pub fn decompose(psi: &CVec2, frame: &EigenFrame, metric: &CMat2) -> [Complex; 2] {
    [cpt_inner(&frame.phi1, psi, metric), cpt_inner(&frame.phi2, psi, metric)]
}

/// ψ = α₁φ₁ + α₂φ₂.
pub fn reconstruct(alpha: &[Complex; 2], frame: &EigenFrame) -> CVec2 {
    frame.phi1.scale(alpha[0]) + frame.phi2.scale(alpha[1])
}

/// Post-selected |c1|²/(|c0|² + |c1|²).
pub fn population_z(psi: &CVec2) -> Result<f64> {
    let n = psi.norm_sqr();
    if !(n > 0.0) {
        return Err(Error::ZeroState);
    }
    Ok(psi.c1.norm_sqr() / n)
}

/// (|α₁|², |α₂|²) normalized to unit sum.
pub fn branch_populations(alpha: &[Complex; 2]) -> Result<(f64, f64)> {
    let (a, b) = (alpha[0].norm_sqr(), alpha[1].norm_sqr());
    let n = a + b;
    if !(n > 0.0) {
        return Err(Error::ZeroState);
    }
    Ok((a / n, b / n))
}

fn record_lab<D: Drive + ?Sized>(traj: &mut Trajectory, drive: &D, t: f64, psi: &CVec2) -> Result<()> {
    let frame = drive.frame(t, None)?;
    let alpha = decompose(psi, &frame, &frame.metric()?);
    traj.push(t, *psi, alpha, frame)
}

fn should_record(k: usize, t: f64, t_end: f64, stride: usize) -> bool {
    k.is_multiple_of(stride) || t == t_end
}

/// Integrate iψ' = H(t)ψ over the drive's window.
///
/// The frames recorded alongside are the canonical-gauge eigenframes, which
/// vary smoothly in the Symmetric regime.
pub fn evolve_lab<D: Drive + ?Sized>(drive: &D, init: CVec2, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if !(init.norm_sqr() > 0.0) {
        return Err(Error::ZeroState);
    }
    let t_end = drive.duration();
    let mut traj = Trajectory::with_capacity(16);
    let mut record = |k: usize, t: f64, y: &CVec2| {
        if should_record(k, t, t_end, cfg.record_stride) {
            record_lab(&mut traj, drive, t, y)?;
        }
        Ok(())
    };
    match cfg.method {
        Method::AdaptiveRk => {
            dormand_prince(|t, y, _| Ok(drive.hamiltonian(t)?.apply(y).scale(-I)), 0.0, t_end, init, cfg, &mut record)?;
        }
        Method::PiecewiseExponential => {
            piecewise_exponential(|t, _| Ok(drive.hamiltonian(t)?.scale(-I)), 0.0, t_end, init, cfg.oracle_steps, &mut record)?;
        }
    }
    Ok(traj)
}

/// Generator i(A − H^CPT) of the eigenbasis amplitudes at time t, with the
/// connection stencil min(0.05·step, [`MAX_CONNECTION_STENCIL`]).
pub fn eigenbasis_generator<D: Drive + ?Sized>(drive: &D, t: f64, step: f64) -> Result<CMat2> {
    let h = (0.05 * step).min(MAX_CONNECTION_STENCIL);
    let a = berry_connection_numeric(drive, t, h)?;
    let f = drive.frame(t, None)?;
    Ok((a - CMat2::diag(f.e_plus, f.e_minus)).scale(I))
}

/// Integrate α' = i(A − H^CPT)α and reconstruct ψ on the record grid.
pub fn evolve_eigenbasis<D: Drive + ?Sized>(drive: &D, init_alpha: [Complex; 2], cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let y0 = CVec2::from_array(init_alpha);
    if !(y0.norm_sqr() > 0.0) {
        return Err(Error::ZeroState);
    }
    let t_end = drive.duration();
    let mut traj = Trajectory::with_capacity(16);
    let mut record = |k: usize, t: f64, y: &CVec2| {
        if should_record(k, t, t_end, cfg.record_stride) {
            let frame = drive.frame(t, None)?;
            let alpha = y.as_array();
            traj.push(t, reconstruct(&alpha, &frame), alpha, frame)?;
        }
        Ok(())
    };
    match cfg.method {
        Method::AdaptiveRk => {
            dormand_prince(|t, y, h| Ok(eigenbasis_generator(drive, t, h)?.apply(y)), 0.0, t_end, y0, cfg, &mut record)?;
        }
        Method::PiecewiseExponential => {
            piecewise_exponential(|t, dt| eigenbasis_generator(drive, t, dt), 0.0, t_end, y0, cfg.oracle_steps, &mut record)?;
        }
    }
    Ok(traj)
}
