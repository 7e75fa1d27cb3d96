//! The coupling ramp J(t), accumulated phase Φ(t), and diagnostics built on
//! them.
//!
//! The ramp dips from the tail value J_l at t = 0 to the pin value J_p at
//! t = T/2 and back:
//!
//! ```text
//! J(t) = (J_l − J_p) cos(πt/T + π/2) + J_l = J_l − (J_l − J_p) sin(πt/T)
//! ```
//!
//! With γ fixed, β(t) = γ/J(t) peaks at the pin with β̇(T/2) = 0.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::CMat2;
use crate::model::{self, hamiltonian_at, EigenFrame};
use crate::units;

/// Pin/tail modulation schedule.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ModulationProtocol {
    /// J_p, rad/s.
    pub j_pin: f64,
    /// J_l, rad/s.
    pub j_tail: f64,
    /// T, s. The pin sits at T/2.
    pub t_total: f64,
}

impl ModulationProtocol {
    pub fn new(j_pin: f64, j_tail: f64, t_total: f64) -> Result<Self> {
        if !(j_pin.is_finite() && j_tail.is_finite() && t_total.is_finite()) {
            return Err(Error::InvalidParameter("protocol values must be finite".into()));
        }
        if !(j_pin > 0.0 && j_pin <= j_tail) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < j_pin <= j_tail, got j_pin = {j_pin}, j_tail = {j_tail}"
            )));
        }
        if t_total <= 0.0 {
            return Err(Error::InvalidParameter(format!("t_total must be positive, got {t_total}")));
        }
        Ok(Self { j_pin, j_tail, t_total })
    }

    /// J_p = 2π·4 kHz, J_l = 2π·30 kHz, T = 200 μs.
    pub fn standard() -> Self {
        Self { j_pin: units::khz(4.0), j_tail: units::khz(30.0), t_total: units::us(200.0) }
    }

    pub fn pin_time(&self) -> f64 {
        0.5 * self.t_total
    }

    fn check_window(&self, t: f64) -> Result<()> {
        if t.is_nan() || t < 0.0 || t > self.t_total {
            return Err(Error::OutOfWindow { t, t_total: self.t_total });
        }
        Ok(())
    }

    /// Evenly spaced grid of `n` points covering [0, T].
    pub fn time_grid(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2, "time grid needs at least two points");
        let last = (n - 1) as f64;
        (0..n).map(|k| if k + 1 == n { self.t_total } else { self.t_total * k as f64 / last }).collect()
    }
}

/// J(t) and J̇(t).
pub fn j_of_t(p: &ModulationProtocol, t: f64) -> Result<(f64, f64)> {
    p.check_window(t)?;
    let u = t / p.t_total;
    // sin(π·min(u, 1−u)) is sin(πu) written so that the pin lands exactly.
    let s = (PI * u.min(1.0 - u)).sin();
    let j = p.j_pin * s + p.j_tail * (1.0 - s);
    let jdot = -(p.j_tail - p.j_pin) * (PI / p.t_total) * (PI * (0.5 - u)).sin();
    Ok((j, jdot))
}

/// β(t) = γ/J(t) and β̇(t) = −γJ̇/J².
pub fn beta_of_t(gamma: f64, p: &ModulationProtocol, t: f64) -> Result<(f64, f64)> {
    let (j, jdot) = j_of_t(p, t)?;
    if gamma == 0.0 {
        return Ok((0.0, 0.0));
    }
    Ok((gamma / j, -gamma * jdot / (j * j)))
}

/// Φ(t) = Δt and Φ̇ = Δ for constant detuning.
pub fn phi_of_t(delta: f64, t: f64) -> (f64, f64) {
    (delta * t, delta)
}

/// Every instantaneous protocol quantity at one time.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ProtocolState {
    pub t: f64,
    pub j: f64,
    pub jdot: f64,
    pub beta: f64,
    pub betadot: f64,
    pub phi: f64,
    pub phidot: f64,
}

pub fn protocol_state(gamma: f64, p: &ModulationProtocol, delta: f64, t: f64) -> Result<ProtocolState> {
    let (j, jdot) = j_of_t(p, t)?;
    let (beta, betadot) = beta_of_t(gamma, p, t)?;
    let (phi, phidot) = phi_of_t(delta, t);
    Ok(ProtocolState { t, j, jdot, beta, betadot, phi, phidot })
}

/// γ, the modulation protocol and a constant detuning Δ.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SystemParams {
    pub gamma: f64,
    pub protocol: ModulationProtocol,
    pub delta: f64,
}

impl SystemParams {
    pub fn new(gamma: f64, protocol: ModulationProtocol, delta: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be finite and >= 0, got {gamma}")));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be finite".into()));
        }
        ModulationProtocol::new(protocol.j_pin, protocol.j_tail, protocol.t_total)?;
        Ok(Self { gamma, protocol, delta })
    }

    /// γ = β_p·J_p, so that β reaches β_p at the pin.
    pub fn with_pin_beta(beta_p: f64, protocol: ModulationProtocol, delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta_p) || 1.0 - beta_p * beta_p < model::EP_GUARD {
            return Err(Error::InvalidParameter(format!("beta_p must lie in [0, 1) away from the EP, got {beta_p}")));
        }
        Self::new(beta_p * protocol.j_pin, protocol, delta)
    }

    pub fn beta_pin(&self) -> f64 {
        self.gamma / self.protocol.j_pin
    }
}

/// Anything that supplies γ and a protocol state over a finite window.
///
/// The integrators and the geometry scan are written against this trait, so
/// a non-constant detuning waveform only needs its own implementation.
pub trait Drive: Sync {
    fn gamma(&self) -> f64;
    fn duration(&self) -> f64;
    fn state(&self, t: f64) -> Result<ProtocolState>;

    fn hamiltonian(&self, t: f64) -> Result<CMat2> {
        let s = self.state(t)?;
        Ok(hamiltonian_at(self.gamma(), s.j, s.phi))
    }

    fn frame(&self, t: f64, gauge_ref: Option<&EigenFrame>) -> Result<EigenFrame> {
        let s = self.state(t)?;
        model::eigensystem(self.gamma(), s.j, s.phi, gauge_ref)
    }
}

impl Drive for SystemParams {
    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn duration(&self) -> f64 {
        self.protocol.t_total
    }

    fn state(&self, t: f64) -> Result<ProtocolState> {
        protocol_state(self.gamma, &self.protocol, self.delta, t)
    }
}

/// The time-reversed leg of a round trip: the J schedule runs backwards, Δ
/// is negated, and Φ starts where the forward leg ended (ΔT) and unwinds to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReversedLeg(pub SystemParams);

impl Drive for ReversedLeg {
    fn gamma(&self) -> f64 {
        self.0.gamma
    }

    fn duration(&self) -> f64 {
        self.0.protocol.t_total
    }

    fn state(&self, t: f64) -> Result<ProtocolState> {
        let p = &self.0.protocol;
        p.check_window(t)?;
        let fwd = protocol_state(self.0.gamma, p, self.0.delta, p.t_total - t)?;
        Ok(ProtocolState {
            t,
            j: fwd.j,
            jdot: -fwd.jdot,
            beta: fwd.beta,
            betadot: -fwd.betadot,
            phi: fwd.phi,
            phidot: -fwd.phidot,
        })
    }
}

/// A drive with an arbitrary detuning waveform Δ(t); Φ(t) = ∫₀ᵗ Δ dτ is
/// evaluated by composite Gauss–Legendre quadrature.
pub struct DetuningWaveform<F> {
    pub gamma: f64,
    pub protocol: ModulationProtocol,
    pub delta: F,
    /// Quadrature panels over the full window.
    pub panels: usize,
}

impl<F: Fn(f64) -> f64 + Sync> DetuningWaveform<F> {
    pub fn new(gamma: f64, protocol: ModulationProtocol, delta: F) -> Self {
        Self { gamma, protocol, delta, panels: 256 }
    }

    fn phase(&self, t: f64) -> f64 {
        // 3-point Gauss–Legendre per panel
        const X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
        const W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        if t == 0.0 {
            return 0.0;
        }
        let n = ((self.panels as f64 * t / self.protocol.t_total).ceil() as usize).max(1);
        let h = t / n as f64;
        let mut acc = 0.0;
        for k in 0..n {
            let mid = (k as f64 + 0.5) * h;
            for (x, w) in X.iter().zip(W) {
                acc += w * (self.delta)(mid + 0.5 * h * x);
            }
        }
        0.5 * h * acc
    }
}

impl<F: Fn(f64) -> f64 + Sync> Drive for DetuningWaveform<F> {
    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn duration(&self) -> f64 {
        self.protocol.t_total
    }

    fn state(&self, t: f64) -> Result<ProtocolState> {
        let (j, jdot) = j_of_t(&self.protocol, t)?;
        let (beta, betadot) = beta_of_t(self.gamma, &self.protocol, t)?;
        Ok(ProtocolState { t, j, jdot, beta, betadot, phi: self.phase(t), phidot: (self.delta)(t) })
    }
}

/// Points used to scan a protocol window for maxima.
pub const SCAN_POINTS: usize = 4001;

/// Thresholds for [`criticality_check`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CriticalityThresholds {
    /// 1 − β²(τ_p) at or below this counts as critical.
    pub eps_beta: f64,
    /// |β̇(τ_p)| at or below this fraction of max|β̇| counts as stationary.
    pub eps_betadot_rel: f64,
}

impl Default for CriticalityThresholds {
    fn default() -> Self {
        Self { eps_beta: 1e-4, eps_betadot_rel: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CriticalityReport {
    pub beta_pin: f64,
    pub one_minus_beta_sq: f64,
    pub betadot_pin: f64,
    pub max_abs_betadot: f64,
    /// 1 − β² at the pin is within `eps_beta` of zero.
    pub near_ep: bool,
    /// β̇ vanishes at the pin within tolerance.
    pub stationary_pin: bool,
    /// ξ at the pin, absent inside the EP guard.
    pub xi_pin: Option<f64>,
}

pub fn criticality_check(gamma: f64, p: &ModulationProtocol, thresholds: CriticalityThresholds) -> CriticalityReport {
    let tp = p.pin_time();
    let (beta_pin, betadot_pin) = beta_of_t(gamma, p, tp).expect("pin lies inside the window");
    let max_abs_betadot = p
        .time_grid(SCAN_POINTS)
        .into_iter()
        .map(|t| beta_of_t(gamma, p, t).expect("grid lies inside the window").1.abs())
        .fold(0.0, f64::max);
    let one_minus_beta_sq = 1.0 - beta_pin * beta_pin;
    CriticalityReport {
        beta_pin,
        one_minus_beta_sq,
        betadot_pin,
        max_abs_betadot,
        near_ep: one_minus_beta_sq <= thresholds.eps_beta,
        stationary_pin: betadot_pin.abs() <= thresholds.eps_betadot_rel * max_abs_betadot,
        xi_pin: crate::geometry::amplification_factor(beta_pin).ok(),
    }
}

/// Hermitian adiabaticity measure |J̇Δ| / (Δ² + J²)^{3/2}.
pub fn adiabaticity_parameter(j: f64, jdot: f64, delta: f64) -> Result<f64> {
    if j == 0.0 && delta == 0.0 {
        return Err(Error::DegenerateInput("adiabaticity needs (J, delta) != (0, 0)"));
    }
    Ok((jdot * delta).abs() / (delta * delta + j * j).powf(1.5))
}

/// Maximum of [`adiabaticity_parameter`] over the window, with its time.
pub fn max_adiabaticity(p: &ModulationProtocol, delta: f64) -> Result<(f64, f64)> {
    let mut best = (0.0, 0.0);
    for t in p.time_grid(SCAN_POINTS) {
        let (j, jdot) = j_of_t(p, t)?;
        let a = adiabaticity_parameter(j, jdot, delta)?;
        if a > best.0 {
            best = (a, t);
        }
    }
    Ok(best)
}

/// Static field, resonance and field perturbation of a sensing run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SensingScenario {
    /// Zeeman coefficient η, rad/(s·field unit).
    pub eta: f64,
    pub b0: f64,
    pub omega0: f64,
    pub omega_field: f64,
    /// Signed projection of δB on the B₀ axis.
    pub b1: f64,
}

/// Δ = η(B₀ + B₁) + ω₀ − ω_field, which is η·B₁ on resonance.
pub fn detuning_from_field(s: &SensingScenario) -> f64 {
    let offset = s.eta * s.b0 + s.omega0 - s.omega_field;
    if offset == 0.0 {
        s.eta * s.b1
    } else {
        offset + s.eta * s.b1
    }
}

/// B₁ = Δ/η.
pub fn field_from_detuning(delta: f64, eta: f64) -> Result<f64> {
    if eta == 0.0 {
        return Err(Error::ZeroCoefficient);
    }
    Ok(delta / eta)
}
