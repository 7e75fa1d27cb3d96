//! CPT quantum geometry of the eigenframe.
//!
//! All connections are A_mn = i⟨φ_m|∂φ_n⟩ with the CPT product. In the
//! canonical gauge of [`crate::model::eigensystem`] the frame depends on
//! (β, Φ) only, with sin θ = β and s² = 1/(2cos θ):
//!
//! ```text
//! A_Φ = [[(−1 − i tanθ)/2, −s²], [−s², (−1 + i tanθ)/2]]
//! A_θ = [[0, s²], [−s², 0]]
//! ```
//!
//! A_θ is anti-Hermitian because the metric itself depends on β. The time
//! connection is Φ̇A_Φ + θ̇A_θ with θ̇ = β̇/cos θ.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eig2, CMat2, CVec2, Complex, I, ONE};
use crate::model::{self, cpt_inner, cpt_metric, eigensystem, EP_GUARD};
use crate::protocol::{Drive, ProtocolState};

/// Coordinates of the eigenframe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Param {
    Beta,
    Phi,
}

/// Frame at (β, Φ) with unit coupling; eigenvectors only depend on the ratio.
fn unit_frame(beta: f64, phi: f64) -> Result<[CVec2; 2]> {
    let f = eigensystem(beta, 1.0, phi, None)?;
    Ok([f.phi1, f.phi2])
}

fn guard_beta(beta: f64) -> Result<f64> {
    let d = 1.0 - beta * beta;
    if !(d >= EP_GUARD) {
        return Err(Error::EpProximity { one_minus_beta_sq: d });
    }
    Ok(d)
}

/// A_mn = i⟨φ_m|dφ_n⟩ given the frame and the derivative vectors.
fn connection_from(frame: &[CVec2; 2], deriv: &[CVec2; 2], metric: &CMat2) -> CMat2 {
    let mut a = CMat2::zero();
    for m in 0..2 {
        for n in 0..2 {
            a.m[m][n] = I * cpt_inner(&frame[m], &deriv[n], metric);
        }
    }
    a
}

fn central(fp: &[CVec2; 2], fm: &[CVec2; 2], h: f64) -> [CVec2; 2] {
    let k = Complex::new(0.5 / h, 0.0);
    [(fp[0] - fm[0]).scale(k), (fp[1] - fm[1]).scale(k)]
}

/// Rejects stencils whose neighbors differ by more than a quarter of the norm.
fn check_jump(a: &[CVec2; 2], b: &[CVec2; 2], h: f64) -> Result<()> {
    for n in 0..2 {
        if (a[n] - b[n]).norm() > 0.25 * a[n].norm() {
            return Err(Error::StepTooLarge { h });
        }
    }
    Ok(())
}

/// Numeric connection along one parameter with a central difference of step
/// `h`, generic over the frame map so that gauge choices can be compared.
fn parameter_connection_with<F>(frames: F, beta: f64, phi: f64, dir: Param, h: f64) -> Result<CMat2>
where
    F: Fn(f64, f64) -> Result<[CVec2; 2]>,
{
    let (db, dp) = match dir {
        Param::Beta => (h, 0.0),
        Param::Phi => (0.0, h),
    };
    let f0 = frames(beta, phi)?;
    let fp = frames(beta + db, phi + dp)?;
    let fm = frames(beta - db, phi - dp)?;
    check_jump(&f0, &fp, h)?;
    check_jump(&f0, &fm, h)?;
    let metric = cpt_metric(beta, 1.0, phi)?;
    Ok(connection_from(&f0, &central(&fp, &fm, h), &metric))
}

/// Five-point fourth-order variant of [`parameter_connection`], used where
/// the small real parts of the stability eigenvalues must be resolved.
fn parameter_connection_fourth(beta: f64, phi: f64, dir: Param, h: f64) -> Result<CMat2> {
    guard_beta(beta + 2.0 * h)?;
    let (db, dp) = match dir {
        Param::Beta => (h, 0.0),
        Param::Phi => (0.0, h),
    };
    let at = |k: f64| unit_frame(beta + k * db, phi + k * dp);
    let f0 = at(0.0)?;
    let (p1, m1, p2, m2) = (at(1.0)?, at(-1.0)?, at(2.0)?, at(-2.0)?);
    check_jump(&f0, &p2, h)?;
    check_jump(&f0, &m2, h)?;
    let k = Complex::new(1.0 / (12.0 * h), 0.0);
    let d = |n: usize| (m2[n] - p2[n] + (p1[n] - m1[n]).scale(ONE * 8.0)).scale(k);
    Ok(connection_from(&f0, &[d(0), d(1)], &cpt_metric(beta, 1.0, phi)?))
}

/// Numeric A_i at (β, Φ) for i ∈ {β, Φ}.
pub fn parameter_connection(beta: f64, phi: f64, dir: Param, h: f64) -> Result<CMat2> {
    guard_beta(beta + h)?;
    parameter_connection_with(unit_frame, beta, phi, dir, h)
}

/// Closed-form A_Φ and A_β of the canonical gauge.
pub fn parameter_connection_closed(beta: f64) -> Result<(CMat2, CMat2)> {
    let d = guard_beta(beta)?;
    let cos = d.sqrt();
    let tan = beta / cos;
    let s2 = 0.5 / cos;
    let a_phi = CMat2::new(
        Complex::new(-0.5, -0.5 * tan),
        ONE * -s2,
        ONE * -s2,
        Complex::new(-0.5, 0.5 * tan),
    );
    // A_β = A_θ / cos θ
    let a_beta = CMat2::new(ONE * 0.0, ONE * (s2 / cos), ONE * (-s2 / cos), ONE * 0.0);
    Ok((a_phi, a_beta))
}

/// Closed-form time connection Φ̇A_Φ + β̇A_β.
pub fn connection_closed(state: &ProtocolState) -> Result<CMat2> {
    let (a_phi, a_beta) = parameter_connection_closed(state.beta)?;
    Ok(a_phi.scale(ONE * state.phidot) + a_beta.scale(ONE * state.betadot))
}

fn drive_frames<D: Drive + ?Sized>(drive: &D, t: f64) -> Result<[CVec2; 2]> {
    let f = drive.frame(t, None)?;
    Ok([f.phi1, f.phi2])
}

/// A_mn(t) = i⟨φ_m(t)|(d/dt)φ_n(t)⟩ from a time stencil of step `h`.
///
/// Central differences inside the window, second-order one-sided
/// differences within `h` of either end.
pub fn berry_connection_numeric<D: Drive + ?Sized>(drive: &D, t: f64, h: f64) -> Result<CMat2> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("stencil step must be positive, got {h}")));
    }
    let t_end = drive.duration();
    let f0 = drive.frame(t, None)?;
    let base = [f0.phi1, f0.phi2];
    let deriv = if t - h >= 0.0 && t + h <= t_end {
        let fp = drive_frames(drive, t + h)?;
        let fm = drive_frames(drive, t - h)?;
        check_jump(&base, &fp, h)?;
        check_jump(&base, &fm, h)?;
        central(&fp, &fm, h)
    } else {
        let sign = if t - h < 0.0 { 1.0 } else { -1.0 };
        if 2.0 * h > t_end {
            return Err(Error::StepTooLarge { h });
        }
        let f1 = drive_frames(drive, t + sign * h)?;
        let f2 = drive_frames(drive, t + 2.0 * sign * h)?;
        check_jump(&base, &f1, h)?;
        check_jump(&f1, &f2, h)?;
        let k = Complex::new(sign / (2.0 * h), 0.0);
        let d = |n: usize| (f1[n].scale(ONE * 4.0) - base[n].scale(ONE * 3.0) - f2[n]).scale(k);
        [d(0), d(1)]
    };
    Ok(connection_from(&base, &deriv, &f0.metric()?))
}

/// Closed-form intraband connection A_nn = (−1)ⁿ iγΦ̇/(2√(J²−γ²)) − Φ̇/2.
pub fn intraband_diagonal_closed(gamma: f64, j: f64, phidot: f64, n: usize) -> Result<Complex> {
    assert!(n == 1 || n == 2, "branch index must be 1 or 2, got {n}");
    let d = model::ep_distance(gamma, j);
    if d.abs() < EP_GUARD {
        return Err(Error::EpProximity { one_minus_beta_sq: d });
    }
    if j < gamma {
        return Err(Error::BrokenRegime { gamma, j });
    }
    let e = ((j - gamma) * (j + gamma)).sqrt();
    let sign = if n == 1 { -1.0 } else { 1.0 };
    Ok(Complex::new(-0.5 * phidot, sign * gamma * phidot / (2.0 * e)))
}

/// Per-band quantum geometric tensor in (β, Φ) coordinates, index 0 = β,
/// 1 = Φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qgt {
    pub band: usize,
    /// T_ij = ⟨∂_iφ_n|∂_jφ_n⟩ − conj(A_i^nn) A_j^nn.
    pub tensor: [[Complex; 2]; 2],
    /// Interband metric g_ij = Re Σ_{m≠n} A_i^{nm} A_j^{mn}, unsymmetrized.
    pub metric: [[f64; 2]; 2],
}

fn qgt_with<F>(frames: F, beta: f64, phi: f64, band: usize, h: f64) -> Result<Qgt>
where
    F: Fn(f64, f64) -> Result<[CVec2; 2]> + Copy,
{
    assert!(band == 1 || band == 2, "band index must be 1 or 2, got {band}");
    guard_beta(beta.abs() + h)?;
    let n = band - 1;
    let m = 1 - n;
    let metric_op = cpt_metric(beta, 1.0, phi)?;
    let f0 = frames(beta, phi)?;
    let derivs = [
        central(&frames(beta + h, phi)?, &frames(beta - h, phi)?, h),
        central(&frames(beta, phi + h)?, &frames(beta, phi - h)?, h),
    ];
    let conns = [
        connection_from(&f0, &derivs[0], &metric_op),
        connection_from(&f0, &derivs[1], &metric_op),
    ];
    let mut tensor = [[Complex::new(0.0, 0.0); 2]; 2];
    let mut g = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let dd = cpt_inner(&derivs[i][n], &derivs[j][n], &metric_op);
            tensor[i][j] = dd - conns[i].m[n][n].conj() * conns[j].m[n][n];
            g[i][j] = (conns[i].m[n][m] * conns[j].m[m][n]).re;
        }
    }
    Ok(Qgt { band, tensor, metric: g })
}

/// Numeric QGT and interband metric of band `band` at (β, Φ).
pub fn qgt_numeric(beta: f64, phi: f64, band: usize, h: f64) -> Result<Qgt> {
    qgt_with(unit_frame, beta, phi, band, h)
}

/// Metric components in (β, Φ) with the cross term symmetrized.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MetricComponents {
    pub phiphi: f64,
    pub betabeta: f64,
    /// (g_βΦ + g_Φβ)/2.
    pub betaphi: f64,
}

impl MetricComponents {
    pub fn from_qgt(q: &Qgt) -> Self {
        Self {
            phiphi: q.metric[1][1],
            betabeta: q.metric[0][0],
            betaphi: 0.5 * (q.metric[0][1] + q.metric[1][0]),
        }
    }

    /// Closed form: g_ΦΦ = ξ², g_ββ = −4ξ⁴, symmetrized cross term 0.
    pub fn closed(beta: f64) -> Result<Self> {
        let xi = amplification_factor(beta)?;
        let xi2 = xi * xi;
        Ok(Self { phiphi: xi2, betabeta: -4.0 * xi2 * xi2, betaphi: 0.0 })
    }

    /// Mixed pullback g_ΦΦζ + 2g_βΦ + g_ββ/ζ of the metric onto the path.
    pub fn pullback(&self, zeta: f64) -> Result<f64> {
        if zeta == 0.0 {
            return Err(Error::ZeroZeta);
        }
        Ok(self.phiphi * zeta + 2.0 * self.betaphi + self.betabeta / zeta)
    }
}

/// Effective metric g(β, ζ) rebuilt from numeric components: the pullback divided by ξ.
pub fn metric_from_components(beta: f64, zeta: f64, comps: &MetricComponents) -> Result<f64> {
    Ok(comps.pullback(zeta)? / amplification_factor(beta)?)
}

/// g = ζ/(2√(1−β²)) − 1/(2(1−β²)^{3/2}ζ).
pub fn quantum_metric_closed(beta: f64, zeta: f64) -> Result<f64> {
    let d = guard_beta(beta)?;
    if zeta == 0.0 {
        return Err(Error::ZeroZeta);
    }
    let r = d.sqrt();
    Ok(zeta / (2.0 * r) - 1.0 / (2.0 * d * r * zeta))
}

/// ξ = 1/(2√(1−β²)).
pub fn amplification_factor(beta: f64) -> Result<f64> {
    let d = guard_beta(beta)?;
    Ok(0.5 / d.sqrt())
}

/// Eigenvalues of M = i(A − H^CPT) at one instant.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LtiEigenvalues {
    /// Branch-1 eigenvalue (Im ≈ −E).
    pub lambda_plus: Complex,
    /// Branch-2 eigenvalue (Im ≈ +E).
    pub lambda_minus: Complex,
    /// ±γ(J²−γ²)Φ̇/√(4(J²−γ²)³ − γ²J̇²); `None` when the radicand is not
    /// positive.
    pub re_formula: Option<f64>,
    /// Exact Re λ₊ = Im√(E² − γ²J̇²/(4E⁴) + Φ̇²/4 + iγΦ̇).
    pub re_exact: f64,
}

/// Numeric eigenvalues of M with the connection built from fourth-order
/// numeric parameter derivatives (step `h`), plus the closed forms.
pub fn lti_eigenvalues(gamma: f64, j: f64, jdot: f64, phidot: f64, h: f64) -> Result<LtiEigenvalues> {
    let frame = eigensystem(gamma, j, 0.0, None)?;
    if frame.regime != model::Regime::Symmetric {
        return Err(Error::BrokenRegime { gamma, j });
    }
    let beta = gamma / j;
    let betadot = -gamma * jdot / (j * j);
    let a_phi = parameter_connection_fourth(beta, 0.0, Param::Phi, h)?;
    let a = if betadot != 0.0 {
        a_phi.scale(ONE * phidot) + parameter_connection_fourth(beta, 0.0, Param::Beta, h)?.scale(ONE * betadot)
    } else {
        a_phi.scale(ONE * phidot)
    };
    let m = (a - CMat2::diag(frame.e_plus, frame.e_minus)).scale(I);
    let eig = eig2(&m);
    let (lp, lm) = if eig.values[0].im <= eig.values[1].im {
        (eig.values[0], eig.values[1])
    } else {
        (eig.values[1], eig.values[0])
    };
    let e2 = (j - gamma) * (j + gamma);
    let radicand = 4.0 * e2 * e2 * e2 - gamma * gamma * jdot * jdot;
    let re_formula = (radicand > 0.0).then(|| gamma * e2 * phidot / radicand.sqrt());
    let x = e2 - gamma * gamma * jdot * jdot / (4.0 * e2 * e2) + 0.25 * phidot * phidot;
    let re_exact = Complex::new(x, gamma * phidot).sqrt().im;
    Ok(LtiEigenvalues { lambda_plus: lp, lambda_minus: lm, re_formula, re_exact })
}

/// ζ = Φ̇/β̇, which is infinite wherever β̇ vanishes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum Zeta {
    Finite(f64),
    Infinite { positive: bool },
    /// Φ̇ = β̇ = 0.
    Undefined,
}

impl Zeta {
    pub fn from_rates(phidot: f64, betadot: f64) -> Self {
        if betadot != 0.0 {
            Zeta::Finite(phidot / betadot)
        } else if phidot != 0.0 {
            // β̇ may be −0.0; the sign comes from Φ̇ times the sign bit of β̇
            Zeta::Infinite { positive: (phidot > 0.0) != betadot.is_sign_negative() }
        } else {
            Zeta::Undefined
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Zeta::Finite(z) => Some(z),
            _ => None,
        }
    }
}

/// Geometric diagnostics at one time of a protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySample {
    pub t: f64,
    pub beta: f64,
    /// Numeric time connection.
    pub conn: CMat2,
    pub zeta: Zeta,
    pub xi: f64,
    /// Closed-form effective metric at (β, ζ); `None` where ζ is not finite.
    pub g_closed: Option<f64>,
    /// Effective metric rebuilt from the numeric components; `None` where ζ is not
    /// finite.
    pub g_numeric: Option<f64>,
    pub metric: MetricComponents,
    pub lambda_re_plus: f64,
    pub lambda_re_minus: f64,
}

/// One grid point of a scan: a sample or the reason it was skipped.
#[derive(Debug, Clone, PartialEq)]
pub enum ScanPoint {
    Sample(GeometrySample),
    Skipped { t: f64, reason: Error },
}

/// Stencil steps for the geometry scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencils {
    /// Time step, s.
    pub time: f64,
    /// Parameter step for β and Φ.
    pub param: f64,
}

impl Stencils {
    /// 1e−4 of the characteristic scale: T for time, 1 for β and Φ.
    pub fn for_duration(t_total: f64) -> Self {
        Self { time: 1e-4 * t_total, param: 1e-4 }
    }
}

pub fn geometry_sample<D: Drive + ?Sized>(drive: &D, t: f64, st: Stencils) -> Result<GeometrySample> {
    let s = drive.state(t)?;
    let gamma = drive.gamma();
    let conn = berry_connection_numeric(drive, t, st.time)?;
    let xi = amplification_factor(s.beta)?;
    let metric = MetricComponents::from_qgt(&qgt_numeric(s.beta, s.phi, 1, st.param)?);
    let zeta = Zeta::from_rates(s.phidot, s.betadot);
    let (g_closed, g_numeric) = match zeta.finite() {
        Some(z) => (Some(quantum_metric_closed(s.beta, z)?), Some(metric_from_components(s.beta, z, &metric)?)),
        None => (None, None),
    };
    let lti = lti_eigenvalues(gamma, s.j, s.jdot, s.phidot, st.param)?;
    Ok(GeometrySample {
        t,
        beta: s.beta,
        conn,
        zeta,
        xi,
        g_closed,
        g_numeric,
        metric,
        lambda_re_plus: lti.lambda_plus.re,
        lambda_re_minus: lti.lambda_minus.re,
    })
}

/// Evaluate [`geometry_sample`] over a grid in parallel, keeping grid order.
/// Failing points become [`ScanPoint::Skipped`].
pub fn geometry_scan<D: Drive + ?Sized>(drive: &D, t_grid: &[f64], st: Stencils) -> Vec<ScanPoint> {
    t_grid
        .par_iter()
        .map(|&t| match geometry_sample(drive, t, st) {
            Ok(s) => ScanPoint::Sample(s),
            Err(reason) => ScanPoint::Skipped { t, reason },
        })
        .collect()
}
