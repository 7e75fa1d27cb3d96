//! The PT-symmetric two-level Hamiltonian, its CPT metric and the
//! gauge-fixed instantaneous eigenframe.
//!
//! Sign convention: the coupling phase Φ enters as
//! `H = iγσ_z + J cosΦ σ_x − J sinΦ σ_y`, i.e. `J e^{+iΦ}` in the upper-right
//! entry. This is the only orientation for which the metric
//! `C = (1/√(J²−γ²)) [[iγe^{−iΦ}, J], [J, −iγe^{iΦ}]]` renders the two
//! eigenstates orthonormal at every Φ; [`convention_report`] reproduces the
//! check. Flipping the sign of Φ is equivalent to flipping the sign of the
//! detuning Δ.

use crate::error::{Error, Result};
use crate::linalg::{eig2, CMat2, CVec2, Complex, I, ONE};

/// Operations dividing by √(J²−γ²) refuse inputs with |1 − β²| below this.
pub const EP_GUARD: f64 = 1e-12;

/// Relative threshold for declaring a vector self-orthogonal under the CPT
/// metric.
pub const SELF_ORTHOGONAL_TOL: f64 = 1e-8;

/// Spectral phase of the Hamiltonian at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Regime {
    /// J > γ: real spectrum ±√(J²−γ²).
    Symmetric,
    /// J ≈ γ within [`EP_GUARD`].
    ExceptionalPoint,
    /// J < γ: imaginary conjugate pair.
    Broken,
}

/// Signed distance to the EP line: 1 − β² for J ≥ γ, and −(1 − 1/β²) on the
/// broken side, so it is bounded by 1 in magnitude.
pub fn ep_distance(gamma: f64, j: f64) -> f64 {
    let big = j.abs().max(gamma.abs());
    if big == 0.0 {
        return 0.0;
    }
    (j - gamma) * (j + gamma) / (big * big)
}

pub fn regime(gamma: f64, j: f64) -> Regime {
    let d = ep_distance(gamma, j);
    if d.abs() < EP_GUARD {
        Regime::ExceptionalPoint
    } else if d > 0.0 {
        Regime::Symmetric
    } else {
        Regime::Broken
    }
}

/// H_PT = iγσ_z + J cosΦ σ_x − J sinΦ σ_y.
pub fn hamiltonian_at(gamma: f64, j: f64, phi: f64) -> CMat2 {
    let g = Complex::new(0.0, gamma);
    let off = Complex::from_polar(j, phi);
    CMat2::new(g, off, off.conj(), -g)
}

/// √(J² − γ²) after checking the Symmetric regime and the EP guard.
fn symmetric_gap(gamma: f64, j: f64) -> Result<f64> {
    if j <= gamma {
        return Err(Error::BrokenRegime { gamma, j });
    }
    let d = ep_distance(gamma, j);
    if d < EP_GUARD {
        return Err(Error::EpProximity { one_minus_beta_sq: d });
    }
    Ok(((j - gamma) * (j + gamma)).sqrt())
}

/// The time-dependent CPT metric C(t).
pub fn cpt_metric(gamma: f64, j: f64, phi: f64) -> Result<CMat2> {
    let e = symmetric_gap(gamma, j)?;
    let diag = Complex::new(0.0, gamma) * Complex::from_polar(1.0, -phi);
    let m = CMat2::new(diag, ONE * j, ONE * j, diag.conj());
    Ok(m.scale(Complex::new(1.0 / e, 0.0)))
}

/// Gram operator Pᵀ Cᵀ of the CPT product, so that ⟨a|b⟩ = a† G b.
pub fn cpt_gram(metric: &CMat2) -> CMat2 {
    CMat2::sigma_x().transpose() * metric.transpose()
}

/// ⟨a|b⟩^CPT = a† Pᵀ Cᵀ b with P = σ_x. Conjugate-linear in `a`.
pub fn cpt_inner(a: &CVec2, b: &CVec2, metric: &CMat2) -> Complex {
    a.dot(&cpt_gram(metric).apply(b))
}

/// Rescale `v` to unit CPT norm, keeping its direction and phase.
pub fn cpt_normalize(v: &CVec2, metric: &CMat2) -> Result<CVec2> {
    let n = cpt_inner(v, v, metric);
    let scale = v.norm_sqr() * metric.max_abs();
    if n.norm() <= SELF_ORTHOGONAL_TOL * scale || n.re <= 0.0 {
        return Err(Error::SelfOrthogonal { value: n.norm() });
    }
    Ok(v.scale(Complex::new(1.0 / n.re.sqrt(), 0.0)))
}

/// Instantaneous eigen-decomposition of H_PT with a fixed gauge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenFrame {
    pub gamma: f64,
    pub j: f64,
    pub phi: f64,
    pub e_plus: Complex,
    pub e_minus: Complex,
    /// Branch carrying `e_plus`.
    pub phi1: CVec2,
    /// Branch carrying `e_minus`.
    pub phi2: CVec2,
    pub regime: Regime,
}

impl EigenFrame {
    /// The CPT metric at this frame's parameters.
    pub fn metric(&self) -> Result<CMat2> {
        cpt_metric(self.gamma, self.j, self.phi)
    }

    pub fn hamiltonian(&self) -> CMat2 {
        hamiltonian_at(self.gamma, self.j, self.phi)
    }

    pub fn branch(&self, n: usize) -> CVec2 {
        match n {
            1 => self.phi1,
            2 => self.phi2,
            _ => panic!("branch index must be 1 or 2, got {n}"),
        }
    }

    pub fn energy(&self, n: usize) -> Complex {
        match n {
            1 => self.e_plus,
            2 => self.e_minus,
            _ => panic!("branch index must be 1 or 2, got {n}"),
        }
    }
}

fn with_phase(v: CVec2, phase: f64) -> CVec2 {
    v.scale(Complex::from_polar(1.0, phase))
}

/// Eigenframe of H_PT(γ, J, Φ).
///
/// In the Symmetric regime the eigenvectors are CPT-normalized and carry the
/// canonical gauge: with sin θ = γ/J, the second component of φ₁ has phase
/// −θ/2 and that of φ₂ has phase π + θ/2. This reduces to φ₂ = |−⟩_x at
/// γ = Φ = 0 and is the gauge in which the intraband connection takes its
/// closed form (see [`crate::geometry::intraband_diagonal_closed`]). In the
/// Broken regime the vectors are Euclidean-normalized with a real, positive
/// first component.
///
/// With `gauge_ref`, each branch is further rotated by the global phase that
/// maximizes Re⟨φₙ(ref)|φₙ⟩, which keeps frames continuous along a path.
pub fn eigensystem(gamma: f64, j: f64, phi: f64, gauge_ref: Option<&EigenFrame>) -> Result<EigenFrame> {
    if !(gamma.is_finite() && j.is_finite() && phi.is_finite()) {
        return Err(Error::InvalidParameter("non-finite Hamiltonian parameter".into()));
    }
    let reg = regime(gamma, j);
    let h = hamiltonian_at(gamma, j, phi);
    let (e_plus, e_minus, mut phi1, mut phi2) = match reg {
        Regime::ExceptionalPoint => {
            return Err(Error::EpProximity { one_minus_beta_sq: ep_distance(gamma, j) })
        }
        Regime::Symmetric => {
            let e = ((j - gamma) * (j + gamma)).sqrt();
            let eig = eig2(&h);
            let metric = cpt_metric(gamma, j, phi)?;
            let theta = (gamma / j).asin();
            let gauge = |v: CVec2, target: f64| with_phase(v, target - v.c1.arg());
            let v1 = cpt_normalize(&gauge(eig.vectors[0], -0.5 * theta), &metric)?;
            let v2 = cpt_normalize(&gauge(eig.vectors[1], std::f64::consts::PI + 0.5 * theta), &metric)?;
            (ONE * e, ONE * -e, v1, v2)
        }
        Regime::Broken => {
            let e = ((gamma - j) * (gamma + j)).sqrt();
            let eig = eig2(&h);
            let gauge = |v: CVec2| with_phase(v, -v.c0.arg());
            (I * e, I * -e, gauge(eig.vectors[0]), gauge(eig.vectors[1]))
        }
    };
    if let Some(r) = gauge_ref {
        let align = |v: CVec2, rv: &CVec2| {
            let o = rv.dot(&v);
            if o.norm() > 0.0 {
                with_phase(v, -o.arg())
            } else {
                v
            }
        };
        phi1 = align(phi1, &r.phi1);
        phi2 = align(phi2, &r.phi2);
    }
    Ok(EigenFrame { gamma, j, phi, e_plus, e_minus, phi1, phi2, regime: reg })
}

/// Bra-ket form of the CPT product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum InnerProductForm {
    /// a† Pᵀ Cᵀ b
    Conjugated,
    /// aᵀ Pᵀ Cᵀ b
    Bilinear,
}

/// Outcome of the empirical check deciding how the CPT product is read.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConventionReport {
    /// Worst normalized cross overlap with the conjugated product.
    pub conjugated_residual: f64,
    /// Same with the non-conjugated bilinear product.
    pub bilinear_residual: f64,
    /// Conjugated product, but Φ entering H with the opposite sign.
    pub flipped_phase_residual: f64,
    pub adopted: InnerProductForm,
    /// Readout used for P_z under non-unitary evolution.
    pub population_readout: &'static str,
}

fn normalized_cross(form: InnerProductForm, gamma: f64, j: f64, phi: f64, flip: bool) -> f64 {
    let h = hamiltonian_at(gamma, j, if flip { -phi } else { phi });
    let eig = eig2(&h);
    let g = cpt_gram(&cpt_metric(gamma, j, phi).expect("sample points lie in the symmetric regime"));
    let ip = |a: &CVec2, b: &CVec2| match form {
        InnerProductForm::Conjugated => a.dot(&g.apply(b)),
        InnerProductForm::Bilinear => {
            let gb = g.apply(b);
            a.c0 * gb.c0 + a.c1 * gb.c1
        }
    };
    let [a, b] = eig.vectors;
    ip(&a, &b).norm() / (ip(&a, &a).norm() * ip(&b, &b).norm()).sqrt().max(f64::MIN_POSITIVE)
}

/// Check both readings of the CPT bra on a fixed sample of the Symmetric
/// regime and report which one orthonormalizes the eigenstates.
pub fn convention_report() -> ConventionReport {
    let mut worst = [0.0f64; 3];
    for bi in 1..=9 {
        let beta = 0.1 * bi as f64;
        for phi in [0.0, 0.3, 1.1, 2.5, -2.0, 4.0] {
            let r = [
                normalized_cross(InnerProductForm::Conjugated, beta, 1.0, phi, false),
                normalized_cross(InnerProductForm::Bilinear, beta, 1.0, phi, false),
                normalized_cross(InnerProductForm::Conjugated, beta, 1.0, phi, true),
            ];
            for k in 0..3 {
                worst[k] = worst[k].max(r[k]);
            }
        }
    }
    let adopted = if worst[0] <= worst[1] { InnerProductForm::Conjugated } else { InnerProductForm::Bilinear };
    ConventionReport {
        conjugated_residual: worst[0],
        bilinear_residual: worst[1],
        flipped_phase_residual: worst[2],
        adopted,
        population_readout: "post-selected |c1|^2 / (|c0|^2 + |c1|^2)",
    }
}

/// CPT Gram matrix ⟨φ_m|φ_n⟩ of a frame.
pub fn frame_gram(frame: &EigenFrame) -> Result<CMat2> {
    let m = frame.metric()?;
    let b = [frame.phi1, frame.phi2];
    let mut g = CMat2::zero();
    for r in 0..2 {
        for c in 0..2 {
            g.m[r][c] = cpt_inner(&b[r], &b[c], &m);
        }
    }
    Ok(g)
}

/// H^CPT_mn = ⟨φ_m|H φ_n⟩^CPT.
pub fn projected_hamiltonian(frame: &EigenFrame) -> Result<CMat2> {
    let m = frame.metric()?;
    let h = frame.hamiltonian();
    let b = [frame.phi1, frame.phi2];
    let mut out = CMat2::zero();
    for r in 0..2 {
        for c in 0..2 {
            out.m[r][c] = cpt_inner(&b[r], &h.apply(&b[c]), &m);
        }
    }
    Ok(out)
}
