//! Classical Fisher information of the P_z readout over a detuning grid.

use crate::error::{Error, Result};

/// Denominator of each Fisher contribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CfiVariant {
    /// (dP/dθ)² / P
    Population,
    /// (dP/dθ)² / (P(1 − P)), the full Bernoulli information.
    Binomial,
}

pub const DEFAULT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CfiReport {
    pub theta_grid: Vec<f64>,
    pub p_z: Vec<f64>,
    pub dpz_dtheta: Vec<f64>,
    pub contributions: Vec<f64>,
    #[serde(rename = "I")]
    pub i: f64,
    /// Points whose denominator was raised to the floor.
    pub floor_hits: usize,
    pub floor: f64,
    pub variant: CfiVariant,
}

/// dy/dx with second-order differences on a possibly non-uniform grid,
/// one-sided second-order stencils at both ends.
pub fn gradient(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 3 {
        return Err(Error::GridTooSmall { len: n });
    }
    assert_eq!(n, y.len(), "grid and values differ in length");
    if let Some(i) = (1..n).find(|&i| !(x[i] > x[i - 1])) {
        return Err(Error::UnsortedGrid { index: i });
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (hs, hd) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        d[i] = (hs * hs * y[i + 1] + (hd * hd - hs * hs) * y[i] - hd * hd * y[i - 1]) / (hs * hd * (hd + hs));
    }
    let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
    d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * y[0] + (h1 + h2) / (h1 * h2) * y[1] - h1 / (h2 * (h1 + h2)) * y[2];
    let (h1, h2) = (x[n - 2] - x[n - 3], x[n - 1] - x[n - 2]);
    d[n - 1] = h2 / (h1 * (h1 + h2)) * y[n - 3] - (h1 + h2) / (h1 * h2) * y[n - 2] + (2.0 * h2 + h1) / (h2 * (h1 + h2)) * y[n - 1];
    Ok(d)
}

/// I(θ) = (1/N) Σ (dP/dθ_j)² / max(P_j, floor).
pub fn cfi(theta: &[f64], p_z: &[f64], floor: f64) -> Result<CfiReport> {
    cfi_with(theta, p_z, floor, CfiVariant::Population)
}

pub fn cfi_with(theta: &[f64], p_z: &[f64], floor: f64, variant: CfiVariant) -> Result<CfiReport> {
    if theta.len() != p_z.len() {
        return Err(Error::InvalidParameter(format!(
            "theta grid has {} points but p_z has {}",
            theta.len(),
            p_z.len()
        )));
    }
    let d = gradient(theta, p_z)?;
    let mut floor_hits = 0;
    let contributions: Vec<f64> = d
        .iter()
        .zip(p_z)
        .map(|(dp, &p)| {
            let denom = match variant {
                CfiVariant::Population => p,
                CfiVariant::Binomial => p * (1.0 - p),
            };
            if denom < floor {
                floor_hits += 1;
            }
            dp * dp / denom.max(floor)
        })
        .collect();
    let i = contributions.iter().sum::<f64>() / contributions.len() as f64;
    Ok(CfiReport {
        theta_grid: theta.to_vec(),
        p_z: p_z.to_vec(),
        dpz_dtheta: d,
        contributions,
        i,
        floor_hits,
        floor,
        variant,
    })
}

/// I_β / I_0, or `Infinite` when the reference vanishes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum Ratio {
    Finite(f64),
    Infinite,
}

impl Ratio {
    pub fn value(&self) -> f64 {
        match *self {
            Ratio::Finite(r) => r,
            Ratio::Infinite => f64::INFINITY,
        }
    }
}

/// A reference at or below machine epsilon of the numerator counts as zero.
pub fn amplification_ratio(i_beta: f64, i_zero: f64) -> Ratio {
    if !(i_zero > f64::EPSILON * i_beta.abs()) || i_zero <= 0.0 {
        Ratio::Infinite
    } else {
        Ratio::Finite(i_beta / i_zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn uniform(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn constant_signal_has_no_information() {
        let th = uniform(11, -1.0, 1.0);
        let r = cfi(&th, &[0.5; 11], DEFAULT_FLOOR).unwrap();
        assert!(r.i < 1e-28);
        assert_eq!(r.floor_hits, 0);
    }

    #[test]
    fn linear_signal() {
        let th = uniform(21, -0.1, 0.1);
        let p: Vec<f64> = th.iter().map(|t| 0.5 + 0.1 * t).collect();
        let r = cfi(&th, &p, DEFAULT_FLOOR).unwrap();
        for d in &r.dpz_dtheta {
            assert_relative_eq!(*d, 0.1, max_relative = 1e-10);
        }
        assert_relative_eq!(r.i, 0.02, max_relative = 1e-3);
    }

    #[test]
    fn quadratic_is_differentiated_exactly() {
        let th = [0.0, 0.3, 0.5, 1.1, 1.2, 2.0];
        let p: Vec<f64> = th.iter().map(|t| 0.2 + 0.1 * t - 0.05 * t * t).collect();
        let d = gradient(&th, &p).unwrap();
        for (t, d) in th.iter().zip(&d) {
            assert_relative_eq!(*d, 0.1 - 0.1 * t, epsilon = 1e-14);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(cfi(&[0.0, 1.0], &[0.1, 0.2], 1e-6), Err(Error::GridTooSmall { len: 2 })));
        assert!(matches!(cfi(&[0.0, 2.0, 1.0], &[0.1, 0.2, 0.3], 1e-6), Err(Error::UnsortedGrid { index: 2 })));
    }

    #[test]
    fn floor_accounting() {
        let th = uniform(5, 0.0, 1.0);
        let p = [0.0, 1e-7, 0.5, 0.6, 0.7];
        let r = cfi(&th, &p, 1e-6).unwrap();
        assert_eq!(r.floor_hits, 2);
        assert!(r.i.is_finite());
        let b = cfi_with(&th, &[0.2, 0.3, 0.5, 0.9, 1.0], 1e-6, CfiVariant::Binomial).unwrap();
        assert_eq!(b.floor_hits, 1);
    }

    #[test]
    fn ratios() {
        assert_eq!(amplification_ratio(2.0, 1.0), Ratio::Finite(2.0));
        assert_eq!(amplification_ratio(0.3, 0.3), Ratio::Finite(1.0));
        assert_eq!(amplification_ratio(1.0, 0.0), Ratio::Infinite);
        assert_eq!(amplification_ratio(1.0, 1e-20), Ratio::Infinite);
    }

    proptest! {
        #[test]
        fn mean_of_nonnegative_contributions(p in proptest::collection::vec(0.0..1.0f64, 3..40)) {
            let th = uniform(p.len(), -2.0, 3.0);
            let r = cfi(&th, &p, DEFAULT_FLOOR).unwrap();
            prop_assert!(r.contributions.iter().all(|c| *c >= 0.0));
            let mean = r.contributions.iter().sum::<f64>() / r.contributions.len() as f64;
            prop_assert_eq!(r.i, mean);
            prop_assert!(r.i >= 0.0);
        }
    }
}
