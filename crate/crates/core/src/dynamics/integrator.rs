//! Steppers for a two-component complex linear ODE y' = f(t, y).

use crate::error::{Error, Result};
use crate::linalg::{expm2, CMat2, CVec2, Complex};

use super::IntegratorConfig;

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

fn reals(v: &CVec2) -> [f64; 4] {
    [v.c0.re, v.c0.im, v.c1.re, v.c1.im]
}

fn axpy(y: &CVec2, h: f64, terms: &[(f64, &CVec2)]) -> CVec2 {
    let mut out = *y;
    for &(w, k) in terms {
        if w != 0.0 {
            let s = Complex::new(h * w, 0.0);
            out = out + k.scale(s);
        }
    }
    out
}

fn scaled_rms(err: &CVec2, y0: &CVec2, y1: &CVec2, cfg: &IntegratorConfig) -> f64 {
    let (e, a, b) = (reals(err), reals(y0), reals(y1));
    let sum: f64 = (0..4)
        .map(|i| {
            let sc = cfg.atol + cfg.rtol * a[i].abs().max(b[i].abs());
            (e[i] / sc).powi(2)
        })
        .sum();
    (sum / 4.0).sqrt()
}

/// Adaptive Dormand–Prince integration from `t0` to `t1`.
///
/// `f` receives the current trial step as its third argument so that
/// right-hand sides built on finite differences can size their stencils.
/// `on_step(k, t, y)` is called for the initial point (k = 0) and after every
/// accepted step; the final call always has `t == t1`.
pub fn dormand_prince<F, R>(mut f: F, t0: f64, t1: f64, y0: CVec2, cfg: &IntegratorConfig, mut on_step: R) -> Result<CVec2>
where
    F: FnMut(f64, &CVec2, f64) -> Result<CVec2>,
    R: FnMut(usize, f64, &CVec2) -> Result<()>,
{
    let span = t1 - t0;
    if !(span > 0.0) {
        return Err(Error::InvalidParameter(format!("integration span must be positive, got {span}")));
    }
    let mut t = t0;
    let mut y = y0;
    on_step(0, t, &y)?;

    let mut h = cfg.max_step.min(span);
    let mut k1 = f(t, &y, h)?;
    {
        // step-size guess from the scale of y and y'
        let d0 = scaled_rms(&y, &y, &y, cfg);
        let d1 = scaled_rms(&k1, &y, &y, cfg);
        if d0 > 1e-5 && d1 > 1e-5 {
            h = h.min(0.01 * d0 / d1);
        }
        h = h.max(cfg.min_step);
    }

    let mut step = 0usize;
    let mut rejected_last = false;
    loop {
        let last = t + h >= t1 - 1e-12 * span;
        let h_try = if last { t1 - t } else { h };

        let mut k = [k1; 7];
        for s in 1..7 {
            let terms: Vec<(f64, &CVec2)> = (0..s).map(|j| (A[s][j], &k[j])).collect();
            let ys = axpy(&y, h_try, &terms);
            let ts = if s == 6 { t + h_try } else { t + C[s] * h_try };
            k[s] = f(ts, &ys, h_try)?;
        }
        let y_new = axpy(&y, h_try, &(0..6).map(|j| (A[6][j], &k[j])).collect::<Vec<_>>());
        let err_vec = axpy(&CVec2::zero(), h_try, &(0..7).map(|j| (E[j], &k[j])).collect::<Vec<_>>());
        let err = scaled_rms(&err_vec, &y, &y_new, cfg);
        if !err.is_finite() || !y_new.is_finite() {
            return Err(Error::StepUnderflow { t, step: h_try });
        }

        if err <= 1.0 {
            t = if last { t1 } else { t + h_try };
            y = y_new;
            k1 = k[6];
            step += 1;
            on_step(step, t, &y)?;
            if last {
                return Ok(y);
            }
            let mut fac = if err == 0.0 { FAC_MAX } else { SAFETY * err.powf(-0.2) };
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected_last {
                fac = fac.min(1.0);
            }
            h = (h_try * fac).min(cfg.max_step);
            rejected_last = false;
        } else {
            let fac = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
            h = h_try * fac;
            rejected_last = true;
        }
        if h < cfg.min_step {
            return Err(Error::StepUnderflow { t, step: h });
        }
    }
}

/// Fixed-step propagation y_{k+1} = exp(G(t_k + dt/2)·dt) y_k.
///
/// `generator(t, dt)` returns G at the midpoint; `on_step` is called as for
/// [`dormand_prince`].
pub fn piecewise_exponential<G, R>(mut generator: G, t0: f64, t1: f64, y0: CVec2, steps: usize, mut on_step: R) -> Result<CVec2>
where
    G: FnMut(f64, f64) -> Result<CMat2>,
    R: FnMut(usize, f64, &CVec2) -> Result<()>,
{
    if steps == 0 {
        return Err(Error::InvalidParameter("piecewise-exponential stepping needs at least one step".into()));
    }
    let dt = (t1 - t0) / steps as f64;
    let mut y = y0;
    on_step(0, t0, &y)?;
    for k in 0..steps {
        let t_mid = t0 + (k as f64 + 0.5) * dt;
        let g = generator(t_mid, dt)?;
        y = expm2(&g.scale(Complex::new(dt, 0.0))).apply(&y);
        let t = if k + 1 == steps { t1 } else { t0 + (k + 1) as f64 * dt };
        on_step(k + 1, t, &y)?;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{I, ONE};
    use approx::assert_relative_eq;

    fn cfg() -> IntegratorConfig {
        IntegratorConfig { max_step: 0.1, min_step: 1e-12, ..IntegratorConfig::for_duration(1.0) }
    }

    #[test]
    fn rotation_matches_exact() {
        // y' = −iσ_x y from (1, 0): (cos t, −i sin t)
        let sx = CMat2::sigma_x();
        let y = dormand_prince(|_, y, _| Ok(sx.apply(y).scale(-I)), 0.0, 3.0, CVec2::real(1.0, 0.0), &cfg(), |_, _, _| Ok(()))
            .unwrap();
        assert_relative_eq!(y.c0.re, 3f64.cos(), epsilon = 1e-9);
        assert_relative_eq!(y.c1.im, -(3f64.sin()), epsilon = 1e-9);
    }

    #[test]
    fn growth_and_decay() {
        let g = CMat2::diag(ONE * 0.7, ONE * -1.3);
        let y = dormand_prince(|_, y, _| Ok(g.apply(y)), 0.0, 2.0, CVec2::real(1.0, 1.0), &cfg(), |_, _, _| Ok(()))
            .unwrap();
        assert_relative_eq!(y.c0.re, 1.4f64.exp(), max_relative = 1e-9);
        assert_relative_eq!(y.c1.re, (-2.6f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn callback_sees_both_ends() {
        let mut seen = Vec::new();
        dormand_prince(|_, y, _| Ok(*y), 0.25, 1.0, CVec2::real(1.0, 0.0), &cfg(), |k, t, _| {
            seen.push((k, t));
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.first(), Some(&(0, 0.25)));
        assert_eq!(seen.last().unwrap().1, 1.0);
        assert!(seen.windows(2).all(|w| w[1].1 > w[0].1 && w[1].0 == w[0].0 + 1));
    }

    #[test]
    fn underflow_is_reported() {
        let c = IntegratorConfig { min_step: 1e-3, ..cfg() };
        // blows up at t = 1
        let r = dormand_prince(
            |t, y, _| Ok(y.scale(Complex::new(10.0 / (1.0 - t).max(1e-300), 0.0))),
            0.0,
            1.0,
            CVec2::real(1.0, 0.0),
            &c,
            |_, _, _| Ok(()),
        );
        assert!(matches!(r, Err(Error::StepUnderflow { t, .. }) if t > 0.5 && t < 1.0));
    }

    #[test]
    fn exponential_stepping_is_second_order() {
        // time-dependent generator −i t σ_x has solution phase ∫t = t²/2
        let sx = CMat2::sigma_x();
        let run = |n| {
            piecewise_exponential(|t, _| Ok(sx.scale(-I * t)), 0.0, 2.0, CVec2::real(1.0, 0.0), n, |_, _, _| Ok(()))
                .unwrap()
        };
        let exact = 2f64.cos();
        let (e1, e2) = ((run(100).c0.re - exact).abs(), (run(200).c0.re - exact).abs());
        // commuting generators make the midpoint rule exact here
        assert!(e1 < 1e-13 && e2 < 1e-13);

        let g = |t: f64| CMat2::new(ONE * 0.0, ONE * t, ONE * 1.0, I * 0.5);
        let reference = dormand_prince(
            |t, y, _| Ok(g(t).apply(y)),
            0.0,
            1.0,
            CVec2::real(1.0, 0.0),
            &IntegratorConfig { rtol: 1e-12, atol: 1e-14, ..cfg() },
            |_, _, _| Ok(()),
        )
        .unwrap();
        let err = |n| (piecewise_exponential(|t, _| Ok(g(t)), 0.0, 1.0, CVec2::real(1.0, 0.0), n, |_, _, _| Ok(())).unwrap() - reference).norm();
        assert_relative_eq!(err(50) / err(100), 4.0, max_relative = 0.05);
    }
}
