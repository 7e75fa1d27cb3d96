//! Text serialization of results. CSV files open with two `#` lines, column
//! names then units, and write numbers as `{:.16e}` (17 significant digits).

use serde_json::{json, Value};

use crate::dynamics::Trajectory;
use crate::error::Result;
use crate::geometry::{ScanPoint, Zeta};
use crate::units::{to_khz, to_us};

use super::cfi::{CfiReport, Ratio};
use super::chirality::{ChiralityReport, RoundTripReport};
use super::presets::AmplificationRow;
use super::sweep::{CellStatus, SweepResult};

pub const SCHEMA_VERSION: u32 = 1;

/// `nan`, `inf` and `-inf` for non-finite values, `{:.16e}` otherwise.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn header(columns: &[(&str, &str)]) -> String {
    let names: Vec<&str> = columns.iter().map(|c| c.0).collect();
    let units: Vec<&str> = columns.iter().map(|c| c.1).collect();
    format!("# {}\n# {}\n", names.join(","), units.join(","))
}

fn row(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

fn status(s: &CellStatus) -> String {
    match s {
        CellStatus::Ok => "ok".into(),
        // keep the field free of separators
        CellStatus::Failed(m) => format!("failed: {}", m.replace([',', '\n'], ";")),
    }
}

pub fn trajectory_csv(traj: &Trajectory) -> Result<String> {
    let mut out = header(&[
        ("t_us", "us"),
        ("re_c0", "1"),
        ("im_c0", "1"),
        ("re_c1", "1"),
        ("im_c1", "1"),
        ("pop_branch1", "1"),
        ("pop_branch2", "1"),
        ("p_z", "1"),
    ]);
    let pops = traj.branch_populations()?;
    for (k, psi) in traj.psi.iter().enumerate() {
        row(
            &mut out,
            &[
                num(to_us(traj.times[k])),
                num(psi.c0.re),
                num(psi.c0.im),
                num(psi.c1.re),
                num(psi.c1.im),
                num(pops[k].0),
                num(pops[k].1),
                num(traj.p_z[k]),
            ],
        );
    }
    Ok(out)
}

/// Rows from several results are written one after another.
pub fn sweep_csv(results: &[&SweepResult]) -> String {
    let mut out = header(&[
        ("beta_p", "1"),
        ("delta_over_2pi_khz", "kHz"),
        ("p_z_final", "1"),
        ("pop_branch1_final", "1"),
        ("max_adiabaticity", "1"),
        ("status", "-"),
    ]);
    for c in results.iter().flat_map(|r| &r.cells) {
        row(
            &mut out,
            &[
                num(c.beta_p),
                num(to_khz(c.delta)),
                num(c.p_z_final),
                num(c.pop_branch1_final),
                num(c.max_adiabaticity),
                status(&c.status),
            ],
        );
    }
    out
}

fn zeta_field(z: Zeta) -> String {
    match z {
        Zeta::Finite(v) => num(v),
        Zeta::Infinite { positive: true } => "inf".into(),
        Zeta::Infinite { positive: false } => "-inf".into(),
        Zeta::Undefined => "nan".into(),
    }
}

/// Skipped points keep their time and write `nan` elsewhere.
pub fn geometry_csv(scan: &[ScanPoint]) -> String {
    let cols = [
        ("t_us", "us"),
        ("beta", "1"),
        ("zeta", "1"),
        ("xi", "1"),
        ("g_closed", "1"),
        ("g_phiphi", "1"),
        ("g_betabeta", "1"),
        ("g_betaphi", "1"),
        ("im_a11", "rad/s"),
        ("im_a22", "rad/s"),
        ("re_lambda_plus", "rad/s"),
    ];
    let mut out = header(&cols);
    for p in scan {
        match p {
            ScanPoint::Sample(s) => row(
                &mut out,
                &[
                    num(to_us(s.t)),
                    num(s.beta),
                    zeta_field(s.zeta),
                    num(s.xi),
                    num(s.g_closed.unwrap_or(f64::NAN)),
                    num(s.metric.phiphi),
                    num(s.metric.betabeta),
                    num(s.metric.betaphi),
                    num(s.conn.m[0][0].im),
                    num(s.conn.m[1][1].im),
                    num(s.lambda_re_plus),
                ],
            ),
            ScanPoint::Skipped { t, .. } => {
                let mut f = vec![num(to_us(*t))];
                f.resize(cols.len(), "nan".into());
                row(&mut out, &f);
            }
        }
    }
    out
}

pub fn amplification_csv(rows: &[AmplificationRow]) -> String {
    let mut out = header(&[
        ("beta_p", "1"),
        ("sign", "-"),
        ("I", "1/kHz^2"),
        ("I_0", "1/kHz^2"),
        ("ratio", "1"),
        ("floor_hits", "count"),
    ]);
    for r in rows {
        row(
            &mut out,
            &[num(r.beta_p), r.sign.symbol().into(), num(r.i), num(r.i_zero), num(r.ratio.value()), r.floor_hits.to_string()],
        );
    }
    out
}

/// One row per β_p: the CFI of that row and its ratio to the first row.
pub fn cfi_summary_csv(beta_p: &[f64], reports: &[CfiReport], ratios: &[Ratio]) -> String {
    let mut out = header(&[("beta_p", "1"), ("I", "1/kHz^2"), ("ratio", "1"), ("floor_hits", "count")]);
    for ((b, r), q) in beta_p.iter().zip(reports).zip(ratios) {
        row(&mut out, &[num(*b), num(r.i), num(q.value()), r.floor_hits.to_string()]);
    }
    out
}

pub fn chirality_csv(report: &ChiralityReport) -> String {
    let mut out = header(&[
        ("init", "-"),
        ("beta_p", "1"),
        ("delta_abs_over_2pi_khz", "kHz"),
        ("p_z_plus", "1"),
        ("p_z_minus", "1"),
        ("asymmetry", "1"),
        ("transfer_plus", "1"),
        ("transfer_minus", "1"),
        ("transfer_asymmetry", "1"),
    ]);
    for t in &report.tables {
        let init = serde_json::to_value(t.init).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        for r in &t.rows {
            row(
                &mut out,
                &[
                    init.clone(),
                    num(r.beta_p),
                    num(to_khz(r.delta_abs)),
                    num(r.p_z_plus),
                    num(r.p_z_minus),
                    num(r.asymmetry),
                    num(r.transfer_plus),
                    num(r.transfer_minus),
                    num(r.transfer_asymmetry),
                ],
            );
        }
    }
    out
}

fn ratio_json(r: Ratio) -> Value {
    match r {
        Ratio::Finite(v) => json!(v),
        Ratio::Infinite => json!("inf"),
    }
}

/// JSON floats cannot carry non-finite values; those become strings.
fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| if x.is_finite() { json!(x) } else { json!(num(*x)) }).collect())
}

/// The CFI report for `beta_p`, with its ratio to the Hermitian reference.
pub fn cfi_json(beta_p: f64, report: &CfiReport, reference: Option<&CfiReport>, config_echo: Value) -> String {
    let ratio = reference.map(|r| ratio_json(super::cfi::amplification_ratio(report.i, r.i)));
    let v = json!({
        "schema_version": SCHEMA_VERSION,
        "beta_p": beta_p,
        "theta_unit": "kHz (delta/2pi)",
        "theta_grid": floats(&report.theta_grid),
        "p_z": floats(&report.p_z),
        "dpz_dtheta": floats(&report.dpz_dtheta),
        "contributions": floats(&report.contributions),
        "I": report.i,
        "floor_hits": report.floor_hits,
        "floor": report.floor,
        "variant": report.variant,
        "I_0": reference.map(|r| r.i),
        "ratio": ratio,
        "config_echo": config_echo,
    });
    pretty(&v)
}

pub fn roundtrip_json(reports: &[RoundTripReport], config_echo: Value) -> String {
    let legs = |r: &super::chirality::RoundTrip| {
        json!({
            "first_sign": if r.first_sign > 0 { "+" } else { "-" },
            "after_first": [r.after_first.0, r.after_first.1],
            "after_return": [r.after_return.0, r.after_return.1],
        })
    };
    let items: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "beta_p": r.beta_p,
                "delta_abs_over_2pi_khz": to_khz(r.delta_abs),
                "init": r.init,
                "initial": [r.initial.0, r.initial.1],
                "plus_first": legs(&r.plus_first),
                "minus_first": legs(&r.minus_first),
                "restoration": [r.restoration().0, r.restoration().1],
            })
        })
        .collect();
    pretty(&json!({ "schema_version": SCHEMA_VERSION, "round_trips": items, "config_echo": config_echo }))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
