use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ptsense::analysis::config::{parse_beta_list, parse_initial};
use ptsense::analysis::{self, io, ConfigFile, DeltaRange, Overrides, Settings, SignChoice, SweepSpec};
use ptsense::dynamics::{evolve_lab, prepare_initial, InitialState};
use ptsense::geometry::{geometry_scan, ScanPoint, Stencils};
use ptsense::model::convention_report;
use ptsense::protocol::{criticality_check, max_adiabaticity, CriticalityThresholds, Drive, SystemParams};

/// Sensing simulations with a PT-symmetric qubit.
#[derive(Parser)]
#[command(name = "ptsense", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Flat TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Worker threads for grid runs.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Comma-separated β_p values.
    #[arg(long = "beta-p", global = true, value_name = "LIST", allow_hyphen_values = true)]
    beta_p: Option<String>,
    /// Detuning grid LO:HI:N in kHz.
    #[arg(long = "delta-range", global = true, value_name = "LO:HI:N", allow_hyphen_values = true)]
    delta_range: Option<String>,
    /// Initial eigenstate, phi1 or phi2.
    #[arg(long, global = true, value_name = "STATE")]
    init: Option<String>,
    /// Sign of Δ: +, - or both.
    #[arg(long, global = true, value_name = "SIGN", allow_hyphen_values = true)]
    sign: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// One trajectory to trajectory.csv.
    Simulate,
    /// β_p × Δ grid to sweep.csv.
    Sweep,
    /// Geometry along the protocol to geometry.csv.
    Geometry,
    /// Fisher information of one β_p row to cfi.json.
    Cfi,
    /// ±Δ asymmetry tables to chirality.csv.
    Chirality,
    /// Forward then reversed protocol in both orders to roundtrip.json.
    Roundtrip,
    /// Hermitian and β_p = 0.75 sweeps with their CFI ratio.
    Figure2,
    /// Amplification ratio against β_p for both signs of Δ.
    Figure3,
    /// Echo the configuration and run pre-flight checks.
    Validate,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<ptsense::Error> for Failure {
    fn from(e: ptsense::Error) -> Self {
        if e.is_input_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn settings(c: &Common) -> Result<Settings, ptsense::Error> {
    let file = match &c.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let over = Overrides {
        beta_p: c.beta_p.as_deref().map(parse_beta_list).transpose()?,
        delta_range: c.delta_range.as_deref().map(str::parse::<DeltaRange>).transpose()?,
        init: c.init.as_deref().map(parse_initial).transpose()?,
        sign: c.sign.as_deref().map(str::parse::<SignChoice>).transpose()?,
        workers: c.workers,
    };
    Settings::resolve(file, over)
}

fn write(dir: &Path, name: &str, contents: &str) -> Outcome {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn spec(s: &Settings, betas: Vec<f64>, deltas: Vec<f64>) -> Result<SweepSpec, ptsense::Error> {
    Ok(SweepSpec {
        beta_p_values: betas,
        delta_values: deltas,
        init_state: s.init,
        integrator: s.integrator(),
        protocol: s.protocol()?,
    })
}

fn single_system(s: &Settings) -> Result<SystemParams, ptsense::Error> {
    SystemParams::with_pin_beta(s.single_beta()?, s.protocol()?, s.single_delta())
}

fn simulate(s: &Settings, out: &Path) -> Outcome {
    let sys = single_system(s)?;
    let traj = evolve_lab(&sys, prepare_initial(s.init, &sys.frame(0.0, None)?), &s.integrator())?;
    let (b1, b2) = traj.final_branch_populations()?;
    println!("p_z(T) = {:.10}  branch populations = ({b1:.10}, {b2:.10})", traj.final_p_z());
    write(out, "trajectory.csv", &io::trajectory_csv(&traj)?)
}

fn sweep(s: &Settings, out: &Path) -> Outcome {
    let r = analysis::sweep(&spec(s, s.beta_p.clone(), s.delta_values())?)?;
    if r.failures() > 0 {
        eprintln!("warning: {} of {} grid points failed; see the status column", r.failures(), r.cells.len());
    }
    write(out, "sweep.csv", &io::sweep_csv(&[&r]))
}

fn geometry(s: &Settings, out: &Path) -> Outcome {
    let sys = single_system(s)?;
    let grid = sys.protocol.time_grid(s.geometry_points);
    let scan = geometry_scan(&sys, &grid, Stencils::for_duration(sys.duration()));
    let skipped = scan.iter().filter(|p| matches!(p, ScanPoint::Skipped { .. })).count();
    if skipped > 0 {
        eprintln!("warning: {skipped} geometry points skipped");
    }
    write(out, "geometry.csv", &io::geometry_csv(&scan))
}

fn cfi(s: &Settings, out: &Path) -> Outcome {
    let beta = s.single_beta()?;
    let betas = if beta == 0.0 { vec![0.0] } else { vec![0.0, beta] };
    let r = analysis::sweep(&spec(s, betas, s.delta_values())?)?;
    let reports = analysis::presets::row_cfi(&r, s.cfi_floor, s.cfi_variant)?;
    let (reference, report) = (&reports[0], reports.last().expect("at least one row"));
    println!("I = {:.10e}  I_0 = {:.10e}  floor hits = {}", report.i, reference.i, report.floor_hits);
    write(out, "cfi.json", &io::cfi_json(beta, report, Some(reference), s.echo()))
}

fn chirality(s: &Settings, out: &Path) -> Outcome {
    let sp = spec(s, s.beta_p.clone(), s.delta_range.values())?;
    let report = analysis::chirality_report(&sp, &[InitialState::Phi2, InitialState::Phi1])?;
    for t in &report.tables {
        for b in &s.beta_p {
            println!(
                "{:?} beta_p = {b}: max p_z asymmetry {:.6}, max transfer asymmetry {:.6}, favored sign {:+}",
                t.init,
                t.max_asymmetry(*b),
                t.max_transfer_asymmetry(*b),
                t.favored_sign(*b)
            );
        }
    }
    write(out, "chirality.csv", &io::chirality_csv(&report))
}

fn roundtrip(s: &Settings, out: &Path) -> Outcome {
    let protocol = s.protocol()?;
    let mut reports = Vec::new();
    for &b in &s.beta_p {
        let sys = SystemParams::with_pin_beta(b, protocol, s.single_delta())?;
        let r = analysis::nonreciprocity_roundtrip(&sys, s.init, &s.integrator())?;
        let (a, c) = r.restoration();
        println!("beta_p = {b}: restoration +first {a:.10}, -first {c:.10}");
        reports.push(r);
    }
    write(out, "roundtrip.json", &io::roundtrip_json(&reports, s.echo()))
}

fn figure2(s: &Settings, out: &Path) -> Outcome {
    let f = analysis::figure2(&s.preset_options()?)?;
    println!("I_0.75 / I_0 = {:.10}", f.ratio.value());
    let ratios: Vec<_> = f.cfi.iter().map(|r| analysis::amplification_ratio(r.i, f.cfi[0].i)).collect();
    write(out, "sweep.csv", &io::sweep_csv(&[&f.sweep]))?;
    write(out, "figure2_cfi.csv", &io::cfi_summary_csv(&f.sweep.beta_p_values, &f.cfi, &ratios))
}

fn figure3(s: &Settings, out: &Path) -> Outcome {
    let opts = s.preset_options()?;
    let f = analysis::figure3_with(&opts, &analysis::presets::FIGURE3_BETAS, &s.sign.signs())?;
    for r in &f.table {
        println!("beta_p = {:<5} sign {}  ratio {:.6}", r.beta_p, r.sign.symbol(), r.ratio.value());
    }
    let sweeps: Vec<_> = f.sweeps.iter().map(|(_, r)| r).collect();
    write(out, "sweep.csv", &io::sweep_csv(&sweeps))?;
    write(out, "amplification.csv", &io::amplification_csv(&f.table))
}

fn validate(s: &Settings) -> Outcome {
    let p = s.protocol()?;
    println!("J_p = {} x 2pi kHz", s.j_pin_khz);
    println!("J_l = {} x 2pi kHz", s.j_tail_khz);
    println!("T = {} us", s.t_total_us);
    println!("config = {:#}", s.echo());
    let c = convention_report();
    println!(
        "inner product: {:?} (residual {:.3e}; bilinear {:.3e}; flipped phase {:.3e})",
        c.adopted, c.conjugated_residual, c.bilinear_residual, c.flipped_phase_residual
    );
    println!("population readout: {}", c.population_readout);
    for &b in &s.beta_p {
        let sys = SystemParams::with_pin_beta(b, p, s.single_delta())?;
        let cr = criticality_check(sys.gamma, &p, CriticalityThresholds::default());
        let (adiab, _) = max_adiabaticity(&p, s.single_delta())?;
        println!(
            "beta_p = {b}: 1 - beta^2 at pin {:.6e}, near EP {}, stationary pin {}, max adiabaticity {adiab:.6}",
            cr.one_minus_beta_sq, cr.near_ep, cr.stationary_pin
        );
        sys.frame(0.0, None)?;
    }
    if c.conjugated_residual > 1e-10 {
        return Err(Failure::Numerical(format!("CPT orthonormality residual {:.3e}", c.conjugated_residual)));
    }
    println!("ok");
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let s = settings(&cli.common)?;
    let out = cli.common.out.as_path();
    if !matches!(cli.command, Command::Validate) {
        fs::create_dir_all(out).map_err(|e| Failure::Config(format!("cannot create {}: {e}", out.display())))?;
    }
    let command = cli.command;
    let job = || match command {
        Command::Simulate => simulate(&s, out),
        Command::Sweep => sweep(&s, out),
        Command::Geometry => geometry(&s, out),
        Command::Cfi => cfi(&s, out),
        Command::Chirality => chirality(&s, out),
        Command::Roundtrip => roundtrip(&s, out),
        Command::Figure2 => figure2(&s, out),
        Command::Figure3 => figure3(&s, out),
        Command::Validate => validate(&s),
    };
    analysis::with_workers(s.workers, job)?
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(2)
        }
    }
}
