//! Command-line front end. Every subcommand writes structured files and a
//! run manifest listing them.

mod manifest;
mod validate;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::analysis::{
    auto_stability_diagram, compare, dotsize_sweep, extract, misalign_sweep, range_values, stability_diagram,
    transfer_metrics, MeasuredTable, SweepMap, SweepSettings, Window, DEFAULT_GRID,
};
use crate::capsolve::{MaxwellMatrix, SolveMode, SolveOptions};
use crate::charging::{delta_q_along, delta_q_fixed_island, reduce_caps, CompensationMode, Gate, ModelCaps};
use crate::error::{Error, Result};
use crate::geometry::{export_panels, load_device, mesh_device, transform_dots, DeviceSpec, Role, REFERENCE_DEVICE_JSON};
use crate::numfmt::{fmt_sig, json_num};
use crate::units::{from_mv, to_af, to_mv};

pub use manifest::{sha256_hex, RunManifest};

/// Inclusive `min:max:step` range in nm.
#[derive(Debug, Clone, PartialEq)]
pub struct Range(pub Vec<f64>);

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("'{p}' is not a number")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        match nums.as_slice() {
            [v] => Ok(Range(vec![*v])),
            [a, b, c] => range_values(*a, *b, *c).map(Range).map_err(|e| e.to_string()),
            _ => Err(format!("expected min:max:step, got '{s}'")),
        }
    }
}

/// Voltage window `min:max` in mV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span(pub f64, pub f64);

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected min:max, got '{s}'"))?;
        let a: f64 = a.trim().parse().map_err(|_| format!("'{a}' is not a number"))?;
        let b: f64 = b.trim().parse().map_err(|_| format!("'{b}' is not a number"))?;
        if !(a < b) {
            return Err(format!("empty window {s}"));
        }
        Ok(Span(a, b))
    }
}

#[derive(Parser, Debug)]
#[command(name = "dqdcap", version, about = "Capacitance extraction and charge-transfer analysis for double-dot/SET devices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mesh a device and write its Maxwell capacitance matrix.
    Extract(ExtractArgs),
    /// Stability diagram, periodicities and transfer angle.
    Stability(StabilityArgs),
    /// Island charge induced on SET1 by one inter-dot transfer.
    InducedCharge(InducedArgs),
    /// Sweep lateral dot misalignment.
    SweepMisalign(MisalignArgs),
    /// Sweep dot size at perfect alignment.
    SweepDotsize(DotsizeArgs),
    /// Run the built-in oracle checks.
    Validate(ValidateArgs),
    /// Compare SET-gate capacitances against measured values.
    Compare(CompareArgs),
}

#[derive(Args, Debug, Clone)]
struct GeometryArgs {
    /// Device description (JSON); defaults to the built-in reference device.
    #[arg(long)]
    geometry: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolveMode::Accelerated)]
    mode: SolveMode,
    /// Largest panel edge, nm.
    #[arg(long, default_value_t = 10.0)]
    h_max: f64,
    /// Far-field expansion order.
    #[arg(long, default_value_t = SolveOptions::default().order)]
    order: usize,
    #[arg(long, default_value_t = 0.5)]
    mac_ratio: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 32)]
    leaf_size: usize,
    /// Override the device permittivity.
    #[arg(long)]
    epsilon_r: Option<f64>,
    /// Worker threads.
    #[arg(long, env = "DQDCAP_JOBS", default_value_t = default_jobs())]
    jobs: usize,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl SolverArgs {
    fn options(&self, spec: &DeviceSpec) -> SolveOptions {
        SolveOptions {
            mode: self.mode,
            epsilon_r: spec.epsilon_r,
            order: self.order,
            mac_ratio: self.mac_ratio,
            krylov_tol: self.tol,
            leaf_size: self.leaf_size,
            jobs: self.jobs,
            ..SolveOptions::default()
        }
    }
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Dot displacement along x, nm.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    dx: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    dy: f64,
    /// Dot edge length R, nm; defaults to the device's own.
    #[arg(long)]
    radius: Option<f64>,
    /// Also write the panel mesh in FASTCAP generic format.
    #[arg(long)]
    panels: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CapsInput {
    /// Maxwell matrix from `extract`, or a circuit-model JSON keyed by symbol.
    #[arg(long)]
    caps: PathBuf,
    /// Geometry that assigns roles to the matrix conductors.
    #[arg(long)]
    geometry: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CompensationMode::Approximate)]
    compensation: CompensationMode,
}

#[derive(Args, Debug)]
struct StabilityArgs {
    #[command(flatten)]
    input: CapsInput,
    /// Grid points per axis.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    n: usize,
    /// V_SL window `min:max` in mV; automatic when omitted.
    #[arg(long, allow_hyphen_values = true)]
    sl: Option<Span>,
    /// V_SR window `min:max` in mV.
    #[arg(long, allow_hyphen_values = true)]
    sr: Option<Span>,
    /// Output directory for diagram.csv, boundaries.json and metrics.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy)]
enum SweepGate {
    #[value(name = "SL")]
    Sl,
    #[value(name = "SR")]
    Sr,
    #[value(name = "g1")]
    G1,
}

impl From<SweepGate> for Gate {
    fn from(g: SweepGate) -> Gate {
        match g {
            SweepGate::Sl => Gate::SL,
            SweepGate::Sr => Gate::SR,
            SweepGate::G1 => Gate::G1,
        }
    }
}

#[derive(Args, Debug)]
struct InducedArgs {
    #[command(flatten)]
    input: CapsInput,
    /// Gate swept to trace the SET1 transfer pattern.
    #[arg(long, value_enum, default_value_t = SweepGate::G1)]
    gate: SweepGate,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    n: usize,
    #[arg(long, value_enum, default_value_t = CompensationMode::Approximate)]
    compensation: CompensationMode,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MisalignArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Dot x offsets `min:max:step`, nm.
    #[arg(long, default_value = "-90:90:10", allow_hyphen_values = true)]
    dx: Range,
    /// Dot y offsets `min:max:step`, nm.
    #[arg(long, default_value = "-50:50:10", allow_hyphen_values = true)]
    dy: Range,
}

#[derive(Args, Debug)]
struct DotsizeArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Dot edge lengths `min:max:step`, nm.
    #[arg(long, default_value = "10:50:10")]
    radii: Range,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Maxwell matrix from `extract`.
    #[arg(long)]
    caps: PathBuf,
    /// Measured values, see data/set1_measured.json.
    #[arg(long)]
    measured: PathBuf,
    #[arg(long)]
    geometry: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let command: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, RunManifest::new(command)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Usage(_)) { 2 } else { 1 }
        }
    }
}

/// `Ok(false)` means the command ran but a check failed.
fn dispatch(command: Command, mut man: RunManifest) -> Result<bool> {
    match command {
        Command::Extract(a) => {
            let spec = load_geometry(a.geometry.geometry.as_deref(), a.solver.epsilon_r, &mut man)?;
            let r = match a.radius {
                Some(r) => r,
                None => crate::geometry::dot_size(&spec)?,
            };
            let spec = transform_dots(&spec, a.dx, a.dy, r)?;
            let opts = a.solver.options(&spec);
            opts.validate().map_err(usage)?;
            man.solver(&opts, a.solver.h_max);
            if let Some(p) = &a.panels {
                man.write(p, &export_panels(&mesh_device(&spec, a.solver.h_max)?))?;
            }
            let m = extract(&spec, a.solver.h_max, &opts)?;
            man.write(&a.out, &pretty(&m.to_json())?)?;
            println!("{} conductors, asymmetry {}", m.n_cond(), fmt_sig(m.asymmetry));
            finish(man, &a.out)?;
            Ok(true)
        }
        Command::Stability(a) => {
            if a.n < 2 {
                return Err(Error::Usage(format!("--n must be at least 2, got {}", a.n)));
            }
            let caps = load_caps(&a.input, &mut man)?;
            let mode = a.input.compensation;
            let d = match (a.sl, a.sr) {
                (None, None) => auto_stability_diagram(&caps, a.n, mode)?,
                (sl, sr) => {
                    let auto = Span(-200.0, 200.0);
                    let (sl, sr) = (sl.unwrap_or(auto), sr.unwrap_or(auto));
                    let w = Window { sl: (from_mv(sl.0), from_mv(sl.1)), sr: (from_mv(sr.0), from_mv(sr.1)) };
                    stability_diagram(&caps, w, a.n, mode)?
                }
            };
            let metrics = json!({
                "dV_SL_mV": d.dv_sl.map(|v| json_num(to_mv(v))),
                "dV_SR_mV": d.dv_sr.map(|v| json_num(to_mv(v))),
                "theta_deg": d.theta().map(json_num),
                "boundaries": d.boundaries.len(),
                "C_SLd1_aF": json_num(to_af(caps.gate_d1[Gate::SL.index()])),
                "C_SRd2_aF": json_num(to_af(caps.gate_d2[Gate::SR.index()])),
            });
            man.write(&a.out_dir.join("diagram.csv"), &d.grid_csv())?;
            man.write(&a.out_dir.join("boundaries.json"), &pretty(&d.boundaries_json())?)?;
            let metrics_path = a.out_dir.join("metrics.json");
            man.write(&metrics_path, &pretty(&metrics)?)?;
            match (d.dv_sl, d.dv_sr, d.theta()) {
                (Some(sl), Some(sr), Some(t)) => println!(
                    "dV_SL = {} mV, dV_SR = {} mV, theta = {} deg",
                    fmt_sig(to_mv(sl)),
                    fmt_sig(to_mv(sr)),
                    fmt_sig(t)
                ),
                _ => println!("fewer than two degeneracy lines in the window; no periodicity"),
            }
            finish(man, &metrics_path)?;
            Ok(true)
        }
        Command::InducedCharge(a) => {
            let caps = load_caps(&a.input, &mut man)?;
            let gate: Gate = a.gate.into();
            let shift = delta_q_along(&caps, gate)?;
            let oracle = delta_q_fixed_island(&caps)?;
            let report = json!({
                "gate": gate.symbol(),
                "delta_q_e": json_num(shift),
                "fixed_island_delta_q_e": json_num(oracle),
            });
            man.write(&a.out, &pretty(&report)?)?;
            println!("delta_q = {} e (swept {})", fmt_sig(shift), gate.symbol());
            finish(man, &a.out)?;
            Ok(true)
        }
        Command::SweepMisalign(a) => {
            let (spec, settings) = sweep_setup(&a.sweep, &mut man)?;
            let map = misalign_sweep(&spec, &a.dx.0, &a.dy.0, &settings)?;
            write_sweep(&map, &a.sweep.out, man)
        }
        Command::SweepDotsize(a) => {
            let (spec, settings) = sweep_setup(&a.sweep, &mut man)?;
            let map = dotsize_sweep(&spec, &a.radii.0, &settings)?;
            write_sweep(&map, &a.sweep.out, man)
        }
        Command::Validate(a) => {
            let checks = validate::run_checks();
            let mut ok = true;
            for c in &checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.pass;
            }
            if let Some(out) = &a.out {
                man.write(out, &pretty(&validate::report_json(&checks))?)?;
                finish(man, out)?;
            }
            Ok(ok)
        }
        Command::Compare(a) => {
            let m = MaxwellMatrix::from_json(&man.read_input(&a.caps)?)?;
            let table = MeasuredTable::from_json(&man.read_input(&a.measured)?)?;
            let spec = load_geometry(a.geometry.as_deref(), None, &mut man)?;
            let report = compare(&m, &roles_for(&m, &spec)?, &table)?;
            man.write(&a.out, &pretty(&report.to_json())?)?;
            print!("{}", report.to_text());
            finish(man, &a.out)?;
            Ok(true)
        }
    }
}

/// Option values the library rejects are usage errors.
fn usage(e: Error) -> Error {
    match e {
        Error::Validation(m) => Error::Usage(m),
        other => other,
    }
}

fn pretty(v: &serde_json::Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))? + "\n")
}

fn finish(man: RunManifest, primary: &Path) -> Result<()> {
    let path = manifest::manifest_path(primary);
    man.finish(&path)?;
    Ok(())
}

fn load_geometry(path: Option<&Path>, epsilon_r: Option<f64>, man: &mut RunManifest) -> Result<DeviceSpec> {
    let mut spec = match path {
        Some(p) => load_device(&man.read_input(p)?)?,
        None => {
            man.builtin_input("<reference device>", REFERENCE_DEVICE_JSON);
            load_device(REFERENCE_DEVICE_JSON)?
        }
    };
    if let Some(e) = epsilon_r {
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::Usage(format!("--epsilon-r must be positive, got {e}")));
        }
        spec.epsilon_r = e;
    }
    Ok(spec)
}

/// Roles of the matrix conductors: looked up by name in the geometry, or
/// parsed from the name itself.
fn roles_for(m: &MaxwellMatrix, spec: &DeviceSpec) -> Result<Vec<Role>> {
    m.conductor_names
        .iter()
        .map(|n| {
            spec.conductors
                .iter()
                .find(|c| &c.name == n)
                .map(|c| c.role)
                .or_else(|| Role::parse(n))
                .ok_or_else(|| Error::Model(format!("no role known for conductor '{n}'")))
        })
        .collect()
}

fn load_caps(input: &CapsInput, man: &mut RunManifest) -> Result<ModelCaps> {
    let text = man.read_input(&input.caps)?;
    let is_matrix = serde_json::from_str::<serde_json::Value>(&text)
        .map(|v| v.get("entries_aF").is_some())
        .unwrap_or(false);
    if is_matrix {
        let m = MaxwellMatrix::from_json(&text)?;
        let spec = load_geometry(input.geometry.as_deref(), None, man)?;
        reduce_caps(&m, &roles_for(&m, &spec)?)
    } else {
        ModelCaps::from_json(&text)
    }
}

fn sweep_setup(a: &SweepArgs, man: &mut RunManifest) -> Result<(DeviceSpec, SweepSettings)> {
    let spec = load_geometry(a.geometry.geometry.as_deref(), a.solver.epsilon_r, man)?;
    let solver = SolveOptions { jobs: 1, ..a.solver.options(&spec) };
    solver.validate().map_err(usage)?;
    if a.n < 2 {
        return Err(Error::Usage(format!("--n must be at least 2, got {}", a.n)));
    }
    man.solver(&SolveOptions { jobs: a.solver.jobs, ..solver.clone() }, a.solver.h_max);
    let settings = SweepSettings {
        h_max: a.solver.h_max,
        solver,
        grid: a.n,
        compensation: a.compensation,
        jobs: a.solver.jobs,
    };
    Ok((spec, settings))
}

fn write_sweep(map: &SweepMap, out: &Path, mut man: RunManifest) -> Result<bool> {
    for c in &map.cells {
        if let Some(msg) = c.status.message() {
            eprintln!("cell ({}, {}, R={}): {}: {msg}", c.dx, c.dy, c.r, c.status.as_str());
        }
    }
    man.write(out, &map.to_csv())?;
    println!("{} cells, {} without full metrics", map.cells.len(), map.failed());
    if let Some(min) = map.cells.iter().filter(|c| c.has_metrics()).map(|c| c.dv_sl).reduce(f64::min) {
        if let Some(c) = map.cells.iter().find(|c| c.dv_sl == min) {
            let (t, _) = transfer_metrics(c.dv_sl, c.dv_sr, min)?;
            println!("smallest dV_SL {} mV at ({}, {}), theta {} deg", fmt_sig(to_mv(min)), c.dx, c.dy, fmt_sig(t));
        }
    }
    finish(man, out)?;
    Ok(true)
}
