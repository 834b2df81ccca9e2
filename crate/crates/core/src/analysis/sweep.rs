use rayon::prelude::*;

use super::diagram::{auto_stability_diagram, DEFAULT_GRID};
use super::metrics::to_db;
use crate::capsolve::{solve, thread_pool, MaxwellMatrix, SolveOptions};
use crate::charging::{delta_q, reduce_caps, CompensationMode, Gate, ModelCaps};
use crate::error::{Error, Result};
use crate::geometry::{dot_size, mesh_device, transform_dots, DeviceSpec};
use crate::numfmt::fmt_sig;
use crate::units::{to_af, to_mv};

/// Default misalignment window `min:max:step`, nm.
pub const DEFAULT_DX: (f64, f64, f64) = (-90.0, 90.0, 10.0);
pub const DEFAULT_DY: (f64, f64, f64) = (-50.0, 50.0, 10.0);
pub const DEFAULT_RADII: [f64; 5] = [10.0, 20.0, 30.0, 40.0, 50.0];

/// How each sweep cell is meshed, solved and analysed.
#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub h_max: f64,
    /// Solver options for a single cell; `jobs` is ignored inside sweeps.
    pub solver: SolveOptions,
    pub grid: usize,
    pub compensation: CompensationMode,
    /// Cells evaluated concurrently.
    pub jobs: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            h_max: 10.0,
            solver: SolveOptions::default(),
            grid: DEFAULT_GRID,
            compensation: CompensationMode::Approximate,
            jobs: 1,
        }
    }
}

/// Inclusive arithmetic range `min:max:step`.
pub fn range_values(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) || step <= 0.0 || max < min {
        return Err(Error::Validation(format!("invalid range {min}:{max}:{step}")));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| min + i as f64 * step).collect())
}

/// Mesh and solve `spec` at its own permittivity.
pub fn extract(spec: &DeviceSpec, h_max: f64, opts: &SolveOptions) -> Result<MaxwellMatrix> {
    let mesh = mesh_device(spec, h_max)?;
    let opts = SolveOptions { epsilon_r: spec.epsilon_r, ..opts.clone() };
    solve(&mesh, &opts)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    /// Geometry, solve or reduction failed; no capacitances.
    SolveFailed(String),
    /// Fewer than two degeneracy lines inside the largest window.
    NoPeriodicity,
    /// The stability diagram could not be built.
    AnalysisFailed(String),
    /// Periodicities found but the SET1 readout could not be evaluated.
    NoDeltaQ(String),
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::SolveFailed(_) => "solve_failed",
            CellStatus::NoPeriodicity => "no_periodicity",
            CellStatus::AnalysisFailed(_) => "analysis_failed",
            CellStatus::NoDeltaQ(_) => "no_delta_q",
        }
    }

    pub fn message(&self) -> Option<&str> {
        match self {
            CellStatus::SolveFailed(m) | CellStatus::AnalysisFailed(m) | CellStatus::NoDeltaQ(m) => Some(m),
            _ => None,
        }
    }
}

/// Result of one sweep cell. Quantities that could not be computed are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub dx: f64,
    pub dy: f64,
    pub r: f64,
    pub caps: Option<ModelCaps>,
    pub c_sl_d1: f64,
    pub c_sr_d2: f64,
    pub c_d1_i1: f64,
    pub dv_sl: f64,
    pub dv_sr: f64,
    pub theta: f64,
    pub dv_sl_db: f64,
    pub delta_q: f64,
    pub status: CellStatus,
}

impl CellRecord {
    fn empty(dx: f64, dy: f64, r: f64, status: CellStatus) -> Self {
        CellRecord {
            dx,
            dy,
            r,
            caps: None,
            c_sl_d1: f64::NAN,
            c_sr_d2: f64::NAN,
            c_d1_i1: f64::NAN,
            dv_sl: f64::NAN,
            dv_sr: f64::NAN,
            theta: f64::NAN,
            dv_sl_db: f64::NAN,
            delta_q: f64::NAN,
            status,
        }
    }

    /// Has a periodicity and angle, so it takes part in dB scaling and
    /// misalignment estimates.
    pub fn has_metrics(&self) -> bool {
        self.dv_sl.is_finite() && self.theta.is_finite()
    }

    pub fn ratio(&self) -> f64 {
        self.c_sl_d1 / self.c_sr_d2
    }
}

/// Analyse a solved capacitance matrix as one sweep cell.
pub fn analyse_cell(
    m: &MaxwellMatrix,
    spec: &DeviceSpec,
    settings: &SweepSettings,
    (dx, dy, r): (f64, f64, f64),
) -> CellRecord {
    let caps = match reduce_caps(m, &spec.roles()) {
        Ok(c) => c,
        Err(e) => return CellRecord::empty(dx, dy, r, CellStatus::SolveFailed(e.to_string())),
    };
    let mut rec = CellRecord::empty(dx, dy, r, CellStatus::Ok);
    rec.caps = Some(caps);
    rec.c_sl_d1 = caps.gate_d1[Gate::SL.index()];
    rec.c_sr_d2 = caps.gate_d2[Gate::SR.index()];
    rec.c_d1_i1 = caps.i1.map_or(f64::NAN, |i| i.c_d1);
    match auto_stability_diagram(&caps, settings.grid, settings.compensation) {
        Ok(d) => {
            if let (Some(a), Some(b), Some(t)) = (d.dv_sl, d.dv_sr, d.theta()) {
                rec.dv_sl = a;
                rec.dv_sr = b;
                rec.theta = t;
            } else {
                rec.status = CellStatus::NoPeriodicity;
            }
        }
        Err(e) => rec.status = CellStatus::AnalysisFailed(e.to_string()),
    }
    match delta_q(&caps) {
        Ok(q) => rec.delta_q = q,
        Err(e) => {
            if rec.status == CellStatus::Ok {
                rec.status = CellStatus::NoDeltaQ(e.to_string());
            }
        }
    }
    rec
}

/// Forward-simulate one device variant: dots moved by `(dx, dy)` and
/// resized to `r`.
pub fn simulate_cell(spec: &DeviceSpec, dx: f64, dy: f64, r: f64, settings: &SweepSettings) -> CellRecord {
    let opts = SolveOptions { jobs: 1, ..settings.solver.clone() };
    let solved = transform_dots(spec, dx, dy, r).and_then(|s| Ok((extract(&s, settings.h_max, &opts)?, s)));
    match solved {
        Ok((m, s)) => analyse_cell(&m, &s, settings, (dx, dy, r)),
        Err(e) => CellRecord::empty(dx, dy, r, CellStatus::SolveFailed(e.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxes {
    Misalign { dx: Vec<f64>, dy: Vec<f64> },
    DotSize { r: Vec<f64> },
}

/// Sweep results in axis order: for misalignment, `dx` outer and `dy` inner.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMap {
    pub axes: SweepAxes,
    pub cells: Vec<CellRecord>,
}

impl SweepMap {
    fn assemble(axes: SweepAxes, mut cells: Vec<CellRecord>) -> Self {
        let min = cells
            .iter()
            .filter(|c| c.has_metrics())
            .map(|c| c.dv_sl)
            .fold(f64::INFINITY, f64::min);
        for c in cells.iter_mut().filter(|c| c.has_metrics()) {
            c.dv_sl_db = to_db(c.dv_sl, min).unwrap_or(f64::NAN);
        }
        SweepMap { axes, cells }
    }

    pub fn cell(&self, dx: f64, dy: f64) -> Option<&CellRecord> {
        self.cells.iter().find(|c| c.dx == dx && c.dy == dy)
    }

    pub fn failed(&self) -> usize {
        self.cells.iter().filter(|c| c.status != CellStatus::Ok).count()
    }

    pub fn to_csv(&self) -> String {
        let dotsize = matches!(self.axes, SweepAxes::DotSize { .. });
        let mut s = String::from(if dotsize {
            "R_nm,C_SLd1_aF,C_SRd2_aF,C_d1i1_aF,dV_SL_mV,dV_SR_mV,theta_deg,dV_SL_dB,delta_q_e,status\n"
        } else {
            "dx_nm,dy_nm,C_SLd1_aF,C_SRd2_aF,dV_SL_mV,dV_SR_mV,theta_deg,dV_SL_dB,delta_q_e,status\n"
        });
        for c in &self.cells {
            let mut f: Vec<String> = if dotsize {
                vec![fmt_sig(c.r), fmt_sig(to_af(c.c_sl_d1)), fmt_sig(to_af(c.c_sr_d2)), fmt_sig(to_af(c.c_d1_i1))]
            } else {
                vec![fmt_sig(c.dx), fmt_sig(c.dy), fmt_sig(to_af(c.c_sl_d1)), fmt_sig(to_af(c.c_sr_d2))]
            };
            f.extend([
                fmt_sig(to_mv(c.dv_sl)),
                fmt_sig(to_mv(c.dv_sr)),
                fmt_sig(c.theta),
                fmt_sig(c.dv_sl_db),
                fmt_sig(c.delta_q),
                c.status.as_str().to_string(),
            ]);
            s.push_str(&f.join(","));
            s.push('\n');
        }
        s
    }
}

fn run_cells(points: Vec<(f64, f64, f64)>, spec: &DeviceSpec, settings: &SweepSettings) -> Result<Vec<CellRecord>> {
    let pool = thread_pool(settings.jobs.max(1))?;
    Ok(pool.install(|| {
        points
            .par_iter()
            .map(|&(dx, dy, r)| simulate_cell(spec, dx, dy, r, settings))
            .collect()
    }))
}

/// Solve and analyse every `(dx, dy)` dot displacement at the device's own
/// dot size. Failing cells are recorded, not dropped.
pub fn misalign_sweep(spec: &DeviceSpec, dx: &[f64], dy: &[f64], settings: &SweepSettings) -> Result<SweepMap> {
    if dx.is_empty() || dy.is_empty() {
        return Err(Error::Validation("misalignment ranges must be non-empty".into()));
    }
    settings.solver.validate()?;
    let r = dot_size(spec)?;
    let points = dx.iter().flat_map(|&x| dy.iter().map(move |&y| (x, y, r))).collect();
    let cells = run_cells(points, spec, settings)?;
    Ok(SweepMap::assemble(SweepAxes::Misalign { dx: dx.to_vec(), dy: dy.to_vec() }, cells))
}

/// Solve and analyse the aligned device for each dot size.
pub fn dotsize_sweep(spec: &DeviceSpec, radii: &[f64], settings: &SweepSettings) -> Result<SweepMap> {
    if radii.is_empty() {
        return Err(Error::Validation("dot-size list must be non-empty".into()));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::Validation(format!("dot size must be positive, got {r}")));
    }
    settings.solver.validate()?;
    let points = radii.iter().map(|&r| (0.0, 0.0, r)).collect();
    let cells = run_cells(points, spec, settings)?;
    Ok(SweepMap::assemble(SweepAxes::DotSize { r: radii.to_vec() }, cells))
}

/// Acceptance bands for [`estimate_misalignment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchTolerance {
    pub theta_deg: f64,
    /// Relative band on `dV_SL`.
    pub dv_sl_rel: f64,
}

impl Default for MatchTolerance {
    fn default() -> Self {
        MatchTolerance { theta_deg: 2.0, dv_sl_rel: 0.2 }
    }
}

/// Cells of `map` whose angle and periodicity match an observed charge
/// transfer pattern.
pub fn estimate_misalignment(theta_obs: f64, dv_sl_obs: f64, map: &SweepMap, tol: MatchTolerance) -> Vec<(f64, f64)> {
    map.cells
        .iter()
        .filter(|c| c.has_metrics())
        .filter(|c| (c.theta - theta_obs).abs() <= tol.theta_deg)
        .filter(|c| (c.dv_sl - dv_sl_obs).abs() <= tol.dv_sl_rel * dv_sl_obs.abs())
        .map(|c| (c.dx, c.dy))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_ranges() {
        assert_eq!(range_values(-90.0, 90.0, 10.0).unwrap().len(), 19);
        assert_eq!(range_values(-50.0, 50.0, 10.0).unwrap().len(), 11);
        assert_eq!(range_values(0.0, 0.0, 1.0).unwrap(), vec![0.0]);
        assert_eq!(range_values(0.0, 0.25, 0.1).unwrap().len(), 3);
        assert!(range_values(1.0, 0.0, 1.0).is_err());
        assert!(range_values(0.0, 1.0, 0.0).is_err());
    }

    fn fake(dx: f64, dy: f64, dv_sl: f64, theta: f64) -> CellRecord {
        let mut c = CellRecord::empty(dx, dy, 40.0, CellStatus::Ok);
        c.dv_sl = dv_sl;
        c.dv_sr = dv_sl * theta.to_radians().tan();
        c.theta = theta;
        c
    }

    #[test]
    fn db_reference_is_map_minimum() {
        let cells = vec![
            fake(0.0, 0.0, 0.2, 45.0),
            fake(1.0, 0.0, 0.05, 60.0),
            CellRecord::empty(2.0, 0.0, 40.0, CellStatus::SolveFailed("x".into())),
        ];
        let m = SweepMap::assemble(SweepAxes::Misalign { dx: vec![0.0, 1.0, 2.0], dy: vec![0.0] }, cells);
        assert_eq!(m.cells[1].dv_sl_db, 0.0);
        assert!((m.cells[0].dv_sl_db - 20.0 * 4f64.log10()).abs() < 1e-12);
        assert!(m.cells[2].dv_sl_db.is_nan());
        assert_eq!(m.failed(), 1);
        let csv = m.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(3).unwrap().ends_with("2,0,nan,nan,nan,nan,nan,nan,nan,solve_failed"));
    }

    #[test]
    fn estimate_filters_by_both_bands() {
        let cells = vec![
            fake(-30.0, 20.0, 0.1, 55.0),
            fake(-20.0, 20.0, 0.1, 58.0),
            fake(30.0, 20.0, 0.1, 35.0),
            fake(-30.0, 30.0, 0.2, 55.0),
        ];
        let m = SweepMap::assemble(SweepAxes::Misalign { dx: vec![], dy: vec![] }, cells);
        let hit = estimate_misalignment(55.5, 0.105, &m, MatchTolerance::default());
        assert_eq!(hit, vec![(-30.0, 20.0)]);
        assert!(estimate_misalignment(89.0, 1e3, &m, MatchTolerance::default()).is_empty());
    }
}
