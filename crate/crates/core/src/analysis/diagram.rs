use serde_json::{json, Value};

use super::metrics::theta_deg;
use crate::charging::{degeneracy_bias_with, stable_config_with, CompensationMode, ModelCaps, Ray};
use crate::error::{Error, Result};
use crate::numfmt::{fmt_sig, json_num};
use crate::units::to_mv;

pub const DEFAULT_GRID: usize = 201;

/// Initial half-width of the automatic window, volts.
const AUTO_START_V: f64 = 0.05;
/// Largest half-width the automatic window may grow to, volts.
pub const AUTO_CAP_V: f64 = 20.0;
/// Lines the automatic window tries to capture.
const AUTO_MIN_LINES: usize = 3;

/// Bias window over `(V_SL, V_SR)` in volts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub sl: (f64, f64),
    pub sr: (f64, f64),
}

impl Window {
    pub fn symmetric(half_width: f64) -> Self {
        Window { sl: (-half_width, half_width), sr: (-half_width, half_width) }
    }

    fn validate(&self) -> Result<()> {
        for (lo, hi) in [self.sl, self.sr] {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::Validation(format!("empty bias range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

/// Sample `i` of `n` evenly spaced points on `[lo, hi]`. Written so that a
/// range symmetric about zero gives exactly mirrored samples.
fn sample(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    let m = (n - 1) as f64;
    (lo * (n - 1 - i) as f64 + hi * i as f64) / m
}

/// Least-squares degeneracy line between configurations `lower` and
/// `lower + 1`: points `v` with `normal . v = offset`, `normal` a unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLine {
    pub lower: i64,
    pub normal: (f64, f64),
    pub offset: f64,
    pub points: usize,
    /// Largest distance of a boundary point from the fitted line, volts.
    pub residual: f64,
    /// Extreme boundary points along the line.
    pub segment: [(f64, f64); 2],
}

impl BoundaryLine {
    /// `V_SL` where the line crosses `V_SR = 0`.
    pub fn sl_intercept(&self) -> Option<f64> {
        (self.normal.0 != 0.0).then(|| self.offset / self.normal.0)
    }

    /// `V_SR` where the line crosses `V_SL = 0`.
    pub fn sr_intercept(&self) -> Option<f64> {
        (self.normal.1 != 0.0).then(|| self.offset / self.normal.1)
    }

    fn to_json(&self) -> Value {
        let opt = |v: Option<f64>| v.map(|v| json_num(to_mv(v))).unwrap_or(Value::Null);
        json!({
            "x_lower": self.lower,
            "x_upper": self.lower + 1,
            "normal": [json_num(self.normal.0), json_num(self.normal.1)],
            "offset_mV": json_num(to_mv(self.offset)),
            "sl_intercept_mV": opt(self.sl_intercept()),
            "sr_intercept_mV": opt(self.sr_intercept()),
            "points": self.points,
            "residual_mV": json_num(to_mv(self.residual)),
            "segment_mV": self.segment.iter()
                .map(|p| [json_num(to_mv(p.0)), json_num(to_mv(p.1))])
                .collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityDiagram {
    pub window: Window,
    pub n: usize,
    /// `grid[i][j]`: stable count at `V_SR = sr[i]`, `V_SL = sl[j]`.
    pub grid: Vec<Vec<i64>>,
    pub boundaries: Vec<BoundaryLine>,
    pub dv_sl: Option<f64>,
    pub dv_sr: Option<f64>,
}

impl StabilityDiagram {
    pub fn v_sl(&self, j: usize) -> f64 {
        sample(self.window.sl.0, self.window.sl.1, self.n, j)
    }

    pub fn v_sr(&self, i: usize) -> f64 {
        sample(self.window.sr.0, self.window.sr.1, self.n, i)
    }

    /// Grid step of the coarser axis, volts.
    pub fn step(&self) -> f64 {
        let m = (self.n - 1) as f64;
        ((self.window.sl.1 - self.window.sl.0) / m).max((self.window.sr.1 - self.window.sr.0) / m)
    }

    pub fn theta(&self) -> Option<f64> {
        match (self.dv_sl, self.dv_sr) {
            (Some(a), Some(b)) => theta_deg(a, b).ok(),
            _ => None,
        }
    }

    /// Long-format grid, one row per sample.
    pub fn grid_csv(&self) -> String {
        let mut s = String::from("V_SL_mV,V_SR_mV,x\n");
        for i in 0..self.n {
            let vr = fmt_sig(to_mv(self.v_sr(i)));
            for j in 0..self.n {
                s.push_str(&format!("{},{},{}\n", fmt_sig(to_mv(self.v_sl(j))), vr, self.grid[i][j]));
            }
        }
        s
    }

    pub fn boundaries_json(&self) -> Value {
        let opt = |v: Option<f64>| v.map(|v| json_num(to_mv(v))).unwrap_or(Value::Null);
        json!({
            "window_mV": {
                "V_SL": [json_num(to_mv(self.window.sl.0)), json_num(to_mv(self.window.sl.1))],
                "V_SR": [json_num(to_mv(self.window.sr.0)), json_num(to_mv(self.window.sr.1))],
            },
            "n": self.n,
            "dV_SL_mV": opt(self.dv_sl),
            "dV_SR_mV": opt(self.dv_sr),
            "theta_deg": self.theta().map(json_num).unwrap_or(Value::Null),
            "boundaries": self.boundaries.iter().map(BoundaryLine::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Stable configurations over `window` on an `n x n` grid, with fitted
/// degeneracy lines and their periodicities.
pub fn stability_diagram(
    caps: &ModelCaps,
    window: Window,
    n: usize,
    mode: CompensationMode,
) -> Result<StabilityDiagram> {
    if n < 2 {
        return Err(Error::Validation(format!("grid needs at least 2 points per axis, got {n}")));
    }
    window.validate()?;
    caps.validate()?;
    let mut d = StabilityDiagram { window, n, grid: Vec::with_capacity(n), boundaries: Vec::new(), dv_sl: None, dv_sr: None };
    for i in 0..n {
        let vr = d.v_sr(i);
        let row = (0..n)
            .map(|j| stable_config_with(caps, d.v_sl(j), vr, mode))
            .collect::<Result<Vec<_>>>()?;
        d.grid.push(row);
    }

    // Exact crossing points on every grid edge whose ends differ.
    let mut points: std::collections::BTreeMap<i64, Vec<(f64, f64)>> = Default::default();
    let mut crossing = |a: (f64, f64), xa: i64, b: (f64, f64), xb: i64| -> Result<()> {
        let (lo_p, lo_x, hi_p, hi_x) = if xa < xb { (a, xa, b, xb) } else { (b, xb, a, xa) };
        let ray = Ray { origin: lo_p, direction: (hi_p.0 - lo_p.0, hi_p.1 - lo_p.1) };
        for k in lo_x..hi_x {
            let t = degeneracy_bias_with(caps, &ray, k, 0.0, 1.0, mode)?;
            points.entry(k).or_default().push(ray.at(t));
        }
        Ok(())
    };
    for i in 0..n {
        for j in 0..n {
            let here = (d.v_sl(j), d.v_sr(i));
            let x = d.grid[i][j];
            if j + 1 < n && d.grid[i][j + 1] != x {
                crossing(here, x, (d.v_sl(j + 1), d.v_sr(i)), d.grid[i][j + 1])?;
            }
            if i + 1 < n && d.grid[i + 1][j] != x {
                crossing(here, x, (d.v_sl(j), d.v_sr(i + 1)), d.grid[i + 1][j])?;
            }
        }
    }
    d.boundaries = points
        .into_iter()
        .filter(|(_, p)| p.len() >= 2)
        .map(|(k, p)| fit_line(k, &p))
        .collect();
    d.dv_sl = median_spacing(&d.boundaries, BoundaryLine::sl_intercept);
    d.dv_sr = median_spacing(&d.boundaries, BoundaryLine::sr_intercept);
    Ok(d)
}

/// Diagram on a symmetric window that starts at 50 mV half-width and
/// doubles until at least three degeneracy lines are inside or the
/// half-width reaches [`AUTO_CAP_V`].
pub fn auto_stability_diagram(caps: &ModelCaps, n: usize, mode: CompensationMode) -> Result<StabilityDiagram> {
    let mut w = AUTO_START_V;
    loop {
        let d = stability_diagram(caps, Window::symmetric(w), n, mode)?;
        if d.boundaries.len() >= AUTO_MIN_LINES || w >= AUTO_CAP_V {
            return Ok(d);
        }
        w = (2.0 * w).min(AUTO_CAP_V);
    }
}

/// Total least squares line through `p`.
fn fit_line(lower: i64, p: &[(f64, f64)]) -> BoundaryLine {
    let m = p.len() as f64;
    let cx = p.iter().map(|q| q.0).sum::<f64>() / m;
    let cy = p.iter().map(|q| q.1).sum::<f64>() / m;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for q in p {
        let (dx, dy) = (q.0 - cx, q.1 - cy);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    // direction of largest spread; normal is perpendicular
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let dir = (angle.cos(), angle.sin());
    let mut normal = (-dir.1, dir.0);
    if normal.0 < 0.0 || (normal.0 == 0.0 && normal.1 < 0.0) {
        normal = (-normal.0, -normal.1);
    }
    let offset = normal.0 * cx + normal.1 * cy;
    let residual = p
        .iter()
        .map(|q| (normal.0 * q.0 + normal.1 * q.1 - offset).abs())
        .fold(0.0, f64::max);
    let along = |q: &(f64, f64)| dir.0 * q.0 + dir.1 * q.1;
    let first = p.iter().min_by(|a, b| along(a).total_cmp(&along(b))).copied().unwrap_or((cx, cy));
    let last = p.iter().max_by(|a, b| along(a).total_cmp(&along(b))).copied().unwrap_or((cx, cy));
    BoundaryLine { lower, normal, offset, points: p.len(), residual, segment: [first, last] }
}

/// Median spacing of consecutive intercepts per unit step of the line
/// label. Needs two lines with an intercept.
fn median_spacing(lines: &[BoundaryLine], intercept: fn(&BoundaryLine) -> Option<f64>) -> Option<f64> {
    let pts: Vec<(i64, f64)> = lines.iter().filter_map(|l| intercept(l).map(|v| (l.lower, v))).collect();
    let mut gaps: Vec<f64> = pts
        .windows(2)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0) as f64).abs())
        .filter(|g| g.is_finite() && *g > 0.0)
        .collect();
    if gaps.is_empty() {
        return None;
    }
    gaps.sort_by(f64::total_cmp);
    let m = gaps.len();
    Some(if m % 2 == 1 { gaps[m / 2] } else { 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]) })
}
