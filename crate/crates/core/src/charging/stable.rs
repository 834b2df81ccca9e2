use super::caps::ModelCaps;
use super::compensate::{compensate, CompensationMode};
use super::energy::{config_energy, Bias};
use super::roots::{bracketed_root, convex_argmin};
use crate::error::{Error, Result};
use crate::units::Q_E;

/// Bisection tolerance for degeneracy roots, in volts.
pub const ROOT_TOL_V: f64 = 1e-6;

/// Energies closer than this fraction of the charging energy
/// `q_e^2 / 2 C` count as degenerate.
const TIE_FRACTION: f64 = 1e-12;

pub(crate) fn tie_tolerance(caps: &ModelCaps) -> f64 {
    let cmin = caps.csum_d1.min(caps.csum_d2);
    TIE_FRACTION * Q_E * Q_E / (2.0 * cmin)
}

/// S-gate bias with SET gates set by compensation.
pub fn compensated_bias(caps: &ModelCaps, v_sl: f64, v_sr: f64, mode: CompensationMode) -> Result<Bias> {
    let (v_g1, v_g2) = compensate(v_sl, v_sr, caps, mode)?;
    Ok(Bias { v_sl, v_sr, v_g1, v_g2 })
}

/// Minimum-energy transfer count at an explicit bias.
pub fn stable_config_at(caps: &ModelCaps, bias: &Bias) -> Result<i64> {
    let f = |x: i64| config_energy(caps, bias, x);
    convex_argmin(&f, tie_tolerance(caps), 0)
}

/// Minimum-energy transfer count at `(V_SL, V_SR)` with compensated SETs.
pub fn stable_config(caps: &ModelCaps, v_sl: f64, v_sr: f64) -> Result<i64> {
    stable_config_with(caps, v_sl, v_sr, CompensationMode::Approximate)
}

pub fn stable_config_with(caps: &ModelCaps, v_sl: f64, v_sr: f64, mode: CompensationMode) -> Result<i64> {
    stable_config_at(caps, &compensated_bias(caps, v_sl, v_sr, mode)?)
}

/// Straight line in the `(V_SL, V_SR)` plane: `origin + t * direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: (f64, f64),
    pub direction: (f64, f64),
}

impl Ray {
    pub fn at(&self, t: f64) -> (f64, f64) {
        (self.origin.0 + t * self.direction.0, self.origin.1 + t * self.direction.1)
    }
}

/// `E_x - E_{x+1}` at ray parameter `t`.
pub fn degeneracy_gap(caps: &ModelCaps, ray: &Ray, x: i64, t: f64, mode: CompensationMode) -> Result<f64> {
    let (v_sl, v_sr) = ray.at(t);
    let b = compensated_bias(caps, v_sl, v_sr, mode)?;
    Ok(config_energy(caps, &b, x)? - config_energy(caps, &b, x + 1)?)
}

/// Ray parameter in `[t0, t1]` where configurations `x` and `x + 1` are
/// degenerate.
pub fn degeneracy_bias(caps: &ModelCaps, ray: &Ray, x: i64, t0: f64, t1: f64) -> Result<f64> {
    degeneracy_bias_with(caps, ray, x, t0, t1, CompensationMode::Approximate)
}

pub fn degeneracy_bias_with(
    caps: &ModelCaps,
    ray: &Ray,
    x: i64,
    t0: f64,
    t1: f64,
    mode: CompensationMode,
) -> Result<f64> {
    let speed = ray.direction.0.hypot(ray.direction.1);
    if !(speed > 0.0) {
        return Err(Error::Validation("ray direction must be non-zero".into()));
    }
    let f = |t: f64| degeneracy_gap(caps, ray, x, t, mode);
    bracketed_root(&f, t0, t1, ROOT_TOL_V / speed)
}
