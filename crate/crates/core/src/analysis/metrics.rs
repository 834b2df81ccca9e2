use crate::error::{Error, Result};
use crate::units::Q_E;

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must be positive, got {v}")))
    }
}

/// Charge transfer angle `atan(dV_SR / dV_SL)` in degrees.
pub fn theta_deg(dv_sl: f64, dv_sr: f64) -> Result<f64> {
    positive("dV_SL", dv_sl)?;
    positive("dV_SR", dv_sr)?;
    // the larger angle is taken as the complement of the smaller one so
    // that theta(a, b) + theta(b, a) is exactly 90
    if dv_sr <= dv_sl {
        Ok((dv_sr / dv_sl).atan().to_degrees())
    } else {
        Ok(90.0 - (dv_sl / dv_sr).atan().to_degrees())
    }
}

/// `20 log10(dV_SL / reference)`.
pub fn to_db(dv_sl: f64, reference: f64) -> Result<f64> {
    positive("dV_SL", dv_sl)?;
    positive("reference periodicity", reference)?;
    Ok(20.0 * (dv_sl / reference).log10())
}

/// Transfer angle in degrees and periodicity in dB relative to `v_sl_min`.
pub fn transfer_metrics(dv_sl: f64, dv_sr: f64, v_sl_min: f64) -> Result<(f64, f64)> {
    Ok((theta_deg(dv_sl, dv_sr)?, to_db(dv_sl, v_sl_min)?))
}

/// Coulomb blockade period `e / C_g` in volts.
pub fn coulomb_period(c_g: f64) -> Result<f64> {
    positive("gate capacitance", c_g)?;
    Ok(Q_E / c_g)
}
