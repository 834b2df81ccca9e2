use super::caps::{Gate, ModelCaps};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum CompensationMode {
    /// Each SET gate cancels the S-gate charge on its own island only.
    #[default]
    Approximate,
    /// Both SET gates solved together, including cross couplings.
    Exact,
}

/// Compensation voltages `(V_g1, V_g2)` that hold the gate-induced charge
/// on each SET island constant while `V_SL`, `V_SR` are swept. A SET whose
/// island is absent from `caps` keeps its gate at 0 V.
pub fn compensate(
    v_sl: f64,
    v_sr: f64,
    caps: &ModelCaps,
    mode: CompensationMode,
) -> Result<(f64, f64)> {
    let (sl, sr, g1, g2) = (Gate::SL.index(), Gate::SR.index(), Gate::G1.index(), Gate::G2.index());
    let r1 = caps.i1.as_ref().map(|i| i.gate);
    let r2 = caps.gate_i2;
    let drive = |r: &[f64; 4]| r[sl] * v_sl + r[sr] * v_sr;
    let own = |r: &[f64; 4], g: usize, name: &str| -> Result<f64> {
        if r[g] > 0.0 {
            Ok(r[g])
        } else {
            Err(Error::Model(format!("compensation needs a positive {name} coupling")))
        }
    };

    match (mode, r1, r2) {
        (_, None, None) => Ok((0.0, 0.0)),
        (CompensationMode::Approximate, _, _) | (CompensationMode::Exact, None, _) | (CompensationMode::Exact, _, None) => {
            let v1 = match &r1 {
                Some(r) => -drive(r) / own(r, g1, "C_g1i1")?,
                None => 0.0,
            };
            let v2 = match &r2 {
                Some(r) => -drive(r) / own(r, g2, "C_g2i2")?,
                None => 0.0,
            };
            Ok((v1, v2))
        }
        (CompensationMode::Exact, Some(a), Some(b)) => {
            // [a_g1 a_g2; b_g1 b_g2] [V_g1; V_g2] = -[drive(a); drive(b)]
            let det = a[g1] * b[g2] - a[g2] * b[g1];
            let scale = (a[g1] * b[g2]).abs().max((a[g2] * b[g1]).abs());
            if !(det.abs() > 1e-12 * scale) {
                return Err(Error::Model("singular compensation system".into()));
            }
            let (ra, rb) = (-drive(&a), -drive(&b));
            Ok(((ra * b[g2] - a[g2] * rb) / det, (a[g1] * rb - ra * b[g1]) / det))
        }
    }
}
