use super::caps::{Gate, ModelCaps};
use super::energy::{dot_charges, island_energy, Bias};
use super::roots::{bracketed_root, convex_argmin};
use super::stable::{tie_tolerance, ROOT_TOL_V};
use crate::error::{Error, Result};

/// Fraction of a whole period by which the pattern shift of [`delta_q`]
/// may differ from the fixed-island oracle before it is reported as an
/// internal inconsistency.
const ORACLE_TOL: f64 = 1e-6;

/// Stable island electron count at fixed dot configuration `x`.
pub fn stable_island(caps: &ModelCaps, bias: &Bias, x: i64) -> Result<i64> {
    let f = |y: i64| island_energy(caps, bias, x, y);
    convex_argmin(&f, tie_tolerance(caps), 0)
}

/// Voltages of `gate` in `[lo, hi]` at which the SET1 island gains or loses
/// an electron, with every other gate held at `base` and the dots fixed in
/// configuration `x`. Sorted ascending.
pub fn island_transfer_points(
    caps: &ModelCaps,
    base: &Bias,
    gate: Gate,
    x: i64,
    lo: f64,
    hi: f64,
) -> Result<Vec<f64>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Validation(format!("empty gate range [{lo}, {hi}]")));
    }
    caps.island()?;
    let at = |v: f64| base.with(gate, v);
    let y_lo = stable_island(caps, &at(lo), x)?;
    let y_hi = stable_island(caps, &at(hi), x)?;
    let (a, b) = (y_lo.min(y_hi), y_lo.max(y_hi));
    let mut out = Vec::with_capacity((b - a) as usize);
    for y in a..b {
        let gap = |v: f64| Ok(island_energy(caps, &at(v), x, y)? - island_energy(caps, &at(v), x, y + 1)?);
        out.push(bracketed_root(&gap, lo, hi, ROOT_TOL_V)?);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// SET1 transfer points along `V_g1` with the given S-gate and `V_g2` bias.
pub fn set_transfer_points(
    caps: &ModelCaps,
    v_sl: f64,
    v_sr: f64,
    v_g2: f64,
    x: i64,
    v_g1_lo: f64,
    v_g1_hi: f64,
) -> Result<Vec<f64>> {
    let base = Bias { v_sl, v_sr, v_g1: 0.0, v_g2 };
    island_transfer_points(caps, &base, Gate::G1, x, v_g1_lo, v_g1_hi)
}

/// Island charge (units of e) induced by moving one electron from d1 to d2,
/// with the island held at zero potential; folded into `[0, 0.5]`.
pub fn delta_q_fixed_island(caps: &ModelCaps) -> Result<f64> {
    let i = caps.island()?;
    let a = caps.dot_matrix();
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    // dot potentials per unit charge change [1, -1] q_e
    let n = {
        let [p, q] = dot_charges(1);
        let [r, s] = dot_charges(0);
        [-(p - r), -(q - s)]
    };
    let phi = [(a[1][1] * n[0] - a[0][1] * n[1]) / det, (a[0][0] * n[1] - a[1][0] * n[0]) / det];
    let induced = -(i.c_d1 * phi[0] + i.c_d2 * phi[1]);
    Ok(fold(induced))
}

fn fold(frac: f64) -> f64 {
    let f = frac.rem_euclid(1.0);
    f.min(1.0 - f)
}

/// Shift of the SET1 transfer pattern between dot configurations `[0, 0]`
/// and `[-1, 1]`, as a fraction of the pattern period, swept along `gate`.
pub fn delta_q_along(caps: &ModelCaps, gate: Gate) -> Result<f64> {
    let i = caps.island()?;
    let lever = i.gate[gate.index()];
    if !(lever > 0.0) {
        return Err(Error::Model(format!(
            "no coupling between {} and the SET1 island; period undefined",
            gate.symbol()
        )));
    }
    // The dots only add to the island lever, so the true period is shorter.
    let span = 3.0 * crate::units::Q_E / lever;
    let base = Bias::default();
    let a = island_transfer_points(caps, &base, gate, 0, -span, span)?;
    let b = island_transfer_points(caps, &base, gate, 1, -span, span)?;
    if a.len() < 2 || b.is_empty() {
        return Err(Error::Model("transfer pattern has fewer than two points".into()));
    }
    let mut gaps: Vec<f64> = a.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    let period = gaps[gaps.len() / 2];
    let shift = (b[0] - a[0]) / period;
    Ok(fold(shift))
}

/// Induced charge Δq (units of e) from the V_g1 transfer pattern, checked
/// against the fixed-island electrostatic solution.
pub fn delta_q(caps: &ModelCaps) -> Result<f64> {
    let dq = delta_q_along(caps, Gate::G1)?;
    let oracle = delta_q_fixed_island(caps)?;
    if (dq - oracle).abs() > ORACLE_TOL {
        return Err(Error::Model(format!(
            "pattern shift {dq} disagrees with electrostatic induced charge {oracle}"
        )));
    }
    Ok(dq)
}
