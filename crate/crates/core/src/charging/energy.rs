use super::caps::{Gate, ModelCaps};
use crate::error::{Error, Result};
use crate::units::Q_E;

/// Applied gate voltages in volts; sources and drains are grounded.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bias {
    pub v_sl: f64,
    pub v_sr: f64,
    pub v_g1: f64,
    pub v_g2: f64,
}

impl Bias {
    pub fn vector(&self) -> [f64; 4] {
        [self.v_sl, self.v_sr, self.v_g1, self.v_g2]
    }

    pub fn get(&self, g: Gate) -> f64 {
        self.vector()[g.index()]
    }

    pub fn with(mut self, g: Gate, v: f64) -> Self {
        match g {
            Gate::SL => self.v_sl = v,
            Gate::SR => self.v_sr = v,
            Gate::G1 => self.v_g1 = v,
            Gate::G2 => self.v_g2 = v,
        }
        self
    }
}

/// Charge configuration of the double dot, `[-x, x]` excess electrons on
/// (d1, d2): `x` electrons moved from d1 to d2.
pub fn dot_charges(x: i64) -> [f64; 2] {
    [-(x as f64), x as f64]
}

/// Polarisation `(q_d1 - q_d2)` in electrons for transfer count `x`.
pub fn polarization(x: i64) -> i64 {
    2 * x
}

fn row_dot(row: &[f64; 4], v: &[f64; 4]) -> f64 {
    row.iter().zip(v).map(|(c, v)| c * v).sum()
}

/// Gate-induced charge on (d1, d2).
pub fn induced_dots(caps: &ModelCaps, bias: &Bias) -> [f64; 2] {
    let v = bias.vector();
    [row_dot(&caps.gate_d1, &v), row_dot(&caps.gate_d2, &v)]
}

/// Gate-induced charge on (d1, d2, i1).
pub fn induced_with_island(caps: &ModelCaps, bias: &Bias) -> Result<[f64; 3]> {
    let v = bias.vector();
    let i = caps.island()?;
    let [a, b] = induced_dots(caps, bias);
    Ok([a, b, row_dot(&i.gate, &v)])
}

/// Lower Cholesky factor of a symmetric 3x3 matrix, if positive definite.
pub(crate) fn cholesky3(a: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// `Q^T C^-1 Q` for a 2x2 symmetric positive definite `C`.
pub(crate) fn quad_form2(c: &[[f64; 2]; 2], q: [f64; 2]) -> Result<f64> {
    let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
    if !(c[0][0] > 0.0 && det > 0.0) {
        return Err(Error::Model("capacitance matrix is not positive definite".into()));
    }
    Ok((c[1][1] * q[0] * q[0] - 2.0 * c[0][1] * q[0] * q[1] + c[0][0] * q[1] * q[1]) / det)
}

/// `Q^T C^-1 Q` for a 3x3 symmetric positive definite `C`.
pub(crate) fn quad_form3(c: &[[f64; 3]; 3], q: [f64; 3]) -> Result<f64> {
    let l = cholesky3(c)
        .ok_or_else(|| Error::Model("capacitance matrix is not positive definite".into()))?;
    // forward solve L y = q, then Q^T C^-1 Q = |y|^2
    let mut y = [0.0; 3];
    for i in 0..3 {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (q[i] - s) / l[i][i];
    }
    Ok(y.iter().map(|v| v * v).sum())
}

/// Electrostatic energy (J) of dot configuration `x`:
/// `E = Q^T C^-1 Q / 2` with `Q = C~ V - q_e [-x, x]`.
pub fn config_energy(caps: &ModelCaps, bias: &Bias, x: i64) -> Result<f64> {
    let qt = induced_dots(caps, bias);
    let n = dot_charges(x);
    let q = [qt[0] - Q_E * n[0], qt[1] - Q_E * n[1]];
    Ok(0.5 * quad_form2(&caps.dot_matrix(), q)?)
}

/// Energy (J) with SET1 included: dot configuration `x` and `y` excess
/// electrons on the island.
pub fn island_energy(caps: &ModelCaps, bias: &Bias, x: i64, y: i64) -> Result<f64> {
    let qt = induced_with_island(caps, bias)?;
    let n = dot_charges(x);
    let q = [qt[0] - Q_E * n[0], qt[1] - Q_E * n[1], qt[2] - Q_E * y as f64];
    Ok(0.5 * quad_form3(&caps.island_matrix()?, q)?)
}
