//! Independent oracles and random circuit models shared by the test targets.
#![allow(dead_code)]

use dqdcap::charging::{IslandCaps, ModelCaps};
use dqdcap::units::{from_af, Q_E};
use proptest::prelude::*;

/// Positive-definite circuit model with a SET1 island and a SET2 gate row.
pub fn model_caps() -> impl Strategy<Value = ModelCaps> {
    (
        (5.0..40.0f64, 5.0..40.0f64, 0.0..0.5f64),
        (0.5..5.0f64, 0.1..3.0f64, 0.0..1.0f64, 0.0..1.0f64),
        (0.1..3.0f64, 0.5..5.0f64, 0.0..1.0f64, 0.0..1.0f64),
        (60.0..200.0f64, 0.1..5.0f64, 0.1..5.0f64),
        (2.0..30.0f64, 2.0..30.0f64, 5.0..30.0f64, 0.0..5.0f64),
        (2.0..30.0f64, 2.0..30.0f64, 0.0..5.0f64, 5.0..30.0f64),
    )
        .prop_map(|(d, g1, g2, isl, gi1, gi2)| {
            let af4 = |g: (f64, f64, f64, f64)| [from_af(g.0), from_af(g.1), from_af(g.2), from_af(g.3)];
            ModelCaps {
                csum_d1: from_af(d.0),
                csum_d2: from_af(d.1),
                c_d1d2: from_af(d.2 * d.0.min(d.1)),
                gate_d1: af4(g1),
                gate_d2: af4(g2),
                i1: Some(IslandCaps { csum: from_af(isl.0), c_d1: from_af(isl.1), c_d2: from_af(isl.2), gate: af4(gi1) }),
                gate_i2: Some(af4(gi2)),
            }
        })
}

/// SET gate voltages that cancel the S-gate charge on each island's own row.
pub fn oracle_compensation(c: &ModelCaps, v_sl: f64, v_sr: f64) -> (f64, f64) {
    let i1 = c.i1.expect("island").gate;
    let v_g1 = -(i1[0] * v_sl + i1[1] * v_sr) / i1[2];
    let v_g2 = match c.gate_i2 {
        Some(i2) => -(i2[0] * v_sl + i2[1] * v_sr) / i2[3],
        None => 0.0,
    };
    (v_g1, v_g2)
}

/// `1/2 Q^T C^-1 Q` by the explicit 2x2 inverse.
pub fn oracle_energy(c: &ModelCaps, v: [f64; 4], x: i64) -> f64 {
    let ind = |row: &[f64; 4]| row.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
    let q1 = ind(&c.gate_d1) + Q_E * x as f64;
    let q2 = ind(&c.gate_d2) - Q_E * x as f64;
    let (a, b, d) = (c.csum_d1, -c.c_d1d2, c.csum_d2);
    let det = a * d - b * b;
    0.5 * (d * q1 * q1 - 2.0 * b * q1 * q2 + a * q2 * q2) / det
}

/// Exhaustive minimiser over `[-k, k]` with the smallest-|x|-then-smallest-x
/// tie rule, applied with a relative tolerance.
pub fn oracle_argmin(c: &ModelCaps, v: [f64; 4], k: i64) -> i64 {
    let e: Vec<(i64, f64)> = (-k..=k).map(|x| (x, oracle_energy(c, v, x))).collect();
    let emin = e.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let scale = Q_E * Q_E / c.csum_d1.min(c.csum_d2);
    e.iter()
        .filter(|p| p.1 <= emin + 1e-9 * scale)
        .map(|p| p.0)
        .min_by_key(|x| (x.abs(), *x))
        .unwrap()
}

/// Island charge moved by one d1 -> d2 electron with the island grounded:
/// the dots' charge `[1, -1] e` sets their potentials through the 2x2
/// block, and the island picks up `C_d1i1 phi1 + C_d2i1 phi2`.
pub fn oracle_delta_q(c: &ModelCaps) -> f64 {
    let i = c.i1.expect("island");
    let (a, b, d) = (c.csum_d1, -c.c_d1d2, c.csum_d2);
    let det = a * d - b * b;
    let (n1, n2) = (1.0, -1.0);
    let phi1 = (d * n1 - b * n2) / det;
    let phi2 = (a * n2 - b * n1) / det;
    let f = (i.c_d1 * phi1 + i.c_d2 * phi2).rem_euclid(1.0);
    f.min(1.0 - f)
}
