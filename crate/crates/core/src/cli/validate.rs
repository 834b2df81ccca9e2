//! Oracle suite behind `dqdcap validate`.

use serde_json::{json, Value};

use crate::analysis::{coulomb_period, theta_deg};
use crate::capsolve::{shapes, solve, SolveMode, SolveOptions};
use crate::charging::{
    config_energy, degeneracy_bias, delta_q, delta_q_fixed_island, stable_config, CompensationMode, IslandCaps,
    ModelCaps, Ray, compensated_bias,
};
use crate::units::{from_af, to_af, to_mv, EPS0, NM, Q_E};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

fn failed(name: &'static str, e: impl std::fmt::Display) -> Check {
    check(name, false, format!("error: {e}"))
}

fn vacuum(mode: SolveMode) -> SolveOptions {
    SolveOptions { mode, epsilon_r: 1.0, ..SolveOptions::default() }
}

fn toy_caps() -> ModelCaps {
    ModelCaps {
        csum_d1: from_af(2.0),
        csum_d2: from_af(2.0),
        c_d1d2: from_af(1.0),
        gate_d1: [from_af(1.0), 0.0, 0.0, 0.0],
        gate_d2: [0.0, from_af(1.0), 0.0, 0.0],
        i1: None,
        gate_i2: None,
    }
}

fn island_caps() -> ModelCaps {
    ModelCaps {
        csum_d1: from_af(15.0),
        csum_d2: from_af(15.0),
        c_d1d2: from_af(1.0),
        gate_d1: [from_af(2.5), from_af(0.5), from_af(0.2), from_af(0.15)],
        gate_d2: [from_af(0.5), from_af(2.5), from_af(0.15), from_af(0.2)],
        i1: Some(IslandCaps {
            csum: from_af(160.0),
            c_d1: from_af(1.8),
            c_d2: from_af(0.6),
            gate: [from_af(24.0), from_af(10.0), from_af(23.0), from_af(2.0)],
        }),
        gate_i2: None,
    }
}

fn sphere_check(name: &'static str, mode: SolveMode) -> Check {
    let exact = 4.0 * std::f64::consts::PI * EPS0 * 10.0 * NM;
    let mesh = shapes::sphere(10.0, 16);
    match solve(&mesh, &vacuum(mode)) {
        Ok(m) => {
            let c = m.entries[0][0];
            let err = c / exact - 1.0;
            check(
                name,
                err.abs() < 0.02 && mesh.len() >= 1536,
                format!("{} panels, C = {:.4} aF vs {:.4} aF ({:+.2}%)", mesh.len(), to_af(c), to_af(exact), 100.0 * err),
            )
        }
        Err(e) => failed(name, e),
    }
}

fn two_spheres() -> Check {
    let name = "two_sphere_mutual";
    let expected = 4.0 * std::f64::consts::PI * EPS0 * (5.0 * NM).powi(2) / (100.0 * NM);
    match solve(&shapes::two_spheres(5.0, 100.0, 8), &vacuum(SolveMode::Dense)) {
        Ok(m) => {
            let c = -m.entries[0][1];
            check(
                name,
                (c / expected - 1.0).abs() < 0.10,
                format!("C12 = {:.5} aF vs {:.5} aF", to_af(c), to_af(expected)),
            )
        }
        Err(e) => failed(name, e),
    }
}

fn plates() -> Check {
    let name = "parallel_plate_bound";
    let ideal = EPS0 * (100.0 * NM).powi(2) / (5.0 * NM);
    match solve(&shapes::parallel_plates(100.0, 5.0, 20), &vacuum(SolveMode::Dense)) {
        Ok(m) => {
            let c = -m.entries[0][1];
            check(name, c >= ideal, format!("C12 = {:.2} aF >= {:.2} aF", to_af(c), to_af(ideal)))
        }
        Err(e) => failed(name, e),
    }
}

fn toy_degeneracy() -> Check {
    let name = "toy_degeneracy";
    let ray = Ray { origin: (0.0, 0.0), direction: (1.0, -1.0) };
    let expected = -Q_E / (2.0 * 1e-18);
    match degeneracy_bias(&toy_caps(), &ray, 0, -0.3, 0.0) {
        Ok(t) => check(
            name,
            (t - expected).abs() < 1e-9,
            format!("x = 0/1 at V_SL = {:.4} mV (closed form {:.4} mV)", to_mv(t), to_mv(expected)),
        ),
        Err(e) => failed(name, e),
    }
}

fn toy_brute_force() -> Check {
    let name = "toy_stable_config";
    let caps = toy_caps();
    let mut mismatches = 0;
    let mut total = 0;
    for i in -20..=20 {
        for j in -20..=20 {
            let (v_sl, v_sr) = (0.0123 * i as f64, 0.0137 * j as f64);
            let Ok(b) = compensated_bias(&caps, v_sl, v_sr, CompensationMode::Approximate) else {
                mismatches += 1;
                continue;
            };
            let brute = (-12..=12).min_by(|a, c| {
                let ea = config_energy(&caps, &b, *a).unwrap_or(f64::INFINITY);
                let ec = config_energy(&caps, &b, *c).unwrap_or(f64::INFINITY);
                ea.total_cmp(&ec)
            });
            total += 1;
            if stable_config(&caps, v_sl, v_sr).ok() != brute {
                mismatches += 1;
            }
        }
    }
    check(name, mismatches == 0, format!("{mismatches} of {total} grid points differ from exhaustive search"))
}

fn induced_charge() -> Check {
    let name = "induced_charge_oracle";
    let caps = island_caps();
    // symmetric dots: (C_d1i1 - C_d2i1) / (Csum + C_d1d2)
    let closed = (1.8 - 0.6) / (15.0 + 1.0);
    match (delta_q(&caps), delta_q_fixed_island(&caps)) {
        (Ok(q), Ok(o)) => check(
            name,
            (q - o).abs() < 1e-6 && (o - closed).abs() < 1e-9,
            format!("pattern shift {q:.7} e, fixed island {o:.7} e, closed form {closed:.7} e"),
        ),
        (Err(e), _) | (_, Err(e)) => failed(name, e),
    }
}

fn arithmetic() -> Check {
    let name = "coulomb_period_and_angle";
    let period = coulomb_period(from_af(23.4)).map(to_mv);
    let comp = theta_deg(0.3, 0.1).and_then(|a| Ok(a + theta_deg(0.1, 0.3)?));
    match (period, comp) {
        (Ok(p), Ok(s)) => check(
            name,
            format!("{p:.3}") == "6.847" && s == 90.0,
            format!("e / 23.4 aF = {p:.4} mV, theta(a,b) + theta(b,a) = {s}"),
        ),
        (Err(e), _) | (_, Err(e)) => failed(name, e),
    }
}

pub fn run_checks() -> Vec<Check> {
    vec![
        sphere_check("sphere_dense", SolveMode::Dense),
        sphere_check("sphere_accelerated", SolveMode::Accelerated),
        two_spheres(),
        plates(),
        toy_degeneracy(),
        toy_brute_force(),
        induced_charge(),
        arithmetic(),
    ]
}

pub fn report_json(checks: &[Check]) -> Value {
    json!({
        "checks": checks.iter()
            .map(|c| json!({ "name": c.name, "pass": c.pass, "detail": c.detail }))
            .collect::<Vec<_>>(),
        "all_pass": checks.iter().all(|c| c.pass),
    })
}
