//! Acceptance gate: one PASS/FAIL line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{model_caps, oracle_argmin, oracle_compensation, oracle_delta_q};
use dqdcap::analysis::{
    analyse_cell, compare, coulomb_period, dotsize_sweep, extract, misalign_sweep, theta_deg, CellStatus,
    MeasuredTable, SweepSettings,
};
use dqdcap::capsolve::{shapes, solve, MaxwellMatrix, SolveMode, SolveOptions};
use dqdcap::charging::{degeneracy_bias, delta_q, delta_q_along, reduce_caps, stable_config, Gate, ModelCaps, Ray};
use dqdcap::geometry::{mesh_device, reference_device, DeviceSpec};
use dqdcap::units::{from_af, to_af, to_mv, EPS0, NM};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn spec() -> DeviceSpec {
    reference_device()
}

/// Reference device at h = 10 nm, dense and accelerated.
fn reference_matrices() -> &'static (MaxwellMatrix, MaxwellMatrix) {
    static M: OnceLock<(MaxwellMatrix, MaxwellMatrix)> = OnceLock::new();
    M.get_or_init(|| {
        let s = spec();
        let dense = extract(&s, 10.0, &SolveOptions::dense()).expect("dense solve");
        let acc = extract(&s, 10.0, &SolveOptions::default()).expect("accelerated solve");
        (dense, acc)
    })
}

fn aligned_caps() -> ModelCaps {
    reduce_caps(&reference_matrices().1, &spec().roles()).expect("reduce")
}

fn sphere_exact() -> f64 {
    4.0 * std::f64::consts::PI * EPS0 * 10.0 * NM
}

fn vacuum(mode: SolveMode) -> SolveOptions {
    SolveOptions { mode, epsilon_r: 1.0, ..SolveOptions::default() }
}

fn c1_sphere() -> Check {
    let mesh = shapes::sphere(10.0, 16);
    ensure!(mesh.len() >= 1536, "only {} panels", mesh.len());
    let exact = sphere_exact();
    let mut out = vec![format!("{} panels", mesh.len())];
    for mode in [SolveMode::Dense, SolveMode::Accelerated] {
        let (m, t) = timed(|| solve(&mesh, &vacuum(mode)));
        let c = m.map_err(|e| e.to_string())?.entries[0][0];
        let err = c / exact - 1.0;
        ensure!(err.abs() < 0.02, "{mode}: C = {:.4} aF, error {:.2}%", to_af(c), 100.0 * err);
        ensure!(t < Duration::from_secs(30), "{mode}: {t:?}");
        out.push(format!("{mode} {:.4} aF ({:+.2}%, {:.2} s)", to_af(c), 100.0 * err, t.as_secs_f64()));
    }
    Ok(out.join(", "))
}

fn c2_maxwell_properties() -> Check {
    let (dense, acc) = reference_matrices();
    let mut out = Vec::new();
    for m in [dense, acc] {
        let mode = m.solver.mode;
        ensure!(m.asymmetry <= 0.02, "{mode}: asymmetry {:.3e}", m.asymmetry);
        let v = m.property_violations(1e-3);
        ensure!(v.is_empty(), "{mode}: {v:?}");
        let min_row = m.row_sums().into_iter().fold(f64::INFINITY, f64::min);
        ensure!(min_row >= 0.0, "{mode}: row sum {min_row:e}");
        out.push(format!("{mode}: asymmetry {:.2e}, min row sum {:.3} aF", m.asymmetry, to_af(min_row)));
    }
    Ok(out.join("; "))
}

fn c3_accelerated_vs_dense() -> Check {
    let (dense, acc) = reference_matrices();
    let n = dense.n_cond();
    let mut worst = (0.0f64, 0, 0);
    for j in 0..n {
        for k in 0..n {
            let r = (acc.entries[j][k] - dense.entries[j][k]).abs() / dense.entries[j][k].abs();
            if r > worst.0 {
                worst = (r, j, k);
            }
        }
    }
    ensure!(
        worst.0 <= 0.01,
        "entry ({}, {}) differs by {:.3}%",
        dense.conductor_names[worst.1],
        dense.conductor_names[worst.2],
        100.0 * worst.0
    );
    let mesh = mesh_device(&spec(), 5.5).map_err(|e| e.to_string())?;
    ensure!((16_000..=20_000).contains(&mesh.len()), "refined mesh has {} panels", mesh.len());
    let (a, ta) = timed(|| solve(&mesh, &SolveOptions::default()));
    a.map_err(|e| e.to_string())?;
    let (d, td) = timed(|| solve(&mesh, &SolveOptions::dense()));
    d.map_err(|e| e.to_string())?;
    ensure!(ta < td, "accelerated {ta:?} not faster than dense {td:?}");
    Ok(format!(
        "worst entry {:.3}% at ({}, {}); {} panels: accelerated {:.1} s, dense {:.1} s",
        100.0 * worst.0,
        dense.conductor_names[worst.1],
        dense.conductor_names[worst.2],
        mesh.len(),
        ta.as_secs_f64(),
        td.as_secs_f64()
    ))
}

fn c4_aligned_symmetry() -> Check {
    let s = spec();
    let c = analyse_cell(&reference_matrices().1, &s, &SweepSettings::default(), (0.0, 0.0, 40.0));
    ensure!(c.status == CellStatus::Ok, "cell status {:?}", c.status);
    ensure!((c.theta - 45.0).abs() <= 1.0, "theta {}", c.theta);
    ensure!((c.ratio() - 1.0).abs() <= 0.02, "ratio {}", c.ratio());
    Ok(format!("theta {:.3} deg, C_SLd1/C_SRd2 {:.4}", c.theta, c.ratio()))
}

fn dx_row() -> &'static dqdcap::analysis::SweepMap {
    static M: OnceLock<dqdcap::analysis::SweepMap> = OnceLock::new();
    M.get_or_init(|| {
        let dx: Vec<f64> = (0..=10).map(|i| -50.0 + 10.0 * i as f64).collect();
        misalign_sweep(&spec(), &dx, &[0.0], &SweepSettings::default()).expect("sweep")
    })
}

fn c5_misalignment_trend() -> Check {
    let map = dx_row();
    ensure!(map.failed() == 0, "{} failed cells", map.failed());
    let thetas: Vec<f64> = map.cells.iter().map(|c| c.theta).collect();
    ensure!(thetas.windows(2).all(|w| w[1] < w[0]), "theta not decreasing: {thetas:?}");
    let r = map.cell(-50.0, 0.0).ok_or("no (-50, 0) cell")?.ratio();
    ensure!((r / 1.93 - 1.0).abs() <= 0.35, "ratio at (-50, 0) = {r}");
    Ok(format!(
        "theta {:.2} .. {:.2} deg strictly decreasing; ratio at (-50,0) {:.3}",
        thetas[0],
        thetas[thetas.len() - 1],
        r
    ))
}

fn c6_absolute_band() -> Check {
    let caps = aligned_caps();
    let c = to_af(caps.gate_d1[Gate::SL.index()]);
    ensure!(c >= 2.31 / 2.0 && c <= 2.31 * 2.0, "C_SLd1 = {c} aF");
    let table = MeasuredTable::from_json(include_str!("../data/set1_measured.json")).map_err(|e| e.to_string())?;
    let report = compare(&reference_matrices().1, &spec().roles(), &table).map_err(|e| e.to_string())?;
    let published = [("B", 25.0), ("SL", 24.3), ("SR", 10.3), ("g1", 23.4)];
    let mut out = vec![format!("C_SLd1 {c:.3} aF")];
    for (gate, value) in published {
        let row = report.rows.iter().find(|r| r.gate == gate).ok_or(format!("no {gate} row"))?;
        ensure!(row.reference.map(to_af) == Some(value), "{gate}: reference {:?}", row.reference);
        let ratio = to_af(row.calculated) / value;
        ensure!((1.0 / 2.5..=2.5).contains(&ratio), "{gate}: {} aF vs {value} aF", to_af(row.calculated));
        out.push(format!("{gate} {:.1}/{value}", to_af(row.calculated)));
    }
    Ok(out.join(", "))
}

fn c7_delta_q() -> Check {
    let settings = SweepSettings { solver: SolveOptions::dense(), ..Default::default() };
    let map = dotsize_sweep(&spec(), &[10.0, 20.0, 30.0, 40.0, 50.0], &settings).map_err(|e| e.to_string())?;
    ensure!(map.failed() == 0, "{} failed cells", map.failed());
    let q: Vec<f64> = map.cells.iter().map(|c| c.delta_q).collect();
    ensure!((0.025..=0.10).contains(&q[3]), "R=40: {}", q[3]);
    ensure!((0.01..=0.04).contains(&q[0]), "R=10: {}", q[0]);
    ensure!(q.windows(2).all(|w| w[1] > w[0]), "not increasing: {q:?}");
    Ok(format!("dq(R=10..50) = {}", q.iter().map(|v| format!("{v:.5}")).collect::<Vec<_>>().join(", ")))
}

fn c8_oracle_equivalence() -> Check {
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let strategy = (
        model_caps(),
        proptest::array::uniform5((-0.1..0.1f64, -0.1..0.1f64)),
        0.0..std::f64::consts::TAU,
    );
    let (mut points, mut roots) = (0, 0);
    let mut worst_dq = 0.0f64;
    for case in 0..100 {
        let (caps, biases, angle) = strategy.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        for (v_sl, v_sr) in biases {
            let x = stable_config(&caps, v_sl, v_sr).map_err(|e| e.to_string())?;
            let (g1, g2) = oracle_compensation(&caps, v_sl, v_sr);
            let brute = oracle_argmin(&caps, [v_sl, v_sr, g1, g2], 64);
            ensure!(x == brute, "case {case}: stable_config {x} vs exhaustive {brute}");
            points += 1;
        }

        // grid scan along a ray versus bisection roots over the whole ray
        let ray = Ray { origin: (0.0, 0.0), direction: (angle.cos(), angle.sin()) };
        let (t0, t1, steps) = (-0.5, 0.5, 1000);
        let step = (t1 - t0) / steps as f64;
        let scan: Vec<i64> = (0..=steps)
            .map(|i| {
                let (a, b) = ray.at(t0 + i as f64 * step);
                stable_config(&caps, a, b)
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for i in 0..steps {
            let (a, b) = (scan[i], scan[i + 1]);
            for k in a.min(b)..a.max(b) {
                let t = degeneracy_bias(&caps, &ray, k, t0, t1).map_err(|e| e.to_string())?;
                let (lo, hi) = (t0 + i as f64 * step, t0 + (i + 1) as f64 * step);
                ensure!(t >= lo - step && t <= hi + step, "case {case}: root {t} outside scan step [{lo}, {hi}]");
                roots += 1;
            }
        }

        let q = delta_q_along(&caps, Gate::G1).map_err(|e| e.to_string())?;
        let err = (q - oracle_delta_q(&caps)).abs();
        ensure!(err <= 1e-6, "case {case}: dq {q} vs oracle {}", oracle_delta_q(&caps));
        worst_dq = worst_dq.max(err);
    }
    Ok(format!("100 models: {points} bias points, {roots} roots, worst dq error {worst_dq:.1e} e"))
}

fn c9_invariance() -> Check {
    let caps = aligned_caps();
    let q = delta_q(&caps).map_err(|e| e.to_string())?;
    let mut scaled = caps;
    scaled.i1.as_mut().ok_or("no island")?.gate[Gate::G1.index()] *= 10.0;
    let qs = delta_q(&scaled).map_err(|e| e.to_string())?;
    ensure!((qs - q).abs() <= 1e-9, "x10 C_g1i1: {q} -> {qs}");
    let mut spread = 0.0f64;
    for g in [Gate::SL, Gate::SR, Gate::G1, Gate::G2] {
        let qg = delta_q_along(&caps, g).map_err(|e| e.to_string())?;
        spread = spread.max((qg - q).abs());
    }
    ensure!(spread <= 1e-6, "gate spread {spread}");

    let mut pairs = vec![(0.1, 0.3), (8.36, 0.0475), (1.0, 1.0), (0.154, 0.1541)];
    pairs.extend(dx_row().cells.iter().map(|c| (c.dv_sl, c.dv_sr)));
    for (a, b) in pairs {
        let s = theta_deg(a, b).map_err(|e| e.to_string())? + theta_deg(b, a).map_err(|e| e.to_string())?;
        ensure!(s == 90.0, "theta({a}, {b}) + theta({b}, {a}) = {s}");
    }
    let db_min = dx_row().cells.iter().map(|c| c.dv_sl_db).fold(f64::INFINITY, f64::min);
    ensure!(db_min == 0.0, "dB minimum {db_min}");
    let p = to_mv(coulomb_period(from_af(23.4)).map_err(|e| e.to_string())?);
    ensure!(format!("{p:.3}") == "6.847", "e/23.4 aF = {p} mV");
    Ok(format!("dq {q:.6} (x10 lever diff {:.1e}, gate spread {spread:.1e}), e/23.4 aF = {p:.4} mV", (qs - q).abs()))
}

fn c10_convergence() -> Check {
    let exact = sphere_exact();
    let errs = [4, 8, 16, 32]
        .iter()
        .map(|&m| {
            solve(&shapes::sphere(10.0, m), &vacuum(SolveMode::Dense)).map(|r| (r.entries[0][0] - exact).abs() / exact)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    ensure!(errs.windows(2).all(|w| w[1] < w[0]), "sphere errors {errs:?}");

    let gaps = [10.0, 1.0, 0.1, 0.01, 0.001];
    let mut c = Vec::new();
    for g in gaps {
        let mut s = spec();
        s.air_gap_nm = g;
        let m = extract(&s, 10.0, &SolveOptions::dense()).map_err(|e| e.to_string())?;
        c.push(reduce_caps(&m, &s.roles()).map_err(|e| e.to_string())?.gate_d1[Gate::SL.index()]);
    }
    let last = c[c.len() - 1];
    let d: Vec<f64> = c.iter().map(|v| (v - last).abs()).collect();
    ensure!(d.windows(2).all(|w| w[1] < w[0]), "air-gap differences {d:?}");
    Ok(format!(
        "sphere errors {}; C_SLd1 over gaps {} aF",
        errs.iter().map(|e| format!("{:.2e}", e)).collect::<Vec<_>>().join(" > "),
        c.iter().map(|v| format!("{:.5}", to_af(*v))).collect::<Vec<_>>().join(", ")
    ))
}

fn c11_full_sweep() -> Check {
    let dir = std::env::temp_dir().join(format!("dqdcap-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let csv = dir.join("misalign.csv");
    let (out, t) = timed(|| {
        std::process::Command::new(env!("CARGO_BIN_EXE_dqdcap"))
            .args(["sweep-misalign", "--mode", "dense", "--h-max", "20", "--jobs", "8"])
            .args(["--dx", "-90:90:10", "--dy", "-50:50:10", "--out"])
            .arg(&csv)
            .output()
    });
    let out = out.map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    ensure!(t < Duration::from_secs(30 * 60), "took {t:?}");
    let text = std::fs::read_to_string(&csv).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    ensure!(rows.len() == 209, "{} data rows", rows.len());
    ensure!(rows.iter().all(|r| r.len() == 10), "ragged rows");
    let bad = rows.iter().filter(|r| r[9] != "ok").count();
    ensure!(bad == 0, "{bad} cells not ok");
    let mut cells: Vec<(i64, i64)> = rows.iter().map(|r| (r[0].parse().unwrap_or(999), r[1].parse().unwrap_or(999))).collect();
    cells.sort();
    cells.dedup();
    ensure!(cells.len() == 209, "{} distinct cells", cells.len());
    let db_min = rows.iter().filter_map(|r| r[7].parse::<f64>().ok()).fold(f64::INFINITY, f64::min);
    ensure!(db_min == 0.0, "dB minimum {db_min}");
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("209 rows in {:.1} s", t.as_secs_f64()))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Check); 11] = [
        (1, "analytic sphere", c1_sphere),
        (2, "Maxwell properties", c2_maxwell_properties),
        (3, "accelerated vs dense", c3_accelerated_vs_dense),
        (4, "aligned symmetry", c4_aligned_symmetry),
        (5, "misalignment trend", c5_misalignment_trend),
        (6, "absolute band", c6_absolute_band),
        (7, "induced charge vs dot size", c7_delta_q),
        (8, "oracle equivalence", c8_oracle_equivalence),
        (9, "invariance suite", c9_invariance),
        (10, "convergence", c10_convergence),
        (11, "full misalignment sweep", c11_full_sweep),
    ];
    let mut failed = 0;
    for (n, name, f) in criteria {
        let (r, t) = timed(|| catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into())));
        match r {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail} [{:.1} s]", t.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {n:>2} {name}: {detail} [{:.1} s]", t.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
