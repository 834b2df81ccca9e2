//! Analytic test bodies built from flat rectangular panels.

use crate::geometry::{cross, dot, norm, sub, Panel, PanelMesh, Vec3};

fn normalize(v: Vec3) -> Vec3 {
    let l = norm(v);
    v.map(|c| c / l)
}

fn scale(v: Vec3, s: f64) -> Vec3 {
    v.map(|c| c * s)
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Solid angle of the spherical triangle spanned by unit vectors.
fn solid_angle(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let num = dot(a, cross(b, c));
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den).abs()
}

/// Rectangle centred on `center` with orthonormal edges `eu`, `ev`.
fn rectangle(conductor: usize, center: Vec3, eu: Vec3, ev: Vec3, a: f64, b: f64) -> Panel {
    let c0 = sub(center, add(scale(eu, 0.5 * a), scale(ev, 0.5 * b)));
    Panel {
        conductor,
        vertices: [
            c0,
            add(c0, scale(eu, a)),
            add(add(c0, scale(eu, a)), scale(ev, b)),
            add(c0, scale(ev, b)),
        ],
    }
}

/// Sphere of radius `r` (nm) centred at `c`: each cube face is split into
/// `m x m` cells and every cell becomes one tangent rectangle whose area
/// equals that of its spherical patch. Yields `6 m^2` panels.
pub fn sphere_panels(conductor: usize, c: Vec3, r: f64, m: usize) -> Vec<Panel> {
    let mut out = Vec::with_capacity(6 * m * m);
    for axis in 0..3 {
        for sign in [-1.0, 1.0] {
            let (ua, va) = if sign > 0.0 {
                ((axis + 1) % 3, (axis + 2) % 3)
            } else {
                ((axis + 2) % 3, (axis + 1) % 3)
            };
            let dir = |s: f64, t: f64| {
                let mut p = [0.0; 3];
                p[axis] = sign;
                p[ua] = s;
                p[va] = t;
                normalize(p)
            };
            let g = |i: usize| -1.0 + 2.0 * i as f64 / m as f64;
            for j in 0..m {
                for i in 0..m {
                    let p = [dir(g(i), g(j)), dir(g(i + 1), g(j)), dir(g(i + 1), g(j + 1)), dir(g(i), g(j + 1))];
                    let n = normalize(add(add(p[0], p[1]), add(p[2], p[3])));
                    let omega = solid_angle(p[0], p[1], p[2]) + solid_angle(p[0], p[2], p[3]);
                    let u = scale(add(sub(p[1], p[0]), sub(p[2], p[3])), 0.5);
                    let v = scale(add(sub(p[3], p[0]), sub(p[2], p[1])), 0.5);
                    let eu = normalize(sub(u, scale(n, dot(u, n))));
                    let ev = cross(n, eu);
                    let (a0, b0) = (dot(u, eu).abs(), dot(v, ev).abs());
                    let s = (omega / (a0 * b0)).sqrt() * r;
                    out.push(rectangle(conductor, add(c, scale(n, r)), eu, ev, a0 * s, b0 * s));
                }
            }
        }
    }
    out
}

pub fn sphere(r: f64, m: usize) -> PanelMesh {
    PanelMesh {
        conductor_names: vec!["sphere".into()],
        panels: sphere_panels(0, [0.0; 3], r, m),
    }
}

/// Two spheres of radius `r` with centres `d` apart along x.
pub fn two_spheres(r: f64, d: f64, m: usize) -> PanelMesh {
    let mut panels = sphere_panels(0, [0.0; 3], r, m);
    panels.extend(sphere_panels(1, [d, 0.0, 0.0], r, m));
    PanelMesh {
        conductor_names: vec!["s1".into(), "s2".into()],
        panels,
    }
}

/// Two zero-thickness square sheets of side `side`, `gap` apart along z,
/// each split into `m x m` panels.
pub fn parallel_plates(side: f64, gap: f64, m: usize) -> PanelMesh {
    let h = side / m as f64;
    let mut panels = Vec::with_capacity(2 * m * m);
    for (cond, z) in [(0, 0.0), (1, gap)] {
        for j in 0..m {
            for i in 0..m {
                let center = [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h, z];
                panels.push(rectangle(cond, center, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], h, h));
            }
        }
    }
    PanelMesh {
        conductor_names: vec!["bottom".into(), "top".into()],
        panels,
    }
}
