use super::device::{Aabb, DeviceSpec, Vec3, GEOM_TOL};
use crate::error::{Error, Result};

/// Planar rectangular panel, vertices in nm.
///
/// Vertex order is `corner, corner + u, corner + u + v, corner + v`, so the
/// outward normal is `u x v` for meshed boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub conductor: usize,
    pub vertices: [Vec3; 4],
}

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

impl Panel {
    pub fn corner(&self) -> Vec3 {
        self.vertices[0]
    }

    pub fn edge_u(&self) -> Vec3 {
        sub(self.vertices[1], self.vertices[0])
    }

    pub fn edge_v(&self) -> Vec3 {
        sub(self.vertices[3], self.vertices[0])
    }

    pub fn centroid(&self) -> Vec3 {
        let mut c = [0.0; 3];
        for v in &self.vertices {
            for k in 0..3 {
                c[k] += 0.25 * v[k];
            }
        }
        c
    }

    pub fn area(&self) -> f64 {
        norm(self.edge_u()) * norm(self.edge_v())
    }
}

/// Flat panel list with a conductor tag on each panel.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PanelMesh {
    pub conductor_names: Vec<String>,
    pub panels: Vec<Panel>,
}

impl PanelMesh {
    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    pub fn n_conductors(&self) -> usize {
        self.conductor_names.len()
    }

    pub fn panel_count(&self) -> Vec<usize> {
        let mut n = vec![0; self.n_conductors()];
        for p in &self.panels {
            n[p.conductor] += 1;
        }
        n
    }

    pub fn area_per_conductor(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.n_conductors()];
        for p in &self.panels {
            a[p.conductor] += p.area();
        }
        a
    }
}

/// Subdivide every box face into rectangles whose edges do not exceed
/// `h_max` nm. Faces shared by two boxes of the same conductor are interior
/// and carry no panels.
///
/// Ordering is box declaration order, then faces `-x, +x, -y, +y, -z, +z`,
/// then row-major within a face.
pub fn mesh_device(spec: &DeviceSpec, h_max: f64) -> Result<PanelMesh> {
    if !(h_max.is_finite() && h_max > 0.0) {
        return Err(Error::Validation(format!("h_max must be positive, got {h_max}")));
    }
    let placed: Vec<Aabb> = (0..spec.boxes.len()).map(|i| spec.placed_box(i)).collect();
    let mut panels = Vec::new();

    for (i, b) in spec.boxes.iter().enumerate() {
        let bx = placed[i];
        let siblings: Vec<Aabb> = spec
            .boxes
            .iter()
            .enumerate()
            .filter(|(j, o)| *j != i && o.conductor == b.conductor)
            .map(|(j, _)| placed[j])
            .collect();
        let dims = bx.dims();
        let h_axis: Vec3 = std::array::from_fn(|k| h_max.min(dims[k] / b.min_divisions as f64));

        for axis in 0..3 {
            for positive in [false, true] {
                let plane = if positive { bx.max[axis] } else { bx.min[axis] };
                let (ua, va) = if positive {
                    ((axis + 1) % 3, (axis + 2) % 3)
                } else {
                    ((axis + 2) % 3, (axis + 1) % 3)
                };

                let mut ubreaks = vec![bx.min[ua], bx.max[ua]];
                let mut vbreaks = vec![bx.min[va], bx.max[va]];
                for s in &siblings {
                    let facing = if positive { s.min[axis] } else { s.max[axis] };
                    let overlaps = s.min[ua] < bx.max[ua] - GEOM_TOL
                        && bx.min[ua] < s.max[ua] - GEOM_TOL
                        && s.min[va] < bx.max[va] - GEOM_TOL
                        && bx.min[va] < s.max[va] - GEOM_TOL;
                    if (facing - plane).abs() <= GEOM_TOL && overlaps {
                        ubreaks.extend([s.min[ua], s.max[ua]]);
                        vbreaks.extend([s.min[va], s.max[va]]);
                    }
                }
                let us = subdivide(&mut ubreaks, bx.min[ua], bx.max[ua], h_axis[ua]);
                let vs = subdivide(&mut vbreaks, bx.min[va], bx.max[va], h_axis[va]);

                for vw in vs.windows(2) {
                    for uw in us.windows(2) {
                        let point = |u: f64, v: f64| {
                            let mut p = [0.0; 3];
                            p[axis] = plane;
                            p[ua] = u;
                            p[va] = v;
                            p
                        };
                        let panel = Panel {
                            conductor: b.conductor,
                            vertices: [
                                point(uw[0], vw[0]),
                                point(uw[1], vw[0]),
                                point(uw[1], vw[1]),
                                point(uw[0], vw[1]),
                            ],
                        };
                        let c = panel.centroid();
                        if siblings.iter().any(|s| s.contains_closed(c)) {
                            continue;
                        }
                        panels.push(panel);
                    }
                }
            }
        }
    }

    Ok(PanelMesh {
        conductor_names: spec.conductor_names(),
        panels,
    })
}

/// Grid coordinates on `[lo, hi]` honouring the given breakpoints, with no
/// cell longer than `h`.
fn subdivide(breaks: &mut Vec<f64>, lo: f64, hi: f64, h: f64) -> Vec<f64> {
    breaks.retain(|&x| x >= lo - GEOM_TOL && x <= hi + GEOM_TOL);
    breaks.iter_mut().for_each(|x| *x = x.clamp(lo, hi));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= GEOM_TOL);
    // keep the exact box extremes
    *breaks.first_mut().unwrap() = lo;
    *breaks.last_mut().unwrap() = hi;

    let mut out = vec![lo];
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        let n = ((len / h) - 1e-9).ceil().max(1.0) as usize;
        for k in 1..n {
            out.push(w[0] + len * k as f64 / n as f64);
        }
        out.push(w[1]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::device::{load_device, reference_device};

    fn single_box(dims: Vec3) -> DeviceSpec {
        load_device(&format!(
            r#"{{"boxes": [
                {{"name": "a", "group": "d1", "role": "d1", "min_nm": [0, 0, 0], "dims_nm": {dims:?}}},
                {{"name": "b", "group": "d2", "role": "d2", "min_nm": [500, 0, 0], "dims_nm": [1, 1, 1]}}
            ]}}"#
        ))
        .unwrap()
    }

    fn count_for(mesh: &PanelMesh, cond: usize) -> usize {
        mesh.panel_count()[cond]
    }

    #[test]
    fn counts_panels_of_one_box() {
        let spec = single_box([40.0, 40.0, 10.0]);
        let mesh = mesh_device(&spec, 10.0).unwrap();
        assert_eq!(count_for(&mesh, 0), 2 * 16 + 4 * 4);
        let fine = mesh_device(&spec, 5.0).unwrap();
        assert_eq!(count_for(&fine, 0), 4 * 48);
    }

    #[test]
    fn rejects_non_positive_h() {
        let spec = single_box([40.0, 40.0, 10.0]);
        assert!(mesh_device(&spec, 0.0).is_err());
        assert!(mesh_device(&spec, f64::NAN).is_err());
    }

    #[test]
    fn panels_are_rectangles_with_outward_normals() {
        let spec = single_box([30.0, 20.0, 10.0]);
        let mesh = mesh_device(&spec, 7.0).unwrap();
        let bx = spec.placed_box(0);
        let centre = [15.0, 10.0, 5.0];
        for p in mesh.panels.iter().filter(|p| p.conductor == 0) {
            assert_eq!(dot(p.edge_u(), p.edge_v()), 0.0);
            assert!(norm(p.edge_u()) <= 7.0 + 1e-12 && norm(p.edge_v()) <= 7.0 + 1e-12);
            let n = cross(p.edge_u(), p.edge_v());
            assert!(dot(n, sub(p.centroid(), centre)) > 0.0);
            assert!(bx.contains_closed(p.centroid()));
        }
    }

    #[test]
    fn min_divisions_refines_small_boxes() {
        let spec = reference_device();
        let mesh = mesh_device(&spec, 10.0).unwrap();
        let d1 = spec.conductor_with_role(crate::geometry::Role::D1).unwrap();
        // 40x40x10 dot with at least four cells per edge
        assert_eq!(count_for(&mesh, d1), 6 * 16);
    }

    #[test]
    fn contact_faces_carry_no_panels() {
        let spec = load_device(
            r#"{"boxes": [
                {"name": "a", "group": "d1", "role": "d1", "min_nm": [0, 0, -30], "dims_nm": [10, 10, 10]},
                {"name": "b", "group": "d2", "role": "d2", "min_nm": [50, 0, -30], "dims_nm": [10, 10, 10]},
                {"name": "l1", "group": "L", "min_nm": [0, 0, 0], "dims_nm": [40, 10, 10]},
                {"name": "l2", "group": "L", "min_nm": [0, 10, 0], "dims_nm": [10, 30, 10]}
            ]}"#,
        )
        .unwrap();
        let mesh = mesh_device(&spec, 5.0).unwrap();
        let area = mesh.area_per_conductor()[2];
        // union surface of the L: both boxes minus twice the shared 10x10 face
        let expected = 2.0 * (400.0 + 100.0 + 400.0) + 2.0 * (300.0 + 100.0 + 300.0) - 2.0 * 100.0;
        assert!((area - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn meshing_is_deterministic() {
        let spec = reference_device();
        let a = mesh_device(&spec, 10.0).unwrap();
        let b = mesh_device(&spec, 10.0).unwrap();
        assert_eq!(a, b);
    }
}
