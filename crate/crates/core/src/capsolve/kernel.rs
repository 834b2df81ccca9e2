//! Potential of a uniformly charged rectangle.

use crate::geometry::{cross, dot, norm, sub, Panel, Vec3};

/// Gauss-Legendre nodes/weights on [0, 1] for two points.
const GL2: [(f64, f64); 2] = [
    (0.211_324_865_405_187_1, 0.5),
    (0.788_675_134_594_812_9, 0.5),
];

/// Beyond this many panel diagonals the 2x2 rule replaces the closed form.
const FAR_DIAGONALS: f64 = 4.0;

/// Antiderivative of `1/sqrt(x^2 + y^2 + z^2)` over x and y.
fn corner_term(x: f64, y: f64, z: f64) -> f64 {
    let az = z.abs();
    let r = (x * x + y * y + z * z).sqrt();
    let mut f = 0.0;
    if x != 0.0 {
        let rxz = (x * x + z * z).sqrt();
        f += x * (y / rxz).asinh();
    }
    if y != 0.0 {
        let ryz = (y * y + z * z).sqrt();
        f += y * (x / ryz).asinh();
    }
    if az > 0.0 && r > 0.0 {
        f -= az * (x * y / (az * r)).atan();
    }
    f
}

/// `∫∫ dA / |p - y|` over `[0,a] x [0,b]` in the plane z = 0, for the field
/// point `(px, py, z)`.
pub fn rect_integral(a: f64, b: f64, px: f64, py: f64, z: f64) -> f64 {
    let (x0, x1) = (-px, a - px);
    let (y0, y1) = (-py, b - py);
    corner_term(x1, y1, z) - corner_term(x0, y1, z) - corner_term(x1, y0, z)
        + corner_term(x0, y0, z)
}

/// Local frame of a panel: corner, unit edge directions, edge lengths and normal.
#[derive(Debug, Clone, Copy)]
pub struct PanelFrame {
    pub corner: Vec3,
    pub eu: Vec3,
    pub ev: Vec3,
    pub normal: Vec3,
    pub a: f64,
    pub b: f64,
    pub centroid: Vec3,
    pub diag: f64,
}

impl PanelFrame {
    pub fn new(p: &Panel) -> Self {
        let u = p.edge_u();
        let v = p.edge_v();
        let a = norm(u);
        let b = norm(v);
        let eu = u.map(|c| c / a);
        let ev = v.map(|c| c / b);
        let n = cross(eu, ev);
        let nn = norm(n);
        PanelFrame {
            corner: p.corner(),
            eu,
            ev,
            normal: n.map(|c| c / nn),
            a,
            b,
            centroid: p.centroid(),
            diag: (a * a + b * b).sqrt(),
        }
    }

    pub fn area(&self) -> f64 {
        self.a * self.b
    }

    /// `∫∫ dA / |x - y|` over the panel (nm).
    pub fn integral(&self, x: Vec3) -> f64 {
        let dc = sub(x, self.centroid);
        if dot(dc, dc) >= (FAR_DIAGONALS * self.diag).powi(2) {
            return self.integral_gauss(x);
        }
        let d = sub(x, self.corner);
        rect_integral(self.a, self.b, dot(d, self.eu), dot(d, self.ev), dot(d, self.normal))
    }

    fn integral_gauss(&self, x: Vec3) -> f64 {
        let mut s = 0.0;
        for (sv, wv) in GL2 {
            for (su, wu) in GL2 {
                let mut y = self.corner;
                for k in 0..3 {
                    y[k] += su * self.a * self.eu[k] + sv * self.b * self.ev[k];
                }
                s += wu * wv / norm(sub(x, y));
            }
        }
        s * self.area()
    }

    /// Mean of `1/|x - y|` over the panel (nm^-1): the potential coefficient
    /// before the `1/(4 pi eps)` factor.
    pub fn coefficient(&self, x: Vec3) -> f64 {
        self.integral(x) / self.area()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Polar integral about an interior point: sum over edges of
    /// `∫ r_edge(phi) dphi`, with adaptive Simpson on each edge.
    fn polar_oracle(a: f64, b: f64, px: f64, py: f64) -> f64 {
        let corners = [(0.0, 0.0), (a, 0.0), (a, b), (0.0, b)];
        let mut total = 0.0;
        for k in 0..4 {
            let (x0, y0) = corners[k];
            let (x1, y1) = corners[(k + 1) % 4];
            // distance from point to the edge line and the angles spanned
            let (ex, ey) = (x1 - x0, y1 - y0);
            let len = (ex * ex + ey * ey).sqrt();
            let (tx, ty) = (ex / len, ey / len);
            let h = ((x0 - px) * ty - (y0 - py) * tx).abs();
            let s0 = (x0 - px) * tx + (y0 - py) * ty;
            let s1 = s0 + len;
            let f = |phi: f64| h / phi.cos();
            let (p0, p1) = ((s0 / h).atan(), (s1 / h).atan());
            total += adaptive_simpson(&f, p0, p1, 1e-13);
        }
        total
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    /// Plain tensor Gauss-Legendre with many points for off-plane targets.
    fn tensor_oracle(a: f64, b: f64, p: Vec3, n: usize) -> f64 {
        // midpoint-refined composite 2-point Gauss on an n x n grid
        let mut s = 0.0;
        let (hu, hv) = (a / n as f64, b / n as f64);
        for i in 0..n {
            for j in 0..n {
                for (su, wu) in GL2 {
                    for (sv, wv) in GL2 {
                        let x = (i as f64 + su) * hu;
                        let y = (j as f64 + sv) * hv;
                        let r = ((x - p[0]).powi(2) + (y - p[1]).powi(2) + p[2] * p[2]).sqrt();
                        s += wu * wv * hu * hv / r;
                    }
                }
            }
        }
        s
    }

    #[test]
    fn self_term_matches_polar_quadrature() {
        for (a, b) in [(1.0, 1.0), (3.0, 1.0), (0.25, 2.0)] {
            let exact = rect_integral(a, b, a / 2.0, b / 2.0, 0.0);
            let oracle = polar_oracle(a, b, a / 2.0, b / 2.0);
            assert!((exact - oracle).abs() < 1e-6 * oracle, "{a}x{b}: {exact} vs {oracle}");
        }
        // unit square at its centre: 4 ln(1 + sqrt 2)
        let s = rect_integral(1.0, 1.0, 0.5, 0.5, 0.0);
        assert!((s - 4.0 * (1.0 + 2f64.sqrt()).ln()).abs() < 1e-13);
    }

    #[test]
    fn off_centre_in_plane_point() {
        let exact = rect_integral(2.0, 1.0, 0.3, 0.8, 0.0);
        let oracle = polar_oracle(2.0, 1.0, 0.3, 0.8);
        assert!((exact - oracle).abs() < 1e-6 * oracle);
    }

    #[test]
    fn off_plane_points_match_quadrature() {
        for p in [[0.5, 0.5, 0.7], [2.0, -1.0, 0.3], [-0.5, 0.2, -1.5], [1.5, 0.5, 0.0]] {
            let exact = rect_integral(1.0, 1.0, p[0], p[1], p[2]);
            let oracle = tensor_oracle(1.0, 1.0, p, 400);
            assert!((exact - oracle).abs() < 1e-6 * oracle, "{p:?}: {exact} vs {oracle}");
        }
    }

    #[test]
    fn far_field_tends_to_point_charge() {
        let panel = Panel {
            conductor: 0,
            vertices: [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [2.0, 2.0, 0.0], [0.0, 2.0, 0.0]],
        };
        let f = PanelFrame::new(&panel);
        let diam = f.diag;
        for r in [10.0 * diam + 1.0, 40.0 * diam] {
            let x = [1.0 + r * 0.6, 1.0, r * 0.8];
            let c = f.coefficient(x);
            assert!((c * r - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn closed_form_and_gauss_agree_at_switch_distance() {
        let panel = Panel {
            conductor: 0,
            vertices: [[0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [3.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
        };
        let f = PanelFrame::new(&panel);
        let d = FAR_DIAGONALS * f.diag;
        let x = [1.5 + d * 0.6, 0.5 + d * 0.0, d * 0.8];
        let closed = rect_integral(3.0, 1.0, x[0], x[1], x[2]);
        let gauss = f.integral_gauss(x);
        assert!((closed - gauss).abs() < 1e-4 * closed);
    }
}
