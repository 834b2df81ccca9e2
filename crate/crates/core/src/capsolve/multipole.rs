//! Cartesian Taylor expansion of `1/|x - y|` about a cluster centre.
//!
//! With `R = x - c`, the far-field potential of a cluster is
//! `sum_k a_k(R) m_k`, where `a_k = (1/k!) D_y^k |x - y|^-1` at `y = c` and
//! `m_k = sum_j q_j <(y - c)^k>_j` are its moments.

use super::kernel::PanelFrame;
use crate::geometry::Vec3;

/// Multi-indices `|k| <= p`, graded by total degree.
#[derive(Debug, Clone)]
pub(crate) struct Expansion {
    pub order: usize,
    pub terms: Vec<[usize; 3]>,
    gauss: Vec<(f64, f64)>,
}

impl Expansion {
    pub fn new(order: usize) -> Self {
        let mut terms = Vec::new();
        for deg in 0..=order {
            for k0 in (0..=deg).rev() {
                for k1 in (0..=deg - k0).rev() {
                    terms.push([k0, k1, deg - k0 - k1]);
                }
            }
        }
        Expansion {
            order,
            terms,
            gauss: gauss_legendre_unit(order / 2 + 1),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    fn slot(&self, k: [usize; 3]) -> usize {
        let s = self.order + 1;
        (k[0] * s + k[1]) * s + k[2]
    }

    /// Taylor coefficients `a_k(r)` in `terms` order.
    ///
    /// Recurrence: `|k| R^2 a_k = (2|k| - 1) sum_i R_i a_{k-e_i}
    /// - (|k| - 1) sum_i a_{k-2e_i}`.
    pub fn coefficients(&self, r: Vec3, scratch: &mut Vec<f64>, out: &mut [f64]) {
        let s = self.order + 1;
        scratch.clear();
        scratch.resize(s * s * s, 0.0);
        let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
        for (t, &k) in self.terms.iter().enumerate() {
            let deg = k[0] + k[1] + k[2];
            let v = if deg == 0 {
                1.0 / r2.sqrt()
            } else {
                let mut first = 0.0;
                let mut second = 0.0;
                for i in 0..3 {
                    if k[i] >= 1 {
                        let mut km = k;
                        km[i] -= 1;
                        first += r[i] * scratch[self.slot(km)];
                    }
                    if k[i] >= 2 {
                        let mut km = k;
                        km[i] -= 2;
                        second += scratch[self.slot(km)];
                    }
                }
                let d = deg as f64;
                ((2.0 * d - 1.0) * first - (d - 1.0) * second) / (d * r2)
            };
            scratch[self.slot(k)] = v;
            out[t] = v;
        }
    }

    /// Panel averages `<(y - c)^k>` in `terms` order, exact for `|k| <= p`.
    pub fn panel_moments(&self, f: &PanelFrame, c: Vec3, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let s = self.order + 1;
        let mut pw = vec![[0.0f64; 3]; s];
        for &(sv, wv) in &self.gauss {
            for &(su, wu) in &self.gauss {
                let mut d = [0.0; 3];
                for k in 0..3 {
                    d[k] = f.corner[k] + su * f.a * f.eu[k] + sv * f.b * f.ev[k] - c[k];
                }
                for k in 0..3 {
                    pw[0][k] = 1.0;
                }
                for e in 1..s {
                    for k in 0..3 {
                        pw[e][k] = pw[e - 1][k] * d[k];
                    }
                }
                let w = wu * wv;
                for (t, kk) in self.terms.iter().enumerate() {
                    out[t] += w * pw[kk[0]][0] * pw[kk[1]][1] * pw[kk[2]][2];
                }
            }
        }
    }
}

/// Gauss-Legendre rule on [0, 1] by Newton iteration on `P_n`.
pub(crate) fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Panel;

    #[test]
    fn gauss_rules_integrate_polynomials() {
        for n in 1..6 {
            let g = gauss_legendre_unit(n);
            for deg in 0..(2 * n) {
                let s: f64 = g.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((s - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    /// Point sources against the classical truncation bound
    /// `sum |q| / (R - r) (r / R)^(p+1)`.
    #[test]
    fn expansion_converges_to_direct_sum() {
        let sources: [(Vec3, f64); 3] = [([0.3, -0.2, 0.1], 1.0), ([-0.4, 0.1, 0.35], -0.5), ([0.1, 0.45, -0.3], 2.0)];
        let x = [3.0, 1.5, -2.0];
        let direct: f64 = sources
            .iter()
            .map(|(y, q)| q / ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt())
            .sum();
        let rx = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        for p in 0..8 {
            let e = Expansion::new(p);
            let mut a = vec![0.0; e.len()];
            let mut scratch = Vec::new();
            e.coefficients(x, &mut scratch, &mut a);
            let mut approx = 0.0;
            let mut bound = 0.0;
            for (y, q) in &sources {
                for (t, k) in e.terms.iter().enumerate() {
                    approx += q * a[t] * y[0].powi(k[0] as i32) * y[1].powi(k[1] as i32) * y[2].powi(k[2] as i32);
                }
                let ry = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
                bound += q.abs() / (rx - ry) * (ry / rx).powi(p as i32 + 1);
            }
            let err = (approx - direct).abs();
            assert!(err <= bound * (1.0 + 1e-9) + 1e-15, "p={p}: {err} > {bound}");
            if p == 7 {
                assert!(err < 1e-6 * direct.abs());
            }
        }
    }

    #[test]
    fn first_derivative_terms() {
        let e = Expansion::new(1);
        let mut a = vec![0.0; 4];
        e.coefficients([1.0, 2.0, 2.0], &mut Vec::new(), &mut a);
        assert!((a[0] - 1.0 / 3.0).abs() < 1e-16);
        // a_{e_i} = R_i / R^3
        assert_eq!(e.terms[1], [1, 0, 0]);
        assert!((a[1] - 1.0 / 27.0).abs() < 1e-16);
        assert!((a[3] - 2.0 / 27.0).abs() < 1e-16);
    }

    #[test]
    fn panel_moments_are_exact() {
        let p = Panel {
            conductor: 0,
            vertices: [[1.0, 0.0, 0.0], [3.0, 0.0, 0.0], [3.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
        };
        let f = PanelFrame::new(&p);
        let e = Expansion::new(4);
        let mut m = vec![0.0; e.len()];
        e.panel_moments(&f, [0.0; 3], &mut m);
        for (t, k) in e.terms.iter().enumerate() {
            let ex = if k[2] > 0 {
                0.0
            } else {
                let i0 = (3f64.powi(k[0] as i32 + 1) - 1.0) / (k[0] as f64 + 1.0) / 2.0;
                let i1 = 1.0 / (k[1] as f64 + 1.0);
                i0 * i1
            };
            assert!((m[t] - ex).abs() < 1e-12 * ex.abs().max(1.0), "{k:?}");
        }
    }
}
