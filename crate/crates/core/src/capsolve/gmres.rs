//! Restarted GMRES with right preconditioning.

use crate::error::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve `A x = b` to relative residual `tol`. `apply` computes `A v`,
/// `precond` computes `M^-1 v`; iterations run on `A M^-1`.
pub(crate) fn gmres(
    apply: &dyn Fn(&[f64], &mut [f64]),
    precond: &dyn Fn(&[f64], &mut [f64]),
    b: &[f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut beta = bnorm;
    let mut total = 0;
    let mut w = vec![0.0; n];
    let m = restart;

    loop {
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(m);
        v.push(r.iter().map(|ri| ri / beta).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m && total < max_iter {
            let mut zk = vec![0.0; n];
            precond(&v[k], &mut zk);
            apply(&zk, &mut w);
            z.push(zk);
            for i in 0..=k {
                h[i][k] = dot(&w, &v[i]);
                let hik = h[i][k];
                w.iter_mut().zip(&v[i]).for_each(|(wj, vj)| *wj -= hik * vj);
            }
            h[k + 1][k] = norm(&w);
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            if denom == 0.0 {
                return Err(Error::solver("GMRES breakdown: zero Krylov direction"));
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            let lucky = norm(&w) == 0.0;
            if !lucky {
                let inv = 1.0 / norm(&w);
                v.push(w.iter().map(|wj| wj * inv).collect());
            }
            total += 1;
            k += 1;
            if g[k].abs() <= tol * bnorm || lucky {
                break;
            }
        }
        // back substitution for the k x k triangular system
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in (i + 1)..k {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            x.iter_mut().zip(&z[j]).for_each(|(xi, zi)| *xi += yj * zi);
        }
        apply(&x, &mut w);
        r.iter_mut()
            .zip(b.iter().zip(&w))
            .for_each(|(ri, (bi, wi))| *ri = bi - wi);
        beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= tol {
            return Ok(x);
        }
        if total >= max_iter {
            return Err(Error::solver(format!(
                "GMRES did not converge in {total} iterations (relative residual {rel:e})"
            )));
        }
    }
}
