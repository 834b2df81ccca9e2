use crate::error::{Error, Result};

/// Root of `f` on `[a, b]` where `f(a)` and `f(b)` differ in sign. Bisects
/// until the bracket is no wider than `tol`, then takes one
/// false-position step, which is exact when `f` is affine.
pub(crate) fn bracketed_root(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let (mut flo, mut fhi) = (f(lo)?, f(hi)?);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::NoRoot(format!("no sign change on [{lo:e}, {hi:e}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let t = lo - flo * (hi - lo) / (fhi - flo);
    Ok(t.clamp(lo, hi))
}

/// Integer minimiser of a convex function with the tie rule "smallest |k|,
/// then smallest k". The search window starts at `[-3, 3]` and doubles
/// while the minimiser sits on its edge.
pub(crate) fn convex_argmin(f: &dyn Fn(i64) -> Result<f64>, tie: f64, center: i64) -> Result<i64> {
    const LIMIT: i64 = 1 << 20;
    let mut half: i64 = 3;
    loop {
        let (lo, hi) = (center - half, center + half);
        let mut best: Option<(i64, f64)> = None;
        let mut vals = Vec::with_capacity((2 * half + 1) as usize);
        for k in lo..=hi {
            vals.push((k, f(k)?));
        }
        let emin = vals.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        for &(k, e) in &vals {
            if e <= emin + tie {
                best = match best {
                    Some((b, eb)) if (b.abs(), b) <= (k.abs(), k) => Some((b, eb)),
                    _ => Some((k, e)),
                };
            }
        }
        let (k, _) = best.ok_or_else(|| Error::Model("energy is not finite".into()))?;
        let argmin = vals.iter().find(|v| v.1 == emin).map(|v| v.0).unwrap_or(k);
        if argmin > lo && argmin < hi {
            return Ok(k);
        }
        if half >= LIMIT {
            return Err(Error::Divergence(format!(
                "minimum still on the search edge at |k| = {half}"
            )));
        }
        half *= 2;
    }
}
