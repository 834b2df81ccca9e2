use super::device::{DeviceSpec, Role};
use crate::error::{Error, Result};

/// Edge length R of the d1 dot (dims are R x R x R/4).
pub fn dot_size(spec: &DeviceSpec) -> Result<f64> {
    let i = spec.dot_box(Role::D1)?;
    Ok(spec.boxes[i].dims_nm[0])
}

/// Move both dots by `(dx, dy, 0)` and resize them to `R x R x R/4` about
/// their own centres.
pub fn transform_dots(spec: &DeviceSpec, dx: f64, dy: f64, r: f64) -> Result<DeviceSpec> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Validation(format!("dot size R must be positive, got {r}")));
    }
    if !(dx.is_finite() && dy.is_finite()) {
        return Err(Error::Validation("dot displacement must be finite".into()));
    }
    let mut out = spec.clone();
    let dims = [r, r, r / 4.0];
    for role in [Role::D1, Role::D2] {
        let i = spec.dot_box(role)?;
        let b = &mut out.boxes[i];
        if b.dims_nm != dims {
            for k in 0..3 {
                let centre = b.min_nm[k] + 0.5 * b.dims_nm[k];
                b.min_nm[k] = centre - 0.5 * dims[k];
            }
            b.dims_nm = dims;
        }
        b.min_nm[0] += dx;
        b.min_nm[1] += dy;
    }
    out.validate()?;
    Ok(out)
}
