use rayon::prelude::*;

use super::kernel::PanelFrame;
use crate::error::{Error, Result};
use crate::geometry::PanelMesh;
use crate::units::{EPS0, NM};

/// Dense potential operator in volts per coulomb, column-major.
#[derive(Debug, Clone)]
pub struct PotentialMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl PotentialMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }
}

/// Volts per coulomb for a geometric coefficient in nm^-1.
pub(crate) fn coulomb_factor(epsilon_r: f64) -> f64 {
    1.0 / (4.0 * std::f64::consts::PI * EPS0 * epsilon_r * NM)
}

pub(crate) fn frames(mesh: &PanelMesh) -> Vec<PanelFrame> {
    mesh.panels.iter().map(PanelFrame::new).collect()
}

/// Reject meshes where two distinct panels share a collocation point.
pub(crate) fn check_centroids(frames: &[PanelFrame]) -> Result<()> {
    let mut idx: Vec<usize> = (0..frames.len()).collect();
    let key = |i: usize| frames[i].centroid;
    idx.sort_by(|&a, &b| {
        let (ka, kb) = (key(a), key(b));
        ka[0].total_cmp(&kb[0])
            .then(ka[1].total_cmp(&kb[1]))
            .then(ka[2].total_cmp(&kb[2]))
    });
    for w in idx.windows(2) {
        let (a, b) = (key(w[0]), key(w[1]));
        let scale = 1.0 + a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if (0..3).all(|k| (a[k] - b[k]).abs() <= 1e-12 * scale) {
            return Err(Error::Assembly(format!(
                "panels {} and {} have coincident centroids at {:?}",
                w[0].min(w[1]),
                w[0].max(w[1]),
                a
            )));
        }
    }
    Ok(())
}

/// Geometric coefficients (nm^-1) column-major; column `j` is the field of
/// panel `j` at every collocation point.
pub(crate) fn assemble_geometric(frames: &[PanelFrame]) -> Vec<f64> {
    let n = frames.len();
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n.max(1)).enumerate().for_each(|(j, col)| {
        let src = &frames[j];
        for (i, v) in col.iter_mut().enumerate() {
            *v = src.coefficient(frames[i].centroid);
        }
    });
    data
}

/// Potential at each panel centroid from a unit charge spread over each
/// panel, in a uniform medium of relative permittivity `epsilon_r`.
pub fn assemble_system(mesh: &PanelMesh, epsilon_r: f64) -> Result<PotentialMatrix> {
    if mesh.is_empty() {
        return Err(Error::Assembly("mesh has no panels".into()));
    }
    if !(epsilon_r.is_finite() && epsilon_r > 0.0) {
        return Err(Error::Validation(format!("epsilon_r must be positive, got {epsilon_r}")));
    }
    let fr = frames(mesh);
    check_centroids(&fr)?;
    let k = coulomb_factor(epsilon_r);
    let mut data = assemble_geometric(&fr);
    data.iter_mut().for_each(|v| *v *= k);
    Ok(PotentialMatrix { n: mesh.len(), data })
}
