use super::assemble::{assemble_geometric, check_centroids, frames};
use super::linalg::DenseLu;
use super::{maxwell_from_charges, thread_pool, unit_potentials, MaxwellMatrix, SolveOptions};
use crate::error::{Error, Result};
use crate::geometry::PanelMesh;

/// Largest panel count accepted by the direct solver.
pub const MAX_DENSE_PANELS: usize = 20_000;

/// Direct solve: one LU factorisation shared by every unit-potential
/// right-hand side.
pub fn solve_dense(mesh: &PanelMesh, opts: &SolveOptions) -> Result<MaxwellMatrix> {
    opts.validate()?;
    let n = mesh.len();
    if n == 0 {
        return Err(Error::Assembly("mesh has no panels".into()));
    }
    if n > MAX_DENSE_PANELS {
        return Err(Error::Validation(format!(
            "{n} panels exceed the dense solver limit of {MAX_DENSE_PANELS}"
        )));
    }
    let fr = frames(mesh);
    check_centroids(&fr)?;
    let pool = thread_pool(opts.jobs)?;
    pool.install(|| {
        let a = assemble_geometric(&fr);
        let lu = DenseLu::factor(n, a, opts.jobs)?;
        let mut q = unit_potentials(mesh);
        lu.solve_in_place(&mut q, mesh.n_conductors());
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::solver("dense solve produced non-finite charges"));
        }
        Ok(maxwell_from_charges(mesh, &q, opts))
    })
}
