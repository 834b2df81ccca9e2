//! Boundary-element capacitance extraction: collocation with constant
//! panel charge, solved densely or with a treecode-accelerated GMRES.

mod accelerated;
mod assemble;
mod dense;
mod gmres;
mod kernel;
mod linalg;
mod maxwell;
mod multipole;
mod octree;
pub mod shapes;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PanelMesh;

pub use accelerated::solve_accelerated;
pub use assemble::{assemble_system, PotentialMatrix};
pub use dense::{solve_dense, MAX_DENSE_PANELS};
pub use kernel::rect_integral;
pub use maxwell::{MaxwellMatrix, SolverInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    Dense,
    Accelerated,
}

impl std::fmt::Display for SolveMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveMode::Dense => "dense",
            SolveMode::Accelerated => "accelerated",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub mode: SolveMode,
    pub epsilon_r: f64,
    /// Taylor expansion order of the far field.
    pub order: usize,
    pub mac_ratio: f64,
    pub krylov_tol: f64,
    pub leaf_size: usize,
    pub restart: usize,
    pub max_iter: usize,
    /// Worker threads; results are bitwise identical for a fixed value.
    pub jobs: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: SolveMode::Accelerated,
            epsilon_r: crate::geometry::DEFAULT_EPSILON_R,
            order: 3,
            mac_ratio: 0.5,
            krylov_tol: 1e-6,
            leaf_size: 32,
            restart: 60,
            max_iter: 500,
            jobs: 1,
        }
    }
}

impl SolveOptions {
    pub fn dense() -> Self {
        SolveOptions {
            mode: SolveMode::Dense,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if !(self.epsilon_r.is_finite() && self.epsilon_r > 0.0) {
            return bad(format!("epsilon_r must be positive, got {}", self.epsilon_r));
        }
        if !(self.mac_ratio > 0.0 && self.mac_ratio < 1.0) {
            return bad(format!("mac_ratio must lie in (0, 1), got {}", self.mac_ratio));
        }
        if !(self.krylov_tol > 0.0 && self.krylov_tol < 1.0) {
            return bad(format!("krylov_tol must lie in (0, 1), got {}", self.krylov_tol));
        }
        if self.leaf_size == 0 || self.restart == 0 || self.max_iter == 0 || self.jobs == 0 {
            return bad("leaf_size, restart, max_iter and jobs must be positive".into());
        }
        Ok(())
    }

    pub(crate) fn info(&self) -> SolverInfo {
        SolverInfo {
            mode: self.mode,
            p: self.order,
            mac_ratio: self.mac_ratio,
            tol: self.krylov_tol,
        }
    }
}

/// Solve in whichever mode `opts` selects.
pub fn solve(mesh: &PanelMesh, opts: &SolveOptions) -> Result<MaxwellMatrix> {
    match opts.mode {
        SolveMode::Dense => solve_dense(mesh, opts),
        SolveMode::Accelerated => solve_accelerated(mesh, opts),
    }
}

pub(crate) fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::solver(format!("cannot start worker pool: {e}")))
}

/// Right-hand sides: column `k` is 1 on the panels of conductor `k`.
pub(crate) fn unit_potentials(mesh: &PanelMesh) -> Vec<f64> {
    let n = mesh.len();
    let mut rhs = vec![0.0; n * mesh.n_conductors()];
    for (i, p) in mesh.panels.iter().enumerate() {
        rhs[p.conductor * n + i] = 1.0;
    }
    rhs
}

/// Collect per-conductor charge from column-major panel charges in
/// geometric units and build the symmetrised matrix.
pub(crate) fn maxwell_from_charges(
    mesh: &PanelMesh,
    charges: &[f64],
    opts: &SolveOptions,
) -> MaxwellMatrix {
    let n = mesh.len();
    let nc = mesh.n_conductors();
    let to_farad = 1.0 / assemble::coulomb_factor(opts.epsilon_r);
    let mut raw = vec![vec![0.0; nc]; nc];
    for k in 0..nc {
        let col = &charges[k * n..(k + 1) * n];
        for (i, p) in mesh.panels.iter().enumerate() {
            raw[p.conductor][k] += col[i];
        }
    }
    for row in raw.iter_mut() {
        for v in row.iter_mut() {
            *v *= to_farad;
        }
    }
    MaxwellMatrix::from_raw(mesh.conductor_names.clone(), raw, opts.info())
}
