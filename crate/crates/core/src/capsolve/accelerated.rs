use rayon::prelude::*;

use super::assemble::{check_centroids, frames};
use super::gmres::gmres;
use super::kernel::PanelFrame;
use super::linalg::DenseLu;
use super::multipole::Expansion;
use super::octree::Octree;
use super::{maxwell_from_charges, thread_pool, unit_potentials, MaxwellMatrix, SolveOptions};
use crate::error::{Error, Result};
use crate::geometry::PanelMesh;

/// Treecode operator: direct near-field entries and precomputed far-field
/// Taylor coefficients, both stored row-wise.
struct TreeOperator {
    n: usize,
    nterms: usize,
    near_ptr: Vec<usize>,
    near_col: Vec<u32>,
    near_val: Vec<f64>,
    far_ptr: Vec<usize>,
    far_node: Vec<u32>,
    far_coef: Vec<f64>,
    /// Nodes referenced by some far list, with their moment bases.
    moment_nodes: Vec<MomentBasis>,
    /// Index into `moment_nodes` for each tree node.
    moment_slot: Vec<u32>,
}

struct MomentBasis {
    panels: Vec<usize>,
    /// `nterms x panels.len()`, term-major.
    basis: Vec<f64>,
}

struct Row {
    near_col: Vec<u32>,
    near_val: Vec<f64>,
    far_node: Vec<u32>,
    far_coef: Vec<f64>,
}

impl TreeOperator {
    fn build(fr: &[PanelFrame], tree: &Octree, exp: &Expansion, mac: f64) -> Self {
        let n = fr.len();
        let nterms = exp.len();
        let rows: Vec<Row> = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = fr[i].centroid;
                let mut row = Row {
                    near_col: Vec::new(),
                    near_val: Vec::new(),
                    far_node: Vec::new(),
                    far_coef: Vec::new(),
                };
                let mut scratch = Vec::new();
                let mut coef = vec![0.0; nterms];
                let mut stack = vec![0usize];
                while let Some(id) = stack.pop() {
                    let node = &tree.nodes[id];
                    let r = [x[0] - node.center[0], x[1] - node.center[1], x[2] - node.center[2]];
                    let dist = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
                    if node.radius < mac * dist {
                        exp.coefficients(r, &mut scratch, &mut coef);
                        row.far_node.push(id as u32);
                        row.far_coef.extend_from_slice(&coef);
                    } else if node.is_leaf() {
                        for &j in &tree.order[node.start..node.end] {
                            row.near_col.push(j as u32);
                            row.near_val.push(fr[j].coefficient(x));
                        }
                    } else {
                        stack.extend(node.children.iter().rev());
                    }
                }
                row
            })
            .collect();

        let mut used = vec![false; tree.nodes.len()];
        for r in &rows {
            for &id in &r.far_node {
                used[id as usize] = true;
            }
        }
        let mut moment_slot = vec![u32::MAX; tree.nodes.len()];
        let ids: Vec<usize> = (0..tree.nodes.len()).filter(|&id| used[id]).collect();
        for (s, &id) in ids.iter().enumerate() {
            moment_slot[id] = s as u32;
        }
        let moment_nodes: Vec<MomentBasis> = ids
            .par_iter()
            .map(|&id| {
                let node = &tree.nodes[id];
                let panels = tree.order[node.start..node.end].to_vec();
                let m = panels.len();
                let mut basis = vec![0.0; nterms * m];
                let mut tmp = vec![0.0; nterms];
                for (c, &j) in panels.iter().enumerate() {
                    exp.panel_moments(&fr[j], node.center, &mut tmp);
                    for t in 0..nterms {
                        basis[t * m + c] = tmp[t];
                    }
                }
                MomentBasis { panels, basis }
            })
            .collect();

        let mut op = TreeOperator {
            n,
            nterms,
            near_ptr: Vec::with_capacity(n + 1),
            near_col: Vec::new(),
            near_val: Vec::new(),
            far_ptr: Vec::with_capacity(n + 1),
            far_node: Vec::new(),
            far_coef: Vec::new(),
            moment_nodes,
            moment_slot,
        };
        op.near_ptr.push(0);
        op.far_ptr.push(0);
        for r in rows {
            op.near_col.extend(r.near_col);
            op.near_val.extend(r.near_val);
            op.far_node.extend(r.far_node.iter().map(|&id| op.moment_slot[id as usize]));
            op.far_coef.extend(r.far_coef);
            op.near_ptr.push(op.near_col.len());
            op.far_ptr.push(op.far_node.len());
        }
        op
    }

    fn apply(&self, q: &[f64], out: &mut [f64]) {
        let nt = self.nterms;
        let moments: Vec<f64> = self
            .moment_nodes
            .par_iter()
            .flat_map_iter(|mb| {
                let m = mb.panels.len();
                (0..nt).map(move |t| {
                    let row = &mb.basis[t * m..(t + 1) * m];
                    row.iter().zip(&mb.panels).map(|(b, &j)| b * q[j]).sum::<f64>()
                })
            })
            .collect();
        out.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut s = 0.0;
            for e in self.near_ptr[i]..self.near_ptr[i + 1] {
                s += self.near_val[e] * q[self.near_col[e] as usize];
            }
            for e in self.far_ptr[i]..self.far_ptr[i + 1] {
                let slot = self.far_node[e] as usize;
                let c = &self.far_coef[e * nt..(e + 1) * nt];
                let m = &moments[slot * nt..(slot + 1) * nt];
                s += c.iter().zip(m).map(|(a, b)| a * b).sum::<f64>();
            }
            *yi = s;
        });
        debug_assert_eq!(out.len(), self.n);
    }
}

/// Leaf-block Jacobi preconditioner.
struct BlockPrecond {
    blocks: Vec<(Vec<usize>, DenseLu)>,
}

impl BlockPrecond {
    fn build(fr: &[PanelFrame], tree: &Octree) -> Result<Self> {
        let leaves: Vec<Vec<usize>> =
            tree.leaves().map(|l| tree.order[l.start..l.end].to_vec()).collect();
        let blocks = leaves
            .into_par_iter()
            .map(|idx| {
                let m = idx.len();
                let mut a = vec![0.0; m * m];
                for (c, &j) in idx.iter().enumerate() {
                    for (r, &i) in idx.iter().enumerate() {
                        a[c * m + r] = fr[j].coefficient(fr[i].centroid);
                    }
                }
                DenseLu::factor(m, a, 1).map(|lu| (idx, lu))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockPrecond { blocks })
    }

    fn apply(&self, r: &[f64], out: &mut [f64]) {
        let solved: Vec<Vec<f64>> = self
            .blocks
            .par_iter()
            .map(|(idx, lu)| {
                let mut b: Vec<f64> = idx.iter().map(|&i| r[i]).collect();
                lu.solve_in_place(&mut b, 1);
                b
            })
            .collect();
        for ((idx, _), b) in self.blocks.iter().zip(solved) {
            for (&i, v) in idx.iter().zip(b) {
                out[i] = v;
            }
        }
    }
}

/// Treecode-accelerated solve: far clusters enter through a Taylor
/// expansion when `radius < mac_ratio * distance`, and each unit-potential
/// system is solved by preconditioned GMRES.
pub fn solve_accelerated(mesh: &PanelMesh, opts: &SolveOptions) -> Result<MaxwellMatrix> {
    opts.validate()?;
    let n = mesh.len();
    if n == 0 {
        return Err(Error::Assembly("mesh has no panels".into()));
    }
    let fr = frames(mesh);
    check_centroids(&fr)?;
    let verts: Vec<_> = mesh.panels.iter().map(|p| p.vertices).collect();
    let pool = thread_pool(opts.jobs)?;
    pool.install(|| {
        let tree = Octree::build(&fr, &verts, opts.leaf_size);
        let exp = Expansion::new(opts.order);
        let op = TreeOperator::build(&fr, &tree, &exp, opts.mac_ratio);
        let pc = BlockPrecond::build(&fr, &tree)?;
        let rhs = unit_potentials(mesh);
        let nc = mesh.n_conductors();
        let apply = |v: &[f64], out: &mut [f64]| op.apply(v, out);
        let precond = |v: &[f64], out: &mut [f64]| pc.apply(v, out);
        let cols = (0..nc)
            .map(|k| {
                gmres(
                    &apply,
                    &precond,
                    &rhs[k * n..(k + 1) * n],
                    opts.krylov_tol,
                    opts.restart,
                    opts.max_iter,
                )
                .map_err(|e| match e {
                    Error::Solver { message } => Error::solver(format!(
                        "conductor '{}': {message}",
                        mesh.conductor_names[k]
                    )),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let q: Vec<f64> = cols.concat();
        Ok(maxwell_from_charges(mesh, &q, opts))
    })
}
