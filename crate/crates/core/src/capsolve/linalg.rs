//! Thin wrappers over faer's partial-pivoting LU.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::{factor, solve};
use faer::{MatMut, MatRef, Par};

use crate::error::{Error, Result};

/// Reciprocal pivot-ratio threshold below which the system is treated as singular.
const MIN_PIVOT_RATIO: f64 = 1e-14;

/// In-place LU factorisation of a column-major square matrix.
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    perm_inv: Vec<usize>,
    par: Par,
}

pub(crate) fn par_for(jobs: usize) -> Par {
    if jobs > 1 {
        Par::rayon(jobs)
    } else {
        Par::Seq
    }
}

impl DenseLu {
    /// Factorise `data` (consumed). Fails with a pivot-based condition
    /// estimate when the matrix is numerically singular.
    pub fn factor(n: usize, mut data: Vec<f64>, jobs: usize) -> Result<Self> {
        assert_eq!(data.len(), n * n);
        let par = par_for(jobs);
        let mut perm = vec![0usize; n];
        let mut perm_inv = vec![0usize; n];
        {
            let mut buf = MemBuffer::new(factor::lu_in_place_scratch::<usize, f64>(
                n,
                n,
                par,
                Default::default(),
            ));
            let a = MatMut::from_column_major_slice_mut(&mut data, n, n);
            factor::lu_in_place(
                a,
                &mut perm,
                &mut perm_inv,
                par,
                MemStack::new(&mut buf),
                Default::default(),
            );
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = data[i * n + i].abs();
            if !d.is_finite() {
                lo = 0.0;
                break;
            }
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if n > 0 && !(lo > MIN_PIVOT_RATIO * hi) {
            let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
            return Err(Error::solver(format!(
                "singular or ill-conditioned system (pivot condition estimate {cond:e})"
            )));
        }
        Ok(DenseLu {
            n,
            lu: data,
            perm,
            perm_inv,
            par,
        })
    }

    /// Solve in place for `ncols` column-major right-hand sides.
    pub fn solve_in_place(&self, rhs: &mut [f64], ncols: usize) {
        let n = self.n;
        assert_eq!(rhs.len(), n * ncols);
        let lu = MatRef::from_column_major_slice(&self.lu, n, n);
        let perm = faer::perm::PermRef::new_checked(&self.perm, &self.perm_inv, n);
        let mut buf =
            MemBuffer::new(solve::solve_in_place_scratch::<usize, f64>(n, ncols, self.par));
        let b = MatMut::from_column_major_slice_mut(rhs, n, ncols);
        solve::solve_in_place(lu, lu, perm, b, self.par, MemStack::new(&mut buf));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        // [[2, 1], [4, 3]] x = [3, 7] -> x = [1, 1]
        let a = vec![2.0, 4.0, 1.0, 3.0];
        let lu = DenseLu::factor(2, a, 1).unwrap();
        let mut b = vec![3.0, 7.0, 2.0, 4.0];
        lu.solve_in_place(&mut b, 2);
        for (x, e) in b.iter().zip([1.0, 1.0, 1.0, 0.0]) {
            assert!((x - e).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_an_error() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert!(matches!(DenseLu::factor(2, a, 1), Err(Error::Solver { .. })));
    }
}
