//! Sparse linear algebra behind the steady-state solver.

pub mod gmres;
pub mod lu;
pub mod ordering;

pub use gmres::{gmres, GmresOptions, GmresOutcome};
pub use lu::{LuError, LuOptions, SparseLu};
pub use ordering::Ordering;

use num_traits::Zero;

use crate::hilbert::SparseOperator;
use crate::scalar::{Cplx, Real};

/// Compressed sparse column matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix<T> {
    pub n: usize,
    pub colptr: Vec<usize>,
    pub rowidx: Vec<usize>,
    pub values: Vec<Cplx<T>>,
}

impl<T: Real> CscMatrix<T> {
    /// Column-compressed copy of an operator; row indices sorted per column.
    pub fn from_operator(op: &SparseOperator<T>) -> Self {
        let n = op.dim();
        let (indptr, indices, values) = op.raw_parts();
        let mut colptr = vec![0usize; n + 1];
        for &c in indices {
            colptr[c + 1] += 1;
        }
        for k in 0..n {
            colptr[k + 1] += colptr[k];
        }
        let mut next = colptr.clone();
        let mut rowidx = vec![0usize; indices.len()];
        let mut vals = vec![Cplx::zero(); indices.len()];
        for r in 0..n {
            for p in indptr[r]..indptr[r + 1] {
                let c = indices[p];
                rowidx[next[c]] = r;
                vals[next[c]] = values[p];
                next[c] += 1;
            }
        }
        Self { n, colptr, rowidx, values: vals }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let mut y = vec![Cplx::zero(); self.n];
        for j in 0..self.n {
            let xj = x[j];
            if xj.is_zero() {
                continue;
            }
            for p in self.colptr[j]..self.colptr[j + 1] {
                y[self.rowidx[p]] += self.values[p] * xj;
            }
        }
        y
    }

    pub fn diagonal(&self) -> Vec<Cplx<T>> {
        (0..self.n)
            .map(|j| {
                let range = self.colptr[j]..self.colptr[j + 1];
                match self.rowidx[range.clone()].binary_search(&j) {
                    Ok(k) => self.values[range.start + k],
                    Err(_) => Cplx::zero(),
                }
            })
            .collect()
    }
}

pub(crate) fn norm2<T: Real>(v: &[Cplx<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}
