//! Left-looking sparse LU with threshold partial pivoting.
//!
//! Each column is computed by a sparse triangular solve whose nonzero pattern
//! comes from a depth-first search over the partial `L` factor. Columns are
//! visited in a fill-reducing order; the row pivot prefers the matching
//! diagonal whenever it is within `pivot_threshold` of the column maximum.

use num_traits::{One, Zero};

use super::ordering::{minimum_degree, nested_dissection, Graph, Ordering};
use super::CscMatrix;
use crate::scalar::{Cplx, Real};

/// Tuning knobs for [`SparseLu::factor`].
#[derive(Debug, Clone, Copy)]
pub struct LuOptions {
    /// Relative magnitude a diagonal entry needs to be kept as pivot.
    pub pivot_threshold: f64,
    /// Abort once `nnz(L) + nnz(U)` exceeds this many entries.
    pub max_fill: usize,
    /// Pivots at or below `singular_tolerance * max|A|` count as zero.
    pub singular_tolerance: f64,
    /// Parts of the elimination graph at most this large are not dissected.
    pub leaf_size: usize,
    pub ordering: Ordering,
}

impl Default for LuOptions {
    fn default() -> Self {
        Self { pivot_threshold: 0.1, max_fill: 60_000_000, singular_tolerance: 1e-13, leaf_size: 16, ordering: Ordering::NestedDissection }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LuError {
    /// No acceptable pivot in the given (original) column.
    Singular { column: usize },
    FillExceeded { fill: usize, cap: usize },
    Shape(String),
}

/// Factorization `P A Q = L U` of a square sparse matrix.
#[derive(Debug, Clone)]
pub struct SparseLu<T> {
    n: usize,
    /// Column order: step `k` eliminated original column `q[k]`.
    q: Vec<usize>,
    /// `pinv[i]` is the step at which original row `i` became pivotal.
    pinv: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<Cplx<T>>,
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<Cplx<T>>,
}

const UNSET: usize = usize::MAX;

impl<T: Real> SparseLu<T> {
    /// Factors `a`, ordering columns by the configured fill-reducing order on the symmetrized
    /// pattern. `eliminate_last` lists columns (e.g. a dense bordering row's
    /// diagonal) that must be kept out of the dissection and eliminated last.
    pub fn factor(a: &CscMatrix<T>, eliminate_last: &[usize], opts: &LuOptions) -> Result<Self, LuError> {
        let n = a.n;
        if a.colptr.len() != n + 1 {
            return Err(LuError::Shape("column pointer length does not match dimension".into()));
        }
        let graph = Graph::from_csc_pattern(n, &a.colptr, &a.rowidx, eliminate_last);
        let q = match opts.ordering {
            Ordering::MinimumDegree => minimum_degree(&graph, eliminate_last),
            Ordering::NestedDissection => nested_dissection(&graph, eliminate_last, opts.leaf_size),
        };
        Self::factor_with_order(a, q, opts)
    }

    pub fn factor_with_order(a: &CscMatrix<T>, q: Vec<usize>, opts: &LuOptions) -> Result<Self, LuError> {
        let n = a.n;
        if q.len() != n {
            return Err(LuError::Shape("column order has wrong length".into()));
        }
        let amax = a.values.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        let tiny = T::of(opts.singular_tolerance) * amax;
        let thresh = T::of(opts.pivot_threshold);

        let mut pinv = vec![UNSET; n];
        let mut l_ptr = Vec::with_capacity(n + 1);
        let mut u_ptr = Vec::with_capacity(n + 1);
        let nnz_guess = 4 * a.values.len() + n;
        let mut l_idx: Vec<usize> = Vec::with_capacity(nnz_guess);
        let mut l_val: Vec<Cplx<T>> = Vec::with_capacity(nnz_guess);
        let mut u_idx: Vec<usize> = Vec::with_capacity(nnz_guess);
        let mut u_val: Vec<Cplx<T>> = Vec::with_capacity(nnz_guess);

        let mut x = vec![Cplx::<T>::zero(); n];
        let mut xi = vec![0usize; n];
        let mut marked = vec![false; n];
        let mut stack = vec![0usize; n];
        let mut child = vec![0usize; n];

        for k in 0..n {
            l_ptr.push(l_idx.len());
            u_ptr.push(u_idx.len());
            let col = q[k];

            // Reach of column `col` in the graph of L (rows in original numbering).
            let mut top = n;
            for &i in &a.rowidx[a.colptr[col]..a.colptr[col + 1]] {
                if !marked[i] {
                    top = dfs(i, &l_ptr, &l_idx, &pinv, top, &mut xi, &mut stack, &mut child, &mut marked);
                }
            }
            for &i in &xi[top..n] {
                marked[i] = false;
                x[i] = Cplx::zero();
            }
            for p in a.colptr[col]..a.colptr[col + 1] {
                x[a.rowidx[p]] = a.values[p];
            }
            // Sparse triangular solve with the unit-diagonal columns of L.
            for px in top..n {
                let j = xi[px];
                let jj = pinv[j];
                if jj == UNSET {
                    continue;
                }
                let xj = x[j];
                if xj.is_zero() {
                    continue;
                }
                for p in l_ptr[jj] + 1..l_ptr[jj + 1] {
                    x[l_idx[p]] -= l_val[p] * xj;
                }
            }

            // Pivot search among rows that are not yet pivotal.
            let mut ipiv = UNSET;
            let mut best = T::zero();
            for &i in &xi[top..n] {
                if pinv[i] == UNSET {
                    let t = x[i].norm();
                    if t > best {
                        best = t;
                        ipiv = i;
                    }
                } else {
                    u_idx.push(pinv[i]);
                    u_val.push(x[i]);
                }
            }
            if ipiv == UNSET || best <= tiny {
                return Err(LuError::Singular { column: col });
            }
            if pinv[col] == UNSET && x[col].norm() >= thresh * best {
                ipiv = col;
            }
            let pivot = x[ipiv];
            u_idx.push(k);
            u_val.push(pivot);
            pinv[ipiv] = k;
            l_idx.push(ipiv);
            l_val.push(Cplx::one());
            let inv = Cplx::<T>::one() / pivot;
            for &i in &xi[top..n] {
                if pinv[i] == UNSET {
                    let v = x[i] * inv;
                    if !v.is_zero() {
                        l_idx.push(i);
                        l_val.push(v);
                    }
                }
                x[i] = Cplx::zero();
            }
            let fill = l_idx.len() + u_idx.len();
            if fill > opts.max_fill {
                return Err(LuError::FillExceeded { fill, cap: opts.max_fill });
            }
        }
        l_ptr.push(l_idx.len());
        u_ptr.push(u_idx.len());
        for i in l_idx.iter_mut() {
            *i = pinv[*i];
        }
        Ok(Self { n, q, pinv, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries in both factors.
    pub fn fill(&self) -> usize {
        self.l_idx.len() + self.u_idx.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let n = self.n;
        let mut y = vec![Cplx::<T>::zero(); n];
        for i in 0..n {
            y[self.pinv[i]] = b[i];
        }
        // L y = P b (unit diagonal stored first in each column).
        for j in 0..n {
            let yj = y[j];
            if yj.is_zero() {
                continue;
            }
            for p in self.l_ptr[j] + 1..self.l_ptr[j + 1] {
                y[self.l_idx[p]] -= self.l_val[p] * yj;
            }
        }
        // U z = y (diagonal stored last in each column).
        for j in (0..n).rev() {
            let last = self.u_ptr[j + 1] - 1;
            y[j] /= self.u_val[last];
            let yj = y[j];
            if yj.is_zero() {
                continue;
            }
            for p in self.u_ptr[j]..last {
                y[self.u_idx[p]] -= self.u_val[p] * yj;
            }
        }
        let mut x = vec![Cplx::<T>::zero(); n];
        for k in 0..n {
            x[self.q[k]] = y[k];
        }
        x
    }
}

/// Non-recursive depth-first search from node `j`, pushing finished nodes onto
/// `xi[..top]` in topological order. Every pivotal column referenced here is
/// already complete, so `l_ptr[jj + 1]` exists.
#[allow(clippy::too_many_arguments)]
fn dfs(
    j: usize,
    l_ptr: &[usize],
    l_idx: &[usize],
    pinv: &[usize],
    mut top: usize,
    xi: &mut [usize],
    stack: &mut [usize],
    child: &mut [usize],
    marked: &mut [bool],
) -> usize {
    let mut head = 0usize;
    stack[0] = j;
    while let Some(&node) = stack[..=head].last() {
        let jj = pinv[node];
        if !marked[node] {
            marked[node] = true;
            child[head] = if jj == UNSET { 0 } else { l_ptr[jj] };
        }
        let mut done = true;
        if jj != UNSET {
            let end = l_ptr[jj + 1];
            let mut p = child[head];
            while p < end {
                let i = l_idx[p];
                p += 1;
                if !marked[i] {
                    child[head] = p;
                    head += 1;
                    stack[head] = i;
                    done = false;
                    break;
                }
            }
            if done {
                child[head] = end;
            }
        }
        if done {
            top -= 1;
            xi[top] = node;
            if head == 0 {
                break;
            }
            head -= 1;
        }
    }
    top
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn csc_from_dense(n: usize, dense: &[Cplx<f64>]) -> CscMatrix<f64> {
        let mut colptr = vec![0];
        let mut rowidx = Vec::new();
        let mut values = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let v = dense[i * n + j];
                if v.norm() > 0.0 {
                    rowidx.push(i);
                    values.push(v);
                }
            }
            colptr.push(rowidx.len());
        }
        CscMatrix { n, colptr, rowidx, values }
    }

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        }
    }

    #[test]
    fn solves_random_sparse_systems() {
        for seed in 0..20u64 {
            let n = 30;
            let mut r = lcg(seed);
            let mut dense = vec![Cplx::zero(); n * n];
            for i in 0..n {
                for j in 0..n {
                    if r() > 0.35 {
                        dense[i * n + j] = c(r(), r());
                    }
                }
                dense[i * n + ((i + 7) % n)] += c(3.0, 0.0);
            }
            let a = csc_from_dense(n, &dense);
            let lu = SparseLu::factor(&a, &[], &LuOptions::default()).unwrap();
            let b: Vec<Cplx<f64>> = (0..n).map(|_| c(r(), r())).collect();
            let x = lu.solve(&b);
            for i in 0..n {
                let mut ax: Cplx<f64> = Cplx::zero();
                for j in 0..n {
                    ax += dense[i * n + j] * x[j];
                }
                assert!((ax - b[i]).norm() < 1e-10, "seed {seed} row {i}");
            }
        }
    }

    #[test]
    fn zero_diagonal_requires_pivoting() {
        let n = 3;
        let o = c(0., 0.);
        let dense = vec![o, c(1., 0.), o, c(1., 0.), o, o, o, o, c(2., 0.)];
        let a = csc_from_dense(n, &dense);
        let lu = SparseLu::factor(&a, &[], &LuOptions::default()).unwrap();
        let x = lu.solve(&[c(1., 0.), c(2., 0.), c(4., 0.)]);
        assert!((x[0] - c(2., 0.)).norm() < 1e-15);
        assert!((x[1] - c(1., 0.)).norm() < 1e-15);
        assert!((x[2] - c(2., 0.)).norm() < 1e-15);
    }

    #[test]
    fn singular_matrix_reported() {
        let n = 2;
        let dense = vec![c(1., 0.), c(2., 0.), c(2., 0.), c(4., 0.)];
        let a = csc_from_dense(n, &dense);
        assert!(matches!(SparseLu::factor(&a, &[], &LuOptions::default()), Err(LuError::Singular { .. })));
    }

    #[test]
    fn fill_cap_enforced() {
        let n = 10;
        let dense: Vec<Cplx<f64>> = (0..n * n).map(|k| c(1.0 + (k % 7) as f64, (k % 3) as f64)).collect();
        let a = csc_from_dense(n, &dense);
        let opts = LuOptions { max_fill: 20, ..LuOptions::default() };
        assert!(matches!(SparseLu::factor(&a, &[], &opts), Err(LuError::FillExceeded { .. })));
    }
}
