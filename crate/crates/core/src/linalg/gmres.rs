//! Restarted GMRES with an ILU(0) right preconditioner.
//!
//! Used only when the direct factorization would exceed its memory budget.

use num_traits::{One, Zero};

use super::{norm2, CscMatrix};
use crate::scalar::{Cplx, Real};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iterations: usize,
    /// Stop once `||b - A x|| <= tolerance * ||b||`.
    pub tolerance: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { restart: 200, max_iterations: 20_000, tolerance: 1e-12 }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome<T> {
    pub x: Vec<Cplx<T>>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Incomplete LU factorization restricted to the pattern of `A`.
struct Ilu0<T> {
    n: usize,
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<Cplx<T>>,
    diag: Vec<usize>,
}

impl<T: Real> Ilu0<T> {
    fn new(a: &CscMatrix<T>) -> Self {
        let n = a.n;
        // Row-compressed copy with every diagonal present.
        let mut rows: Vec<Vec<(usize, Cplx<T>)>> = vec![Vec::new(); n];
        for j in 0..n {
            for p in a.colptr[j]..a.colptr[j + 1] {
                rows[a.rowidx[p]].push((j, a.values[p]));
            }
        }
        let amax = a.values.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        let shift = amax * T::of(1e-8);
        let mut ptr = vec![0];
        let mut idx = Vec::with_capacity(a.nnz() + n);
        let mut val = Vec::with_capacity(a.nnz() + n);
        let mut diag = vec![0; n];
        for (i, row) in rows.iter_mut().enumerate() {
            if !row.iter().any(|&(c, _)| c == i) {
                row.push((i, Cplx::zero()));
            }
            row.sort_unstable_by_key(|&(c, _)| c);
            for &(c, v) in row.iter() {
                if c == i {
                    diag[i] = idx.len();
                }
                idx.push(c);
                val.push(v);
            }
            ptr.push(idx.len());
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for p in ptr[i]..ptr[i + 1] {
                pos[idx[p]] = p;
            }
            for p in ptr[i]..diag[i] {
                let k = idx[p];
                let mut pivot = val[diag[k]];
                if pivot.norm() <= shift {
                    pivot = Cplx::new(shift.max(T::min_positive_value()), T::zero());
                    val[diag[k]] = pivot;
                }
                let lik = val[p] / pivot;
                val[p] = lik;
                for q in diag[k] + 1..ptr[k + 1] {
                    let target = pos[idx[q]];
                    if target != usize::MAX {
                        val[target] = val[target] - lik * val[q];
                    }
                }
            }
            for p in ptr[i]..ptr[i + 1] {
                pos[idx[p]] = usize::MAX;
            }
            if val[diag[i]].norm() <= shift {
                val[diag[i]] = Cplx::new(shift.max(T::min_positive_value()), T::zero());
            }
        }
        Self { n, ptr, idx, val, diag }
    }

    fn apply(&self, r: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let mut z = r.to_vec();
        for i in 0..self.n {
            let mut s = z[i];
            for p in self.ptr[i]..self.diag[i] {
                s -= self.val[p] * z[self.idx[p]];
            }
            z[i] = s;
        }
        for i in (0..self.n).rev() {
            let mut s = z[i];
            for p in self.diag[i] + 1..self.ptr[i + 1] {
                s -= self.val[p] * z[self.idx[p]];
            }
            z[i] = s / self.val[self.diag[i]];
        }
        z
    }
}

fn dot<T: Real>(a: &[Cplx<T>], b: &[Cplx<T>]) -> Cplx<T> {
    a.iter().zip(b).fold(Cplx::zero(), |acc, (x, y)| acc + x.conj() * y)
}

/// Solves `A x = b` starting from `x0` (zero if `None`).
pub fn gmres<T: Real>(a: &CscMatrix<T>, b: &[Cplx<T>], x0: Option<&[Cplx<T>]>, opts: &GmresOptions) -> GmresOutcome<T> {
    let n = a.n;
    let m = opts.restart.max(1).min(n.max(1));
    let precond = Ilu0::new(a);
    let bnorm = norm2(b);
    let mut x = x0.map(<[_]>::to_vec).unwrap_or_else(|| vec![Cplx::zero(); n]);
    if bnorm.is_zero() {
        return GmresOutcome { x: vec![Cplx::zero(); n], iterations: 0, relative_residual: 0.0, converged: true };
    }
    let tol = T::of(opts.tolerance) * bnorm;
    let mut iterations = 0;
    loop {
        let ax = a.matvec(&x);
        let r: Vec<Cplx<T>> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
        let beta = norm2(&r);
        let rel = (beta / bnorm).to_f64_lossy();
        if beta <= tol || iterations >= opts.max_iterations {
            return GmresOutcome { x, iterations, relative_residual: rel, converged: beta <= tol };
        }
        let mut basis: Vec<Vec<Cplx<T>>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| *v / Cplx::new(beta, T::zero())).collect());
        let mut h = vec![vec![Cplx::<T>::zero(); m]; m + 1];
        let mut cs = vec![Cplx::<T>::zero(); m];
        let mut sn = vec![Cplx::<T>::zero(); m];
        let mut g = vec![Cplx::<T>::zero(); m + 1];
        g[0] = Cplx::new(beta, T::zero());
        let mut steps = 0;
        for j in 0..m {
            let z = precond.apply(&basis[j]);
            let mut w = a.matvec(&z);
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * *vk;
                }
            }
            let hnext = norm2(&w);
            h[j + 1][j] = Cplx::new(hnext, T::zero());
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i].conj() * h[i][j] + cs[i].conj() * h[i + 1][j];
                h[i][j] = t;
            }
            let (c, s) = givens(h[j][j], h[j + 1][j]);
            cs[j] = c;
            sn[j] = s;
            h[j][j] = c * h[j][j] + s * h[j + 1][j];
            h[j + 1][j] = Cplx::zero();
            g[j + 1] = -s.conj() * g[j];
            g[j] = c * g[j];
            steps = j + 1;
            iterations += 1;
            if g[j + 1].norm() <= tol || hnext.is_zero() || iterations >= opts.max_iterations {
                break;
            }
            basis.push(w.iter().map(|v| *v / Cplx::new(hnext, T::zero())).collect());
        }
        // Back substitution for the Krylov coefficients.
        let mut y = vec![Cplx::<T>::zero(); steps];
        for i in (0..steps).rev() {
            let mut s = g[i];
            for k in i + 1..steps {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        let mut u = vec![Cplx::<T>::zero(); n];
        for (k, yk) in y.iter().enumerate() {
            for (ui, vi) in u.iter_mut().zip(&basis[k]) {
                *ui += *yk * *vi;
            }
        }
        let dx = precond.apply(&u);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
    }
}

fn givens<T: Real>(a: Cplx<T>, b: Cplx<T>) -> (Cplx<T>, Cplx<T>) {
    let na = a.norm();
    let nb = b.norm();
    if nb.is_zero() {
        return (Cplx::one(), Cplx::zero());
    }
    if na.is_zero() {
        return (Cplx::zero(), (b / Cplx::new(nb, T::zero())).conj());
    }
    let r = (na * na + nb * nb).sqrt();
    let phase = a / Cplx::new(na, T::zero());
    let c = Cplx::new(na / r, T::zero());
    let s = phase * b.conj() / Cplx::new(r, T::zero());
    (c, s)
}
