//! Operator algebra on truncated tensor-product Hilbert spaces.
//!
//! Conventions used throughout the crate:
//!
//! * Index 0 of every subsystem is the ground (two-level) or vacuum (bosonic)
//!   state.
//! * Composite indices are row-major: the first listed subsystem varies
//!   slowest.
//! * Density matrices are vectorized by column stacking,
//!   `vec(rho)[i + n * j] = rho[i][j]`, so that
//!   `vec(A rho B) = (B^T ⊗ A) vec(rho)`.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{re, Cplx, Real};

/// Ordered list of subsystem dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDimension("empty subsystem list".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidDimension(format!("subsystem {pos} has dimension 0")));
        }
        Ok(Self { dims })
    }

    /// Single-subsystem space.
    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn num_slots(&self) -> usize {
        self.dims.len()
    }

    /// Distance in composite index between neighbouring states of `slot`.
    pub fn stride(&self, slot: usize) -> usize {
        self.dims[slot + 1..].iter().product()
    }

    /// Space of vectorized operators on this space, `[n, n]` with the column
    /// index slowest (column stacking).
    pub fn liouville(&self) -> HilbertSpace {
        let n = self.total_dim();
        HilbertSpace { dims: vec![n, n] }
    }

    /// Composite index of a product basis state.
    pub fn index_of(&self, levels: &[usize]) -> usize {
        debug_assert_eq!(levels.len(), self.dims.len());
        levels
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&l, &d)| acc * d + l)
    }

    /// Per-subsystem levels of a composite index.
    pub fn levels_of(&self, mut index: usize) -> Vec<usize> {
        let mut levels = vec![0; self.dims.len()];
        for (slot, &d) in self.dims.iter().enumerate().rev() {
            levels[slot] = index % d;
            index /= d;
        }
        levels
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", parts.join("x"))
    }
}

/// Complex sparse matrix in compressed-row form, tagged with the space it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator<T> {
    space: HilbertSpace,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Cplx<T>>,
}

impl<T: Real> SparseOperator<T> {
    pub fn zeros(space: HilbertSpace) -> Self {
        let n = space.total_dim();
        Self { space, indptr: vec![0; n + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let n = space.total_dim();
        Self {
            space,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![Cplx::one(); n],
        }
    }

    /// Builds an operator from `(row, col, value)` triplets using the default
    /// drop tolerance of the scalar type. Duplicates are summed.
    pub fn from_triplets<I>(space: HilbertSpace, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Cplx<T>)>,
    {
        Self::from_triplets_with_tolerance(space, triplets, T::of(T::DROP_TOLERANCE))
    }

    pub fn from_triplets_with_tolerance<I>(space: HilbertSpace, triplets: I, drop_tol: T) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Cplx<T>)>,
    {
        let n = space.total_dim();
        let mut trip: Vec<(usize, usize, Cplx<T>)> = triplets.into_iter().collect();
        if let Some(&(r, c, _)) = trip.iter().find(|&&(r, c, _)| r >= n || c >= n) {
            return Err(Error::InvalidDimension(format!("entry ({r}, {c}) outside dimension {n}")));
        }
        trip.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut values: Vec<Cplx<T>> = Vec::with_capacity(trip.len());
        let mut iter = trip.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v.norm() > drop_tol {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
            }
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self { space, indptr, indices, values })
    }

    /// Dense row-major input, mostly for tests and small operators.
    pub fn from_dense(space: HilbertSpace, dense: &[Cplx<T>]) -> Result<Self> {
        let n = space.total_dim();
        if dense.len() != n * n {
            return Err(Error::ShapeMismatch(format!("expected {} entries, got {}", n * n, dense.len())));
        }
        Self::from_triplets(space, dense.iter().enumerate().map(|(k, &v)| (k / n, k % n, v)))
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Cplx<T> {
        let range = self.indptr[row]..self.indptr[row + 1];
        match self.indices[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => Cplx::zero(),
        }
    }

    /// Stored entries of one row as `(col, value)` pairs.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, Cplx<T>)> + '_ {
        let range = self.indptr[row]..self.indptr[row + 1];
        self.indices[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Cplx<T>)> + '_ {
        (0..self.dim()).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub(crate) fn raw_parts(&self) -> (&[usize], &[usize], &[Cplx<T>]) {
        (&self.indptr, &self.indices, &self.values)
    }

    pub fn to_dense(&self) -> Vec<Cplx<T>> {
        let n = self.dim();
        let mut out = vec![Cplx::zero(); n * n];
        for (r, c, v) in self.iter() {
            out[r * n + c] = v;
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        if x.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} applied to operator of dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok((0..self.dim())
            .map(|r| self.row(r).fold(Cplx::zero(), |acc, (c, v)| acc + v * x[c]))
            .collect())
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    pub fn transpose(&self) -> Self {
        self.map_transposed(|v| v)
    }

    pub fn dagger(&self) -> Self {
        self.map_transposed(|v| v.conj())
    }

    fn map_transposed(&self, f: impl Fn(Cplx<T>) -> Cplx<T>) -> Self {
        let n = self.dim();
        let mut counts = vec![0usize; n + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for k in 0..n {
            counts[k + 1] += counts[k];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![Cplx::zero(); self.nnz()];
        for (r, c, v) in self.iter() {
            let slot = next[c];
            indices[slot] = r;
            values[slot] = f(v);
            next[c] += 1;
        }
        Self { space: self.space.clone(), indptr, indices, values }
    }

    pub fn scale(&self, factor: Cplx<T>) -> Self {
        if factor.is_zero() {
            return Self::zeros(self.space.clone());
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    pub fn scale_real(&self, factor: T) -> Self {
        self.scale(re(factor))
    }

    fn check_same_space(&self, other: &Self, what: &str) -> Result<()> {
        if self.space != other.space {
            return Err(Error::Algebra(format!("{what}: spaces {} and {} differ", self.space, other.space)));
        }
        Ok(())
    }

    /// `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(Cplx::one(), other)
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-Cplx::<T>::one(), other)
    }

    /// `self + alpha * other`, merged row by row.
    pub fn axpy(&self, alpha: Cplx<T>, other: &Self) -> Result<Self> {
        self.check_same_space(other, "add")?;
        let n = self.dim();
        let drop_tol = T::of(T::DROP_TOLERANCE);
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        indptr.push(0);
        for r in 0..n {
            let mut a = self.row(r).peekable();
            let mut b = other.row(r).map(|(c, v)| (c, v * alpha)).peekable();
            loop {
                let next = match (a.peek(), b.peek()) {
                    (None, None) => break,
                    (Some(_), None) => a.next(),
                    (None, Some(_)) => b.next(),
                    (Some(&(ca, va)), Some(&(cb, vb))) => {
                        if ca < cb {
                            a.next()
                        } else if cb < ca {
                            b.next()
                        } else {
                            a.next();
                            b.next();
                            Some((ca, va + vb))
                        }
                    }
                };
                if let Some((c, v)) = next {
                    if v.norm() > drop_tol {
                        indices.push(c);
                        values.push(v);
                    }
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self { space: self.space.clone(), indptr, indices, values })
    }

    /// Matrix product `self * other` (Gustavson row-by-row accumulation).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other, "matmul")?;
        let n = self.dim();
        let drop_tol = T::of(T::DROP_TOLERANCE);
        let mut acc = vec![Cplx::<T>::zero(); n];
        let mut marker = vec![usize::MAX; n];
        let mut cols: Vec<usize> = Vec::new();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..n {
            cols.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = Cplx::zero();
                        cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            cols.sort_unstable();
            for &c in &cols {
                if acc[c].norm() > drop_tol {
                    indices.push(c);
                    values.push(acc[c]);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self { space: self.space.clone(), indptr, indices, values })
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Kronecker product; the result acts on the concatenated space.
    pub fn kron(&self, other: &Self) -> Self {
        let mut dims = self.space.dims.clone();
        dims.extend_from_slice(&other.space.dims);
        let space = HilbertSpace { dims };
        kron_into(self, other, space)
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.iter().all(|(r, c, v)| (v - self.get(c, r).conj()).norm() <= tol)
            && self.dagger().iter().all(|(r, c, v)| (v - self.get(r, c)).norm() <= tol)
    }

    /// Largest entry-wise difference to another operator on the same space.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn trace(&self) -> Cplx<T> {
        (0..self.dim()).map(|k| self.get(k, k)).fold(Cplx::zero(), |a, b| a + b)
    }
}

fn kron_into<T: Real>(a: &SparseOperator<T>, b: &SparseOperator<T>, space: HilbertSpace) -> SparseOperator<T> {
    let nb = b.dim();
    let n = a.dim() * nb;
    let mut indptr = Vec::with_capacity(n + 1);
    let mut indices = Vec::with_capacity(a.nnz() * b.nnz());
    let mut values = Vec::with_capacity(a.nnz() * b.nnz());
    indptr.push(0);
    for ra in 0..a.dim() {
        for rb in 0..nb {
            for (ca, va) in a.row(ra) {
                for (cb, vb) in b.row(rb) {
                    indices.push(ca * nb + cb);
                    values.push(va * vb);
                }
            }
            indptr.push(indices.len());
        }
    }
    SparseOperator { space, indptr, indices, values }
}

/// Bosonic lowering operator truncated to `dim` Fock states.
pub fn annihilation<T: Real>(dim: usize) -> Result<SparseOperator<T>> {
    if dim == 0 {
        return Err(Error::InvalidDimension("bosonic mode needs at least one Fock state".into()));
    }
    SparseOperator::from_triplets(
        HilbertSpace::single(dim)?,
        (1..dim).map(|k| (k - 1, k, re(T::of(k as f64).sqrt()))),
    )
}

/// `|g><e|` with the ground state at index 0.
pub fn lowering_two_level<T: Real>() -> SparseOperator<T> {
    SparseOperator::from_triplets(HilbertSpace { dims: vec![2] }, [(0, 1, Cplx::one())])
        .expect("2x2 lowering operator is well formed")
}

/// Lifts a single-subsystem operator into `space` at `slot`, acting as the
/// identity on every other subsystem.
pub fn embed<T: Real>(op: &SparseOperator<T>, space: &HilbertSpace, slot: usize) -> Result<SparseOperator<T>> {
    let Some(&slot_dim) = space.dims.get(slot) else {
        return Err(Error::Embedding(format!("slot {slot} out of range for space {space}")));
    };
    if op.dim() != slot_dim {
        return Err(Error::Embedding(format!(
            "operator of dimension {} does not fit slot {slot} of dimension {slot_dim}",
            op.dim()
        )));
    }
    let before: usize = space.dims[..slot].iter().product();
    let after = space.stride(slot);
    let n = space.total_dim();
    let mut triplets = Vec::with_capacity(op.nnz() * before * after);
    for outer in 0..before {
        for (r, c, v) in op.iter() {
            for inner in 0..after {
                let base = outer * slot_dim * after + inner;
                triplets.push((base + r * after, base + c * after, v));
            }
        }
    }
    debug_assert!(triplets.iter().all(|&(r, c, _)| r < n && c < n));
    SparseOperator::from_triplets(space.clone(), triplets)
}

/// Superoperator of `rho -> A rho` in the column-stacking convention: `I ⊗ A`.
pub fn vectorize_left<T: Real>(op: &SparseOperator<T>) -> SparseOperator<T> {
    let id = SparseOperator::identity(op.space.clone());
    kron_into(&id, op, op.space.liouville())
}

/// Superoperator of `rho -> rho B` in the column-stacking convention: `B^T ⊗ I`.
pub fn vectorize_right<T: Real>(op: &SparseOperator<T>) -> SparseOperator<T> {
    let id = SparseOperator::identity(op.space.clone());
    kron_into(&op.transpose(), &id, op.space.liouville())
}

/// Superoperator of `rho -> A rho B`: `B^T ⊗ A`.
pub fn sandwich<T: Real>(left: &SparseOperator<T>, right: &SparseOperator<T>) -> Result<SparseOperator<T>> {
    left.check_same_space(right, "sandwich")?;
    Ok(kron_into(&right.transpose(), left, left.space.liouville()))
}

/// Column-stacked vector of a dense row-major `n x n` matrix.
pub fn vec_of<T: Real>(dense_row_major: &[Cplx<T>], n: usize) -> Vec<Cplx<T>> {
    let mut v = vec![Cplx::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            v[i + n * j] = dense_row_major[i * n + j];
        }
    }
    v
}

/// Inverse of [`vec_of`].
pub fn unvec<T: Real>(v: &[Cplx<T>], n: usize) -> Vec<Cplx<T>> {
    let mut m = vec![Cplx::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = v[i + n * j];
        }
    }
    m
}
