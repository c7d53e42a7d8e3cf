//! Steady states of assembled Liouvillians.
//!
//! `L rho = 0` is made nonsingular by overwriting the first row of `L` (the
//! equation for `rho[0][0]`) with the trace functional and solving against the
//! unit vector. The redundant row is always the first; the post-hoc residual
//! on the full, unbordered system certifies the choice.

use nalgebra::{Complex as NaComplex, DMatrix};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{unvec, HilbertSpace};
use crate::linalg::{gmres, norm2, CscMatrix, GmresOptions, LuError, LuOptions, SparseLu};
use crate::liouvillian::{assemble, LiouvillianMatrix, ModelKind, ModelParams};
use crate::observables::{photon_stats, Observable};
use crate::scalar::{Cplx, Real};

/// Solver configuration.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Accepted `||L vec(rho)||_2` relative to `max |L_ij|`.
    pub tolerance: f64,
    /// Allowed `|vec(I)^T L|` relative to `max |L_ij|` before solving.
    pub trace_tolerance: f64,
    pub lu: LuOptions,
    pub gmres: GmresOptions,
    /// Skip the dense eigenvalue diagnostic above this Hilbert dimension.
    pub eigen_max_dim: usize,
}

impl SolverOptions {
    pub fn for_scalar<T: Real>() -> Self {
        Self {
            tolerance: T::RESIDUAL_TOLERANCE,
            trace_tolerance: T::RESIDUAL_TOLERANCE,
            lu: LuOptions::default(),
            gmres: GmresOptions { tolerance: T::RESIDUAL_TOLERANCE * 1e-2, ..GmresOptions::default() },
            eigen_max_dim: 1024,
        }
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self::for_scalar::<f64>()
    }
}

/// How a steady state was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SolveMethod {
    DirectLu { fill: usize },
    Gmres { iterations: usize },
}

/// Density matrix with solver diagnostics.
#[derive(Debug, Clone)]
pub struct SteadyState<T> {
    pub kind: ModelKind,
    pub space: HilbertSpace,
    /// Dense row-major density matrix.
    pub rho: Vec<Cplx<T>>,
    /// `||L vec(rho)||_2`.
    pub residual: f64,
    /// `|Tr rho - 1|`.
    pub trace_error: f64,
    /// `max |rho - rho^†|`.
    pub hermiticity_error: f64,
    /// Most negative eigenvalue of the Hermitian part (diagnostic only, never
    /// used to modify `rho`). `None` when the dimension exceeds the
    /// configured diagnostic limit.
    pub min_eigenvalue: Option<f64>,
    pub method: SolveMethod,
    /// Residual threshold the solve was accepted against.
    pub accepted_tolerance: f64,
}

impl<T: Real> SteadyState<T> {
    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn get(&self, row: usize, col: usize) -> Cplx<T> {
        self.rho[row * self.dim() + col]
    }

    /// Whether the state passes the positivity diagnostic at `floor`
    /// (`true` when the diagnostic was skipped).
    pub fn is_positive_within(&self, floor: f64) -> bool {
        self.min_eigenvalue.is_none_or(|e| e >= floor)
    }
}

fn bordered_system<T: Real>(l: &LiouvillianMatrix<T>) -> CscMatrix<T> {
    let n = l.space.total_dim();
    let dim = n * n;
    let (indptr, indices, values) = l.matrix.raw_parts();
    let mut colptr = vec![0usize; dim + 1];
    for &c in &indices[indptr[1]..] {
        colptr[c + 1] += 1;
    }
    for k in 0..n {
        colptr[k * (n + 1) + 1] += 1;
    }
    for k in 0..dim {
        colptr[k + 1] += colptr[k];
    }
    let nnz = colptr[dim];
    let mut next = colptr.clone();
    let mut rowidx = vec![0usize; nnz];
    let mut vals = vec![Cplx::zero(); nnz];
    // Row 0 first so each column stays sorted by row.
    for k in 0..n {
        let c = k * (n + 1);
        rowidx[next[c]] = 0;
        vals[next[c]] = Cplx::new(T::one(), T::zero());
        next[c] += 1;
    }
    for r in 1..dim {
        for p in indptr[r]..indptr[r + 1] {
            let c = indices[p];
            rowidx[next[c]] = r;
            vals[next[c]] = values[p];
            next[c] += 1;
        }
    }
    CscMatrix { n: dim, colptr, rowidx, values: vals }
}

/// Solves `L rho = 0`, `Tr rho = 1`.
pub fn solve<T: Real>(l: &LiouvillianMatrix<T>, opts: &SolverOptions) -> Result<SteadyState<T>> {
    let n = l.space.total_dim();
    let lmax = l.max_abs();
    let defect = l.trace_defect();
    let allowed = T::of(opts.trace_tolerance) * lmax;
    if defect > allowed {
        return Err(Error::NotTraceAnnihilating { defect: defect.to_f64_lossy(), allowed: allowed.to_f64_lossy() });
    }
    let bordered = bordered_system(l);
    let mut rhs = vec![Cplx::<T>::zero(); n * n];
    rhs[0] = Cplx::new(T::one(), T::zero());

    let (x, method) = match SparseLu::factor(&bordered, &[0], &opts.lu) {
        Ok(lu) => {
            let mut x = lu.solve(&rhs);
            // One step of iterative refinement on the bordered system.
            let bx = bordered.matvec(&x);
            let r: Vec<Cplx<T>> = rhs.iter().zip(&bx).map(|(b, y)| *b - *y).collect();
            let dx = lu.solve(&r);
            for (xi, di) in x.iter_mut().zip(dx) {
                *xi += di;
            }
            (x, SolveMethod::DirectLu { fill: lu.fill() })
        }
        Err(LuError::Singular { column }) => return Err(Error::NonUniqueSteadyState { column }),
        Err(LuError::FillExceeded { .. }) => {
            let out = gmres(&bordered, &rhs, None, &opts.gmres);
            if !out.converged {
                let residual = norm2(&l.matrix.apply(&out.x)?).to_f64_lossy();
                return Err(Error::Solver {
                    residual,
                    tolerance: opts.tolerance * lmax.to_f64_lossy(),
                    detail: format!(
                        "iterative fallback stopped after {} iterations at relative residual {:e}",
                        out.iterations, out.relative_residual
                    ),
                });
            }
            (out.x, SolveMethod::Gmres { iterations: out.iterations })
        }
        Err(LuError::Shape(msg)) => return Err(Error::ShapeMismatch(msg)),
    };

    let residual = norm2(&l.matrix.apply(&x)?).to_f64_lossy();
    let accepted = opts.tolerance * lmax.to_f64_lossy();
    if !(residual <= accepted) {
        return Err(Error::Solver { residual, tolerance: accepted, detail: format!("{method:?}") });
    }
    let rho = unvec(&x, n);
    let trace = (0..n).fold(Cplx::<T>::zero(), |acc, k| acc + rho[k * n + k]);
    let trace_error = (trace - Cplx::new(T::one(), T::zero())).norm().to_f64_lossy();
    let mut herm = T::zero();
    for i in 0..n {
        for j in 0..n {
            herm = herm.max((rho[i * n + j] - rho[j * n + i].conj()).norm());
        }
    }
    let min_eigenvalue = (n <= opts.eigen_max_dim).then(|| min_hermitian_eigenvalue(&rho, n));
    Ok(SteadyState {
        kind: l.kind,
        space: l.space.clone(),
        rho,
        residual,
        trace_error,
        hermiticity_error: herm.to_f64_lossy(),
        min_eigenvalue,
        method,
        accepted_tolerance: accepted,
    })
}

/// Smallest eigenvalue of the Hermitian part of a dense row-major matrix,
/// evaluated in double precision.
pub fn min_hermitian_eigenvalue<T: Real>(rho: &[Cplx<T>], n: usize) -> f64 {
    let m = DMatrix::from_fn(n, n, |i, j| {
        let a = rho[i * n + j];
        let b = rho[j * n + i].conj();
        NaComplex::new(
            0.5 * (a.re.to_f64_lossy() + b.re.to_f64_lossy()),
            0.5 * (a.im.to_f64_lossy() + b.im.to_f64_lossy()),
        )
    });
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Assembles and solves in one step.
pub fn solve_model<T: Real>(kind: ModelKind, params: &ModelParams<T>, opts: &SolverOptions) -> Result<SteadyState<T>> {
    solve(&assemble(kind, params)?, opts)
}

/// Outcome of [`converge_truncation`].
#[derive(Debug, Clone)]
pub struct ConvergedTruncation<T> {
    pub n_cavity: usize,
    pub n_mech: usize,
    /// Steady state at the returned truncation.
    pub state: SteadyState<T>,
    /// Observable at the returned truncation.
    pub value: T,
    /// Observable at the next rung of the ladder, used to certify `value`.
    pub check_value: Option<T>,
    /// Every `(n_cavity, n_mech, value)` evaluated, in order.
    pub history: Vec<(usize, usize, Option<T>)>,
}

/// Upper limits for the truncation ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationCap {
    pub n_cavity: usize,
    pub n_mech: usize,
}

impl Default for TruncationCap {
    fn default() -> Self {
        Self { n_cavity: 32, n_mech: 48 }
    }
}

fn evaluate<T: Real>(
    kind: ModelKind,
    params: &ModelParams<T>,
    observable: Observable,
    dims: (usize, usize),
    opts: &SolverOptions,
) -> Result<(SteadyState<T>, Option<T>)> {
    let p = ModelParams { n_cavity: dims.0, n_mech: dims.1, ..params.clone() };
    let state = solve_model(kind, &p, opts)?;
    let stats = photon_stats(&state)?;
    let value = match observable {
        Observable::MeanPhoton => Some(stats.n_a),
        Observable::G2 => stats.g2,
    };
    Ok((state, value))
}

fn relative_change<T: Real>(a: Option<T>, b: Option<T>) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) => {
            let scale = a.abs().max(b.abs());
            if scale.is_zero() {
                0.0
            } else {
                ((a - b).abs() / scale).to_f64_lossy()
            }
        }
        (None, None) => 0.0,
        _ => f64::INFINITY,
    }
}

/// Smallest truncation on a doubling ladder whose observable changes by less
/// than `tol` (relative) when the truncation is doubled.
///
/// The cavity truncation is settled first, then (for optomechanical models)
/// the mechanical one at the settled cavity truncation. The returned
/// truncation is the coarser member of the certifying pair.
pub fn converge_truncation<T: Real>(
    kind: ModelKind,
    params: &ModelParams<T>,
    observable: Observable,
    start: (usize, usize),
    tol: f64,
    cap: TruncationCap,
    opts: &SolverOptions,
) -> Result<ConvergedTruncation<T>> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("truncation tolerance {tol} must be positive")));
    }
    if !kind.has_cavity() {
        return Err(Error::Configuration(format!("{kind} has no cavity to truncate")));
    }
    let mut history = Vec::new();
    let (mut nc, mut nm) = start;
    let (mut state, mut value) = evaluate(kind, params, observable, (nc, nm), opts)?;
    history.push((nc, nm, value));
    if tol.is_infinite() {
        let value = value.ok_or_else(|| Error::Comparison("observable undefined at start truncation".into()))?;
        return Ok(ConvergedTruncation { n_cavity: nc, n_mech: nm, state, value, check_value: None, history });
    }

    let mut check_value;
    // Cavity ladder.
    loop {
        let next = nc * 2;
        if next > cap.n_cavity {
            let last_change = history
                .windows(2)
                .last()
                .map(|w| relative_change(w[0].2, w[1].2))
                .unwrap_or(f64::INFINITY);
            return Err(Error::TruncationNonConvergence { cap: (cap.n_cavity, cap.n_mech), last_change });
        }
        let (s, v) = evaluate(kind, params, observable, (next, nm), opts)?;
        history.push((next, nm, v));
        if relative_change(value, v) < tol {
            check_value = v;
            break;
        }
        nc = next;
        state = s;
        value = v;
    }
    if kind.is_oms() {
        loop {
            let next = nm * 2;
            if next > cap.n_mech {
                let last_change = relative_change(history[history.len() - 2].2, history[history.len() - 1].2);
                return Err(Error::TruncationNonConvergence { cap: (cap.n_cavity, cap.n_mech), last_change });
            }
            let (s, v) = evaluate(kind, params, observable, (nc, next), opts)?;
            history.push((nc, next, v));
            if relative_change(value, v) < tol {
                check_value = v;
                break;
            }
            nm = next;
            state = s;
            value = v;
        }
    }
    let value = value.ok_or_else(|| Error::Comparison("observable undefined at converged truncation".into()))?;
    Ok(ConvergedTruncation { n_cavity: nc, n_mech: nm, state, value, check_value, history })
}
