//! Liouvillian superoperators for the source, cascaded and classically driven
//! models.
//!
//! All rates and detunings are in units of the target cavity decay rate. The
//! rotating-frame master equation is written as
//! `d rho/dt = -i[H, rho] + sum_k rate_k D[O_k] rho + cascaded terms`, with
//! `D[O] rho = O rho O^† - (O^†O rho + rho O^†O)/2`.
//!
//! Subsystem slots are fixed: source emitter first, then the target cavity,
//! then the target's matter degree of freedom (two-level atom or mechanical
//! mode). Classically driven baselines have no source slot.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{annihilation, embed, lowering_two_level, sandwich, vectorize_left, vectorize_right, HilbertSpace, SparseOperator};
use crate::scalar::{c, re, Cplx, Real};

/// Model family to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// Driven two-level source on its own.
    #[serde(rename = "source-only", alias = "source_only")]
    SourceOnly,
    /// Source fluorescence cascaded into a Jaynes–Cummings target.
    #[serde(rename = "cascaded-jc", alias = "cascaded_jc")]
    CascadedJC,
    /// Source fluorescence cascaded into an optomechanical target.
    #[serde(rename = "cascaded-oms", alias = "cascaded_oms")]
    CascadedOMS,
    /// Cascaded Jaynes–Cummings model coupled to a thermal bath.
    #[serde(rename = "cascaded-jc-thermal", alias = "cascaded_jc_thermal")]
    CascadedJCThermal,
    /// Coherently driven Jaynes–Cummings cavity (no source).
    #[serde(rename = "classical-jc", alias = "classical_jc")]
    ClassicalJC,
    /// Coherently driven optomechanical cavity (no source).
    #[serde(rename = "classical-oms", alias = "classical_oms")]
    ClassicalOMS,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::SourceOnly,
        ModelKind::CascadedJC,
        ModelKind::CascadedOMS,
        ModelKind::CascadedJCThermal,
        ModelKind::ClassicalJC,
        ModelKind::ClassicalOMS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::SourceOnly => "source-only",
            ModelKind::CascadedJC => "cascaded-jc",
            ModelKind::CascadedOMS => "cascaded-oms",
            ModelKind::CascadedJCThermal => "cascaded-jc-thermal",
            ModelKind::ClassicalJC => "classical-jc",
            ModelKind::ClassicalOMS => "classical-oms",
        }
    }

    pub fn has_source(self) -> bool {
        matches!(self, ModelKind::SourceOnly | ModelKind::CascadedJC | ModelKind::CascadedOMS | ModelKind::CascadedJCThermal)
    }

    pub fn has_cavity(self) -> bool {
        self != ModelKind::SourceOnly
    }

    pub fn is_jc(self) -> bool {
        matches!(self, ModelKind::CascadedJC | ModelKind::CascadedJCThermal | ModelKind::ClassicalJC)
    }

    pub fn is_oms(self) -> bool {
        matches!(self, ModelKind::CascadedOMS | ModelKind::ClassicalOMS)
    }

    /// Subsystem dimensions for the given truncations.
    pub fn dims(self, n_cavity: usize, n_mech: usize) -> Vec<usize> {
        match self {
            ModelKind::SourceOnly => vec![2],
            ModelKind::CascadedJC | ModelKind::CascadedJCThermal => vec![2, n_cavity, 2],
            ModelKind::CascadedOMS => vec![2, n_cavity, n_mech],
            ModelKind::ClassicalJC => vec![n_cavity, 2],
            ModelKind::ClassicalOMS => vec![n_cavity, n_mech],
        }
    }

    /// Slot of the target cavity, if the model has one.
    pub fn cavity_slot(self) -> Option<usize> {
        match self {
            ModelKind::SourceOnly => None,
            ModelKind::ClassicalJC | ModelKind::ClassicalOMS => Some(0),
            _ => Some(1),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Configuration(format!("unknown model kind '{s}'")))
    }
}

/// Physical parameters for one simulation point, in units of the cavity decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub kappa: T,
    pub gamma_s: T,
    pub gamma: T,
    pub gamma_m: T,
    pub omega_drive: T,
    pub mu1: T,
    pub mu2: T,
    pub delta: T,
    pub delta_s: T,
    /// Target atom detuning; follows `delta` when unset.
    pub delta_a: Option<T>,
    pub g: T,
    pub g_m: T,
    pub omega_m: T,
    pub n_th: T,
    pub n_cavity: usize,
    pub n_mech: usize,
}

impl<T: Real> Default for ModelParams<T> {
    /// Source and Jaynes–Cummings settings of the reference spectra:
    /// `gamma_s = 0.02`, `gamma = gamma_m = 0.001`, `Omega = 8`,
    /// `mu1 = mu2 = 0.5`, `omega_m = 5`.
    fn default() -> Self {
        Self {
            kappa: T::one(),
            gamma_s: T::of(0.02),
            gamma: T::of(0.001),
            gamma_m: T::of(0.001),
            omega_drive: T::of(8.0),
            mu1: T::of(0.5),
            mu2: T::of(0.5),
            delta: T::zero(),
            delta_s: T::zero(),
            delta_a: None,
            g: T::zero(),
            g_m: T::zero(),
            omega_m: T::of(5.0),
            n_th: T::zero(),
            n_cavity: 8,
            n_mech: 12,
        }
    }
}

impl<T: Real> ModelParams<T> {
    pub fn delta_a(&self) -> T {
        self.delta_a.unwrap_or(self.delta)
    }

    /// Checks the parameter invariants that hold for every model kind.
    pub fn validate(&self) -> Result<()> {
        let weight_tol = T::of(1e-12).max(T::of(8.0) * T::epsilon());
        if (self.mu1 + self.mu2 - T::one()).abs() > weight_tol {
            return Err(Error::Parameter(format!("mu1 + mu2 = {} must equal 1", self.mu1 + self.mu2)));
        }
        if self.mu1 < T::zero() || self.mu2 < T::zero() {
            return Err(Error::Parameter("channel weights must be nonnegative".into()));
        }
        let rates = [
            ("kappa", self.kappa),
            ("gamma_s", self.gamma_s),
            ("gamma", self.gamma),
            ("gamma_m", self.gamma_m),
            ("omega_drive", self.omega_drive),
            ("n_th", self.n_th),
        ];
        for (name, v) in rates {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::Parameter(format!("{name} = {v} must be finite and nonnegative")));
            }
        }
        let finite = [
            ("delta", self.delta),
            ("delta_s", self.delta_s),
            ("delta_a", self.delta_a()),
            ("g", self.g),
            ("g_m", self.g_m),
            ("omega_m", self.omega_m),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be finite")));
            }
        }
        if self.n_cavity < 2 {
            return Err(Error::Parameter(format!("n_cavity = {} must be at least 2", self.n_cavity)));
        }
        if self.n_mech < 2 {
            return Err(Error::Parameter(format!("n_mech = {} must be at least 2", self.n_mech)));
        }
        Ok(())
    }

    /// Rejects parameters that belong to a different model family.
    pub fn validate_for(&self, kind: ModelKind) -> Result<()> {
        self.validate()?;
        if kind != ModelKind::CascadedJCThermal && !self.n_th.is_zero() {
            return Err(Error::Configuration(format!("n_th = {} is only meaningful for {}", self.n_th, ModelKind::CascadedJCThermal)));
        }
        if !kind.is_oms() && !self.g_m.is_zero() {
            return Err(Error::Configuration(format!("g_m = {} given for non-optomechanical model {kind}", self.g_m)));
        }
        if !kind.is_jc() && !self.g.is_zero() {
            return Err(Error::Configuration(format!("g = {} given for non-Jaynes–Cummings model {kind}", self.g)));
        }
        Ok(())
    }

    /// Dissipative source-to-target coupling `sqrt(mu2 gamma_s kappa)`.
    pub fn cascade_strength(&self) -> T {
        (self.mu2 * self.gamma_s * self.kappa).sqrt()
    }

    pub fn space(&self, kind: ModelKind) -> Result<HilbertSpace> {
        HilbertSpace::new(kind.dims(self.n_cavity, self.n_mech))
    }
}

/// Assembled superoperator together with the model it came from.
#[derive(Debug, Clone)]
pub struct LiouvillianMatrix<T> {
    pub kind: ModelKind,
    /// Hilbert space the density matrix lives on.
    pub space: HilbertSpace,
    /// Superoperator on the column-stacked Liouville space.
    pub matrix: SparseOperator<T>,
}

impl<T: Real> LiouvillianMatrix<T> {
    /// `max_j |sum_i L[(i,i), j]|`, the largest entry of `vec(I)^T L`.
    pub fn trace_defect(&self) -> T {
        let n = self.space.total_dim();
        let mut row = vec![Cplx::<T>::zero(); n * n];
        for i in 0..n {
            for (col, v) in self.matrix.row(i * (n + 1)) {
                row[col] += v;
            }
        }
        row.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    pub fn max_abs(&self) -> T {
        self.matrix.max_abs()
    }

    pub fn is_trace_annihilating(&self, relative_tol: T) -> bool {
        self.trace_defect() <= relative_tol * self.max_abs()
    }

    /// Applies the superoperator to a dense row-major density matrix.
    pub fn apply_to(&self, rho: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        let n = self.space.total_dim();
        let v = crate::hilbert::vec_of(rho, n);
        Ok(crate::hilbert::unvec(&self.matrix.apply(&v)?, n))
    }
}

/// Embedded operators of one model.
#[derive(Debug, Clone)]
pub struct ModelOperators<T> {
    pub space: HilbertSpace,
    pub sigma_s: Option<SparseOperator<T>>,
    pub a: Option<SparseOperator<T>>,
    pub sigma: Option<SparseOperator<T>>,
    pub b: Option<SparseOperator<T>>,
}

impl<T: Real> ModelOperators<T> {
    pub fn new(kind: ModelKind, params: &ModelParams<T>) -> Result<Self> {
        let space = params.space(kind)?;
        let mut ops = Self { space: space.clone(), sigma_s: None, a: None, sigma: None, b: None };
        if kind.has_source() {
            ops.sigma_s = Some(embed(&lowering_two_level(), &space, 0)?);
        }
        if let Some(slot) = kind.cavity_slot() {
            ops.a = Some(embed(&annihilation(params.n_cavity)?, &space, slot)?);
            if kind.is_jc() {
                ops.sigma = Some(embed(&lowering_two_level(), &space, slot + 1)?);
            }
            if kind.is_oms() {
                ops.b = Some(embed(&annihilation(params.n_mech)?, &space, slot + 1)?);
            }
        }
        Ok(ops)
    }

    pub fn cavity(&self) -> Result<&SparseOperator<T>> {
        self.a.as_ref().ok_or_else(|| Error::Configuration("model has no target cavity".into()))
    }

    fn source(&self) -> Result<&SparseOperator<T>> {
        self.sigma_s.as_ref().ok_or_else(|| Error::Configuration("model has no source emitter".into()))
    }
}

fn number<T: Real>(op: &SparseOperator<T>) -> Result<SparseOperator<T>> {
    op.dagger().matmul(op)
}

/// Source Hamiltonian on the bare two-level space (drive phase real).
pub fn source_hamiltonian<T: Real>(params: &ModelParams<T>) -> Result<SparseOperator<T>> {
    let s = lowering_two_level::<T>();
    let drive = params.mu1.sqrt() * params.omega_drive;
    number(&s)?.scale_real(params.delta_s).add(&s.add(&s.dagger())?.scale_real(drive))
}

/// Jaynes–Cummings target Hamiltonian on `[source, cavity, atom]`.
pub fn jc_hamiltonian<T: Real>(params: &ModelParams<T>) -> Result<SparseOperator<T>> {
    let space = HilbertSpace::new(vec![2, params.n_cavity, 2])?;
    jc_hamiltonian_on(params, &space, 1)
}

fn jc_hamiltonian_on<T: Real>(params: &ModelParams<T>, space: &HilbertSpace, cavity_slot: usize) -> Result<SparseOperator<T>> {
    let a = embed(&annihilation(params.n_cavity)?, space, cavity_slot)?;
    let s = embed(&lowering_two_level(), space, cavity_slot + 1)?;
    let exchange = s.dagger().matmul(&a)?.add(&s.matmul(&a.dagger())?)?;
    number(&a)?
        .scale_real(params.delta)
        .add(&number(&s)?.scale_real(params.delta_a()))?
        .add(&exchange.scale_real(params.g))
}

/// Optomechanical target Hamiltonian on `[source, cavity, mechanics]`.
pub fn oms_hamiltonian<T: Real>(params: &ModelParams<T>) -> Result<SparseOperator<T>> {
    let space = HilbertSpace::new(vec![2, params.n_cavity, params.n_mech])?;
    oms_hamiltonian_on(params, &space, 1)
}

fn oms_hamiltonian_on<T: Real>(params: &ModelParams<T>, space: &HilbertSpace, cavity_slot: usize) -> Result<SparseOperator<T>> {
    let a = embed(&annihilation(params.n_cavity)?, space, cavity_slot)?;
    let b = embed(&annihilation(params.n_mech)?, space, cavity_slot + 1)?;
    let na = number(&a)?;
    let radiation_pressure = na.matmul(&b.add(&b.dagger())?)?;
    na.scale_real(params.delta)
        .add(&number(&b)?.scale_real(params.omega_m))?
        .add(&radiation_pressure.scale_real(params.g_m))
}

/// `-i[H, .]` as a superoperator.
pub fn coherent_part<T: Real>(h: &SparseOperator<T>) -> SparseOperator<T> {
    let minus_i = c(T::zero(), -T::one());
    vectorize_left(h)
        .sub(&vectorize_right(h))
        .expect("left and right actions share the Liouville space")
        .scale(minus_i)
}

/// `rate * D[jump]` as a superoperator.
pub fn dissipator<T: Real>(jump: &SparseOperator<T>, rate: T) -> Result<SparseOperator<T>> {
    if rate < T::zero() || !rate.is_finite() {
        return Err(Error::Parameter(format!("dissipation rate {rate} must be finite and nonnegative")));
    }
    let liouville = jump.space().liouville();
    if rate.is_zero() {
        return Ok(SparseOperator::zeros(liouville));
    }
    let half = re(T::of(0.5));
    let jd = jump.dagger();
    let jdj = jd.matmul(jump)?;
    sandwich(jump, &jd)?
        .axpy(-half, &vectorize_left(&jdj))?
        .axpy(-half, &vectorize_right(&jdj))
        .map(|op| op.scale_real(rate))
}

/// Superoperator of `-{[x^†, y rho] + [rho y^†, x]}`.
fn one_way_feed<T: Real>(x: &SparseOperator<T>, y: &SparseOperator<T>) -> Result<SparseOperator<T>> {
    let xd = x.dagger();
    let yd = y.dagger();
    // x^† y rho - y rho x^† + rho y^† x - x rho y^†
    let forward = vectorize_left(&xd.matmul(y)?)
        .sub(&sandwich(y, &xd)?)?
        .add(&vectorize_right(&yd.matmul(x)?))?
        .sub(&sandwich(x, &yd)?)?;
    Ok(forward.scale_real(-T::one()))
}

/// Unidirectional source-to-cavity term
/// `-sqrt(mu2 gamma_s kappa) {[a^†, sigma_s rho] + [rho sigma_s^†, a]}`
/// on a cascaded model's space.
pub fn cascaded_term<T: Real>(params: &ModelParams<T>, ops: &ModelOperators<T>) -> Result<SparseOperator<T>> {
    let strength = params.cascade_strength();
    let liouville = ops.space.liouville();
    if strength.is_zero() {
        return Ok(SparseOperator::zeros(liouville));
    }
    Ok(one_way_feed(ops.cavity()?, ops.source()?)?.scale_real(strength))
}

/// Thermal counterpart `-sqrt(mu2 gamma_s kappa) {[a, sigma_s^† rho] + [rho sigma_s, a^†]}`
/// (without the occupancy factor).
fn cascaded_term_reversed<T: Real>(params: &ModelParams<T>, ops: &ModelOperators<T>) -> Result<SparseOperator<T>> {
    let strength = params.cascade_strength();
    if strength.is_zero() {
        return Ok(SparseOperator::zeros(ops.space.liouville()));
    }
    let ad = ops.cavity()?.dagger();
    let sd = ops.source()?.dagger();
    Ok(one_way_feed(&ad, &sd)?.scale_real(strength))
}

/// Builds the full Liouvillian of `kind` at `params`.
pub fn assemble<T: Real>(kind: ModelKind, params: &ModelParams<T>) -> Result<LiouvillianMatrix<T>> {
    params.validate_for(kind)?;
    let ops = ModelOperators::new(kind, params)?;
    let space = ops.space.clone();
    let matrix = match kind {
        ModelKind::SourceOnly => {
            let h = source_hamiltonian(params)?;
            coherent_part(&h).add(&dissipator(&lowering_two_level(), params.gamma_s)?)?
        }
        ModelKind::CascadedJC | ModelKind::CascadedJCThermal => {
            let n_th = if kind == ModelKind::CascadedJCThermal { params.n_th } else { T::zero() };
            cascaded_jc(params, &ops, n_th)?
        }
        ModelKind::CascadedOMS => {
            let h = embed(&source_hamiltonian(params)?, &space, 0)?.add(&oms_hamiltonian_on(params, &space, 1)?)?;
            coherent_part(&h)
                .add(&dissipator(ops.source()?, params.gamma_s)?)?
                .add(&dissipator(ops.cavity()?, params.kappa)?)?
                .add(&dissipator(ops.b.as_ref().expect("optomechanical model has a mechanical mode"), params.gamma_m)?)?
                .add(&cascaded_term(params, &ops)?)?
        }
        ModelKind::ClassicalJC => {
            let a = ops.cavity()?;
            let h = jc_hamiltonian_on(params, &space, 0)?.add(&a.add(&a.dagger())?.scale_real(params.omega_drive))?;
            coherent_part(&h)
                .add(&dissipator(a, params.kappa)?)?
                .add(&dissipator(ops.sigma.as_ref().expect("JC model has a target atom"), params.gamma)?)?
        }
        ModelKind::ClassicalOMS => {
            let a = ops.cavity()?;
            let h = oms_hamiltonian_on(params, &space, 0)?.add(&a.add(&a.dagger())?.scale_real(params.omega_drive))?;
            coherent_part(&h)
                .add(&dissipator(a, params.kappa)?)?
                .add(&dissipator(ops.b.as_ref().expect("optomechanical model has a mechanical mode"), params.gamma_m)?)?
        }
    };
    Ok(LiouvillianMatrix { kind, space, matrix })
}

/// Cascaded Jaynes–Cummings Liouvillian with bath occupancy `n_th`; `n_th = 0`
/// gives the zero-temperature model exactly.
fn cascaded_jc<T: Real>(params: &ModelParams<T>, ops: &ModelOperators<T>, n_th: T) -> Result<SparseOperator<T>> {
    let space = &ops.space;
    let sigma_s = ops.source()?;
    let a = ops.cavity()?;
    let sigma = ops.sigma.as_ref().expect("JC model has a target atom");
    let h = embed(&source_hamiltonian(params)?, space, 0)?.add(&jc_hamiltonian_on(params, space, 1)?)?;
    let up = n_th + T::one();
    let mut l = coherent_part(&h)
        .add(&dissipator(sigma_s, params.gamma_s * up)?)?
        .add(&dissipator(a, params.kappa * up)?)?
        .add(&dissipator(sigma, params.gamma * up)?)?
        .add(&cascaded_term(params, ops)?.scale_real(up))?;
    if !n_th.is_zero() {
        l = l
            .add(&dissipator(&sigma_s.dagger(), params.gamma_s * n_th)?)?
            .add(&dissipator(&a.dagger(), params.kappa * n_th)?)?
            .add(&dissipator(&sigma.dagger(), params.gamma * n_th)?)?
            .add(&cascaded_term_reversed(params, ops)?.scale_real(n_th))?;
    }
    Ok(l)
}
