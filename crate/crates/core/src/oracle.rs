//! Closed-form steady-state results for the cascaded target with no internal
//! coupling, used as an independent check on the numerical pipeline.
//!
//! Each polynomial is expanded into monomials and accumulated with
//! compensated summation; at the reference parameters the terms span about
//! ten orders of magnitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::ModelParams;
use crate::scalar::{compensated_sum, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleInput<T> {
    pub omega_drive: T,
    pub gamma_s: T,
    pub kappa: T,
    pub mu1: T,
    pub mu2: T,
    pub delta: T,
}

impl<T: Real> OracleInput<T> {
    pub fn from_params(p: &ModelParams<T>) -> Self {
        Self { omega_drive: p.omega_drive, gamma_s: p.gamma_s, kappa: p.kappa, mu1: p.mu1, mu2: p.mu2, delta: p.delta }
    }

    pub fn validate(&self) -> Result<()> {
        let tol = T::of(1e-12).max(T::of(8.0) * T::epsilon());
        if (self.mu1 + self.mu2 - T::one()).abs() > tol || self.mu1 < T::zero() || self.mu2 < T::zero() {
            return Err(Error::Parameter(format!("weights mu1 = {}, mu2 = {} must be nonnegative and sum to 1", self.mu1, self.mu2)));
        }
        if !(self.gamma_s > T::zero() && self.kappa > T::zero()) {
            return Err(Error::Parameter("gamma_s and kappa must be positive".into()));
        }
        if !(self.omega_drive >= T::zero()) || !self.delta.is_finite() || !self.omega_drive.is_finite() {
            return Err(Error::Parameter("drive must be finite and nonnegative, detuning finite".into()));
        }
        Ok(())
    }
}

fn k<T: Real>(x: f64) -> T {
    T::of(x)
}

/// Mean photon number of the uncoupled target at any detuning.
pub fn na_closed_form<T: Real>(input: &OracleInput<T>) -> T {
    let OracleInput { omega_drive: w, gamma_s: gs, kappa: kp, mu1: m1, mu2: m2, delta: d } = *input;
    let w2 = w * w;
    let w4 = w2 * w2;
    let d2 = d * d;
    let d4 = d2 * d2;
    let d6 = d4 * d2;
    let (gs2, gs3, gs4) = (gs * gs, gs * gs * gs, gs * gs * gs * gs);
    let (kp2, kp3, kp4) = (kp * kp, kp * kp * kp, kp * kp * kp * kp);

    let b = compensated_sum([
        k::<T>(16.0) * d4,
        k::<T>(256.0) * w4 * m1 * m1,
        k::<T>(20.0) * d2 * gs2,
        k::<T>(24.0) * d2 * gs * kp,
        k::<T>(8.0) * d2 * kp2,
        k::<T>(64.0) * w2 * m1 * gs2,
        k::<T>(96.0) * w2 * m1 * gs * kp,
        k::<T>(32.0) * w2 * m1 * kp2,
        -k::<T>(128.0) * w2 * m1 * d2,
        (gs + kp) * (gs + kp) * compensated_sum([k::<T>(4.0) * gs2, k::<T>(4.0) * gs * kp, kp2]),
    ]);

    let a1 = compensated_sum([
        k::<T>(64.0) * kp * d6,
        k::<T>(256.0) * d4 * m1 * w2 * gs,
        -k::<T>(128.0) * d4 * m1 * w2 * kp,
        k::<T>(96.0) * d4 * gs2 * kp,
        k::<T>(128.0) * d4 * gs * kp2,
        k::<T>(48.0) * d4 * kp3,
    ]);
    let a2 = compensated_sum([
        k::<T>(512.0) * m1 * m1 * d2 * w4 * (gs + kp),
        k::<T>(32.0) * m1 * d2 * w2 * compensated_sum([k::<T>(8.0) * gs3, k::<T>(23.0) * gs2 * kp, k::<T>(16.0) * gs * kp2, k::<T>(2.0) * kp3]),
        k::<T>(4.0) * kp * d2 * compensated_sum([
            k::<T>(9.0) * gs4,
            k::<T>(28.0) * gs3 * kp,
            k::<T>(32.0) * gs2 * kp2,
            k::<T>(16.0) * gs * kp3,
            k::<T>(3.0) * kp4,
        ]),
    ]);
    let a3 = compensated_sum([
        k::<T>(8.0) * m1 * kp * w2 * compensated_sum([
            k::<T>(4.0) * gs4,
            k::<T>(16.0) * gs3 * kp,
            k::<T>(23.0) * gs2 * kp2,
            k::<T>(14.0) * gs * kp3,
            k::<T>(3.0) * kp4,
        ]),
        kp * (gs + kp) * (gs + kp) * (k::<T>(2.0) * gs + kp)
            * compensated_sum([k::<T>(2.0) * gs3, k::<T>(5.0) * gs2 * kp, k::<T>(4.0) * gs * kp2, kp3]),
        k::<T>(128.0) * w4 * kp2 * m1 * m1 * (gs + kp),
    ]);
    let a = compensated_sum([a1, a2, a3]);

    let numerator = k::<T>(16.0) * w2 * gs * m1 * m2 * a;
    let denominator = b
        * compensated_sum([k::<T>(4.0) * d2, kp2])
        * compensated_sum([k::<T>(8.0) * m1 * w2, gs2])
        * compensated_sum([k::<T>(4.0) * d2, gs2, k::<T>(2.0) * gs * kp, kp2]);
    numerator / denominator
}

/// Mean photon number of the uncoupled target on resonance.
pub fn na_resonant<T: Real>(input: &OracleInput<T>) -> T {
    let OracleInput { omega_drive: w, gamma_s: gs, kappa: kp, mu1: m1, mu2: m2, .. } = *input;
    let w2 = w * w;
    let (gs2, gs3) = (gs * gs, gs * gs * gs);
    let (kp2, kp3) = (kp * kp, kp * kp * kp);
    let numerator = k::<T>(16.0) * w2 * gs * m1 * m2
        * compensated_sum([k::<T>(8.0) * m1 * w2 * kp, k::<T>(2.0) * gs3, k::<T>(5.0) * gs2 * kp, k::<T>(4.0) * gs * kp2, kp3]);
    let denominator = kp
        * (gs + kp)
        * compensated_sum([k::<T>(8.0) * m1 * w2, gs2])
        * compensated_sum([k::<T>(16.0) * m1 * w2, k::<T>(2.0) * gs2, k::<T>(3.0) * gs * kp, kp2]);
    numerator / denominator
}

/// Equal-time `g2` of the uncoupled target on resonance. This closed form
/// carries no channel weights and does not agree with the steady-state
/// solution; it is reported next to it, never substituted for it.
pub fn g2_resonant<T: Real>(input: &OracleInput<T>) -> T {
    let OracleInput { omega_drive: w, gamma_s: gs, kappa: kp, .. } = *input;
    let w2 = w * w;
    let w4 = w2 * w2;
    let (gs2, gs3) = (gs * gs, gs * gs * gs);
    let (kp2, kp3) = (kp * kp, kp * kp * kp);

    let quad = compensated_sum([gs2, k::<T>(5.0) * gs * kp, k::<T>(6.0) * kp2]);
    let c1 = compensated_sum([k::<T>(8.0) * w2 * kp * gs, k::<T>(24.0) * w2 * kp2])
        * compensated_sum([k::<T>(4.0) * gs3, k::<T>(18.0) * gs2 * kp, k::<T>(29.0) * gs * kp2, k::<T>(17.0) * kp3]);
    let c2 = compensated_sum([k::<T>(4.0) * gs3, k::<T>(12.0) * gs2 * kp, k::<T>(11.0) * gs * kp2, k::<T>(3.0) * kp3]) * quad * quad;
    let c = compensated_sum([c1, k::<T>(192.0) * w4 * kp2 * (gs + k::<T>(2.0) * kp) * c2]);
    let d1_root = compensated_sum([k::<T>(8.0) * w2 * kp, k::<T>(2.0) * gs3, k::<T>(5.0) * gs2 * kp, k::<T>(4.0) * gs * kp2, kp3]);
    let d1 = d1_root * d1_root;
    let d = d1 * compensated_sum([k::<T>(16.0) * w2, k::<T>(2.0) * gs2, k::<T>(9.0) * gs * kp, k::<T>(9.0) * kp2]);

    let numerator = c
        * compensated_sum([k::<T>(8.0) * w2 * gs, k::<T>(8.0) * kp * w2, gs3, kp * gs2])
        * compensated_sum([k::<T>(16.0) * w2, k::<T>(2.0) * gs2, k::<T>(3.0) * gs * kp, kp2]);
    let denominator = d * compensated_sum([k::<T>(8.0) * w2, gs2, k::<T>(3.0) * gs * kp, k::<T>(2.0) * kp2]) * quad;
    numerator / denominator
}

/// Side-by-side comparison of a closed form and a numerical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub quantity: &'static str,
    pub analytic: f64,
    pub numeric: f64,
    pub relative_error: f64,
}

impl Discrepancy {
    pub fn new(quantity: &'static str, analytic: f64, numeric: f64) -> Self {
        let scale = analytic.abs().max(f64::MIN_POSITIVE);
        Self { quantity, analytic, numeric, relative_error: (numeric - analytic).abs() / scale }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.relative_error <= tol
    }
}

/// Resonant closed forms at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValues<T> {
    pub na_closed_form: T,
    pub na_resonant: T,
    pub g2_resonant: T,
}

pub fn evaluate<T: Real>(input: &OracleInput<T>) -> Result<OracleValues<T>> {
    input.validate()?;
    Ok(OracleValues {
        na_closed_form: na_closed_form(input),
        na_resonant: na_resonant(input),
        g2_resonant: g2_resonant(input),
    })
}
