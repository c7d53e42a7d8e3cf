//! Photon statistics of the target cavity and the Mollow-window analysis.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::SparseOperator;
use crate::liouvillian::ModelParams;
use crate::scalar::{Cplx, Real};
use crate::steadystate::SteadyState;

/// Below this mean photon number `g2` is reported as absent.
pub const DEFAULT_NA_FLOOR: f64 = 1e-12;
/// Half-width of the coherent-like band around `g2 = 1`.
pub const COHERENT_TOLERANCE: f64 = 0.05;

/// Scalar observable selector used by the truncation ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    MeanPhoton,
    G2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonStats<T> {
    pub n_a: T,
    pub g2: Option<T>,
}

/// `Tr(op rho)` for a dense row-major `rho`.
pub fn expectation<T: Real>(rho: &[Cplx<T>], op: &SparseOperator<T>) -> Result<Cplx<T>> {
    let n = op.dim();
    if rho.len() != n * n {
        return Err(Error::ShapeMismatch(format!(
            "density matrix with {} entries against a {n}x{n} operator",
            rho.len()
        )));
    }
    let mut acc = Cplx::zero();
    for (r, c, v) in op.iter() {
        acc += v * rho[c * n + r];
    }
    Ok(acc)
}

/// Mean photon number and equal-time `g2` of the cavity, with the default floor.
pub fn photon_stats<T: Real>(state: &SteadyState<T>) -> Result<PhotonStats<T>> {
    photon_stats_with_floor(state, T::of(DEFAULT_NA_FLOOR))
}

/// Both moments are diagonal in the Fock basis, so they are read from the
/// populations: `<a†a> = sum n p_n`, `<a†a†aa> = sum n(n-1) p_n`.
pub fn photon_stats_with_floor<T: Real>(state: &SteadyState<T>, floor: T) -> Result<PhotonStats<T>> {
    let slot = state
        .kind
        .cavity_slot()
        .ok_or_else(|| Error::Configuration(format!("{} has no cavity", state.kind)))?;
    let space = &state.space;
    let stride = space.stride(slot);
    let levels = space.dims()[slot];
    let n = space.total_dim();
    let mut first = T::zero();
    let mut second = T::zero();
    for i in 0..n {
        let k = T::of(((i / stride) % levels) as f64);
        let p = state.rho[i * n + i].re;
        first += k * p;
        second += k * (k - T::one()) * p;
    }
    Ok(stats_from_moments(first, second, floor))
}

pub fn stats_from_moments<T: Real>(first: T, second: T, floor: T) -> PhotonStats<T> {
    let g2 = (first >= floor).then(|| second / (first * first));
    PhotonStats { n_a: first, g2 }
}

/// Settings that must agree between a coupled run and its baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe<T> {
    pub delta: T,
    pub delta_s: T,
    pub delta_a: T,
    pub omega_drive: T,
    pub mu1: T,
    pub mu2: T,
    pub n_th: T,
}

impl<T: Real> Probe<T> {
    pub fn of(params: &ModelParams<T>) -> Self {
        Self {
            delta: params.delta,
            delta_s: params.delta_s,
            delta_a: params.delta_a(),
            omega_drive: params.omega_drive,
            mu1: params.mu1,
            mu2: params.mu2,
            n_th: params.n_th,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbedStats<T> {
    pub probe: Probe<T>,
    pub stats: PhotonStats<T>,
}

/// Absolute deviations `(|n_a(g) - n_a(0)|, |g2(g) - g2(0)|)`.
pub fn deviation<T: Real>(coupled: &ProbedStats<T>, baseline: &ProbedStats<T>) -> Result<(T, Option<T>)> {
    if coupled.probe != baseline.probe {
        return Err(Error::Comparison(format!(
            "probe settings differ: {:?} vs {:?}",
            coupled.probe, baseline.probe
        )));
    }
    let d_na = (coupled.stats.n_a - baseline.stats.n_a).abs();
    let d_g2 = match (coupled.stats.g2, baseline.stats.g2) {
        (Some(a), Some(b)) => Some((a - b).abs()),
        _ => None,
    };
    Ok((d_na, d_g2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedWindow {
    Center,
    SideLeft,
    SideRight,
    HalfLeft,
    HalfRight,
}

impl NamedWindow {
    pub const ALL: [NamedWindow; 5] =
        [Self::SideLeft, Self::HalfLeft, Self::Center, Self::HalfRight, Self::SideRight];

    pub fn name(self) -> &'static str {
        match self {
            Self::Center => "center",
            Self::SideLeft => "side_left",
            Self::SideRight => "side_right",
            Self::HalfLeft => "half_left",
            Self::HalfRight => "half_right",
        }
    }
}

impl fmt::Display for NamedWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NamedWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|w| w.name() == norm)
            .ok_or_else(|| Error::Parse(format!("unknown window '{s}'")))
    }
}

/// Detunings of the triplet peaks and the halfway points between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollowWindows<T> {
    pub center: T,
    pub side_left: T,
    pub side_right: T,
    pub half_left: T,
    pub half_right: T,
}

impl<T: Real> MollowWindows<T> {
    pub fn get(&self, window: NamedWindow) -> T {
        match window {
            NamedWindow::Center => self.center,
            NamedWindow::SideLeft => self.side_left,
            NamedWindow::SideRight => self.side_right,
            NamedWindow::HalfLeft => self.half_left,
            NamedWindow::HalfRight => self.half_right,
        }
    }
}

/// Abscissa of the parabola through three points.
fn parabola_vertex<T: Real>(x: [T; 3], y: [T; 3]) -> T {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d2 - d1) / (x[2] - x[0]);
    if !(curvature < T::zero()) {
        return x[1];
    }
    let two = T::of(2.0);
    let vertex = (x[0] + x[1]) / two - d1 / (two * curvature);
    vertex.max(x[0]).min(x[2])
}

/// Locates the central and side peaks of a baseline `n_a(delta)` scan.
///
/// The centre is the global maximum; each side peak is the highest local
/// maximum on its side. Peak positions are refined by a parabola through the
/// discrete maximum and its two neighbours.
pub fn find_mollow_windows<T: Real>(axis: &[T], n_a: &[T]) -> Result<MollowWindows<T>> {
    if axis.len() != n_a.len() {
        return Err(Error::ShapeMismatch(format!("{} axis points, {} values", axis.len(), n_a.len())));
    }
    if axis.len() < 5 {
        return Err(Error::NotInMollowRegime(format!("{} grid points cannot resolve a triplet", axis.len())));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("window search needs a strictly increasing axis".into()));
    }
    let top = n_a.iter().copied().fold(T::neg_infinity(), T::max);
    let margin = top * T::of(1e-9);
    let maxima: Vec<usize> = (1..axis.len() - 1)
        .filter(|&i| n_a[i] > n_a[i - 1] + margin && n_a[i] >= n_a[i + 1] + margin)
        .collect();
    if maxima.len() < 3 {
        return Err(Error::NotInMollowRegime(format!("found {} local maxima, need 3", maxima.len())));
    }
    let by_height = |a: &&usize, b: &&usize| n_a[**a].partial_cmp(&n_a[**b]).unwrap_or(std::cmp::Ordering::Equal);
    let center = *maxima.iter().max_by(by_height).unwrap();
    let left = maxima.iter().filter(|&&i| i < center).max_by(by_height);
    let right = maxima.iter().filter(|&&i| i > center).max_by(by_height);
    let (Some(&left), Some(&right)) = (left, right) else {
        return Err(Error::NotInMollowRegime("no side peak on one side of the central maximum".into()));
    };
    let refine = |i: usize| parabola_vertex([axis[i - 1], axis[i], axis[i + 1]], [n_a[i - 1], n_a[i], n_a[i + 1]]);
    let (c, l, r) = (refine(center), refine(left), refine(right));
    let two = T::of(2.0);
    Ok(MollowWindows { center: c, side_left: l, side_right: r, half_left: (c + l) / two, half_right: (c + r) / two })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticsClass {
    Antibunched,
    CoherentLike,
    Bunched,
    Superbunched,
}

impl fmt::Display for StatisticsClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Antibunched => "antibunched",
            Self::CoherentLike => "coherent-like",
            Self::Bunched => "bunched",
            Self::Superbunched => "superbunched",
        })
    }
}

pub fn classify<T: Real>(g2: T) -> StatisticsClass {
    let one = T::one();
    if (g2 - one).abs() <= T::of(COHERENT_TOLERANCE) {
        StatisticsClass::CoherentLike
    } else if g2 < one {
        StatisticsClass::Antibunched
    } else if g2 <= T::of(2.0) {
        StatisticsClass::Bunched
    } else {
        StatisticsClass::Superbunched
    }
}
