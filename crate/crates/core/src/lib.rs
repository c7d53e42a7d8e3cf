//! Steady-state simulation of a driven two-level emitter whose fluorescence
//! drives a Jaynes–Cummings or optomechanical target cavity, with the
//! photon-statistics analysis used to detect weak coupling inside the target.

pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod liouvillian;
pub mod observables;
pub mod oracle;
pub mod config;
pub mod scan;
pub mod emit;
pub mod checks;
pub mod scalar;
pub mod steadystate;

pub use error::{Error, Result};
pub use hilbert::{HilbertSpace, SparseOperator};
pub use scalar::{Cplx, Real};

// Double-precision aliases used by the scan front end.
pub type Operator = SparseOperator<f64>;
pub type Params = liouvillian::ModelParams<f64>;
pub type Liouvillian = liouvillian::LiouvillianMatrix<f64>;
pub type State = steadystate::SteadyState<f64>;
pub type Stats = observables::PhotonStats<f64>;
pub type Windows = observables::MollowWindows<f64>;
