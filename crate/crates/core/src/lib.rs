//! Polarization states of a collinear, frequency-degenerate biphoton treated as a
//! three-level system (a qutrit).
//!
//! The crate is organised bottom-up:
//!
//! * [`state`]: amplitude triples over `|2,0>`, `|1,1>`, `|0,2>` and the trit basis.
//! * [`optics`]: Jones matrices, their symmetric lift to 3x3 operators and SU(3) elements.
//! * [`observables`]: Stokes parameters, degree of polarization, G(2) correlators.
//! * [`experiment`]: the two-beam interferometric source, plate under test, detection,
//!   analytic sweeps and the coincidence Monte Carlo.
//! * [`synthesis`]: searches plate settings realising a requested state transition.
//! * [`io`]: experiment config documents and the `# triphot v1` CSV tables.
//! * [`verify`]: self-check suites backing `triphot verify`.

pub mod error;
pub mod experiment;
pub mod io;
pub mod observables;
pub mod optics;
pub mod state;
pub mod synthesis;
pub mod verify;

pub use error::{Error, Result};
pub use experiment::{Analysis, ExperimentConfig, SourceSpec, SweepParam, SweepTable};
pub use observables::{CorrelatorSet, DetectionMode, StokesVector};
pub use optics::{BiphotonOperator, JonesMap, PlateSpec, Su3Params};
pub use state::{BiphotonState, JonesVector, TritLabel};

pub use num_complex::Complex64 as Complex;

/// Tolerance used for normalization and unitarity checks.
pub const NORM_TOL: f64 = 1e-12;
