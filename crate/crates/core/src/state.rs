//! Biphoton polarization states.
//!
//! A state is the amplitude triple `(c1, c2, c3)` over the Fock basis
//! `|2,0>`, `|1,1>`, `|0,2>`, where `|Nx,Ny>` counts photons in the
//! horizontal and vertical modes.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, NORM_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Smallest squared norm accepted by [`BiphotonState::new`].
pub const MIN_NORM_SQR: f64 = 1e-30;

/// Normalized polarization vector of a biphoton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiphotonState {
    amps: [Complex64; 3],
}

impl BiphotonState {
    /// Normalizes `(c1, c2, c3)` into a state.
    pub fn new(c1: Complex64, c2: Complex64, c3: Complex64) -> Result<Self> {
        Self::from_array([c1, c2, c3])
    }

    pub fn from_array(amps: [Complex64; 3]) -> Result<Self> {
        if amps.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n2: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if n2.is_nan() || n2 <= MIN_NORM_SQR {
            return Err(Error::ZeroState);
        }
        let n = n2.sqrt();
        Ok(Self {
            amps: amps.map(|c| c / n),
        })
    }

    /// Real-amplitude convenience constructor.
    pub fn from_real(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        Self::from_array([c1.into(), c2.into(), c3.into()])
    }

    /// Fock basis state `k`: 0 is `|2,0>`, 1 is `|1,1>`, 2 is `|0,2>`.
    pub fn fock(k: usize) -> Result<Self> {
        if k > 2 {
            return Err(Error::IndexOutOfRange(k));
        }
        let mut amps = [ZERO; 3];
        amps[k] = ONE;
        Ok(Self { amps })
    }

    pub fn trit(t: TritLabel) -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let amps = match t {
            TritLabel::Plus => [h, ZERO, h],
            TritLabel::Minus => [h, ZERO, -h],
            TritLabel::Zero => [ZERO, ONE, ZERO],
        };
        Self { amps }
    }

    /// The symmetrized state with one photon polarized along `u` and one along `v`.
    pub fn pair(u: JonesVector, v: JonesVector) -> Result<Self> {
        let (ux, uy) = (u.ex, u.ey);
        let (vx, vy) = (v.ex, v.ey);
        // Both factors are commutative so swapping u and v gives identical bits.
        let c2 = (ux * vy + uy * vx) * FRAC_1_SQRT_2;
        let s = Self::new(ux * vx, c2, uy * vy);
        debug_assert!(s.is_ok(), "symmetric product of nonzero vectors vanished");
        s
    }

    pub fn amplitudes(&self) -> [Complex64; 3] {
        self.amps
    }

    pub fn c1(&self) -> Complex64 {
        self.amps[0]
    }

    pub fn c2(&self) -> Complex64 {
        self.amps[1]
    }

    pub fn c3(&self) -> Complex64 {
        self.amps[2]
    }

    /// Squared moduli `(|c1|^2, |c2|^2, |c3|^2)`.
    pub fn populations(&self) -> [f64; 3] {
        self.amps.map(|c| c.norm_sqr())
    }

    /// Hermitian inner product `<self|other>`.
    pub fn overlap(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2`; insensitive to global phase.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.overlap(other).norm_sqr().min(1.0)
    }

    /// Equality up to a global phase.
    pub fn eq_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        1.0 - self.fidelity(other) <= tol
    }

    /// Multiplies every amplitude by `e^{i theta}`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let p = Complex64::from_polar(1.0, theta);
        Self {
            amps: self.amps.map(|c| c * p),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }
}

impl fmt::Display for BiphotonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Adding 0.0 turns -0.0 into +0.0.
        let [a, b, c] = self.amps.map(|z| z + Complex64::new(0.0, 0.0));
        write!(
            f,
            "({:+.6}{:+.6}i)|2,0> + ({:+.6}{:+.6}i)|1,1> + ({:+.6}{:+.6}i)|0,2>",
            a.re, a.im, b.re, b.im, c.re, c.im
        )
    }
}

/// Free-function form of [`BiphotonState::new`].
pub fn make_state(c1: Complex64, c2: Complex64, c3: Complex64) -> Result<BiphotonState> {
    BiphotonState::new(c1, c2, c3)
}

pub fn fock_basis(k: usize) -> Result<BiphotonState> {
    BiphotonState::fock(k)
}

pub fn trit_basis(t: TritLabel) -> BiphotonState {
    BiphotonState::trit(t)
}

pub fn overlap(a: &BiphotonState, b: &BiphotonState) -> Complex64 {
    a.overlap(b)
}

pub fn pair_state(u: JonesVector, v: JonesVector) -> Result<BiphotonState> {
    BiphotonState::pair(u, v)
}

/// Single-photon polarization amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JonesVector {
    pub ex: Complex64,
    pub ey: Complex64,
}

impl JonesVector {
    pub fn new(ex: Complex64, ey: Complex64) -> Result<Self> {
        if ![ex, ey].iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n2 = ex.norm_sqr() + ey.norm_sqr();
        if n2.is_nan() || n2 <= MIN_NORM_SQR {
            return Err(Error::ZeroState);
        }
        let n = n2.sqrt();
        Ok(Self {
            ex: ex / n,
            ey: ey / n,
        })
    }

    pub fn horizontal() -> Self {
        Self { ex: ONE, ey: ZERO }
    }

    pub fn vertical() -> Self {
        Self { ex: ZERO, ey: ONE }
    }

    /// Linear polarization at `angle` from the x axis.
    pub fn linear(angle: f64) -> Self {
        Self {
            ex: angle.cos().into(),
            ey: angle.sin().into(),
        }
    }

    /// `(1, -i)/sqrt 2`.
    pub fn right_circular() -> Self {
        Self {
            ex: FRAC_1_SQRT_2.into(),
            ey: Complex64::new(0.0, -FRAC_1_SQRT_2),
        }
    }

    /// `(1, i)/sqrt 2`.
    pub fn left_circular() -> Self {
        Self {
            ex: FRAC_1_SQRT_2.into(),
            ey: Complex64::new(0.0, FRAC_1_SQRT_2),
        }
    }
}

/// Ternary digits carried by the trit basis.
///
/// The digit convention is `Plus = 0`, `Minus = 1`, `Zero = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TritLabel {
    /// `(|2,0> + |0,2>)/sqrt 2`, a right/left circular pair.
    Plus,
    /// `(|2,0> - |0,2>)/sqrt 2`, a +45/-45 degree pair.
    Minus,
    /// `|1,1>`, an x/y pair.
    Zero,
}

impl TritLabel {
    pub const ALL: [TritLabel; 3] = [TritLabel::Plus, TritLabel::Minus, TritLabel::Zero];

    pub fn digit(self) -> u8 {
        match self {
            TritLabel::Plus => 0,
            TritLabel::Minus => 1,
            TritLabel::Zero => 2,
        }
    }

    pub fn from_digit(d: u8) -> Option<Self> {
        match d {
            0 => Some(TritLabel::Plus),
            1 => Some(TritLabel::Minus),
            2 => Some(TritLabel::Zero),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TritLabel::Plus => "psi_plus",
            TritLabel::Minus => "psi_minus",
            TritLabel::Zero => "psi_zero",
        }
    }
}

impl fmt::Display for TritLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TritLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plus" | "psi_plus" | "psi+" | "+" => Ok(TritLabel::Plus),
            "minus" | "psi_minus" | "psi-" | "-" => Ok(TritLabel::Minus),
            "zero" | "psi_zero" | "psi0" | "0" => Ok(TritLabel::Zero),
            other => Err(Error::Parse(format!("unknown trit label `{other}`"))),
        }
    }
}
