//! Polarization optics for single photons and their action on biphotons.
//!
//! Jones matrices act on `(ex, ey)` columns. A 2x2 map `j = [[a, b], [c, d]]`
//! induces on the two-photon symmetric space (ordered `|2,0>`, `|1,1>`, `|0,2>`)
//! the operator
//!
//! ```text
//! [[a^2,      sqrt2 a b,  b^2     ],
//!  [sqrt2 a c, a d + b c,  sqrt2 b d],
//!  [c^2,      sqrt2 c d,  d^2     ]]
//! ```
//!
//! Retarders use the convention that the fast axis at angle `chi` picks up
//! `e^{+i delta/2}` and the slow axis `e^{-i delta/2}`. This sign is the one
//! under which a quarter-wave plate reproduces the closed-form coincidence law
//! (see `experiment::qwp_law`); `tests::retarder_sign_convention` pins it.

mod su3;

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::state::{BiphotonState, JonesVector};
use crate::{Error, Result, NORM_TOL};

pub use su3::{gell_mann, su3_exp, Su3Params};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat3 = [[Complex64; 3]; 3];

/// A 2x2 Jones matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JonesMap {
    pub m: Mat2,
}

impl JonesMap {
    pub const IDENTITY: JonesMap = JonesMap {
        m: [[ONE, ZERO], [ZERO, ONE]],
    };

    pub fn new(m: Mat2) -> Self {
        Self { m }
    }

    pub fn adjoint(&self) -> Self {
        let m = self.m;
        Self {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    pub fn apply(&self, v: &JonesVector) -> (Complex64, Complex64) {
        let m = self.m;
        (
            m[0][0] * v.ex + m[0][1] * v.ey,
            m[1][0] * v.ex + m[1][1] * v.ey,
        )
    }

    /// Largest entry of `|m^H m - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let p = (self.adjoint() * *self).m;
        let mut r: f64 = 0.0;
        for (i, row) in p.iter().enumerate() {
            for (k, x) in row.iter().enumerate() {
                let want = if i == k { ONE } else { ZERO };
                r = r.max((x - want).norm());
            }
        }
        r
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_residual() <= NORM_TOL
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            m: self.m.map(|row| row.map(|x| x * s)),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..2 {
            for k in 0..2 {
                r = r.max((self.m[i][k] - other.m[i][k]).norm());
            }
        }
        r
    }
}

impl Mul for JonesMap {
    type Output = JonesMap;

    fn mul(self, rhs: JonesMap) -> JonesMap {
        let (a, b) = (self.m, rhs.m);
        let mut m = [[ZERO; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (k, x) in row.iter_mut().enumerate() {
                *x = a[i][0] * b[0][k] + a[i][1] * b[1][k];
            }
        }
        JonesMap { m }
    }
}

/// Rotation `[[cos t, -sin t], [sin t, cos t]]`.
pub fn rotator(theta: f64) -> JonesMap {
    let (s, c) = theta.sin_cos();
    JonesMap {
        m: [[c.into(), (-s).into()], [s.into(), c.into()]],
    }
}

/// Linear retarder of retardance `delta` with its fast axis at `chi` from x.
pub fn retarder(delta: f64, chi: f64) -> JonesMap {
    let fast = Complex64::from_polar(1.0, delta / 2.0);
    let slow = fast.conj();
    let d = JonesMap {
        m: [[fast, ZERO], [ZERO, slow]],
    };
    rotator(chi) * d * rotator(-chi)
}

pub fn half_wave(chi: f64) -> JonesMap {
    retarder(PI, chi)
}

pub fn quarter_wave(chi: f64) -> JonesMap {
    retarder(FRAC_PI_2, chi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarizerAxis {
    X,
    Y,
}

/// Ideal linear polarizer along x or y.
pub fn polarizer(axis: PolarizerAxis) -> JonesMap {
    match axis {
        PolarizerAxis::X => JonesMap {
            m: [[ONE, ZERO], [ZERO, ZERO]],
        },
        PolarizerAxis::Y => JonesMap {
            m: [[ZERO, ZERO], [ZERO, ONE]],
        },
    }
}

/// Retardance and axis angle of a plate, both in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateSpec {
    pub retardance: f64,
    pub angle: f64,
}

impl PlateSpec {
    pub fn new(retardance: f64, angle: f64) -> Self {
        Self { retardance, angle }
    }

    pub fn half_wave(angle: f64) -> Self {
        Self::new(PI, angle)
    }

    pub fn quarter_wave(angle: f64) -> Self {
        Self::new(FRAC_PI_2, angle)
    }

    /// Retardance folded into `[0, 2pi)` and angle into `[0, pi)`.
    ///
    /// Both foldings change the Jones matrix at most by a sign, which the
    /// biphoton lift does not see.
    pub fn canonical(&self) -> Self {
        Self {
            retardance: wrap(self.retardance, TAU),
            angle: wrap(self.angle, PI),
        }
    }

    pub fn jones(&self) -> JonesMap {
        retarder(self.retardance, self.angle)
    }

    pub fn operator(&self) -> BiphotonOperator {
        lift(&self.jones())
    }
}

/// Folds `x` into `[0, period)`; values within 1e-9 of `period` map to 0.
pub fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if period - r < 1e-9 {
        0.0
    } else {
        r
    }
}

/// A 3x3 operator on biphoton polarization states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiphotonOperator {
    pub g: Mat3,
}

impl BiphotonOperator {
    pub const IDENTITY: BiphotonOperator = BiphotonOperator {
        g: [[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, ONE]],
    };

    pub fn new(g: Mat3) -> Self {
        Self { g }
    }

    pub fn diagonal(d: [Complex64; 3]) -> Self {
        let mut g = [[ZERO; 3]; 3];
        for i in 0..3 {
            g[i][i] = d[i];
        }
        Self { g }
    }

    pub fn adjoint(&self) -> Self {
        let mut g = [[ZERO; 3]; 3];
        for (i, row) in g.iter_mut().enumerate() {
            for (k, x) in row.iter_mut().enumerate() {
                *x = self.g[k][i].conj();
            }
        }
        Self { g }
    }

    /// Raw matrix-vector product, no normalization.
    pub fn mul_vec(&self, v: &[Complex64; 3]) -> [Complex64; 3] {
        let g = &self.g;
        [0, 1, 2].map(|i| g[i][0] * v[0] + g[i][1] * v[1] + g[i][2] * v[2])
    }

    pub fn unitarity_residual(&self) -> f64 {
        let p = (self.adjoint() * *self).g;
        let mut r: f64 = 0.0;
        for (i, row) in p.iter().enumerate() {
            for (k, x) in row.iter().enumerate() {
                let want = if i == k { ONE } else { ZERO };
                r = r.max((x - want).norm());
            }
        }
        r
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_residual() <= NORM_TOL
    }

    pub fn determinant(&self) -> Complex64 {
        let g = &self.g;
        g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
            - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
            + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        let p = (self.adjoint() * *self).g;
        let m = nalgebra::Matrix3::from_fn(|i, k| p[i][k]);
        let eig = m.symmetric_eigenvalues();
        eig.iter().cloned().fold(0.0f64, f64::max).max(0.0).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..3 {
            for k in 0..3 {
                r = r.max((self.g[i][k] - other.g[i][k]).norm());
            }
        }
        r
    }

    /// Distance to `other` after removing the best global phase.
    pub fn phase_invariant_diff(&self, other: &Self) -> f64 {
        // Choose the phase that aligns the traces of other^H self.
        let mut t = ZERO;
        for i in 0..3 {
            for k in 0..3 {
                t += other.g[i][k].conj() * self.g[i][k];
            }
        }
        let phase = if t.norm() > 0.0 { t / t.norm() } else { ONE };
        let aligned = Self {
            g: other.g.map(|row| row.map(|x| x * phase)),
        };
        self.max_abs_diff(&aligned)
    }
}

impl Mul for BiphotonOperator {
    type Output = BiphotonOperator;

    fn mul(self, rhs: BiphotonOperator) -> BiphotonOperator {
        let (a, b) = (&self.g, &rhs.g);
        let mut g = [[ZERO; 3]; 3];
        for (i, row) in g.iter_mut().enumerate() {
            for (k, x) in row.iter_mut().enumerate() {
                *x = a[i][0] * b[0][k] + a[i][1] * b[1][k] + a[i][2] * b[2][k];
            }
        }
        BiphotonOperator { g }
    }
}

/// Symmetric (spin-1) representation of a Jones matrix.
pub fn lift(j: &JonesMap) -> BiphotonOperator {
    let [[a, b], [c, d]] = j.m;
    let r = Complex64::from(SQRT_2);
    BiphotonOperator {
        g: [
            [a * a, r * a * b, b * b],
            [r * a * c, a * d + b * c, r * b * d],
            [c * c, r * c * d, d * d],
        ],
    }
}

/// `g2 * g1`: `g1` acts first.
pub fn compose(g2: &BiphotonOperator, g1: &BiphotonOperator) -> BiphotonOperator {
    *g2 * *g1
}

/// Operator of a plate sequence; `plates[0]` is traversed first.
pub fn sequence_operator(plates: &[PlateSpec]) -> BiphotonOperator {
    plates
        .iter()
        .fold(BiphotonOperator::IDENTITY, |acc, p| p.operator() * acc)
}

/// Applies a unitary operator.
///
/// Fails with [`Error::NonUnitaryOperator`] unless `g` is unitary within
/// `1e-12`; lossy maps go through [`apply_conditioned`].
pub fn apply(g: &BiphotonOperator, s: &BiphotonState) -> Result<BiphotonState> {
    let res = g.unitarity_residual();
    if res > NORM_TOL {
        return Err(Error::NonUnitaryOperator(res));
    }
    let out = g.mul_vec(&s.amplitudes());
    debug_assert!((out.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-10);
    BiphotonState::from_array(out)
}

/// Outcome of pushing a state through a possibly lossy operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditioned {
    /// Post-selected state; `None` when nothing survives.
    pub state: Option<BiphotonState>,
    /// Probability that the pair survives, `||g s||^2`.
    pub survival: f64,
}

/// Applies a contractive operator and post-selects on pair survival.
pub fn apply_conditioned(g: &BiphotonOperator, s: &BiphotonState) -> Conditioned {
    let out = g.mul_vec(&s.amplitudes());
    let survival: f64 = out.iter().map(|c| c.norm_sqr()).sum();
    let state = if survival < crate::state::MIN_NORM_SQR {
        None
    } else {
        BiphotonState::from_array(out).ok()
    };
    Conditioned { state, survival }
}

/// Whether `g` equals the lift of some 2x2 unitary up to global phase.
///
/// A global phase `e^{i a}` on `g` is the lift of `e^{i a/2} j`, so it suffices
/// to reconstruct `j` from the corner entries and compare.
pub fn is_in_plate_subgroup(g: &BiphotonOperator, tol: f64) -> bool {
    match reconstruct_jones(g) {
        Some(j) => {
            let j_unit = j.unitarity_residual();
            lift(&j).max_abs_diff(g) < tol && j_unit < tol.max(1e-12).sqrt()
        }
        None => false,
    }
}

/// Candidate Jones matrix whose lift could equal `g`.
///
/// For a unitary `j`, `|a|^2 + |b|^2 = 1`, so one of `g[0][0] = a^2`,
/// `g[0][2] = b^2` has modulus at least 1/2 and gives a stable square root.
pub fn reconstruct_jones(g: &BiphotonOperator) -> Option<JonesMap> {
    let g = &g.g;
    let r = SQRT_2;
    if g[0][0].norm() >= g[0][2].norm() {
        if g[0][0].norm() < 0.25 {
            return None;
        }
        let a = g[0][0].sqrt();
        let b = g[0][1] / (r * a);
        let c = g[1][0] / (r * a);
        let d = (g[1][1] - b * c) / a;
        Some(JonesMap::new([[a, b], [c, d]]))
    } else {
        if g[0][2].norm() < 0.25 {
            return None;
        }
        let b = g[0][2].sqrt();
        let a = g[0][1] / (r * b);
        let d = g[1][2] / (r * b);
        let c = (g[1][1] - a * d) / b;
        Some(JonesMap::new([[a, b], [c, d]]))
    }
}
