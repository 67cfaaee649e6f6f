//! Stokes parameters, degree of polarization and second-order correlators.

use std::f64::consts::{FRAC_PI_8, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::optics::{apply_conditioned, half_wave, lift, polarizer, PolarizerAxis};
use crate::state::BiphotonState;
use crate::{Error, Result};

/// Expectations of the Stokes operators in photon-number units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesVector {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub fn reduced_norm(&self) -> f64 {
        (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt()
    }
}

/// Normally ordered second-order correlators of the x and y modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSet {
    pub gxy: f64,
    pub gxx: f64,
    pub gyy: f64,
}

/// Which coincidence is registered behind the output polarizing beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMode {
    /// One photon in x, one in y.
    DirectXy,
    /// Polarizer along x, then a half-wave plate at pi/8, then the PBS.
    AnalysisX,
    /// Polarizer along y, then a half-wave plate at pi/8, then the PBS.
    AnalysisY,
}

/// `s3` uses `+2 sqrt2 Im(c1* c2 + c2* c3)`.
pub fn stokes(s: &BiphotonState) -> StokesVector {
    let [c1, c2, c3] = s.amplitudes();
    let cross = c1.conj() * c2 + c2.conj() * c3;
    StokesVector {
        s0: 2.0,
        s1: 2.0 * (c1.norm_sqr() - c3.norm_sqr()),
        s2: 2.0 * SQRT_2 * cross.re,
        s3: 2.0 * SQRT_2 * cross.im,
    }
}

pub fn degree_of_polarization(s: &BiphotonState) -> f64 {
    let st = stokes(s);
    st.reduced_norm() / st.s0
}

pub fn correlators(s: &BiphotonState) -> CorrelatorSet {
    let [p1, p2, p3] = s.populations();
    CorrelatorSet {
        gxy: p2,
        gxx: 2.0 * p1,
        gyy: 2.0 * p3,
    }
}

fn check_efficiency(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::InvalidEfficiency(eta))
    }
}

/// Probability that a pair in state `s` yields a coincidence.
///
/// Detectors do not resolve photon number, so only the `|1,1>` component
/// behind the final beamsplitter produces a coincidence.
pub fn coincidence_probability(
    s: &BiphotonState,
    mode: DetectionMode,
    eta1: f64,
    eta2: f64,
) -> Result<f64> {
    check_efficiency(eta1)?;
    check_efficiency(eta2)?;
    let axis = match mode {
        DetectionMode::DirectXy => return Ok(s.populations()[1] * eta1 * eta2),
        DetectionMode::AnalysisX => PolarizerAxis::X,
        DetectionMode::AnalysisY => PolarizerAxis::Y,
    };
    let block = lift(&(half_wave(FRAC_PI_8) * polarizer(axis)));
    let out = apply_conditioned(&block, s);
    let p = match out.state {
        Some(st) => out.survival * st.populations()[1],
        None => 0.0,
    };
    Ok(p * eta1 * eta2)
}

/// `lambda^2 / delta_lambda`.
pub fn coherence_length(wavelength: f64, bandwidth: f64) -> Result<f64> {
    if bandwidth.is_nan() || bandwidth <= 0.0 {
        return Err(Error::NonPositiveBandwidth(bandwidth));
    }
    Ok(wavelength * wavelength / bandwidth)
}
