//! Model of the interferometric two-beam source, the plate under test and the
//! coincidence detection behind a polarizing beamsplitter.
//!
//! The source emits `t20 |2,0> + e^{i(phi + eps)} t02 |0,2>` (normalized),
//! where `eps` is a zero-mean Gaussian phase jitter of width `jitter`. For a
//! fixed detection chain the coincidence probability of a pair is a quadratic
//! form in the two source amplitudes, so as a function of the total phase
//! `theta = phi + eps` it is exactly `A + C cos(theta) + S sin(theta)`. Jitter
//! therefore damps the interference term by `exp(-jitter^2 / 2)`.

mod montecarlo;
mod sweep;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::observables::{coincidence_probability, DetectionMode};
use crate::optics::{apply, PlateSpec};
use crate::state::BiphotonState;
use crate::{Error, Result};

pub use montecarlo::{mean_rate, simulate_counts, CountRecord};
pub use sweep::{
    calibrate_loss_for_visibility, fundamental_period, sweep, visibility, SweepParam, SweepTable,
};

/// Two-beam down-conversion source joined on a polarizing beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    /// Relative phase between the `|0,2>` and `|2,0>` arms, radians.
    pub phase: f64,
    /// Two-photon amplitude factor of the `|2,0>` arm.
    pub t20: f64,
    /// Two-photon amplitude factor of the `|0,2>` arm.
    pub t02: f64,
    /// Standard deviation of the Gaussian phase jitter, radians.
    pub jitter: f64,
    /// Pair rate, pairs per second.
    pub pair_rate: f64,
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self {
            phase: 0.0,
            t20: 1.0,
            t02: 1.0,
            jitter: 0.0,
            pair_rate: 300.0,
        }
    }
}

/// Optional analysis block in front of the output beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    #[default]
    None,
    X,
    Y,
}

impl Analysis {
    pub fn detection_mode(self) -> DetectionMode {
        match self {
            Analysis::None => DetectionMode::DirectXy,
            Analysis::X => DetectionMode::AnalysisX,
            Analysis::Y => DetectionMode::AnalysisY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: SourceSpec,
    pub plate: PlateSpec,
    pub analysis: Analysis,
    pub eta1: f64,
    pub eta2: f64,
    /// Accidental coincidence rate, counts per second.
    pub accidental_rate: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: SourceSpec::default(),
            plate: PlateSpec::half_wave(std::f64::consts::FRAC_PI_8),
            analysis: Analysis::None,
            eta1: 1.0,
            eta2: 1.0,
            accidental_rate: 0.1,
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field: field.to_string(),
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    /// Noise-free, unit-efficiency configuration with `pair_rate = 1` and no
    /// accidentals, so rates read as probabilities.
    pub fn ideal(plate: PlateSpec, phase: f64) -> Self {
        Self {
            source: SourceSpec {
                phase,
                t20: 1.0,
                t02: 1.0,
                jitter: 0.0,
                pair_rate: 1.0,
            },
            plate,
            analysis: Analysis::None,
            eta1: 1.0,
            eta2: 1.0,
            accidental_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.source;
        let finite = [
            ("source.phase", s.phase),
            ("source.t20", s.t20),
            ("source.t02", s.t02),
            ("source.jitter", s.jitter),
            ("source.pair_rate", s.pair_rate),
            ("plate.retardance", self.plate.retardance),
            ("plate.angle", self.plate.angle),
            ("detection.eta1", self.eta1),
            ("detection.eta2", self.eta2),
            ("detection.accidental_rate", self.accidental_rate),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        for (name, v) in [
            ("source.t20", s.t20),
            ("source.t02", s.t02),
            ("detection.eta1", self.eta1),
            ("detection.eta2", self.eta2),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(name, format!("{v} outside [0, 1]")));
            }
        }
        if s.t20 == 0.0 && s.t02 == 0.0 {
            return Err(invalid("source", "t20 and t02 are both zero"));
        }
        for (name, v) in [
            ("source.jitter", s.jitter),
            ("source.pair_rate", s.pair_rate),
            ("detection.accidental_rate", self.accidental_rate),
        ] {
            if v < 0.0 {
                return Err(invalid(name, format!("{v} is negative")));
            }
        }
        Ok(())
    }

    /// Copy with the swept parameter replaced.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Self {
        let mut c = *self;
        match param {
            SweepParam::Phi => c.source.phase = value,
            SweepParam::Chi => c.plate.angle = value,
        }
        c
    }
}

/// Source output for one pair, with the jitter draw added to the phase.
pub fn source_state(src: &SourceSpec, jitter_draw: f64) -> Result<BiphotonState> {
    if src.t20 == 0.0 && src.t02 == 0.0 {
        return Err(Error::ZeroState);
    }
    let c3 = Complex64::from_polar(src.t02, src.phase + jitter_draw);
    BiphotonState::new(src.t20.into(), Complex64::new(0.0, 0.0), c3)
}

/// Closed-form populations behind a half-wave plate at `chi` for the ideal
/// source at phase `phi`: `(|c1|^2, |c2|^2, |c3|^2)`.
pub fn hwp_law(chi: f64, phi: f64) -> [f64; 3] {
    let c2 = (4.0 * chi).sin().powi(2) * (phi / 2.0).sin().powi(2);
    let side = (1.0 - c2) / 2.0;
    [side, c2, side]
}

/// Closed-form `|c2|^2` behind a quarter-wave plate at `chi`.
pub fn qwp_law(chi: f64, phi: f64) -> f64 {
    let (s2, c2) = (2.0 * chi).sin_cos();
    s2 * s2 * ((phi / 2.0).cos() + c2 * (phi / 2.0).sin()).powi(2)
}

/// Coincidence probability of a single pair whose source phase is offset by
/// `jitter_draw`, computed by propagating the state through the apparatus.
pub fn pair_probability(cfg: &ExperimentConfig, jitter_draw: f64) -> Result<f64> {
    let s = source_state(&cfg.source, jitter_draw)?;
    let out = apply(&cfg.plate.operator(), &s)?;
    coincidence_probability(&out, cfg.analysis.detection_mode(), cfg.eta1, cfg.eta2)
}

/// Per-pair coincidence probability as an exact first harmonic in the total
/// source phase: `p(theta) = mean + cos_coef cos(theta) + sin_coef sin(theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseResponse {
    pub mean: f64,
    pub cos_coef: f64,
    pub sin_coef: f64,
}

impl PhaseResponse {
    /// Samples the propagation pipeline at total phases 0, pi/2 and pi.
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let at = |theta: f64| pair_probability(cfg, theta - cfg.source.phase);
        let p0 = at(0.0)?;
        let p90 = at(FRAC_PI_2)?;
        let p180 = at(PI)?;
        let mean = 0.5 * (p0 + p180);
        Ok(Self {
            mean,
            cos_coef: 0.5 * (p0 - p180),
            sin_coef: p90 - mean,
        })
    }

    pub fn probability(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        (self.mean + self.cos_coef * c + self.sin_coef * s).clamp(0.0, 1.0)
    }

    /// Expectation over Gaussian jitter of width `sigma` around `phase`.
    pub fn expected(&self, phase: f64, sigma: f64) -> f64 {
        let damp = (-0.5 * sigma * sigma).exp();
        let (s, c) = phase.sin_cos();
        (self.mean + damp * (self.cos_coef * c + self.sin_coef * s)).clamp(0.0, 1.0)
    }
}

/// Expected coincidence rate in counts per second, accidentals included.
pub fn predict_rate(cfg: &ExperimentConfig) -> Result<f64> {
    cfg.validate()?;
    let p = if cfg.source.jitter == 0.0 {
        pair_probability(cfg, 0.0)?
    } else {
        PhaseResponse::new(cfg)?.expected(cfg.source.phase, cfg.source.jitter)
    };
    Ok(cfg.source.pair_rate * p + cfg.accidental_rate)
}

/// [`predict_rate`] with one parameter overridden.
pub fn predict_rate_at(cfg: &ExperimentConfig, param: SweepParam, value: f64) -> Result<f64> {
    predict_rate(&cfg.with_param(param, value))
}
