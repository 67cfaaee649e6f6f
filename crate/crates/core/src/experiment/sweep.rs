use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{predict_rate_at, ExperimentConfig};
use crate::{Error, Result};

/// Parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    /// Source phase.
    Phi,
    /// Plate axis angle.
    Chi,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Phi => "phi",
            SweepParam::Chi => "chi",
        }
    }

    /// Base angular frequency and harmonic order of the rate as a trig
    /// polynomial in this parameter.
    ///
    /// In `phi` the rate is a first harmonic. In `chi` the lifted plate
    /// entries are quadratic in `cos chi, sin chi` and the rate is quadratic in
    /// those, so harmonics of `2 chi` up to `8 chi` appear.
    fn harmonics(self) -> (f64, usize) {
        match self {
            SweepParam::Phi => (1.0, 1),
            SweepParam::Chi => (2.0, 4),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "phi" => Ok(SweepParam::Phi),
            "chi" => Ok(SweepParam::Chi),
            other => Err(Error::Parse(format!("unknown sweep parameter `{other}`"))),
        }
    }
}

/// Rates on a strictly increasing grid of one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter: SweepParam,
    /// `(value, rate)` pairs.
    pub points: Vec<(f64, f64)>,
    pub config: ExperimentConfig,
}

impl SweepTable {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn rates(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// Grid values at which the rate is a local maximum (interior points only).
    pub fn local_maxima(&self) -> Vec<f64> {
        let p = &self.points;
        (1..p.len().saturating_sub(1))
            .filter(|&i| p[i].1 > p[i - 1].1 && p[i].1 >= p[i + 1].1)
            .map(|i| p[i].0)
            .collect()
    }

    pub fn local_minima(&self) -> Vec<f64> {
        let p = &self.points;
        (1..p.len().saturating_sub(1))
            .filter(|&i| p[i].1 < p[i - 1].1 && p[i].1 <= p[i + 1].1)
            .map(|i| p[i].0)
            .collect()
    }
}

/// Uniform, endpoint-inclusive sweep of `predict_rate`.
pub fn sweep(
    cfg: &ExperimentConfig,
    parameter: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<SweepTable> {
    if steps < 2 {
        return Err(Error::OutOfRange {
            what: "sweep steps (need >= 2)",
            value: steps as f64,
        });
    }
    if !from.is_finite() || !to.is_finite() || to <= from {
        return Err(Error::OutOfRange {
            what: "sweep range end (must exceed start)",
            value: to,
        });
    }
    cfg.validate()?;
    let h = (to - from) / (steps - 1) as f64;
    let points = (0..steps)
        .into_par_iter()
        .map(|i| {
            let x = if i == steps - 1 { to } else { from + h * i as f64 };
            predict_rate_at(cfg, parameter, x).map(|r| (x, r))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        parameter,
        points,
        config: *cfg,
    })
}

/// Least-squares trig polynomial `a0 + sum_k a_k cos(k w x) + b_k sin(k w x)`.
struct HarmonicFit {
    omega: f64,
    coef: Vec<f64>,
}

impl HarmonicFit {
    fn fit(points: &[(f64, f64)], omega: f64, order: usize) -> Result<Self> {
        let ncoef = 2 * order + 1;
        if points.len() < ncoef {
            return Err(Error::DegenerateTable("too few points for harmonic fit"));
        }
        let a = DMatrix::from_fn(points.len(), ncoef, |r, c| basis(points[r].0, omega, c));
        let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let coef = svd
            .solve(&y, smax * 1e-12)
            .map_err(|_| Error::DegenerateTable("harmonic fit failed"))?;
        Ok(Self {
            omega,
            coef: coef.iter().copied().collect(),
        })
    }

    fn eval(&self, x: f64) -> f64 {
        self.coef
            .iter()
            .enumerate()
            .map(|(c, a)| a * basis(x, self.omega, c))
            .sum()
    }

    /// Extremes over one fundamental period.
    fn extremes(&self) -> (f64, f64) {
        if self.coef.len() == 3 {
            let amp = self.coef[1].hypot(self.coef[2]);
            return (self.coef[0] + amp, self.coef[0] - amp);
        }
        let period = TAU / self.omega;
        let n = 4096;
        let h = period / n as f64;
        let mut imax = 0;
        let mut imin = 0;
        let vals: Vec<f64> = (0..n).map(|i| self.eval(h * i as f64)).collect();
        for i in 1..n {
            if vals[i] > vals[imax] {
                imax = i;
            }
            if vals[i] < vals[imin] {
                imin = i;
            }
        }
        let hi = golden(|x| -self.eval(x), h * imax as f64 - h, h * imax as f64 + h);
        let lo = golden(|x| self.eval(x), h * imin as f64 - h, h * imin as f64 + h);
        (self.eval(hi).max(vals[imax]), self.eval(lo).min(vals[imin]))
    }
}

fn basis(x: f64, omega: f64, c: usize) -> f64 {
    if c == 0 {
        return 1.0;
    }
    let k = c.div_ceil(2) as f64;
    if c % 2 == 1 {
        (k * omega * x).cos()
    } else {
        (k * omega * x).sin()
    }
}

/// Golden-section minimization on `[a, b]`.
fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Fringe visibility `(max - min) / (max + min)` of the fitted rate curve.
///
/// The fit uses the harmonic content implied by the swept parameter, so noisy
/// Monte Carlo tables do not bias the extrema.
pub fn visibility(t: &SweepTable) -> Result<f64> {
    if t.points.is_empty() {
        return Err(Error::DegenerateTable("empty table"));
    }
    let (omega, order) = t.parameter.harmonics();
    let fit = HarmonicFit::fit(&t.points, omega, order)?;
    let (max, min) = fit.extremes();
    let sum = max + min;
    if sum.abs() < 1e-300 {
        return Err(Error::DegenerateTable("max + min is zero"));
    }
    Ok(((max - min) / sum).max(0.0))
}

/// Amplitude ratio `r = t02 / t20 <= 1` giving a phase-fringe visibility of
/// `v = 2r / (1 + r^2)`.
pub fn calibrate_loss_for_visibility(v: f64) -> Result<f64> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::OutOfRange {
            what: "visibility (need 0 < V <= 1)",
            value: v,
        });
    }
    // Smaller root of v r^2 - 2 r + v = 0, written to avoid cancellation.
    Ok(v / (1.0 + (1.0 - v * v).sqrt()))
}

/// Fundamental period of a uniformly sampled periodic signal, found as the
/// first strong peak of its circular autocorrelation.
///
/// `values` must cover a whole number of periods and must not repeat the
/// first sample at the end.
pub fn fundamental_period(values: &[f64], step: f64) -> Option<f64> {
    let n = values.len();
    if n < 4 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let var: f64 = x.iter().map(|v| v * v).sum();
    if var <= 0.0 {
        return None;
    }
    let r = |lag: usize| -> f64 { (0..n).map(|i| x[i] * x[(i + lag) % n]).sum::<f64>() / var };
    let rs: Vec<f64> = (0..=n / 2 + 1).map(|l| r(l % n)).collect();
    (1..rs.len() - 1)
        .find(|&l| rs[l] > 0.5 && rs[l] >= rs[l - 1] && rs[l] >= rs[l + 1])
        .map(|l| l as f64 * step)
}

impl SweepTable {
    /// [`fundamental_period`] of an endpoint-inclusive table spanning whole periods.
    pub fn fundamental_period(&self) -> Option<f64> {
        let n = self.points.len();
        if n < 3 {
            return None;
        }
        let step = (self.points[n - 1].0 - self.points[0].0) / (n - 1) as f64;
        let vals: Vec<f64> = self.points[..n - 1].iter().map(|p| p.1).collect();
        fundamental_period(&vals, step)
    }
}
