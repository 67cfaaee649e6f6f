//! Seeded coincidence-counting Monte Carlo.
//!
//! Every time bin draws from its own ChaCha stream (`seed`, stream = bin
//! index), so bins can be simulated in any order or in parallel and still
//! reproduce the same record.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, PhaseResponse};
use crate::{Error, Result};

/// Coincidences registered in one time bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    /// Bin start, seconds.
    pub t_start: f64,
    pub coincidences: u64,
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    // Poisson::new only fails for non-positive or non-finite means.
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    d.sample(rng) as u64
}

/// Simulates `duration` seconds of counting in bins of width `bin`.
///
/// The last bin is shortened if `duration` is not a multiple of `bin`.
pub fn simulate_counts(
    cfg: &ExperimentConfig,
    seed: u64,
    duration: f64,
    bin: f64,
) -> Result<Vec<CountRecord>> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::OutOfRange {
            what: "duration",
            value: duration,
        });
    }
    if !(bin > 0.0 && bin.is_finite()) {
        return Err(Error::OutOfRange {
            what: "bin width",
            value: bin,
        });
    }
    cfg.validate()?;
    let nbins = ((duration / bin) - 1e-9).ceil().max(1.0) as u64;
    // Per-pair probabilities come from the propagated pipeline, reduced to its
    // exact harmonic form in the source phase.
    let response = PhaseResponse::new(cfg)?;
    let sigma = cfg.source.jitter;
    let jitter = if sigma > 0.0 {
        Some(Normal::new(0.0, sigma).map_err(|e| Error::Parse(e.to_string()))?)
    } else {
        None
    };
    let phase = cfg.source.phase;
    let fixed_p = response.probability(phase);

    let records = (0..nbins)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let t_start = k as f64 * bin;
            let width = bin.min(duration - t_start);
            let pairs = poisson(&mut rng, cfg.source.pair_rate * width);
            let mut hits = 0u64;
            for _ in 0..pairs {
                let p = match &jitter {
                    Some(n) => response.probability(phase + n.sample(&mut rng)),
                    None => fixed_p,
                };
                if rng.random::<f64>() < p {
                    hits += 1;
                }
            }
            hits += poisson(&mut rng, cfg.accidental_rate * width);
            CountRecord {
                t_start,
                coincidences: hits,
            }
        })
        .collect();
    Ok(records)
}

/// Total counts divided by total duration.
pub fn mean_rate(records: &[CountRecord], duration: f64) -> f64 {
    records.iter().map(|r| r.coincidences as f64).sum::<f64>() / duration
}
