//! Search for plate sequences (and optionally a source phase) that carry an
//! input biphoton state onto a target state.
//!
//! The search is a coarse uniform grid over every free angle followed by
//! Nelder-Mead refinement of the best grid points. Plates only reach the
//! image of SU(2) inside SU(3), so some targets are unreachable; the best
//! approximation is returned in that case and [`reachability_report`] says so.

pub mod nelder_mead;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::optics::{apply, sequence_operator, wrap, PlateSpec};
use crate::state::BiphotonState;
use crate::{Error, Result};

/// Largest plate budget accepted.
pub const MAX_PLATES: usize = 8;
/// Fidelity above which a target counts as reachable.
pub const REACHABLE_FIDELITY: f64 = 1.0 - 1e-6;
/// Grid evaluations per layout before switching to seeded random sampling.
const MAX_GRID_POINTS: usize = 100_000;
/// Grid points refined per layout.
const REFINE_STARTS: usize = 8;
const MAX_REFINE_EVALS: usize = 20_000;

/// Retardance a plate may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Retardance {
    /// Half-wave, `pi`.
    Half,
    /// Quarter-wave, `pi/2`.
    Quarter,
    /// Any retardance, optimized.
    Free,
}

impl Retardance {
    fn fixed(self) -> Option<f64> {
        match self {
            Retardance::Half => Some(PI),
            Retardance::Quarter => Some(FRAC_PI_2),
            Retardance::Free => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisProblem {
    pub input: BiphotonState,
    pub target: BiphotonState,
    /// Number of plates.
    pub budget: usize,
    pub retardances: Vec<Retardance>,
    /// Treat the source phase on the `|0,2>` amplitude as a free parameter.
    pub optimize_phase: bool,
}

impl SynthesisProblem {
    pub fn new(input: BiphotonState, target: BiphotonState) -> Self {
        Self {
            input,
            target,
            budget: 1,
            retardances: vec![Retardance::Free],
            optimize_phase: false,
        }
    }

    pub fn with_plates(mut self, budget: usize, retardances: &[Retardance]) -> Self {
        self.budget = budget;
        self.retardances = retardances.to_vec();
        self
    }

    pub fn with_phase(mut self, optimize: bool) -> Self {
        self.optimize_phase = optimize;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 || self.budget > MAX_PLATES {
            return Err(Error::OutOfRange {
                what: "plate budget (1..=8)",
                value: self.budget as f64,
            });
        }
        if self.retardances.is_empty() {
            return Err(Error::OutOfRange {
                what: "allowed retardance count",
                value: 0.0,
            });
        }
        Ok(())
    }

    /// Every per-plate retardance assignment searched. A free plate subsumes
    /// the fixed ones, so a set containing `Free` has a single layout.
    pub fn layouts(&self) -> Vec<Vec<Retardance>> {
        let mut kinds = self.retardances.clone();
        kinds.sort();
        kinds.dedup();
        if kinds.contains(&Retardance::Free) {
            return vec![vec![Retardance::Free; self.budget]];
        }
        let mut out: Vec<Vec<Retardance>> = vec![vec![]];
        for _ in 0..self.budget {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    kinds.iter().map(move |k| {
                        let mut v = prefix.clone();
                        v.push(*k);
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// Number of parameters for `layout`: one angle per plate, one retardance
    /// per free plate, then the phase if enabled.
    pub fn dimension(&self, layout: &[Retardance]) -> usize {
        layout.len()
            + layout.iter().filter(|k| **k == Retardance::Free).count()
            + usize::from(self.optimize_phase)
    }

    /// Decodes a parameter vector into plates and an optional phase.
    pub fn decode(&self, layout: &[Retardance], params: &[f64]) -> Result<(Vec<PlateSpec>, Option<f64>)> {
        let expected = self.dimension(layout);
        if layout.len() != self.budget || params.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: params.len(),
            });
        }
        let mut it = params.iter().copied();
        let mut plates = Vec::with_capacity(layout.len());
        for kind in layout {
            let angle = it.next().unwrap_or_default();
            let retardance = match kind.fixed() {
                Some(d) => d,
                None => it.next().unwrap_or_default(),
            };
            plates.push(PlateSpec::new(retardance, angle));
        }
        let phase = if self.optimize_phase { it.next() } else { None };
        Ok((plates, phase))
    }

    /// Input state with the source phase applied to its `|0,2>` amplitude.
    pub fn prepared_input(&self, phase: Option<f64>) -> BiphotonState {
        match phase {
            None => self.input,
            Some(p) => {
                let [a, b, c] = self.input.amplitudes();
                BiphotonState::from_array([a, b, c * Complex64::from_polar(1.0, p)])
                    .expect("phase rotation preserves the norm")
            }
        }
    }

    fn periods(&self, layout: &[Retardance]) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dimension(layout));
        for kind in layout {
            v.push(PI);
            if *kind == Retardance::Free {
                v.push(TAU);
            }
        }
        if self.optimize_phase {
            v.push(TAU);
        }
        v
    }
}

/// `|<target| G(params) input(phase)>|^2`.
pub fn fidelity_objective(p: &SynthesisProblem, layout: &[Retardance], params: &[f64]) -> Result<f64> {
    let (plates, phase) = p.decode(layout, params)?;
    let out = sequence_operator(&plates).mul_vec(&p.prepared_input(phase).amplitudes());
    let ov: Complex64 = p
        .target
        .amplitudes()
        .iter()
        .zip(out.iter())
        .map(|(t, o)| t.conj() * o)
        .sum();
    Ok(ov.norm_sqr().min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    /// Plates in the order the light traverses them.
    pub plates: Vec<PlateSpec>,
    pub phase: Option<f64>,
    pub fidelity: f64,
    pub evaluations: usize,
}

impl SynthesisResult {
    /// Composite operator of the plate sequence.
    pub fn operator(&self) -> crate::optics::BiphotonOperator {
        sequence_operator(&self.plates)
    }
}

/// Fidelity of a plate sequence computed plate by plate through
/// [`crate::optics::apply`], independent of the search's composed operator.
pub fn recompute_fidelity(p: &SynthesisProblem, plates: &[PlateSpec], phase: Option<f64>) -> Result<f64> {
    let mut s = p.prepared_input(phase);
    for plate in plates {
        s = apply(&plate.operator(), &s)?;
    }
    Ok(p.target.fidelity(&s))
}

#[derive(Debug, Clone)]
struct Candidate {
    layout: Vec<Retardance>,
    params: Vec<f64>,
    fidelity: f64,
    evaluations: usize,
}

fn grid_points(periods: &[f64], density: usize, rng_seed: u64) -> Vec<Vec<f64>> {
    let d = periods.len();
    let full = density.checked_pow(d as u32).filter(|n| *n <= MAX_GRID_POINTS);
    match full {
        Some(n) => (0..n)
            .map(|mut idx| {
                periods
                    .iter()
                    .map(|per| {
                        let i = idx % density;
                        idx /= density;
                        per * i as f64 / density as f64
                    })
                    .collect()
            })
            .collect(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            (0..MAX_GRID_POINTS)
                .map(|_| periods.iter().map(|per| per * rng.random::<f64>()).collect())
                .collect()
        }
    }
}

fn canonical_params(p: &SynthesisProblem, layout: &[Retardance], params: &[f64]) -> Vec<f64> {
    let periods = p.periods(layout);
    params.iter().zip(periods).map(|(x, per)| wrap(*x, per)).collect()
}

fn search_layout(
    p: &SynthesisProblem,
    layout: &[Retardance],
    density: usize,
    tol: f64,
    seed: u64,
) -> Result<Vec<Candidate>> {
    let periods = p.periods(layout);
    let grid = grid_points(&periods, density, seed);
    let scored: Vec<(f64, Vec<f64>)> = grid
        .into_par_iter()
        .map(|x| fidelity_objective(p, layout, &x).map(|f| (f, x)))
        .collect::<Result<_>>()?;
    let grid_evals = scored.len();
    let mut order: Vec<usize> = (0..scored.len()).collect();
    // Descending fidelity; index order breaks ties deterministically.
    order.sort_by(|&a, &b| scored[b].0.total_cmp(&scored[a].0).then(a.cmp(&b)));
    let step: Vec<f64> = periods.iter().map(|per| per / density as f64 * 0.5).collect();

    let starts: Vec<&Vec<f64>> = order.iter().take(REFINE_STARTS).map(|&i| &scored[i].1).collect();
    let refined: Vec<Candidate> = starts
        .into_par_iter()
        .map(|x0| {
            let m = nelder_mead::minimize(
                |x| 1.0 - fidelity_objective(p, layout, x).unwrap_or(0.0),
                x0,
                &step,
                tol,
                MAX_REFINE_EVALS,
            );
            let params = canonical_params(p, layout, &m.x);
            let fidelity = fidelity_objective(p, layout, &params).unwrap_or(0.0);
            Candidate {
                layout: layout.to_vec(),
                params,
                fidelity,
                evaluations: m.evaluations,
            }
        })
        .collect();
    let refine_evals: usize = refined.iter().map(|c| c.evaluations).sum();
    Ok(refined
        .into_iter()
        .map(|mut c| {
            c.evaluations = grid_evals + refine_evals;
            c
        })
        .collect())
}

/// Best plate sequence for `p`.
///
/// `grid_density` points per free parameter seed the search (falling back to
/// seeded random sampling when the full grid would be too large), and
/// refinement stops once the simplex diameter drops below `refine_tol`.
/// Near-ties in fidelity (within 1e-12) go to the smallest canonical angles.
pub fn synthesize(
    p: &SynthesisProblem,
    grid_density: usize,
    refine_tol: f64,
    seed: u64,
) -> Result<SynthesisResult> {
    p.validate()?;
    if grid_density < 8 {
        return Err(Error::OutOfRange {
            what: "grid density (need >= 8)",
            value: grid_density as f64,
        });
    }
    let layouts = p.layouts();
    let mut all = Vec::new();
    let mut evaluations = 0;
    for (i, layout) in layouts.iter().enumerate() {
        let cands = search_layout(p, layout, grid_density, refine_tol, seed.wrapping_add(i as u64))?;
        evaluations += cands.first().map_or(0, |c| c.evaluations);
        all.extend(cands);
    }
    let best_f = all.iter().map(|c| c.fidelity).fold(f64::MIN, f64::max);
    let best = all
        .into_iter()
        .filter(|c| c.fidelity >= best_f - 1e-12)
        .min_by(|a, b| {
            a.params
                .iter()
                .zip(&b.params)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.layout.cmp(&b.layout))
        })
        .expect("at least one layout is searched");
    let (plates, phase) = p.decode(&best.layout, &best.params)?;
    let fidelity = recompute_fidelity(p, &plates, phase)?;
    Ok(SynthesisResult {
        plates,
        phase,
        fidelity,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Reachability {
    Reachable,
    Approximate { fidelity: f64 },
}

pub fn reachability_report(_p: &SynthesisProblem, result: &SynthesisResult) -> Reachability {
    if result.fidelity > REACHABLE_FIDELITY {
        Reachability::Reachable
    } else {
        Reachability::Approximate {
            fidelity: result.fidelity,
        }
    }
}
