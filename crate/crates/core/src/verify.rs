//! Self-check suites run by `triphot verify`.
//!
//! Each check compares the library's fast path against an independent route
//! (a closed-form law, a brute-force tensor construction, or an invariant)
//! and reports the worst residual seen.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI, SQRT_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::experiment::{hwp_law, qwp_law, source_state, SourceSpec};
use crate::observables::degree_of_polarization;
use crate::optics::{apply, lift, sequence_operator, su3_exp, BiphotonOperator, JonesMap, PlateSpec, Su3Params};
use crate::state::{BiphotonState, TritLabel};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn below(name: &str, max_residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            max_residual,
            tolerance,
            passed: max_residual < tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Points per axis of the closed-form grids.
    pub grid: usize,
    /// Random samples for the oracle and invariance suites.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            grid: 101,
            samples: 1000,
            seed: 2000,
        }
    }
}

fn gauss(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Haar-random 2x2 unitary (with a random global phase).
pub fn random_unitary_jones(rng: &mut impl Rng) -> JonesMap {
    let mut v = [0.0f64; 4];
    let mut n = 0.0;
    while n < 1e-12 {
        v = [gauss(rng), gauss(rng), gauss(rng), gauss(rng)];
        n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    let a = Complex64::new(v[0], v[1]) / n;
    let b = Complex64::new(v[2], v[3]) / n;
    let ph = Complex64::from_polar(1.0, rng.random_range(0.0..TAU));
    JonesMap::new([[a * ph, b * ph], [-b.conj() * ph, a.conj() * ph]])
}

/// Uniformly random pure state.
pub fn random_state(rng: &mut impl Rng) -> BiphotonState {
    loop {
        let amps = [0, 1, 2].map(|_| Complex64::new(gauss(rng), gauss(rng)));
        if let Ok(s) = BiphotonState::from_array(amps) {
            return s;
        }
    }
}

pub fn random_plate(rng: &mut impl Rng) -> PlateSpec {
    PlateSpec::new(rng.random_range(0.0..TAU), rng.random_range(0.0..PI))
}

/// Restriction of `j (x) j` to the symmetric two-photon subspace in the basis
/// `{xx, (xy + yx)/sqrt2, yy}`, built from the explicit 4x4 Kronecker product.
pub fn tensor_lift(j: &JonesMap) -> BiphotonOperator {
    let m = j.m;
    let mut k = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (r, row) in k.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = m[r / 2][c / 2] * m[r % 2][c % 2];
        }
    }
    let h = 1.0 / SQRT_2;
    let basis: [[f64; 4]; 3] = [[1.0, 0.0, 0.0, 0.0], [0.0, h, h, 0.0], [0.0, 0.0, 0.0, 1.0]];
    let mut g = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (r, row) in g.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            for p in 0..4 {
                for q in 0..4 {
                    *x += basis[r][p] * k[p][q] * basis[c][q];
                }
            }
        }
    }
    BiphotonOperator::new(g)
}

fn grid(n: usize, hi: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| hi * i as f64 / (n - 1).max(1) as f64)
}

fn ideal(phase: f64) -> SourceSpec {
    SourceSpec {
        phase,
        t20: 1.0,
        t02: 1.0,
        jitter: 0.0,
        pair_rate: 1.0,
    }
}

fn plate_populations(plate: PlateSpec, phi: f64) -> [f64; 3] {
    let s = source_state(&ideal(phi), 0.0).expect("ideal source");
    apply(&plate.operator(), &s).expect("plates are unitary").populations()
}

pub fn check_hwp_grid(n: usize) -> Check {
    let mut worst: f64 = 0.0;
    for chi in grid(n, PI) {
        for phi in grid(n, TAU) {
            let got = plate_populations(PlateSpec::half_wave(chi), phi);
            let want = hwp_law(chi, phi);
            for k in 0..3 {
                worst = worst.max((got[k] - want[k]).abs());
            }
        }
    }
    Check::below("half-wave closed form grid", worst, 1e-12)
}

pub fn check_qwp_grid(n: usize) -> Check {
    let mut worst: f64 = 0.0;
    for chi in grid(n, PI) {
        for phi in grid(n, TAU) {
            let got = plate_populations(PlateSpec::quarter_wave(chi), phi)[1];
            worst = worst.max((got - qwp_law(chi, phi)).abs());
        }
    }
    Check::below("quarter-wave closed form grid", worst, 1e-12)
}

/// The sign-sensitive point of the quarter-wave law.
pub fn check_qwp_convention_point() -> Check {
    let got = plate_populations(PlateSpec::quarter_wave(FRAC_PI_8), FRAC_PI_2)[1];
    Check::below(
        "quarter-wave convention point (chi=pi/8, phi=pi/2)",
        (got - qwp_law(FRAC_PI_8, FRAC_PI_2)).abs(),
        1e-12,
    )
}

pub fn check_trit_anchors() -> Check {
    use TritLabel::*;
    let t = BiphotonState::trit;
    let cases = [
        (PlateSpec::half_wave(FRAC_PI_8), t(Minus), t(Zero)),
        (PlateSpec::quarter_wave(PI / 4.0), t(Plus), t(Zero)),
        // x/y-aligned quarter-wave: pi/2 per photon is pi between |2,0> and |0,2>.
        (PlateSpec::quarter_wave(0.0), t(Minus), t(Plus)),
        (PlateSpec::quarter_wave(PI / 4.0), t(Minus), t(Minus)),
    ];
    let mut worst: f64 = 0.0;
    for (plate, from, to) in cases {
        let out = apply(&plate.operator(), &from).expect("unitary");
        worst = worst.max((1.0 - to.fidelity(&out)).abs());
    }
    for chi in grid(64, PI) {
        let out = apply(&PlateSpec::half_wave(chi).operator(), &t(Plus)).expect("unitary");
        worst = worst.max((1.0 - t(Plus).fidelity(&out)).abs());
    }
    Check::below("trit transition anchors", worst, 1e-12)
}

pub fn check_lift_oracle(samples: usize, rng: &mut impl Rng) -> Vec<Check> {
    let mut oracle: f64 = 0.0;
    let mut homo: f64 = 0.0;
    let mut unit: f64 = 0.0;
    for _ in 0..samples {
        let j1 = random_unitary_jones(rng);
        let j2 = random_unitary_jones(rng);
        oracle = oracle.max(lift(&j1).max_abs_diff(&tensor_lift(&j1)));
        homo = homo.max(lift(&(j2 * j1)).max_abs_diff(&(lift(&j2) * lift(&j1))));
        unit = unit.max(random_plate(rng).operator().unitarity_residual());
    }
    vec![
        Check::below("lift vs tensor-product oracle", oracle, 1e-12),
        Check::below("lift homomorphism", homo, 1e-12),
        Check::below("lifted plate unitarity", unit, 1e-12),
    ]
}

pub fn check_p_invariance(samples: usize, rng: &mut impl Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let s = random_state(rng);
        let count = rng.random_range(1..=5);
        let plates: Vec<PlateSpec> = (0..count).map(|_| random_plate(rng)).collect();
        let out = apply(&sequence_operator(&plates), &s).expect("unitary");
        worst = worst.max((degree_of_polarization(&out) - degree_of_polarization(&s)).abs());
    }
    Check::below("degree of polarization invariance under plates", worst, 1e-10)
}

/// Random SU(3) element that moves `P` of `Psi_0` by more than 0.1.
pub fn find_p_violating_su3(rng: &mut impl Rng, tries: usize) -> Option<(Su3Params, f64)> {
    let zero = BiphotonState::trit(TritLabel::Zero);
    let p0 = degree_of_polarization(&zero);
    (0..tries).find_map(|_| {
        let theta = [0; 8].map(|_| rng.random_range(-1.5..1.5));
        let p = Su3Params::new(theta);
        let out = apply(&su3_exp(&p), &zero).ok()?;
        let dp = (degree_of_polarization(&out) - p0).abs();
        (dp > 0.1).then_some((p, dp))
    })
}

pub fn check_su3_witness(rng: &mut impl Rng) -> Check {
    let found = find_p_violating_su3(rng, 1000);
    let dp = found.map_or(0.0, |(_, dp)| dp);
    Check {
        name: "SU(3) element changing P of psi_zero by > 0.1".into(),
        max_residual: dp,
        tolerance: 0.1,
        passed: dp > 0.1,
    }
}

/// Runs every suite.
pub fn run(opts: VerifyOptions) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = vec![
        check_hwp_grid(opts.grid),
        check_qwp_grid(opts.grid),
        check_qwp_convention_point(),
        check_trit_anchors(),
    ];
    checks.extend(check_lift_oracle(opts.samples, &mut rng));
    checks.push(check_p_invariance(opts.samples, &mut rng));
    checks.push(check_su3_witness(&mut rng));
    VerifyReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes_on_small_grid() {
        let r = run(VerifyOptions {
            grid: 11,
            samples: 100,
            seed: 1,
        });
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn tensor_lift_of_identity() {
        assert!(tensor_lift(&JonesMap::IDENTITY).max_abs_diff(&BiphotonOperator::IDENTITY) < 1e-15);
    }
}
