mod common;

use std::f64::consts::{FRAC_PI_8, PI, TAU};

use num_complex::Complex64 as C;
use proptest::prelude::*;
use triphot::experiment::{predict_rate, simulate_counts, ExperimentConfig};
use triphot::observables::{coincidence_probability, correlators, degree_of_polarization, stokes, DetectionMode};
use triphot::optics::{apply, gell_mann, lift, sequence_operator, su3_exp, PlateSpec, Su3Params};
use triphot::synthesis::{recompute_fidelity, synthesize, Retardance, SynthesisProblem};
use triphot::{BiphotonState, TritLabel};

use common::*;

fn arb_state() -> impl Strategy<Value = BiphotonState> {
    prop::array::uniform6(-1.0..1.0f64)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            BiphotonState::new(C::new(v[0], v[1]), C::new(v[2], v[3]), C::new(v[4], v[5])).unwrap()
        })
}

fn arb_plate() -> impl Strategy<Value = PlateSpec> {
    (0.0..TAU, 0.0..PI).prop_map(|(d, c)| PlateSpec::new(d, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lift_matches_symmetric_tensor_restriction(seed in any::<u64>()) {
        let j = random_unitary(&mut rng(seed));
        prop_assert!(lift(&j).max_abs_diff(&symmetric_restriction(&j)) < 1e-12);
    }

    #[test]
    fn lift_is_a_homomorphism(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (random_unitary(&mut r), random_unitary(&mut r));
        prop_assert!(lift(&(a * b)).max_abs_diff(&(lift(&a) * lift(&b))) < 1e-12);
    }

    #[test]
    fn lifted_plates_are_unitary(p in arb_plate()) {
        let g = p.operator();
        prop_assert!(g.unitarity_residual() < 1e-12);
        prop_assert!((g.determinant().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plates_preserve_degree_of_polarization(s in arb_state(), plates in prop::collection::vec(arb_plate(), 1..=5)) {
        let out = apply(&sequence_operator(&plates), &s).unwrap();
        prop_assert!((degree_of_polarization(&out) - degree_of_polarization(&s)).abs() < 1e-10);
        prop_assert!(out.is_normalized());
    }

    #[test]
    fn stokes_matches_mode_operators(s in arb_state()) {
        let oracle = Modes::new().stokes(&s);
        let st = stokes(&s);
        for (a, b) in [st.s0, st.s1, st.s2, st.s3].iter().zip(oracle.iter()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let p = (oracle[1].powi(2) + oracle[2].powi(2) + oracle[3].powi(2)).sqrt() / oracle[0];
        prop_assert!((degree_of_polarization(&s) - p).abs() < 1e-12);
        prop_assert!(st.s1 * st.s1 + st.s2 * st.s2 + st.s3 * st.s3 <= st.s0 * st.s0 + 1e-9);
    }

    #[test]
    fn correlators_match_mode_operators(s in arb_state()) {
        let [gxy, gxx, gyy] = Modes::new().correlators(&s);
        let c = correlators(&s);
        prop_assert!((c.gxy - gxy).abs() < 1e-12);
        prop_assert!((c.gxx - gxx).abs() < 1e-12);
        prop_assert!((c.gyy - gyy).abs() < 1e-12);
        prop_assert!((c.gxx / 2.0 + c.gxy + c.gyy / 2.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coincidence_is_bilinear_in_efficiencies(s in arb_state(), e1 in 0.0..1.0f64, e2 in 0.0..1.0f64) {
        for mode in [DetectionMode::DirectXy, DetectionMode::AnalysisX, DetectionMode::AnalysisY] {
            let unit = coincidence_probability(&s, mode, 1.0, 1.0).unwrap();
            let p = coincidence_probability(&s, mode, e1, e2).unwrap();
            prop_assert!((p - unit * e1 * e2).abs() < 1e-14);
        }
        let [p1, _, p3] = s.populations();
        let py = coincidence_probability(&s, DetectionMode::AnalysisY, e1, e2).unwrap();
        prop_assert!((py - p3 / 2.0 * e1 * e2).abs() < 1e-12);
        let px = coincidence_probability(&s, DetectionMode::AnalysisX, e1, e2).unwrap();
        prop_assert!((px - p1 / 2.0 * e1 * e2).abs() < 1e-12);
    }

    #[test]
    fn su3_exp_is_special_unitary_and_matches_taylor(theta in prop::array::uniform8(-2.0..2.0f64)) {
        let g = su3_exp(&Su3Params::new(theta));
        prop_assert!(g.unitarity_residual() < 1e-10);
        prop_assert!((g.determinant() - C::new(1.0, 0.0)).norm() < 1e-10);
        let mut h = [[C::new(0.0, 0.0); 3]; 3];
        for (k, t) in theta.iter().enumerate() {
            let l = gell_mann(k + 1);
            for r in 0..3 { for c in 0..3 { h[r][c] += l[r][c] * *t; } }
        }
        let want = triphot::optics::BiphotonOperator::new(expm_i(&h));
        prop_assert!(g.max_abs_diff(&want) < 1e-10);
    }

    #[test]
    fn global_phase_predicate(s in arb_state(), seed in any::<u64>()) {
        let theta = rand::Rng::random_range(&mut rng(seed), -50.0..50.0);
        prop_assert!(s.eq_up_to_phase(&s.with_global_phase(theta), 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn monte_carlo_converges_to_prediction(
        phase in 0.0..TAU,
        chi in 0.0..PI,
        quarter in any::<bool>(),
        t02 in 0.2..1.0f64,
        jitter in 0.0..1.0f64,
        analysis in 0usize..3,
        seed in any::<u64>(),
    ) {
        let mut cfg = ExperimentConfig::default();
        cfg.source.phase = phase;
        cfg.source.t02 = t02;
        cfg.source.jitter = jitter;
        cfg.source.pair_rate = 50.0;
        cfg.plate = if quarter { PlateSpec::quarter_wave(chi) } else { PlateSpec::half_wave(chi) };
        cfg.analysis = [triphot::Analysis::None, triphot::Analysis::X, triphot::Analysis::Y][analysis];
        cfg.eta1 = 0.8;
        let t = 1.0e4;
        let recs = simulate_counts(&cfg, seed, t, 10.0).unwrap();
        let mean = recs.iter().map(|r| r.coincidences as f64).sum::<f64>() / t;
        let want = predict_rate(&cfg).unwrap();
        let se = (want * t).sqrt() / t;
        prop_assert!((mean - want).abs() < 4.0 * se, "mean {} want {} se {}", mean, want, se);
    }
}

#[test]
fn synthesized_sequences_are_reversible() {
    let cases = [
        (TritLabel::Minus, TritLabel::Zero, Retardance::Half),
        (TritLabel::Plus, TritLabel::Zero, Retardance::Quarter),
        (TritLabel::Minus, TritLabel::Plus, Retardance::Quarter),
    ];
    for (from, to, kind) in cases {
        let p = SynthesisProblem::new(BiphotonState::trit(from), BiphotonState::trit(to)).with_plates(1, &[kind]);
        let r = synthesize(&p, 16, 1e-10, 3).unwrap();
        assert!(r.fidelity > 1.0 - 1e-9, "{from}->{to}: {}", r.fidelity);
        let back = r.operator().adjoint();
        let restored = apply(&back, &p.target).unwrap();
        assert!((p.input.fidelity(&restored) - r.fidelity).abs() < 1e-9);
    }
}

#[test]
fn synthesis_is_deterministic_and_self_consistent() {
    let p = SynthesisProblem::new(BiphotonState::fock(0).unwrap(), BiphotonState::trit(TritLabel::Minus))
        .with_plates(2, &[Retardance::Half, Retardance::Quarter])
        .with_phase(true);
    let a = synthesize(&p, 8, 1e-9, 17).unwrap();
    let b = synthesize(&p, 8, 1e-9, 17).unwrap();
    assert_eq!(a, b);
    let again = recompute_fidelity(&p, &a.plates, a.phase).unwrap();
    assert!((again - a.fidelity).abs() < 1e-12);
    assert!(a.plates.iter().all(|pl| (0.0..PI).contains(&pl.angle)));
}

#[test]
fn half_wave_minus_to_zero_angles_are_congruent() {
    // Every seed and density must land on pi/8 mod pi/4.
    let p = SynthesisProblem::new(BiphotonState::trit(TritLabel::Minus), BiphotonState::trit(TritLabel::Zero))
        .with_plates(1, &[Retardance::Half]);
    for (density, seed) in [(8, 0), (9, 1), (13, 2), (21, 3)] {
        let r = synthesize(&p, density, 1e-10, seed).unwrap();
        let chi = r.plates[0].angle;
        let k = ((chi - FRAC_PI_8) / (PI / 4.0)).round();
        assert!((chi - FRAC_PI_8 - k * PI / 4.0).abs() < 1e-4, "{chi}");
    }
}

#[test]
fn free_plates_reach_any_zero_p_target_from_psi_minus() {
    // All trit states have P = 0 and lie in one plate orbit.
    for to in TritLabel::ALL {
        let p = SynthesisProblem::new(BiphotonState::trit(TritLabel::Minus), BiphotonState::trit(to));
        let r = synthesize(&p, 12, 1e-10, 0).unwrap();
        assert!(r.fidelity > 1.0 - 1e-9, "{to}: {}", r.fidelity);
    }
}

#[test]
fn plates_cannot_change_polarization_degree_but_su3_can() {
    // |2,0> has P = 1 and Psi_0 has P = 0, so no plate sequence connects them.
    let p = SynthesisProblem::new(BiphotonState::fock(0).unwrap(), BiphotonState::trit(TritLabel::Zero))
        .with_plates(2, &[Retardance::Free]);
    let r = synthesize(&p, 8, 1e-9, 0).unwrap();
    assert!(r.fidelity < 0.5 + 1e-9);
    let mut r = rng(77);
    let found = triphot::verify::find_p_violating_su3(&mut r, 1000);
    assert!(found.is_some());
}
