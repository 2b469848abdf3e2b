use impulse_mud::analysis::{are, are_grid, AreOptions};
use impulse_mud::montecarlo::{run_ber_point, sweep};
use impulse_mud::spreading::synthesize_with_noise;
use impulse_mud::{
    detect, ExperimentSpec, HuberPenalty, MixtureNoiseModel, NamedPenalty, SolverConfig,
    SpreadingMatrix, XPenalty,
};

#[test]
fn noiseless_frames_are_recovered_by_every_detector() {
    let s = SpreadingMatrix::m_sequence(5, 5).unwrap();
    let noise = MixtureNoiseModel::calibrate(0.1, 100.0, 1.0).unwrap();
    let bits = [1, -1, -1, 1, -1];
    let frame = synthesize_with_noise(&s, &[1.0; 5], &bits, &[0.0; 31]).unwrap();
    let huber = HuberPenalty::minimax(&noise).unwrap();
    let x = XPenalty::new(noise.total_std()).unwrap();
    for out in [
        detect(
            &s,
            &frame.received,
            &huber,
            &SolverConfig::for_penalty(&huber, 5),
        )
        .unwrap(),
        detect(&s, &frame.received, &x, &SolverConfig::for_penalty(&x, 5)).unwrap(),
    ] {
        assert_eq!(out.bits, frame.bits);
        assert_eq!(out.iterations, 0);
        assert!(out.converged);
    }
}

#[test]
fn robust_detectors_beat_ls_under_heavy_impulses() {
    let s = SpreadingMatrix::m_sequence(5, 5).unwrap();
    let spec = ExperimentSpec {
        epsilon: 0.1,
        kappa: 100.0,
        snr_db: vec![4.0],
        min_errors: u64::MAX,
        max_frames: 20_000,
        seed: 12,
        ..ExperimentSpec::default()
    };
    let result = sweep(&spec, &s).unwrap();
    let ber = |name| result.curve(name).unwrap()[0].ber;
    assert!(
        ber("huber") < 0.5 * ber("ls"),
        "{} vs {}",
        ber("huber"),
        ber("ls")
    );
    assert!(ber("x") < 0.5 * ber("ls"), "{} vs {}", ber("x"), ber("ls"));
}

#[test]
fn ber_point_is_a_pure_function_of_spec() {
    let s = SpreadingMatrix::m_sequence(5, 5).unwrap();
    let spec = ExperimentSpec {
        epsilon: 0.05,
        snr_db: vec![0.0, 3.0],
        min_errors: 50,
        max_frames: 50_000,
        seed: 99,
        ..ExperimentSpec::default()
    };
    let a = run_ber_point(&spec, 1, &NamedPenalty::x_total(), &s).unwrap();
    let b = run_ber_point(&spec, 1, &NamedPenalty::x_total(), &s).unwrap();
    assert_eq!(a, b);
    let other_seed = ExperimentSpec {
        seed: 100,
        ..spec.clone()
    };
    assert_ne!(
        run_ber_point(&other_seed, 1, &NamedPenalty::x_total(), &s).unwrap(),
        a
    );
}

#[test]
fn grid_cells_match_single_evaluations() {
    let epsilons = [0.01, 0.1];
    let kappas = [10.0, 1000.0];
    let grid = are_grid(&epsilons, &kappas, &AreOptions::default()).unwrap();
    for (ei, &eps) in epsilons.iter().enumerate() {
        for (ki, &kappa) in kappas.iter().enumerate() {
            let noise = MixtureNoiseModel::calibrate(eps, kappa, 1.0).unwrap();
            let huber = HuberPenalty::minimax(&noise).unwrap();
            let x = XPenalty::new(noise.total_std()).unwrap();
            let single = are(&huber, &x, &noise).unwrap();
            assert!((grid.value(ei, ki) - single).abs() <= 1e-14 * single);
        }
    }
}
