use proptest::prelude::*;
use qlt_core::circuit::Circuit;
use qlt_core::environment::{exact_environment, EnvironmentTensor, SlotSampler};
use qlt_core::hamiltonian::Hamiltonian;
use qlt_core::tomography::*;
use qlt_core::unitary::haar_random;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn slot(n: usize, layers: usize, gate: usize, seed: u64) -> (Circuit, Hamiltonian, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = Circuit::staircase_ansatz(n, layers, &mut rng).unwrap();
    (c, Hamiltonian::ising(n, 1.0, 1.0).unwrap(), gate)
}

fn one_qubit_slot(seed: u64) -> (Circuit, Hamiltonian) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::staircase_ansatz(3, 1, &mut rng).unwrap();
    c.push(haar_random(2, &mut rng), vec![1]).unwrap();
    c.push(haar_random(4, &mut rng), vec![1, 2]).unwrap();
    (c, Hamiltonian::ising(3, 1.0, 0.8).unwrap())
}

fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn noiseless_exactness_all_estimators() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cover2 = builtin_cover_2q().unwrap();
    let cover1 = minimal_cover_1q().unwrap();
    for k in 1..=2 {
        let cover = if k == 1 { &cover1 } else { &cover2 };
        let design = build_design_matrix(&GateSet::clifford_group(k).unwrap(), &Basis::Pauli).unwrap();
        for _ in 0..3 {
            let e = EnvironmentTensor::random_hermitian(k, &mut rng).unwrap();
            let truth = e.measurable_projection();
            let oracle = CostOracle::Exact(&e);
            let n = design.n_rows() as u64;
            let ests = [
                uniform_tomography(&oracle, n, UniformSource::CliffordGroup, UniformEstimator::Regression, &mut rng),
                uniform_tomography(&oracle, n, UniformSource::CliffordGroup, UniformEstimator::ClosedFormShadow, &mut rng),
                tableaux_tomography(&oracle, cover, 1, &mut rng),
            ];
            for r in ests {
                assert!(r.unwrap().estimate.sub(&truth).unwrap().norm() < 1e-8);
            }
            let gs = GateSet::from_cover(cover).unwrap();
            let batch = collect_oracle_samples(&oracle, &gs, gs.len() as u64, &mut rng).unwrap();
            let m = build_design_matrix(&gs, &Basis::Pauli).unwrap();
            assert!(regress(&m, &batch).unwrap().estimate.sub(&truth).unwrap().norm() < 1e-8);
        }
    }
}

#[test]
fn zero_samples_give_zero_estimate() {
    let gs = GateSet::clifford_group(1).unwrap();
    let m = build_design_matrix(&gs, &Basis::Pauli).unwrap();
    let batch = ShotBatch { samples: vec![], circuit_id: String::new(), gate_index: 0, seed: 0 };
    assert_eq!(regress(&m, &batch).unwrap().estimate.norm(), 0.0);
}

#[test]
fn basis_independence() {
    let (c, h) = one_qubit_slot(3);
    let slot = SlotSampler::new(&c, &h, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let gs = GateSet::haar(1, 40, &mut rng);
    let batch = collect_oracle_samples(&CostOracle::Shots(&slot), &gs, 4000, &mut rng).unwrap();
    let a = regress(&build_design_matrix(&gs, &Basis::Pauli).unwrap(), &batch).unwrap();
    let rot = Basis::random_rotation(1, &mut rng).unwrap();
    let b = regress(&build_design_matrix(&gs, &rot).unwrap(), &batch).unwrap();
    assert!(a.estimate.sub(&b.estimate).unwrap().norm() < 1e-9);
}

#[test]
fn averaged_reconstructions_are_unbiased() {
    let (c, h) = one_qubit_slot(5);
    let slot = SlotSampler::new(&c, &h, 2).unwrap();
    let truth = exact_environment(&c, &h, 2).unwrap().measurable_projection();
    let oracle = CostOracle::Shots(&slot);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sizes = [12usize, 25, 50];
    let groups = 12;
    let runs: Vec<EnvironmentTensor> = (0..groups * 50)
        .map(|_| {
            uniform_tomography(&oracle, 48, UniformSource::CliffordGroup, UniformEstimator::Regression, &mut rng)
                .unwrap()
                .estimate
        })
        .collect();
    let errs: Vec<f64> = sizes
        .iter()
        .map(|&m| {
            (0..groups)
                .map(|g| {
                    let mut acc = EnvironmentTensor::zero(1).unwrap();
                    for r in &runs[g * 50..g * 50 + m] {
                        acc = acc.add(r).unwrap();
                    }
                    acc.scale(1.0 / m as f64).sub(&truth).unwrap().norm()
                })
                .sum::<f64>()
                / groups as f64
        })
        .collect();
    let slope = loglog_slope(&sizes.map(|v| v as f64), &errs);
    assert!((-0.65..=-0.35).contains(&slope), "slope {slope}, errors {errs:?}");
}

#[test]
fn empirical_variance_matches_prediction() {
    let (c, h) = one_qubit_slot(7);
    let slot = SlotSampler::new(&c, &h, 2).unwrap();
    let truth = exact_environment(&c, &h, 2).unwrap().measurable_projection();
    let oracle = CostOracle::Shots(&slot);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut sq, mut pred) = (0.0, 0.0);
    let runs = 100;
    for _ in 0..runs {
        let r = uniform_tomography(&oracle, 24 * 40, UniformSource::CliffordGroup, UniformEstimator::Regression, &mut rng)
            .unwrap();
        sq += r.estimate.sub(&truth).unwrap().norm().powi(2);
        pred += r.diagnostics.predicted_variance;
    }
    let ratio = sq / pred;
    assert!((0.5..=2.0).contains(&ratio), "empirical / predicted = {ratio}");
}

#[test]
fn two_design_optimality_witness() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let full = design_diagnostics(&build_design_matrix(&GateSet::clifford_group(2).unwrap(), &Basis::Pauli).unwrap())
        .unwrap();
    assert!((full.trace_inv_pseudo - 3376.0).abs() < 1e-6);
    for gs in [
        GateSet::haar(2, 11520, &mut rng),
        GateSet::random_cliffords(2, 11520, &mut rng).unwrap(),
    ] {
        let d = design_diagnostics(&build_design_matrix(&gs, &Basis::Pauli).unwrap()).unwrap();
        assert!(d.trace_inv_pseudo >= 3376.0 * (1.0 - 1e-6), "{}", d.trace_inv_pseudo);
    }
}

#[test]
fn tableaux_error_shrinks_with_shots() {
    let (c, h, g) = slot(4, 2, 3, 10);
    let slot = SlotSampler::new(&c, &h, g).unwrap();
    let truth = exact_environment(&c, &h, g).unwrap().measurable_projection();
    let cover = builtin_cover_2q().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let err = |per: u64, rng: &mut ChaCha8Rng| {
        (0..4)
            .map(|_| {
                tableaux_tomography(&CostOracle::Shots(&slot), &cover, per, rng)
                    .unwrap()
                    .estimate
                    .sub(&truth)
                    .unwrap()
                    .norm()
            })
            .sum::<f64>()
    };
    assert!(err(400, &mut rng) < err(20, &mut rng));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frame_potential_at_least_two(seed in any::<u64>(), n in 1usize..40, k in 1usize..=2, clifford in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gs = if clifford {
            GateSet::random_cliffords(k, n, &mut rng).unwrap()
        } else {
            GateSet::haar(k, n, &mut rng)
        };
        prop_assert!(frame_potential(&gs).unwrap() >= 2.0 - 1e-9);
    }

    #[test]
    fn regression_is_exact_on_spanning_sets(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = EnvironmentTensor::random_hermitian(1, &mut rng).unwrap();
        let gs = GateSet::haar(1, 30, &mut rng);
        let batch = collect_oracle_samples(&CostOracle::Exact(&e), &gs, 30, &mut rng).unwrap();
        let r = regress(&build_design_matrix(&gs, &Basis::Pauli).unwrap(), &batch).unwrap();
        prop_assert!(r.estimate.sub(&e.measurable_projection()).unwrap().norm() < 1e-8);
        prop_assert!(r.diagnostics.coverage_complete);
    }

    #[test]
    fn greedy_cover_is_complete_with_lower_bound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = greedy_cover_search(1, 20, 2, &mut rng).unwrap();
        prop_assert!(c.missing_pairs().is_empty());
        prop_assert!(c.len() >= 3);
    }
}
