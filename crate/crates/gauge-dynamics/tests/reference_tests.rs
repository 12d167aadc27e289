//! Checks of the exact fixed-frame evolution against the independent
//! Jacobi-eigendecomposition oracle and against analytic special cases.

mod support;

use gauge_dynamics::linalg::{embed_local, expm_antihermitian, ComplexMatrix};
use gauge_dynamics::model::{
    assemble_full_hamiltonian, basis_state, plus_x_state, sigma_x, ModelSpec,
};
use gauge_dynamics::reference::{evolve_exact, expectation, ExactPropagator};
use num_complex::Complex64;
use support::*;

fn tfim(l: usize, h_x: f64, h_z: f64) -> ComplexMatrix {
    assemble_full_hamiltonian(&ModelSpec::new(l, 1.0, h_x, h_z).unwrap()).unwrap()
}

#[test]
fn zero_hamiltonian_builds_identity_step() {
    let prop = ExactPropagator::build(&ComplexMatrix::new_zero(4, 4), 0.1).unwrap();
    let psi = basis_state(2, 3).unwrap();
    let stepped = prop.step(&psi).unwrap();
    assert!(stepped.distance(&psi).unwrap() < 1e-15);
}

#[test]
fn sigma_x_half_pi_rotation_is_analytic() {
    let prop = ExactPropagator::build(&sigma_x(), std::f64::consts::FRAC_PI_2).unwrap();
    // e^{−i(π/2)σˣ} = −iσˣ: |0⟩ ↦ −i|1⟩.
    let psi = basis_state(1, 0).unwrap();
    let stepped = prop.step(&psi).unwrap();
    let amps = stepped.amplitudes();
    assert!((amps[0]).norm() <= 1e-13);
    assert!((amps[1] - Complex64::new(0.0, -1.0)).norm() <= 1e-13);
}

#[test]
fn tfim_step_matches_eigendecomposition_oracle() {
    let h = tfim(3, 1.0, 0.0);
    let dt = 0.005;
    let prop = ExactPropagator::build(&h, dt).unwrap();
    let psi0 = plus_x_state(3).unwrap();
    let fast = prop.step(&psi0).unwrap();
    let slow = evolve_via_eig(&h, &psi0, dt);
    assert!(fast.distance(&slow).unwrap() <= 1e-11);
}

#[test]
fn non_hermitian_input_is_rejected() {
    let mut m = ComplexMatrix::new_zero(2, 2);
    m.set(0, 1, Complex64::new(1.0, 0.0));
    assert!(ExactPropagator::build(&m, 0.1).is_err());
    assert!(ExactPropagator::build(&sigma_x(), 0.0).is_err());
    assert!(ExactPropagator::build(&sigma_x(), -0.1).is_err());
}

#[test]
fn time_zero_sample_is_initial_state() {
    let prop = ExactPropagator::build(&tfim(3, 1.0, 0.0), 0.01).unwrap();
    let psi0 = plus_x_state(3).unwrap();
    let samples = evolve_exact(&prop, &psi0, 10, 5).unwrap();
    assert_eq!(samples[0].0, 0.0);
    assert!(samples[0].1.distance(&psi0).unwrap() == 0.0);
}

#[test]
fn eigenstate_evolution_is_a_global_phase() {
    // h_x = h_z = 0 makes every computational-basis state an eigenstate.
    let h = tfim(3, 0.0, 0.0);
    let prop = ExactPropagator::build(&h, 0.05).unwrap();
    let psi0 = basis_state(3, 5).unwrap();
    let samples = evolve_exact(&prop, &psi0, 40, 10).unwrap();
    for (t, psi) in &samples {
        // Overlap magnitude 1 ⇔ equal up to a global phase.
        let overlap = psi0.inner(psi).unwrap().norm();
        assert!((overlap - 1.0).abs() <= 1e-12, "t={t}");
    }
}

#[test]
fn tfim_sx_at_t1_matches_eigendecomposition_oracle() {
    let l = 3;
    let h = tfim(l, 1.0, 0.0);
    let dt = 0.005;
    let prop = ExactPropagator::build(&h, dt).unwrap();
    let psi0 = plus_x_state(l).unwrap();
    let samples = evolve_exact(&prop, &psi0, 200, 200).unwrap();
    let (t_end, psi_end) = samples.last().unwrap();
    assert!((t_end - 1.0).abs() < 1e-12);

    let oracle_psi = evolve_via_eig(&h, &psi0, 1.0);
    for site in 0..l {
        let op = embed_local(&sigma_x(), &[site], l).unwrap();
        let fast = expectation(&op, psi_end).unwrap();
        let slow = naive_expectation(&op, &oracle_psi);
        assert!((fast - slow).abs() <= 1e-9, "site {site}: {fast} vs {slow}");
    }
}

#[test]
fn expectation_examples_and_oracle() {
    let psi_plus = plus_x_state(2).unwrap();
    let sx0 = embed_local(&sigma_x(), &[0], 2).unwrap();
    assert!((expectation(&sx0, &psi_plus).unwrap() - 1.0).abs() <= 1e-12);
    let id = ComplexMatrix::identity(4);
    assert!((expectation(&id, &psi_plus).unwrap() - 1.0).abs() <= 1e-12);

    let h = gauge_dynamics::linalg::random_hermitian(8, 77);
    let psi = {
        let mut psi = evolve_via_eig(&tfim(3, 1.0, 0.5), &plus_x_state(3).unwrap(), 0.9);
        // Re-normalize defensively; the oracle keeps norm to ~1e-12 anyway.
        let n = psi.norm();
        for a in psi.amplitudes_mut() {
            *a /= n;
        }
        psi
    };
    let fast = expectation(&h, &psi).unwrap();
    let slow = naive_expectation(&h, &psi);
    assert!((fast - slow).abs() <= 1e-12);
}

#[test]
fn norm_and_energy_conserved_along_trajectory() {
    let h = tfim(4, 1.0, 1.0);
    let prop = ExactPropagator::build(&h, 0.01).unwrap();
    let psi0 = plus_x_state(4).unwrap();
    let e0 = expectation(&h, &psi0).unwrap();
    let samples = evolve_exact(&prop, &psi0, 500, 100).unwrap();
    for (t, psi) in &samples {
        assert!((psi.norm() - 1.0).abs() <= 1e-10, "norm at t={t}");
        let e = expectation(&h, psi).unwrap();
        assert!((e - e0).abs() <= 1e-9, "energy at t={t}: {e} vs {e0}");
    }
}

#[test]
fn stepwise_composition_matches_single_exponential() {
    let h = tfim(3, 1.0, 0.5);
    let dt = 0.002;
    let m = 1000;
    let prop = ExactPropagator::build(&h, dt).unwrap();
    let psi0 = plus_x_state(3).unwrap();
    let samples = evolve_exact(&prop, &psi0, m, m).unwrap();
    let stepped = &samples.last().unwrap().1;

    let g = h.scale(Complex64::new(0.0, -dt * m as f64));
    let one_shot = expm_antihermitian(&g, 1e-13).unwrap();
    let direct = one_shot.mul_vec(&psi0).unwrap();
    assert!(stepped.distance(&direct).unwrap() <= 1e-9);
}
