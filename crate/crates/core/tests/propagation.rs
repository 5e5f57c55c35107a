//! Eigenbasis propagation against direct time stepping, and its structural invariants.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vibdimer::observables::population;
use vibdimer::states::{coherent_state_with_tolerance, CoherentSpec};
use vibdimer::{build_hamiltonian, diagonalize, DimerParams, Electronic, HamiltonianMatrix, StateVector, VibronicBasis};

fn random_state(basis: &std::sync::Arc<VibronicBasis>, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..basis.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    StateVector::from_amplitudes(basis, amps).unwrap().normalized().unwrap()
}

/// Classical fourth-order Runge-Kutta for `i dψ/dt = Hψ` with a dense real `H`.
fn rk4(h: &HamiltonianMatrix, psi: &[Complex64], t: f64, steps: usize) -> Vec<Complex64> {
    let n = psi.len();
    let m = h.matrix();
    let dt = t / steps as f64;
    let deriv = |x: &[Complex64]| -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let v = m[(i, j)];
                    if v != 0.0 {
                        acc += x[j] * v;
                    }
                }
                Complex64::new(0.0, -1.0) * acc
            })
            .collect()
    };
    let axpy = |x: &[Complex64], k: &[Complex64], s: f64| -> Vec<Complex64> { x.iter().zip(k).map(|(a, b)| a + b * s).collect() };
    let mut y = psi.to_vec();
    for _ in 0..steps {
        let k1 = deriv(&y);
        let k2 = deriv(&axpy(&y, &k1, 0.5 * dt));
        let k3 = deriv(&axpy(&y, &k2, 0.5 * dt));
        let k4 = deriv(&axpy(&y, &k3, dt));
        for i in 0..n {
            y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
        }
    }
    y
}

#[test]
fn eigenbasis_matches_runge_kutta_over_ten_periods() {
    let p = DimerParams::default().with_coupling(0.1);
    let basis = VibronicBasis::one_exciton(10);
    let h = build_hamiltonian(&p, &basis).unwrap();
    let eig = diagonalize(&h).unwrap();
    let psi = coherent_state_with_tolerance(&CoherentSpec::franck_condon(Electronic::Donor), &basis, &p, 1e-2).unwrap();
    let t = 10.0 * p.tau_vib();
    let exact = eig.propagate(&psi, t).unwrap();
    let steps = 80_000; // τ/8000
    let stepped = rk4(&h, psi.amplitudes(), t, steps);
    let err = exact.amplitudes().iter().zip(&stepped).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-6, "max amplitude error {err:e}");
}

#[test]
fn random_propagations_preserve_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = DimerParams::default().with_detuning(0.7);
    let basis = VibronicBasis::full(10);
    let h = build_hamiltonian(&p, &basis).unwrap();
    let eig = diagonalize(&h).unwrap();
    assert!(eig.max_residual(&h) < 1e-10 * eig.spectral_norm());
    for _ in 0..200 {
        let psi = random_state(&basis, &mut rng);
        let t = rng.gen_range(-200.0..200.0);
        let out = eig.propagate(&psi, t).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }
}

fn small_system(j: f64, de: f64) -> (DimerParams, HamiltonianMatrix) {
    let p = DimerParams::default().with_coupling(j).with_detuning(de);
    let basis = VibronicBasis::full(6);
    let h = build_hamiltonian(&p, &basis).unwrap();
    (p, h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn composition_of_propagators(seed in 0u64..1000, t1 in -30.0f64..30.0, t2 in -30.0f64..30.0, j in 0.0f64..0.6, de in -8.0f64..8.0) {
        let (_, h) = small_system(j, de);
        let eig = diagonalize(&h).unwrap();
        let psi = random_state(h.basis(), &mut ChaCha8Rng::seed_from_u64(seed));
        let two = eig.propagate(&eig.propagate(&psi, t1).unwrap(), t2).unwrap();
        let one = eig.propagate(&psi, t1 + t2).unwrap();
        let err = two.amplitudes().iter().zip(one.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-11);
        let back = eig.propagate(&one, -(t1 + t2)).unwrap();
        let err = back.amplitudes().iter().zip(psi.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-11);
    }

    #[test]
    fn energy_and_norm_are_conserved(seed in 0u64..1000, t in 0.0f64..100.0, j in 0.0f64..0.6, de in -8.0f64..8.0) {
        let (_, h) = small_system(j, de);
        let eig = diagonalize(&h).unwrap();
        let psi = random_state(h.basis(), &mut ChaCha8Rng::seed_from_u64(seed));
        let out = eig.propagate(&psi, t).unwrap();
        let e0 = h.expectation(&psi).unwrap();
        let e1 = h.expectation(&out).unwrap();
        prop_assert!((e0 - e1).abs() < 1e-10 * (1.0 + e0.abs()));
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncoupled_populations_are_frozen(seed in 0u64..1000, t in 0.0f64..100.0, de in -8.0f64..8.0) {
        let (_, h) = small_system(0.0, de);
        let eig = diagonalize(&h).unwrap();
        let psi = random_state(h.basis(), &mut ChaCha8Rng::seed_from_u64(seed));
        let out = eig.propagate(&psi, t).unwrap();
        for j in Electronic::ALL {
            prop_assert!((population(&psi, j).unwrap() - population(&out, j).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn eigen_coefficients_round_trip(seed in 0u64..1000, j in 0.0f64..0.6) {
        let (_, h) = small_system(j, 1.3);
        let eig = diagonalize(&h).unwrap();
        let psi = random_state(h.basis(), &mut ChaCha8Rng::seed_from_u64(seed));
        let back = eig.from_eigen(&eig.to_eigen(&psi).unwrap()).unwrap();
        let err = back.amplitudes().iter().zip(psi.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-13);
    }
}
