use num_complex::Complex64;
use proptest::prelude::*;
use vibdimer::interferometry::{
    isolate_from_model, linspace, peak_and_fringe_analysis, phase_cycle_isolate, refine_peak, semiclassical_match, target_phase_space, waiting_fraction, InterferometryModel,
    Schedule, TransferMode, PHASE_CYCLE,
};
use vibdimer::DimerParams;

fn model(de: f64, cutoff: usize, reference_coupling: bool) -> (DimerParams, InterferometryModel) {
    let p = DimerParams::default().with_detuning(de);
    let m = InterferometryModel::new(&p, cutoff, reference_coupling).unwrap();
    (p, m)
}

#[test]
fn fast_scan_agrees_with_direct_pathway() {
    for (de, refj) in [(0.0, true), (7.39, false), (2.0, true)] {
        let (p, m) = model(de, 8, refj);
        let tau = p.tau_vib();
        let base = Schedule::from_periods(0.0, 0.5, 0.0, &p);
        let axis = linspace(0.1 * tau, 1.9 * tau, 5);
        let grid = m.scan(&base, &axis, &axis).unwrap();
        for (i, &tp) in axis.iter().enumerate() {
            for (j, &td) in axis.iter().enumerate() {
                let direct = m.interference_term(&base.with_delays(tp, td)).unwrap();
                assert!((grid.get(i, j) - direct).norm() < 1e-12, "{de} {tp} {td}");
            }
        }
    }
}

#[test]
fn scan_is_bit_identical_across_thread_counts() {
    let (p, m) = model(7.39, 8, true);
    let base = Schedule::from_periods(0.0, 0.5, 0.0, &p);
    let axis = linspace(0.0, 2.0 * p.tau_vib(), 17);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| m.scan(&base, &axis, &axis).unwrap())
    };
    let one = run(1);
    for threads in [2, 5] {
        let other = run(threads);
        assert!(one.values.iter().zip(&other.values).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
    }
}

#[test]
fn uncoupled_reference_makes_the_amplitude_doubly_periodic() {
    let (p, m) = model(0.0, 10, false);
    let tau = p.tau_vib();
    let base = Schedule::from_periods(0.0, 0.5, 0.0, &p);
    for (tp, td) in [(0.3, 0.2), (0.92, 0.08), (0.5, 0.7)] {
        let s = m.signal(&base, tp * tau, td * tau).unwrap().norm();
        for (dp, dd) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
            let shifted = m.signal(&base, (tp + dp) * tau, (td + dd) * tau).unwrap().norm();
            assert!((s - shifted).abs() < 1e-12 * (1.0 + s));
        }
    }
}

#[test]
fn target_depends_on_preparation_delay_only_through_a_phase() {
    let (p, m) = model(3.0, 8, true);
    let tau = p.tau_vib();
    let a = m.target_wavepacket(&Schedule::from_periods(0.0, 0.5, 0.0, &p)).unwrap();
    let b = m.target_wavepacket(&Schedule::from_periods(0.37, 0.5, 0.0, &p)).unwrap();
    let phase = Complex64::from_polar(1.0, -0.37 * tau);
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
        assert!((x * phase - y).norm() < 1e-13);
    }
}

#[test]
fn first_order_transfer_converges_to_exact_for_weak_coupling() {
    let p = DimerParams::default().with_detuning(1.5).with_coupling(1e-4);
    let m = InterferometryModel::new(&p, 8, true).unwrap();
    let s = Schedule::from_periods(0.8, 0.5, 1.2, &p);
    let exact = m.interference_term(&s).unwrap();
    let linear = m.interference_term(&Schedule { transfer: TransferMode::FirstOrder, ..s }).unwrap();
    assert!(exact.norm() > 0.0);
    assert!((exact - linear).norm() < 1e-6 * exact.norm(), "{exact} vs {linear}");
}

#[test]
fn signal_scales_out_pulse_strength() {
    let (p, m) = model(0.0, 8, true);
    let s = Schedule::from_periods(0.9, 0.5, 1.1, &p);
    let a = m.interference_term(&s).unwrap();
    let b = m.interference_term(&Schedule { strength: 0.01, ..s }).unwrap();
    assert!((a - b).norm() < 1e-12 * a.norm());
}

#[test]
fn locking_phases_enter_as_a_single_factor() {
    let (p, m) = model(0.0, 8, true);
    let s = Schedule::from_periods(0.9, 0.5, 1.1, &p);
    let a = m.interference_term(&s).unwrap();
    let b = m.interference_term(&Schedule { phi_p: 0.4, phi_d: -1.1, ..s }).unwrap();
    assert!((a * Complex64::from_polar(1.0, -0.4 - 1.1) - b).norm() < 1e-13);
}

#[test]
fn peak_analysis_flat_grid_and_coarse_rates() {
    let (p, m) = model(0.0, 10, false);
    let tau = p.tau_vib();
    let base = Schedule::from_periods(0.0, 0.5, 0.0, &p);
    let axis = linspace(0.0, 2.0 * tau, 32);
    let grid = m.scan(&base, &axis, &axis).unwrap();
    let r = peak_and_fringe_analysis(&grid).unwrap();
    assert!(r.magnitude > 0.0);
    assert!(r.gamma_tp.re < 0.0 && r.gamma_td.re > 0.0);
}

#[test]
fn quantum_peaks_lie_near_the_semiclassical_delays() {
    let circular = |x: f64, y: f64| {
        let d = (x - y).rem_euclid(1.0);
        d.min(1.0 - d)
    };
    for de in [0.0, 7.39] {
        let (p, m) = model(de, 20, true);
        let tau = p.tau_vib();
        let base = Schedule::from_periods(0.0, 0.5, 0.0, &p);
        let axis = linspace(0.0, 2.0 * tau, 48);
        let coarse = peak_and_fringe_analysis(&m.scan(&base, &axis, &axis).unwrap()).unwrap();
        let fine = refine_peak(&m, &base, &coarse, (axis[1] - axis[0], axis[1] - axis[0]), 4).unwrap();
        let fraction = waiting_fraction(&p, 0.5 * tau).unwrap();
        let (tp, td) = semiclassical_match(fraction, 0, 1, &p);
        // |S| repeats with the vibrational period in both delays, so compare modulo τ
        assert!(circular(fine.t_p / tau, tp / tau) <= 0.2, "{de}: {} vs {}", fine.t_p / tau, tp / tau);
        assert!(circular(fine.t_d / tau, td / tau) <= 0.2, "{de}: {} vs {}", fine.t_d / tau, td / tau);
    }
}

#[test]
fn refinement_stays_at_non_negative_delays() {
    let p = DimerParams::default().with_detuning(1.5).with_coupling(0.2);
    let m = InterferometryModel::new(&p, 8, true).unwrap();
    let tau = p.tau_vib();
    let base = Schedule::from_periods(0.0, 0.5, 0.0, &p);
    let tp = linspace(0.0, 0.3 * tau, 9);
    let td = linspace(0.0, 0.3 * tau, 7);
    let grid = m.scan(&base, &tp, &td).unwrap();
    let coarse = peak_and_fringe_analysis(&grid).unwrap();
    let fine = refine_peak(&m, &base, &coarse, (tp[1] - tp[0], td[1] - td[0]), 2).unwrap();
    assert!(fine.t_p >= 0.0 && fine.t_d >= 0.0);
    assert!(fine.magnitude >= coarse.magnitude * (1.0 - 1e-9));
    assert!(fine.gamma_tp.re.is_finite() && fine.gamma_td.re.is_finite());
}

#[test]
fn target_phase_space_endpoints_order_with_detuning() {
    let mut ends = Vec::new();
    for de in [0.0, 3.695, 7.39] {
        let (p, m) = model(de, 20, true);
        let times = linspace(0.0, 0.5 * p.tau_vib(), 41);
        let traj = target_phase_space(&m, &times).unwrap();
        let first = traj.rows[0].clone();
        // zero-time point is the first-order limit at the Franck-Condon point, up to truncation
        assert!(first[0].abs() < 1e-7 && first[2].abs() < 1e-7, "{first:?}");
        let last = traj.rows.last().unwrap().clone();
        ends.push(last[0]);
    }
    assert!(ends[0] < ends[1] && ends[1] < ends[2], "{ends:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn phase_cycling_of_full_model_equals_direct_term(
        tp in 0.0f64..2.0, tw in 0.1f64..1.0, td in 0.0f64..2.0, de in -8.0f64..8.0, j in 0.0f64..0.5
    ) {
        let p = DimerParams::default().with_detuning(de).with_coupling(j);
        let m = InterferometryModel::new(&p, 5, true).unwrap();
        let s = Schedule { strength: 0.2, ..Schedule::from_periods(tp, tw, td, &p) };
        let direct = m.interference_term(&s).unwrap();
        let iso = isolate_from_model(&m, &s).unwrap();
        prop_assert!((direct - iso).norm() < 1e-10);
    }

    #[test]
    fn synthetic_isolation_recovers_planted_coefficient(
        zr in -3.0f64..3.0, zi in -3.0f64..3.0, wr in -3.0f64..3.0, wi in -3.0f64..3.0, c in -10.0f64..10.0
    ) {
        let z = Complex64::new(zr, zi);
        let w = Complex64::new(wr, wi);
        let signal = |pp: f64, pd: f64| {
            c + 2.0 * (z * Complex64::from_polar(1.0, -pp + pd)).re + 2.0 * (w * Complex64::from_polar(1.0, -pp - pd)).re
        };
        let v: Vec<f64> = PHASE_CYCLE.iter().map(|&(a, b)| signal(a, b)).collect();
        prop_assert!((phase_cycle_isolate(v[0], v[1], v[2], v[3]) - z).norm() < 1e-12);
    }
}
