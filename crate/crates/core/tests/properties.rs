use num_complex::Complex64 as C64;
use proptest::prelude::*;

use inertial::bench::{ExperimentConfig, Preset};
use inertial::inertial::{to_inertial_frame, two_level_h, InertialReport};
use inertial::linops::{eig_hermitian, propagate_lindblad, ComplexMatrix, DensityMatrix, LindbladGenerator, TimeGrid};
use inertial::pulses::{gate_pair, stirap_pair, PulseShape, ThetaProfile};
use inertial::tomography::{avg_gate_fidelity, kraus_from_chi, qpt_single, simulate_process_with, KrausSet};

fn matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim)
        .prop_map(move |v| ComplexMatrix::from_vec(dim, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()))
}

fn hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(dim).prop_map(|m| m.hermitian_part())
}

/// f(H) through the eigendecomposition.
fn spectral(h: &ComplexMatrix, f: impl Fn(f64) -> C64) -> ComplexMatrix {
    let e = eig_hermitian(h).unwrap();
    let d = ComplexMatrix::from_diag(&e.values.iter().map(|&x| f(x)).collect::<Vec<_>>());
    e.vectors.matmul(&d).matmul(&e.vectors.adjoint())
}

/// Kraus set {A_k S^{-1/2}} plus √0.1·S^{-1/2}, with S = Σ A_k†A_k + 0.1, which is trace preserving.
fn kraus_set(dim: usize) -> impl Strategy<Value = KrausSet> {
    prop::collection::vec(matrix(dim), 1..4).prop_map(move |ops| {
        let mut s = ComplexMatrix::zeros(dim);
        for a in &ops {
            s.axpy(C64::new(1.0, 0.0), &a.adjoint().matmul(a));
        }
        s.axpy(C64::new(0.1, 0.0), &ComplexMatrix::identity(dim));
        let inv_sqrt = spectral(&s, |x| C64::new(x.powf(-0.5), 0.0));
        let mut operators: Vec<ComplexMatrix> = ops.iter().map(|a| a.matmul(&inv_sqrt)).collect();
        operators.push(inv_sqrt.scale_real(0.1f64.sqrt()));
        KrausSet { operators }
    })
}

fn unitary(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    hermitian(dim).prop_map(|h| spectral(&h, |x| C64::new(0.0, 3.0 * x).exp()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn process_round_trip(set in kraus_set(2)) {
        let out = simulate_process_with(1, |rho| Ok(set.apply(rho.matrix()))).unwrap();
        let chi = qpt_single(&out).unwrap();
        prop_assert!(chi.chi.hermiticity_defect() < 1e-10);
        prop_assert!(chi.trace_condition().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-10);
        for i in 0..2 {
            for j in 0..2 {
                let input = ComplexMatrix::unit(2, i, j);
                prop_assert!(chi.apply(&input).max_abs_diff(&set.apply(&input)) < 1e-10);
            }
        }
        let back = kraus_from_chi(&chi).unwrap();
        prop_assert!(back.completeness().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-8);
        let rho = ComplexMatrix::from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]]);
        prop_assert!(back.apply(&rho).max_abs_diff(&set.apply(&rho)) < 1e-8);
    }

    #[test]
    fn fidelity_is_bounded_and_phase_blind(set in kraus_set(2), u in unitary(2), phase in 0.0f64..6.3) {
        let f = avg_gate_fidelity(&set, &u).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f), "{}", f);
        let g = avg_gate_fidelity(&set, &u.scale(C64::from_polar(1.0, phase))).unwrap();
        prop_assert!((f - g).abs() < 1e-12);
        // a unitary channel matches its own target exactly
        let own = avg_gate_fidelity(&KrausSet { operators: vec![u.clone()] }, &u).unwrap();
        prop_assert!((own - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lindblad_keeps_density_matrices(h in hermitian(3), jump in matrix(3), rate in 0.0f64..0.5) {
        let mut gen = LindbladGenerator::new(h).unwrap();
        gen.add_jump(jump.scale_real(rate)).unwrap();
        let grid = TimeGrid::span(2.0, 801).unwrap();
        let traj = propagate_lindblad(&gen, &DensityMatrix::basis(3, 0), &grid).unwrap();
        for r in traj.iter().step_by(100) {
            let m = r.matrix();
            prop_assert!((m.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
            prop_assert!(m.hermiticity_defect() < 1e-12);
            let e = eig_hermitian(&m.hermitian_part()).unwrap();
            prop_assert!(e.values.iter().all(|&x| x > -1e-8));
            prop_assert!(r.purity() <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn pulse_norm_is_omega_max(tf in 1e-8f64..1e-5, omega in 1e6f64..1e9, n in 5usize..300) {
        let grid = TimeGrid::span(tf, n).unwrap();
        let pairs = [
            stirap_pair(&PulseShape::Cubic, omega, &grid).unwrap(),
            stirap_pair(&PulseShape::SinSq, omega, &grid).unwrap(),
            gate_pair(&PulseShape::Quartic, omega, &grid, true).unwrap(),
        ];
        for (a, b) in &pairs {
            for (x, y) in a.samples().iter().zip(b.samples()) {
                prop_assert!(((x.norm_sqr() + y.norm_sqr()).sqrt() / omega - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cubic_theta_is_monotone(tf in 1e-9f64..1e-3) {
        let p = ThetaProfile::Cubic { tf };
        let xs: Vec<f64> = (0..=200).map(|k| p.theta(tf * k as f64 / 200.0)).collect();
        prop_assert!(xs.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    }

    /// Stretching time by `a` while dividing Ω by `a` leaves χ and η_I unchanged.
    #[test]
    fn inertiality_depends_on_area_only(a in 0.1f64..10.0, omega in 1e7f64..1e9) {
        let tf = 1e-7;
        let r1 = report(tf, omega);
        let r2 = report(a * tf, omega / a);
        let chi_max = r1.chi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in r1.chi.iter().zip(&r2.chi) {
            prop_assert!((x - y).abs() <= 1e-9 * chi_max);
        }
        for (x, y) in r1.eta_i.iter().zip(&r2.eta_i) {
            prop_assert!((x - y).abs() <= 1e-6 * r1.max_eta_i.max(1e-300));
        }
    }

    #[test]
    fn frame_hamiltonian_is_hermitian_with_lab_spectrum(omega in 0.5f64..50.0, tf in 0.5f64..5.0) {
        let theta = ThetaProfile::Cubic { tf };
        let grid = TimeGrid::span(tf, 201).unwrap();
        let h: Vec<ComplexMatrix> = grid.times().iter().map(|&t| two_level_h(omega, theta.theta(t))).collect();
        let traj = to_inertial_frame(&h, &grid).unwrap();
        for (m, p) in traj.frame_h.iter().zip(&traj.p) {
            prop_assert!(m.hermiticity_defect() < 1e-12);
            prop_assert!(p.matmul(&p.adjoint()).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
            prop_assert!((m[(0, 0)].re + omega).abs() < 1e-9 * omega.max(1.0));
        }
    }

    #[test]
    fn config_json_round_trip(values in prop::collection::vec(0.0f64..100.0, 1..20), seed in any::<u64>(), steps in 10usize..10_000) {
        let cfg = ExperimentConfig { values, seed, steps, ..ExperimentConfig::preset(Preset::Fig1a) };
        let text = serde_json::to_string(&cfg).unwrap();
        prop_assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }
}

fn report(tf: f64, omega: f64) -> InertialReport {
    let grid = TimeGrid::span(tf, 401).unwrap();
    let (p1, p2) = stirap_pair(&PulseShape::Cubic, omega, &grid).unwrap();
    InertialReport::from_pulses(&p1, &p2).unwrap()
}
