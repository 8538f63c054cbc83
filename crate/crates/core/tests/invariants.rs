use macrospin::classical::{evolve_classical, ClassicalSpin};
use macrospin::measurement::{
    coarse_from_distribution, coarse_probabilities, luders_reduce, make_partition, two_time_correlation,
    DichotomicObservable, PartitionPolicy,
};
use macrospin::spin::{build_jx, build_jy, build_jz, rotation_x, ComplexOperator, Hamiltonian, SpinLength};
use macrospin::states::{
    coherent_vector, husimi_q, outcome_distribution, rotate_direction, rotated_coherent_angles, CoherentStateParams,
    DensityMatrix,
};
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

fn coherent(two_j: u32, theta: f64, phi: f64) -> DensityMatrix {
    let j = SpinLength::from_two_j(two_j);
    let p = CoherentStateParams::new(j, theta, phi).unwrap();
    DensityMatrix::pure(j, &coherent_vector(&p)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rotation_is_unitary_and_composes(two_j in 1u32..60, a in -7.0f64..7.0, b in -7.0f64..7.0) {
        let j = SpinLength::from_two_j(two_j);
        let ua = rotation_x(j, a);
        prop_assert!(ua.unitarity_defect() < 1e-12);
        let composed = ua.matmul(&rotation_x(j, b));
        prop_assert!(composed.max_abs_diff(&rotation_x(j, a + b)) < 1e-11);
    }

    #[test]
    fn evolution_preserves_trace_and_purity(two_j in 1u32..40, theta in 0.0f64..PI, phi in 0.0f64..TAU, a in -4.0f64..4.0) {
        let rho = coherent(two_j, theta, phi);
        let out = rho.evolve(&rotation_x(rho.spin(), a));
        let p = outcome_distribution(&out);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| x >= -1e-15));
        prop_assert!((out.purity() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn mean_spin_follows_classical_rotation(two_j in 1u32..60, theta in 0.0f64..PI, phi in 0.0f64..TAU, a in -4.0f64..4.0) {
        let rho = coherent(two_j, theta, phi);
        let j = rho.spin();
        let out = rho.evolve(&rotation_x(j, a));
        let mean = [build_jx(j), build_jy(j), build_jz(j)].map(|op| out.expectation(&op).re);
        let dir = evolve_classical(&ClassicalSpin::from_angles(j, theta, phi), a).direction();
        for k in 0..3 {
            prop_assert!((mean[k] - j.j() * dir[k]).abs() < 1e-9);
        }
        let p0 = CoherentStateParams::new(j, theta, phi).unwrap();
        let rotated = rotated_coherent_angles(&p0, a).direction();
        let moved = rotate_direction(p0.direction(), a);
        for k in 0..3 {
            prop_assert!((rotated[k] - dir[k]).abs() < 1e-12);
            prop_assert!((moved[k] - dir[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn q_of_coherent_state_is_bounded_by_peak(two_j in 1u32..80, theta in 0.0f64..PI, phi in 0.0f64..TAU,
                                               t in 0.0f64..PI, p in 0.0f64..TAU) {
        let rho = coherent(two_j, theta, phi);
        let peak = (two_j + 1) as f64 / (4.0 * PI);
        let g = husimi_q(&rho, t, p).unwrap();
        prop_assert!(g >= 0.0 && g <= peak * (1.0 + 1e-12), "g = {g:e}");
    }

    #[test]
    fn partition_covers_every_index_once(two_j in 1u32..200, dm in 1usize..60) {
        let j = SpinLength::from_two_j(two_j);
        let part = make_partition(j, dm.min(j.dim()), PartitionPolicy::Ragged).unwrap();
        let total: usize = part.slots().iter().map(|s| s.size()).sum();
        prop_assert_eq!(total, j.dim());
        for (i, &k) in part.slot_of_index().iter().enumerate() {
            prop_assert!(part.slots()[k].contains_m(j.m_at(i)));
            prop_assert_eq!(part.slot_of_m(j.m_at(i)), Some(k));
        }
        prop_assert!(part.labels().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn coarse_probabilities_conserve(two_j in 1u32..80, dm in 1usize..30, theta in 0.0f64..PI, phi in 0.0f64..TAU) {
        let rho = coherent(two_j, theta, phi);
        let j = rho.spin();
        let part = make_partition(j, dm.min(j.dim()), PartitionPolicy::Ragged).unwrap();
        let p = coarse_probabilities(&rho, &part).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let q = coarse_from_distribution(&outcome_distribution(&rho), &part);
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn luders_branches_recompose(two_j in 1u32..30, theta in 0.0f64..PI, phi in 0.0f64..TAU) {
        let rho = coherent(two_j, theta, phi);
        let obs = DichotomicObservable::parity(rho.spin());
        let mut total = 0.0;
        let mut recomposed = ComplexOperator::zeros(rho.spin().dim());
        for sign in [1i8, -1] {
            if let Ok((w, post)) = luders_reduce(&rho, &obs.projector(sign)) {
                total += w;
                prop_assert!((post.matrix().trace().re - 1.0).abs() < 1e-12);
                *recomposed.as_array_mut() += &post.matrix().as_array().mapv(|z| z * w);
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
        let p = outcome_distribution(&rho);
        for (i, x) in recomposed.diagonal_re().iter().enumerate() {
            prop_assert!((x - p[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn two_time_fields_are_consistent(two_j in 1u32..30, theta in 0.0f64..PI, t1 in 0.0f64..2.0, dt in 0.0f64..2.0) {
        let rho = coherent(two_j, theta, 0.3);
        let j = rho.spin();
        let h = Hamiltonian::precession(j, 1.0);
        let r = two_time_correlation(&rho, &DichotomicObservable::sign_of_m(j), &h, t1, t1 + dt).unwrap();
        prop_assert!((r.p_plus + r.p_minus - 1.0).abs() < 1e-12);
        prop_assert!(r.c.abs() <= 1.0 + 1e-12);
        prop_assert!((r.c - r.correlation_from_fields()).abs() < 1e-15);
    }
}
