use macrospin::measurement::{
    coarse_probabilities, disturbance_metric, luders_reduce, make_partition, PartitionPolicy, SlotPartition,
};
use macrospin::spin::{ComplexOperator, SpinLength};
use macrospin::states::{coherent_vector, mixture_to_density, CoherentMixture, CoherentStateParams, DensityMatrix};

fn centred(j: SpinLength, part: &SlotPartition, slot: usize) -> (Vec<macrospin::C64>, DensityMatrix) {
    let theta = (part.slots()[slot].label / j.j()).clamp(-1.0, 1.0).acos();
    let psi = coherent_vector(&CoherentStateParams::new(j, theta, 0.0).unwrap());
    let rho = DensityMatrix::pure(j, &psi).unwrap();
    (psi, rho)
}

fn slot_projector(j: SpinLength, part: &SlotPartition, slot: usize) -> ComplexOperator {
    let mask: Vec<f64> =
        part.slot_of_index().iter().map(|&k| if k == slot { 1.0 } else { 0.0 }).collect();
    assert_eq!(mask.len(), j.dim());
    ComplexOperator::from_real_diagonal(&mask)
}

#[test]
fn state_deep_inside_a_slot_is_barely_disturbed() {
    let j = SpinLength::from_two_j(400);
    let part = make_partition(j, 45, PartitionPolicy::Ragged).unwrap();
    let (psi, rho) = centred(j, &part, 0);
    let (w, post) = luders_reduce(&rho, &slot_projector(j, &part, 0)).unwrap();
    assert!(w > 1.0 - 1e-6);
    assert!(post.expectation_in(&psi) >= 1.0 - 1e-6);
}

#[test]
fn equatorial_modal_slot_disturbance() {
    let j = SpinLength::from_two_j(400);
    let part = make_partition(j, 45, PartitionPolicy::Ragged).unwrap();
    let slot = part.slot_of_m(0.0).unwrap();
    let (_, rho) = centred(j, &part, slot);
    let p = coarse_probabilities(&rho, &part).unwrap();
    let modal = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
    assert_eq!(modal, slot);
    let d = disturbance_metric(&rho, &part).unwrap().per_slot[modal].unwrap();
    assert!(d <= 5.0 * j.j().sqrt() / 45.0);
    assert!((d - 0.113059437).abs() < 1e-6, "{d}");
}

#[test]
fn mixture_slots_obey_the_width_bound() {
    let j = SpinLength::from_two_j(400);
    let comps = [(0.5, 0.4, 0.0), (0.3, 1.6, 2.0), (0.2, 2.7, 4.0)]
        .map(|(w, t, p)| (w, CoherentStateParams::new(j, t, p).unwrap()))
        .to_vec();
    let rho = mixture_to_density(&CoherentMixture::new(comps).unwrap());
    for dm in [43usize, 60, 90, 133] {
        let part = make_partition(j, dm, PartitionPolicy::Ragged).unwrap();
        let p = coarse_probabilities(&rho, &part).unwrap();
        let d = disturbance_metric(&rho, &part).unwrap();
        let bound = 5.0 * j.j().sqrt() / dm as f64;
        for (k, dk) in d.per_slot.iter().enumerate() {
            if p[k] >= 0.05 {
                assert!(dk.unwrap() <= bound, "dm={dm} slot {k}: {dk:?} > {bound}");
            }
        }
    }
}
