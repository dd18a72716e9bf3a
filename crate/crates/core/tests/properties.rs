mod common;

use nalgebra::{Quaternion, UnitQuaternion as NaQuat};
use proptest::prelude::*;

use common::*;
use spectral_tensor::means::karcher_residual;
use spectral_tensor::metrics::{dist_spectral_quaternion_with_k, dist_spectral_rotation_with_k};
use spectral_tensor::quaternion::quat_to_rotation;
use spectral_tensor::*;

fn quat() -> impl Strategy<Value = NaQuat<f64>> {
    prop::array::uniform4(-1.0..1.0f64)
        .prop_filter("away from zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|v| NaQuat::from_quaternion(Quaternion::new(v[0], v[1], v[2], v[3])))
}

/// Log-eigenvalues in [-3, 2], kept apart so eigenvectors are well defined.
fn lambda() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-3.0..2.0f64)
        .prop_map(|l| {
            let mut l = l.map(f64::exp);
            l.sort_by(|a, b| b.total_cmp(a));
            l
        })
        .prop_filter("separated eigenvalues", |l| l[0] / l[1] > 1.01 && l[1] / l[2] > 1.01)
}

fn tensor() -> impl Strategy<Value = DiffusionTensor> {
    (quat(), lambda()).prop_map(|(q, l)| tensor_from(&q, l))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn eigenvalues_match_independent_solver(t in tensor()) {
        let ours = t.eigenvalues();
        let theirs = eigenvalues(&t);
        for i in 0..3 {
            prop_assert!((ours[i] - theirs[i]).abs() <= 1e-12 * theirs[0]);
        }
    }

    #[test]
    fn spectral_round_trip(t in tensor()) {
        let f = spectral_decompose(&t);
        prop_assert!(rel_frobenius(&compose(&f).to_matrix(), &t.to_matrix()) < 1e-10);
        prop_assert!((f.frame().determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decomposed_quaternion_lies_in_the_generating_orbit(q in quat(), l in lambda()) {
        let f = spectral_decompose(&tensor_from(&q, l));
        let c = f.quaternion().components();
        prop_assert!(orbit_chord_sq(c, &common::orbit(&q)) < 1e-16);
    }

    #[test]
    fn rotation_conversion_round_trip(q in quat()) {
        let r = q.to_rotation_matrix().into_inner();
        let ours = rotation_to_quat(&r).unwrap();
        let c = ours.components();
        let dot = c[0] * q.w + c[1] * q.i + c[2] * q.j + c[3] * q.k;
        prop_assert!((dot.abs() - 1.0).abs() < 1e-12);
        prop_assert!((quat_to_rotation(&ours) - r).norm() < 1e-12);
    }

    #[test]
    fn every_orbit_member_encodes_the_same_tensor(q in quat(), l in lambda()) {
        let f = spectral_decompose(&tensor_from(&q, l));
        let base = compose(&f).to_matrix();
        for member in spectral_tensor::orbit(&f.quaternion()).iter() {
            let g = SpectralForm::new(f.eigenvalues(), *member).unwrap();
            prop_assert!(rel_frobenius(&compose(&g).to_matrix(), &base) < 1e-12);
        }
    }

    #[test]
    fn distances_are_symmetric(a in tensor(), b in tensor()) {
        let p = KParams::default();
        for kind in MetricKind::ALL {
            let ab = distance(kind, &a, &b, &p).unwrap();
            let ba = distance(kind, &b, &a, &p).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12, "{kind}: {ab} vs {ba}");
            prop_assert_eq!(distance(kind, &a, &a, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn log_euclidean_matches_oracle(a in tensor(), b in tensor()) {
        let d = dist_log_euclidean(&a, &b);
        let oracle = (log_m(&a.to_matrix()) - log_m(&b.to_matrix())).norm();
        prop_assert!((d - oracle).abs() < 1e-12 * (1.0 + oracle));
    }

    #[test]
    fn affine_invariant_matches_oracle(a in tensor(), b in tensor()) {
        let d = dist_affine_invariant(&a, &b).unwrap();
        let inv_half = pow_m(&a.to_matrix(), -0.5);
        let m = inv_half * b.to_matrix() * inv_half;
        let oracle = log_m(&((m + m.transpose()) * 0.5)).norm();
        prop_assert!((d - oracle).abs() < 1e-9 * (1.0 + oracle));
    }

    #[test]
    fn rotation_frames_agree_with_quaternions_for_close_orientations(
        q in quat(), l1 in lambda(), l2 in lambda(), axis in prop::array::uniform3(-1.0..1.0f64), deg in 0.5..20.0f64,
    ) {
        prop_assume!(axis.iter().map(|x| x * x).sum::<f64>() > 1e-2);
        let tilt = NaQuat::from_axis_angle(&nalgebra::Unit::new_normalize(nalgebra::Vector3::from(axis)), deg.to_radians());
        let a = tensor_from(&q, l1);
        let b = tensor_from(&(tilt * q), l2);
        let sq = dist_spectral_quaternion_with_k(&spectral_decompose(&a), &spectral_decompose(&b), 1.0);
        let sr = dist_spectral_rotation_with_k(&a, &b, 1.0);
        prop_assert!((sq - sr).abs() <= 0.05 * sr, "{sq} vs {sr}");
    }

    #[test]
    fn spectral_mean_is_rotation_equivariant(
        tensors in prop::collection::vec(tensor(), 2..6), q in quat(), seed in any::<u64>(),
    ) {
        let w = simplex(&mut rng(seed), tensors.len());
        let p = KParams::default();
        let r = q.to_rotation_matrix().into_inner();
        let set = WeightedTensorSet::from_tensors(&tensors, &w).unwrap();
        let rotated: Vec<DiffusionTensor> = tensors.iter().map(|t| t.rotated(&r)).collect();
        let rset = WeightedTensorSet::from_tensors(&rotated, &w).unwrap();
        let m = mean_n(&set, &p).to_tensor().rotated(&r);
        let mr = mean_n(&rset, &p).to_tensor();
        prop_assert!(rel_frobenius(&mr.to_matrix(), &m.to_matrix()) < 1e-9);
    }

    #[test]
    fn means_of_identical_tensors(t in tensor(), n in 1usize..5) {
        let set = WeightedTensorSet::from_tensors(&vec![t; n], &vec![1.0 / n as f64; n]).unwrap();
        let m = t.to_matrix();
        prop_assert!(rel_frobenius(&mean_n(&set, &KParams::default()).to_tensor().to_matrix(), &m) < 1e-12);
        prop_assert!(rel_frobenius(&mean_log_euclidean(&set).to_matrix(), &m) < 1e-12);
        prop_assert!(rel_frobenius(&mean_affine_invariant(&set, KarcherOptions::default()).unwrap().to_matrix(), &m) < 1e-12);
    }

    #[test]
    fn karcher_gradient_vanishes(tensors in prop::collection::vec(tensor(), 2..6), seed in any::<u64>()) {
        let w = simplex(&mut rng(seed), tensors.len());
        let set = WeightedTensorSet::from_tensors(&tensors, &w).unwrap();
        let opts = KarcherOptions::default();
        let m = mean_affine_invariant(&set, opts).unwrap();
        prop_assert!(karcher_residual(&set, &m) < 10.0 * opts.tol);
    }

    #[test]
    fn trilinear_weights_partition_unity(x in prop::array::uniform3(0.0..=1.0f64)) {
        let w = trilinear_weights(x).unwrap();
        prop_assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        prop_assert!(w.weights.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn mean_pair_endpoints_are_exact(a in tensor(), b in tensor()) {
        let (fa, fb) = (spectral_decompose(&a), spectral_decompose(&b));
        prop_assert_eq!(mean_pair(&fa, &fb, 1.0, 0.0).unwrap(), fa);
        prop_assert_eq!(mean_pair(&fa, &fb, 0.0, 1.0).unwrap(), fb);
    }
}

#[test]
fn wishart_sample_mean_is_dof_times_scale() {
    let samples = wishart_sample(2024, 10_000, 5, &DiffusionTensor::IDENTITY).unwrap();
    let mut sum = nalgebra::Matrix3::zeros();
    for s in &samples {
        sum += s.to_matrix();
    }
    let mean = sum / samples.len() as f64;
    let target = nalgebra::Matrix3::identity() * 5.0;
    assert!(rel_frobenius(&mean, &target) < 0.05, "{mean}");
}

#[test]
fn out_of_range_weights_are_rejected() {
    assert!(trilinear_weights([1.5, 0.0, 0.0]).is_err());
    let t = vec![spectral_decompose(&DiffusionTensor::IDENTITY); 2];
    assert!(WeightedTensorSet::new(t.clone(), vec![0.7, 0.7]).is_err());
    assert!(WeightedTensorSet::new(t, vec![1.5, -0.5]).is_err());
}
