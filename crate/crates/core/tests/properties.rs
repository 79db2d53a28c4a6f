//! Cross-module invariants, several of them driven by proptest over the
//! random instance generators.

use consync::fields::VertexField;
use consync::frustration::{eta, nu, nu_l1};
use consync::generators;
use consync::graph::{read_graph, write_graph};
use consync::laplacian::{build, quadratic_form_l1};
use consync::linalg::{det, haar_orthogonal, sym_eig};
use consync::oracle::{brute_force_d1, ConstantKind};
use consync::rounding::{sync_full_sphere, sync_partial_sphere, sync_orthogonal};

use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn noisy_instance(n: usize, d: usize, seed: u64) -> consync::graph::ConnectionGraph<f64> {
    generators::outlier_noise::<f64>(n, d, 0.7, 0.3, seed).unwrap().graph
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graph_text_round_trips(n in 4usize..10, d in 1usize..4, seed in 0u64..1000) {
        let g = noisy_instance(n, d, seed);
        let round = read_graph::<f64>(&write_graph(&g)).unwrap();
        prop_assert_eq!(&g, &round);
    }

    #[test]
    fn handshake_identity(n in 4usize..10, seed in 0u64..1000) {
        let g = noisy_instance(n, 2, seed);
        let twice_weight: f64 = g.edges().iter().map(|e| e.weight).sum::<f64>() * 2.0;
        prop_assert!((g.volume() - twice_weight).abs() < 1e-12);
    }

    #[test]
    fn valid_transforms_have_unit_determinant(n in 4usize..9, d in 1usize..4, seed in 0u64..1000) {
        let g = noisy_instance(n, d, seed);
        prop_assert!(g.validate().is_empty());
        for e in g.edges() {
            prop_assert!((det(&e.transform).abs() - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn threshold_outputs_are_exhausted_by_breakpoints(
        data in prop::collection::vec(-2.0f64..2.0, 12),
        u in 1e-6f64..5.0,
    ) {
        let x = VertexField::new(6, 2, Array1::from_vec(data)).unwrap();
        let rounded = x.threshold(u);
        let mut breakpoints: Vec<f64> =
            (0..6).map(|i| x.block_norm_sq(i)).filter(|&b| b > 0.0).collect();
        breakpoints.sort_by(f64::total_cmp);
        match breakpoints.iter().find(|&&b| b >= u) {
            Some(&b) => prop_assert_eq!(rounded, x.threshold(b)),
            None => prop_assert!(rounded.is_zero()),
        }
    }

    #[test]
    fn threshold_support_is_monotone(
        data in prop::collection::vec(-2.0f64..2.0, 10),
        u in 1e-6f64..4.0,
        factor in 1.0f64..4.0,
    ) {
        let x = VertexField::new(10, 1, Array1::from_vec(data)).unwrap();
        let small = x.threshold(u).support().len();
        let large = x.threshold(u * factor).support().len();
        prop_assert!(large <= small);
    }

    #[test]
    fn edge_sum_matches_rayleigh_quotient(
        n in 4usize..9,
        seed in 0u64..500,
        field_seed in 0u64..500,
    ) {
        let g = noisy_instance(n, 2, seed);
        let pair = build(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(field_seed);
        let data = Array1::from_iter(
            (0..n * 2).map(|_| <f64 as consync::Scalar>::standard_normal(&mut rng)),
        );
        let x = VertexField::new(n, 2, data).unwrap();
        let direct = quadratic_form_l1(&g, &x).unwrap();
        let mut z = Array1::<f64>::zeros(n * 2);
        for i in 0..n {
            let s = pair.degrees[i].sqrt();
            for r in 0..2 {
                z[i * 2 + r] = x.block(i)[r] * s;
            }
        }
        let via_matrix = z.dot(&pair.l1_normalized.dot(&z));
        let eta_direct = eta(&g, &x).unwrap();
        prop_assert!((direct - via_matrix).abs() <= 1e-9 * direct.abs().max(1.0));
        prop_assert!((eta_direct.numerator - direct).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn potential_frustrations_stay_in_their_diameter(
        n in 4usize..8,
        d in 1usize..4,
        seed in 0u64..500,
    ) {
        let g = noisy_instance(n, d, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mats: Vec<Array2<f64>> = (0..n).map(|_| haar_orthogonal(d, &mut rng)).collect();
        let p = consync::fields::GroupPotential::new(mats).unwrap();
        let v = nu(&g, &p).unwrap();
        let v1 = nu_l1(&g, &p).unwrap();
        prop_assert!((0.0..=2.0 + 1e-12).contains(&v));
        prop_assert!(v1 >= 0.0 && v1 <= 2.0 * (d as f64).sqrt() + 1e-12);
        prop_assert!(v <= v1 + 1e-12);
        prop_assert!(v1 <= (2.0 * v).sqrt() + 1e-9);
    }

    #[test]
    fn normalized_spectra_stay_bounded(n in 4usize..9, d in 1usize..3, seed in 0u64..500) {
        let g = noisy_instance(n, d, seed);
        let pair = build(&g).unwrap();
        for matrix in [&pair.l0_normalized, &pair.l1_normalized] {
            let res = sym_eig(matrix, matrix.nrows()).unwrap();
            for &lambda in res.values.iter() {
                prop_assert!((-1e-9..=2.0 + 1e-9).contains(&lambda));
            }
        }
    }
}

#[test]
fn algorithms_never_beat_the_exact_oracle() {
    for seed in 0..12u64 {
        let g = generators::outlier_noise::<f64>(7, 1, 0.8, 0.3, seed).unwrap().graph;
        let partial = sync_partial_sphere(&g).unwrap().achieved;
        let partial_oracle = brute_force_d1(&g, ConstantKind::EtaStarG).unwrap().value;
        assert!(partial >= partial_oracle - 1e-9);

        let full = sync_full_sphere(&g).unwrap().achieved;
        let full_oracle = brute_force_d1(&g, ConstantKind::EtaG).unwrap().value;
        assert!(full >= full_oracle - 1e-9);

        let od = sync_orthogonal(&g).unwrap().achieved;
        let nu_oracle = brute_force_d1(&g, ConstantKind::NuG).unwrap().value;
        assert!(od >= nu_oracle - 1e-9);
    }
}

#[test]
fn normalize_nonzero_is_idempotent_on_generated_fields() {
    let instance = generators::ring::<f64>(12, 2).unwrap();
    let x = instance.field.unwrap();
    let once = x.normalize_nonzero();
    assert_eq!(once.normalize_nonzero(), once);
}
