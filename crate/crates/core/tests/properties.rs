use jumplab::birkhoff::{det_winding, splitting_type, LaurentLoop, WINDING_SIGN};
use jumplab::cascade::{gf2_rank, q_multinomial};
use jumplab::flow::{extract_weights, FlowMetric};
use jumplab::linalg::{op_norm, random_skew, random_unitary, unitary_defect};
use jumplab::liegroup::{exp_skew, group_log, GroupSpec};
use jumplab::loopspace::{energy_gradient, geodesic_loop, loop_energy, LoopTangent, WeightVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn weights(max_rank: usize, max_abs: i64) -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(-max_abs..=max_abs, 1..=max_rank).prop_map(WeightVector::new)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weight_display_parses_back(d in weights(4, 9)) {
        let back: WeightVector = d.to_string().parse().unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn weights_are_sorted_descending(d in weights(5, 5)) {
        prop_assert!(d.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn geodesic_energy_is_sum_of_squares(d in weights(4, 3), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_unitary(d.rank(), &mut rng);
        let gamma = geodesic_loop(&d, &q, 64, d.sum() == 0).unwrap();
        let e = loop_energy(&gamma).unwrap();
        prop_assert!((e - d.energy() as f64).abs() <= 1e-9 * (1.0 + d.energy() as f64));
    }

    #[test]
    fn geodesics_are_critical_and_snap_back(d in weights(3, 3), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_unitary(d.rank(), &mut rng);
        let gamma = geodesic_loop(&d, &q, 64, d.sum() == 0).unwrap();
        let spec = gamma.spec;
        prop_assert!(energy_gradient(&gamma).unwrap().norm(&spec) < 1e-8);
        prop_assert_eq!(extract_weights(&gamma, 0.05).unwrap(), d);
    }

    #[test]
    fn energy_is_conjugation_invariant(seed in any::<u64>(), r in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = GroupSpec::unitary(r);
        let base = geodesic_loop(&WeightVector::zero(r), &random_unitary(r, &mut rng), 32, false).unwrap();
        let gamma = base.retract(&LoopTangent::random(&spec, 32, &mut rng).scaled(0.3)).unwrap();
        let q = random_unitary(r, &mut rng);
        let a = loop_energy(&gamma).unwrap();
        let b = loop_energy(&gamma.conjugate(&q)).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
    }

    #[test]
    fn stabilization_keeps_energy(seed in any::<u64>(), k in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = GroupSpec::unitary(2);
        let gamma = geodesic_loop(&WeightVector::new(vec![1, -1]), &random_unitary(2, &mut rng), 32, false)
            .unwrap()
            .retract(&LoopTangent::random(&spec, 32, &mut rng).scaled(0.2))
            .unwrap();
        let a = loop_energy(&gamma).unwrap();
        let b = loop_energy(&gamma.stabilized(k)).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
    }

    #[test]
    fn log_inverts_exp_on_small_skew(seed in any::<u64>(), r in 1usize..=4, scale in 0.0f64..2.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_skew(r, &mut rng) * num_complex::Complex64::new(scale / r as f64, 0.0);
        prop_assume!(op_norm(&x) < 3.0);
        let g = exp_skew(&x);
        prop_assert!(unitary_defect(&g) < 1e-12);
        let y = group_log(&g).unwrap();
        prop_assert!(op_norm(&(y - x)) < 1e-9);
    }

    #[test]
    fn diagonal_laurent_loops_have_their_exponents(d in weights(4, 3)) {
        let gamma = LaurentLoop::diagonal(d.as_slice());
        prop_assert_eq!(splitting_type(&gamma).unwrap(), d.clone());
        prop_assert_eq!(det_winding(&gamma).unwrap(), WINDING_SIGN * d.sum());
    }

    #[test]
    fn q_multinomial_counts_cells(parts in prop::collection::vec(1usize..=3, 1..=3)) {
        let coeffs = q_multinomial(&parts);
        // at q = 1 the Gaussian multinomial is the ordinary one
        let mut total = 1;
        let mut n = 0;
        for &m in &parts {
            n += m;
            total *= binomial(n, m);
        }
        prop_assert_eq!(coeffs.iter().sum::<usize>(), total);
        // palindromic, as a Poincare polynomial of a compact manifold
        let rev: Vec<usize> = coeffs.iter().rev().copied().collect();
        prop_assert_eq!(rev, coeffs);
    }

    #[test]
    fn gf2_rank_is_bounded_and_row_order_free(rows in prop::collection::vec(prop::collection::vec(0u8..=1, 5), 0..6)) {
        let r = gf2_rank(rows.clone());
        prop_assert!(r <= rows.len().min(5));
        let mut rev = rows.clone();
        rev.reverse();
        prop_assert_eq!(gf2_rank(rev), r);
    }
}

#[test]
fn flow_metric_names_parse() {
    assert_eq!("sobolev".parse::<FlowMetric>().unwrap(), FlowMetric::Sobolev);
    assert_eq!("L2".parse::<FlowMetric>().unwrap(), FlowMetric::L2);
    assert_eq!("kahler".parse::<FlowMetric>().unwrap(), FlowMetric::Kahler);
    assert!("riemann".parse::<FlowMetric>().is_err());
}
