use lnc_core::code::{
    direct_sum_scalar, is_solution, is_solution_scalar, lift_scalar, propagate, propagate_scalar, random_relay_code,
    simulate_decode, CodeAssignment,
};
use lnc_core::network::{compose_algorithm1, gen_combination, gen_n_omega_d, gen_swirl, Network};
use lnc_core::solvability::{
    brute_force_scalar, brute_force_scalar_general, lemma1_check, lemma1_to_code, random_field_lemma1_tuple,
    theorem1_scalar, Witness,
};
use lnc_core::{Budget, Field, MatF};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn swirl_shape() {
    let b = Budget::default();
    for omega in 3..=6 {
        let net = gen_swirl(omega, &b).unwrap();
        assert_eq!(net.omega(), omega);
        // receivers are the ω-subsets of the 2ω grey nodes with full flow;
        // one grey node from every layer always qualifies
        let all: usize = (0..omega).map(|i| 2 * omega - i).product::<usize>() / (1..=omega).product::<usize>();
        assert!(net.receivers().len() >= 1 << omega && net.receivers().len() <= all);
        assert!(net.deficient_receivers().is_empty());
    }
}

#[test]
fn combination_max_flow() {
    let net = gen_combination(5).unwrap();
    for &t in net.receivers() {
        assert_eq!(net.maxflow_to_edges(net.in_edges(t)).unwrap(), 2);
    }
    // one middle edge alone carries one unit
    let m = net.out_edges(1)[0];
    assert_eq!(net.maxflow_to_edges(&[m]).unwrap(), 1);
}

#[test]
fn json_round_trip() {
    let b = Budget::default();
    let net = gen_n_omega_d(3, &[2, 3, 2], &b).unwrap();
    let text = serde_json::to_string(&net).unwrap();
    let back: Network = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
    let Some(Witness::Code { code }) = brute_force_scalar(&net, 7, &b).unwrap().witness else {
        panic!("GF(7) solves N_3,(2,3,2)")
    };
    let lifted = lift_scalar(&code).unwrap();
    let text = serde_json::to_string(&lifted).unwrap();
    let back: CodeAssignment = serde_json::from_str(&text).unwrap();
    assert_eq!(back, lifted);
}

#[test]
fn composed_network_keeps_receivers_decodable() {
    let b = Budget::default();
    let swirl = gen_swirl(3, &b).unwrap();
    let composite = compose_algorithm1(&swirl, 3).unwrap();
    assert!(composite.deficient_receivers().is_empty());
    assert!(composite.receivers().len() > swirl.receivers().len());
}

/// The general search over all network codes agrees with the closed form
/// on the instances it can finish quickly.
#[test]
fn network_search_matches_formula() {
    let b = Budget::default();
    let cases: &[(&[usize], &[u64])] = &[
        (&[2, 2, 2], &[2, 3, 4, 5, 7]),
        (&[2, 2, 3], &[2, 3, 4, 5, 7]),
        (&[2, 3, 3], &[2, 3, 4, 5]),
        (&[3, 3, 3], &[2, 3, 4]),
    ];
    for (d, qs) in cases {
        let net = gen_n_omega_d(3, d, &b).unwrap();
        for &q in *qs {
            let general = brute_force_scalar_general(&net, q, &b).unwrap();
            assert_eq!(general.solvable, theorem1_scalar(3, d, q).unwrap().solvable, "{d:?} q={q}");
            if let Some(Witness::Code { code }) = general.witness {
                assert!(is_solution_scalar(&net, &code).unwrap().is_solution);
            }
        }
    }
}

#[test]
fn lemma_tuples_at_network_level_with_uneven_degrees() {
    let b = Budget::default();
    let d = [2, 3, 2];
    let net = gen_n_omega_d(3, &d, &b).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut seen = [0; 2];
    for i in 0..60 {
        let (l, p) = [(1, 7), (2, 3), (3, 2)][i % 3];
        let t = random_field_lemma1_tuple(&d, l, p, &mut rng).unwrap();
        let check = lemma1_check(&t, &b).unwrap().holds;
        let code = lemma1_to_code(&t, &net).unwrap();
        assert_eq!(check, is_solution(&net, &code).unwrap().is_solution);
        seen[check as usize] += 1;
    }
    assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Φ-lifting commutes with propagation and preserves solution status.
    #[test]
    fn lifting_commutes_with_propagation(seed in 0u64..10_000, k in 1u32..=3) {
        let net = gen_combination(4).unwrap();
        let f = Field::gf(2, k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = random_relay_code(&net, f.clone(), &mut rng);
        let lifted = lift_scalar(&code).unwrap();
        let gs = propagate_scalar(&net, &code).unwrap();
        let gv = propagate(&net, &lifted).unwrap();
        for (e, col) in gs.iter().enumerate() {
            let blocks: Vec<MatF> = col.iter().map(|&v| f.phi(v)).collect();
            let refs: Vec<&MatF> = blocks.iter().collect();
            prop_assert_eq!(&MatF::vstack(&refs).unwrap(), &gv.kernels[e]);
        }
        prop_assert_eq!(
            is_solution_scalar(&net, &code).unwrap().is_solution,
            is_solution(&net, &lifted).unwrap().is_solution
        );
    }

    /// A direct sum solves iff every summand does.
    #[test]
    fn direct_sum_status(seed in 0u64..10_000) {
        let net = gen_combination(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_relay_code(&net, Field::gf(2, 2).unwrap(), &mut rng);
        let c = random_relay_code(&net, Field::gf(2, 3).unwrap(), &mut rng);
        let both = is_solution_scalar(&net, &a).unwrap().is_solution && is_solution_scalar(&net, &c).unwrap().is_solution;
        let sum = direct_sum_scalar(&net, &[a, c]).unwrap();
        prop_assert_eq!(sum.dim(), 5);
        let solves = is_solution(&net, &sum).unwrap().is_solution;
        prop_assert_eq!(solves, both);
        if solves {
            prop_assert!(simulate_decode(&net, &sum, 3, seed).unwrap().passed);
        }
    }
}
