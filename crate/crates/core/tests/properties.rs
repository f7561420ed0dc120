use num_complex::Complex64;
use proptest::prelude::*;
use qforage::actor::{greedy_index, log_policy, policy};
use qforage::critic::{critic_density, measure_classes, q_value, wrap_phase, ComplexEmbeddingTable};
use qforage::env::{gen_corpus, parse_corpus, write_corpus, GenSpec, ScentStats};
use qforage::qcore::{born_probability, build_density, tensor_product, Matrix, StateVector};
use qforage::qrep::{cp_reconstruct, embed_ids, materialize_local, product_pool, project, AmplitudeTable, GlobalRepresentation};
use qforage::trainer::TrainConfig;
use qforage::Label;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit(v: Vec<f64>) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-3).then(|| v.into_iter().map(|x| x / n).collect())
}

proptest! {
    #[test]
    fn policy_is_a_shift_invariant_distribution(
        scores in prop::collection::vec(-50.0f64..50.0, 1..8),
        tau in 1e-3f64..1e3,
        shift in -100.0f64..100.0,
    ) {
        let p = policy(&scores, tau).unwrap();
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
        let q = policy(&shifted, tau).unwrap();
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let logp = log_policy(&scores, tau).unwrap();
        prop_assert!(logp.iter().all(|&l| l <= 0.0));
        let best = greedy_index(&scores).unwrap();
        prop_assert!(p.iter().all(|&x| x <= p[best] + 1e-15));
    }

    #[test]
    fn tensor_products_of_unit_vectors_are_unit(
        a in prop::collection::vec(-1.0f64..1.0, 1..4),
        b in prop::collection::vec(-1.0f64..1.0, 1..4),
    ) {
        let (Some(a), Some(b)) = (unit(a), unit(b)) else { return Ok(()) };
        let ab = tensor_product(&[StateVector::normalized(a.clone()).unwrap(), StateVector::normalized(b.clone()).unwrap()]).unwrap();
        prop_assert!((ab.norm() - 1.0).abs() < 1e-12);
        prop_assert_eq!(ab.dim(), a.len() * b.len());
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                prop_assert_eq!(ab.entries()[i * b.len() + j], x * y);
            }
        }
    }

    #[test]
    fn factored_projection_matches_dense(seed in any::<u64>(), n in 1usize..4, k in 1usize..4, r in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table = AmplitudeTable::random(5, k, &mut rng);
        let g = GlobalRepresentation::random(r, n, k, 1.0, &mut rng);
        let q = embed_ids(&[2, 3, 4][..n.min(3)], &table, n).unwrap();
        let dense = cp_reconstruct(&g).unwrap().inner(&materialize_local(&q).unwrap()).unwrap();
        prop_assert!((project(&g, &q).unwrap() - dense).abs() < 1e-10);
        prop_assert_eq!(product_pool(&g, &q).unwrap().len(), r);
    }

    #[test]
    fn critic_measurements_are_distributions(
        seed in any::<u64>(),
        blocks in 1usize..5,
        state in prop::collection::vec(0usize..8, 1..5),
        action in prop::collection::vec(0usize..8, 1..5),
        salience in prop::collection::vec(-5.0f64..5.0, 8),
    ) {
        let d = 3 * blocks;
        let base = ComplexEmbeddingTable::random(8, d, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let table = ComplexEmbeddingTable::from_parts(d, base.amplitudes().to_vec(), base.phases().to_vec(), salience).unwrap();
        let rho = critic_density(&state, &action, &table).unwrap();
        prop_assert!(rho.validate().is_ok());
        let m = measure_classes(&rho).unwrap();
        prop_assert!(m.probabilities.iter().all(|&p| p >= 0.0));
        prop_assert!((m.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let q = q_value(&m);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&q));
        prop_assert_eq!(q, m.probability(Label::Match) - m.probability(Label::Mismatch));
    }

    #[test]
    fn born_probabilities_of_mixtures_lie_in_unit_interval(
        weights in prop::collection::vec(0.01f64..1.0, 1..4),
        seed in any::<u64>(),
        lo in 0usize..4,
    ) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total: f64 = weights.iter().sum();
        let beta: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let states: Vec<StateVector<Complex64>> = beta
            .iter()
            .map(|_| {
                let v = (0..4).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
                StateVector::from_unnormalized(v).unwrap()
            })
            .collect();
        let rho = build_density(&beta, &states).unwrap();
        let p = born_probability(&Matrix::<f64>::coordinate_projector(4, lo..4), &rho).unwrap();
        let complement = born_probability(&Matrix::<f64>::coordinate_projector(4, 0..lo), &rho).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
        prop_assert!((p + complement - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrapped_phases_are_equivalent_and_in_range(p in -1e3f64..1e3) {
        let w = wrap_phase(p);
        prop_assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&w));
        let z = Complex64::from_polar(1.0, p) - Complex64::from_polar(1.0, w);
        prop_assert!(z.norm() < 1e-9);
    }

    #[test]
    fn scent_scalar_is_bounded_and_counts_add_up(trace in prop::collection::vec(-1i8..=1, 0..40), lambda in 0.01f64..=1.0) {
        let stats = ScentStats::from_rewards(trace.iter().map(|&r| ("p", r)), lambda);
        prop_assert!(stats.scalar().abs() <= 1.0 + 1e-12);
        prop_assert_eq!(stats.overall.total(), trace.len());
        let d = stats.distribution();
        if trace.is_empty() {
            prop_assert_eq!(d, [0.0; 3]);
        } else {
            prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn generated_corpora_round_trip(seed in any::<u64>(), docs in 2usize..20, candidates in 2usize..6, noise in 0.0f64..0.5) {
        let spec = GenSpec { docs, candidates, noise, ..GenSpec::default() };
        let corpus = gen_corpus(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(corpus.len(), docs);
        prop_assert!(corpus.documents().iter().all(|d| d.has_positive() && d.candidates.len() == candidates));
        let back = parse_corpus(&write_corpus(&corpus, &[("seed".into(), seed.to_string())])).unwrap();
        prop_assert_eq!(back, corpus);
    }

    #[test]
    fn config_echo_round_trips(lr in 0.0f64..1.0, tau in 1e-3f64..10.0, seed in any::<u64>(), episodes in 1usize..10_000) {
        let cfg = TrainConfig { lr_actor: lr, temperature: tau, seed, episodes, ..TrainConfig::default() };
        let pairs = cfg.to_pairs();
        let back = TrainConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn labels_round_trip_through_rewards(r in -3i64..=3) {
        match Label::from_reward(r) {
            Ok(l) => prop_assert_eq!(i64::from(l.reward()), r),
            Err(_) => prop_assert!(r.abs() > 1),
        }
    }
}
