use osm_core::combinatorics::sample_uniform_ordered_partition;
use osm_core::learning::{exact_gradient, exact_log_likelihood, train, CfParams, TrainConfig, UserData};
use osm_core::rng::stream_rng;
use osm_core::OrderedPartition;

fn data(n: usize, count: usize, seed: u64) -> Vec<OrderedPartition> {
    let mut rng = stream_rng(seed, 0);
    let favourite: OrderedPartition = OrderedPartition::singletons(n);
    (0..count)
        .map(|i| if i % 2 == 0 { favourite.clone() } else { sample_uniform_ordered_partition(n, &mut rng) })
        .collect()
}

#[test]
fn exact_gradient_ascent_raises_the_likelihood() {
    let d = data(4, 12, 1);
    let mut p = CfParams::random(4, 1, 0.1, &mut stream_rng(1, 1));
    let mut last = exact_log_likelihood(&p, &d).unwrap();
    for _ in 0..30 {
        let g = exact_gradient(&p, &d).unwrap();
        let step: Vec<f64> = p.to_vec().iter().zip(g.to_vec()).map(|(t, g)| t + 0.05 * g).collect();
        p = p.from_vec(&step).unwrap();
        let ll = exact_log_likelihood(&p, &d).unwrap();
        assert!(ll > last - 1e-12, "{ll} < {last}");
        last = ll;
    }
    assert!(exact_gradient(&p, &d).unwrap().norm() < exact_gradient(&CfParams::zeros(4, 1), &d).unwrap().norm());
}

#[test]
fn stochastic_training_moves_towards_the_data() {
    let d = data(5, 200, 2);
    let users: Vec<UserData> = d.iter().cloned().map(UserData::full).collect();
    let mut cfg = TrainConfig::new(1, 3);
    cfg.learning_rate = 0.02;
    cfg.block_size = 20;
    cfg.epochs = 20;
    let (trained, log) = train(5, users.clone(), cfg.clone()).unwrap();
    let mut untouched = cfg.clone();
    untouched.epochs = 0;
    let (init, empty) = train(5, users.clone(), untouched).unwrap();
    assert!(empty.blocks.is_empty());
    assert_eq!(log.blocks.len(), 20 * 10);
    let before = exact_log_likelihood(&init, &d).unwrap();
    let after = exact_log_likelihood(&trained, &d).unwrap();
    assert!(after > before + 0.5, "{before} -> {after}");

    let (again, _) = train(5, users, cfg).unwrap();
    assert_eq!(again, trained);
}
