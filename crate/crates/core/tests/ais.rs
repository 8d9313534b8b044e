use osm_core::combinatorics::fubini;
use osm_core::partition_fn::{ais_log_z, exact_log_z, exact_log_z_latent, AisConfig, Schedule};
use osm_core::rng::stream_rng;
use osm_core::{LatentModel, PairModel};

#[test]
fn two_temperature_anneal_of_the_uniform_model_is_exact() {
    for n in 1..=7 {
        let r = ais_log_z(&PairModel::uniform(n), &AisConfig::new(2, 5, 1)).unwrap();
        assert_eq!(r.log_z_estimate, fubini(n).ln());
        assert_eq!(r.effective_sample_size, 5.0);
    }
    let m = LatentModel::new(PairModel::uniform(4), vec![PairModel::uniform(4); 2]).unwrap();
    let r = ais_log_z(&m, &AisConfig::new(2, 3, 1)).unwrap();
    assert!((r.log_z_estimate - (fubini(4).ln() + 2.0 * std::f64::consts::LN_2)).abs() < 1e-12);
}

#[test]
fn estimates_track_enumeration() {
    let m = PairModel::random_loglinear(5, 1.0, &mut stream_rng(20, 0));
    let exact = exact_log_z(&m).unwrap();
    for schedule in [Schedule::Linear, Schedule::Geometric] {
        let mut cfg = AisConfig::new(2000, 30, 3);
        cfg.schedule = schedule;
        let r = ais_log_z(&m, &cfg).unwrap();
        assert!((r.log_z_estimate - exact).abs() < 0.05, "{schedule:?}: {} vs {exact}", r.log_z_estimate);
        assert!(r.effective_sample_size > 0.0 && r.effective_sample_size <= 30.0);
    }

    let mut rng = stream_rng(21, 0);
    let base = PairModel::random_loglinear(4, 1.0, &mut rng);
    let hidden = vec![PairModel::random_loglinear(4, 1.0, &mut rng)];
    let m = LatentModel::new(base, hidden).unwrap();
    let r = ais_log_z(&m, &AisConfig::new(2000, 30, 4)).unwrap();
    assert!((r.log_z_estimate - exact_log_z_latent(&m).unwrap()).abs() < 0.05);
}

#[test]
fn runs_are_reproducible_per_seed() {
    let m = PairModel::random_loglinear(4, 1.0, &mut stream_rng(22, 0));
    let a = ais_log_z(&m, &AisConfig::new(100, 8, 5)).unwrap();
    let b = ais_log_z(&m, &AisConfig::new(100, 8, 5)).unwrap();
    let c = ais_log_z(&m, &AisConfig::new(100, 8, 6)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.log_weights, c.log_weights);
}
