use tailfit::report::{estimates_to_string, variance_to_string, EstimateRecord, Format};
use tailfit::simulate::pareto_fixture;
use tailfit::{
    asymptotic_variance, estimate_tail, hill_left, hill_right, ParzenModel, SampleData, Tail, WeightFn, WlsConfig,
};

fn default_config(p: usize, w: &str) -> WlsConfig {
    WlsConfig::left_default(700, p, WeightFn::parse(w).unwrap()).unwrap()
}

#[test]
fn single_replication_lands_near_truth() {
    let model = ParzenModel::power_law(2.0).unwrap().anchored_to_left_power_law().unwrap();
    for seed in 0..5 {
        let sample = model.sample(700, seed).unwrap();
        let fit = estimate_tail(&sample, &default_config(1, "u/300"), 700, 0.001).unwrap();
        assert!((1.5..=2.6).contains(&fit.nu_hat), "seed {seed}: {}", fit.nu_hat);
        assert_eq!(fit.grid.len(), 280);
        let hill = hill_left(&sample, 100).unwrap();
        assert!((hill.nu_hat - 2.0).abs() < 0.4);
    }
}

#[test]
fn location_shift_leaves_fit_unchanged() {
    let sample = ParzenModel::power_law(1.5).unwrap().sample(700, 3).unwrap();
    let cfg = default_config(2, "u/300");
    let base = estimate_tail(&sample, &cfg, 700, 0.001).unwrap();
    let moved = estimate_tail(&sample.shifted(0.5), &cfg, 700, 0.001).unwrap();
    assert!((base.nu_hat - moved.nu_hat).abs() < 1e-9);
    let scaled = estimate_tail(&sample.scaled(8.0), &cfg, 700, 0.001).unwrap();
    assert!((base.nu_hat - scaled.nu_hat).abs() < 1e-9);
    assert!((base.theta_hat[0] - 8f64.ln() - scaled.theta_hat[0]).abs() < 1e-9);
    assert!((base.theta_hat[1] - scaled.theta_hat[1]).abs() < 1e-9);
}

#[test]
fn right_tail_of_mirrored_sample() {
    let sample = ParzenModel::power_law(1.8).unwrap().sample(700, 12).unwrap();
    let left = estimate_tail(&sample, &default_config(1, "1"), 700, 0.001).unwrap();
    let right_cfg = WlsConfig::new(0.001, 0.4, 1, WeightFn::unit(), Tail::Right, 700).unwrap();
    let right = estimate_tail(&sample.negated(), &right_cfg, 700, 0.001).unwrap();
    assert!((left.nu_hat - right.nu_hat).abs() < 0.05, "{} vs {}", left.nu_hat, right.nu_hat);
}

#[test]
fn pareto_fixture_feeds_hill() {
    let s = pareto_fixture(0.5, 20_000, 4).unwrap();
    let est = hill_right(&s, 400).unwrap();
    assert!((est.alpha_hat - 0.5).abs() < 0.1);
    let neg = SampleData::new(s.values().iter().map(|x| -x).collect()).unwrap();
    assert_eq!(hill_left(&neg, 400).unwrap().alpha_hat, est.alpha_hat);
}

#[test]
fn records_render() {
    let sample = ParzenModel::power_law(2.0).unwrap().sample(700, 1).unwrap();
    let fit = estimate_tail(&sample, &default_config(1, "1"), 700, 0.001).unwrap();
    let recs = vec![
        EstimateRecord::from_fit("wls", &fit),
        EstimateRecord::from_classical(&hill_left(&sample, 100).unwrap()),
    ];
    let csv = estimates_to_string(&recs, Format::Csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("estimator,nu_hat,alpha_hat,theta_hat,condition_number"));
    assert!(lines.next().unwrap().starts_with("wls,"));
    assert!(lines.next().unwrap().starts_with("hill_left,"));
    let json: serde_json::Value = serde_json::from_str(&estimates_to_string(&recs, Format::Json).unwrap()).unwrap();
    assert_eq!(json[0]["theta_hat"].as_array().unwrap().len(), 2);
    assert!(json[1]["condition_number"].is_null());
}

#[test]
fn variance_anchor_values() {
    let model = ParzenModel::left_only(1.2, vec![0.0, 1.0]).unwrap();
    let rep = asymptotic_variance(&model, 0.1, 0.4, &WeightFn::unit(), 1).unwrap();
    assert!((rep.variance - 822.13).abs() / 822.13 < 5e-3, "{}", rep.variance);
    let csv = variance_to_string(&rep, Format::Csv).unwrap();
    assert!(csv.starts_with("V,cond_M,quad_tol\r\n822.1"), "{csv}");
    let rep = asymptotic_variance(&model, 0.1, 0.4, &WeightFn::parse("1/u").unwrap(), 1).unwrap();
    assert!((rep.variance - 851.364).abs() / 851.364 < 5e-3, "{}", rep.variance);
}
