use gibbsbox_demo::{fit_strauss_json, phase_pair_json, simulate_json};
use serde_json::Value;

#[test]
fn simulate_returns_pattern_and_drawing() {
    let v: Value = serde_json::from_str(&simulate_json("strauss", 1.0, 1.0, 0.5, 10.0, 50, 3).unwrap()).unwrap();
    let n = v["count"].as_u64().unwrap() as usize;
    assert!(n > 0);
    assert_eq!(v["csv"].as_str().unwrap().lines().count(), n + 1);
    assert_eq!(v["svg"].as_str().unwrap().matches("<circle").count(), n);
    assert_eq!(simulate_json("strauss", 1.0, 1.0, 0.5, 10.0, 50, 3).unwrap(), v.to_string());
}

#[test]
fn bad_inputs_are_reported() {
    assert!(simulate_json("voronoi", 1.0, 1.0, 0.5, 10.0, 50, 3).unwrap_err().contains("voronoi"));
    assert!(simulate_json("strauss", 1.0, 1.0, 0.5, 500.0, 50, 3).is_err());
    assert!(simulate_json("strauss", 1.0, 1.0, 0.5, 10.0, 0, 3).is_err());
    assert!(fit_strauss_json("x,y\n1,oops\n", 10.0, 0.5).unwrap_err().contains("line 2"));
}

#[test]
fn phase_pair_reports_both_arms() {
    let v: Value = serde_json::from_str(&phase_pair_json(0.5, 8.0, 20, 1).unwrap()).unwrap();
    for arm in ["p", "q"] {
        assert!(v[arm]["intensity"].as_f64().unwrap() >= 0.0);
        assert!(v[arm]["svg"].as_str().unwrap().starts_with("<svg"));
    }
}

#[test]
fn fit_round_trips_a_simulated_pattern() {
    let sim: Value = serde_json::from_str(&simulate_json("strauss", 2.0, 0.8, 0.5, 20.0, 200, 4).unwrap()).unwrap();
    let v: Value = serde_json::from_str(&fit_strauss_json(sim["csv"].as_str().unwrap(), 20.0, 0.5).unwrap()).unwrap();
    assert_eq!(v["points"], sim["count"]);
    let beta = v["mple"]["beta_hat"].as_f64().unwrap();
    assert!((beta - 0.8).abs() < 0.5, "{v}");
}
