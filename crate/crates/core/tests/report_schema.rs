//! Experiment reports against the documented JSON and CSV schemas.

use beepsim::experiments::{
    preset_lower_bound_separation, run_experiment, ExperimentConfig, CSV_HEADER,
};
use serde_json::Value;

fn small_report() -> beepsim::experiments::ExperimentReport {
    let cfg = ExperimentConfig {
        trials: 4,
        sweep: vec![3, 4],
        seed: 11,
        ..preset_lower_bound_separation()
    };
    run_experiment(&cfg).unwrap()
}

fn require(obj: &Value, key: &str, check: fn(&Value) -> bool) {
    let v = obj
        .get(key)
        .unwrap_or_else(|| panic!("missing key {key:?} in {obj}"));
    assert!(check(v), "key {key:?} has unexpected type: {v}");
}

#[test]
fn json_report_matches_schema() {
    let report = small_report();
    let json: Value = serde_json::from_str(&report.to_json()).unwrap();
    require(&json, "schema_version", |v| v.as_u64() == Some(1));
    require(&json, "total_runs", Value::is_u64);
    require(&json, "config", Value::is_object);
    let cfg = &json["config"];
    for key in [
        "name",
        "family",
        "sweep",
        "algorithms",
        "trials",
        "seed",
        "max_rounds",
    ] {
        assert!(cfg.get(key).is_some(), "config.{key}");
    }
    require(&json, "series", Value::is_array);
    for series in json["series"].as_array().unwrap() {
        require(series, "algorithm", Value::is_string);
        require(series, "config", Value::is_object);
        require(series, "fit_log", Value::is_object);
        require(series, "fit_log_squared", Value::is_object);
        for fit in [&series["fit_log"], &series["fit_log_squared"]] {
            for key in ["slope", "intercept", "residual"] {
                require(fit, key, Value::is_f64);
            }
        }
        for point in series["points"].as_array().unwrap() {
            require(point, "family", Value::is_string);
            for key in ["param", "n", "trials", "terminated"] {
                require(point, key, Value::is_u64);
            }
            for key in [
                "censored_fraction",
                "max_degree_mean",
                "mean_rounds",
                "sd_rounds",
                "mean_beeps",
                "stderr_beeps",
            ] {
                require(point, key, |v| v.is_f64() || v.is_null());
            }
            for key in ["min_rounds", "max_rounds", "max_node_beeps"] {
                require(point, key, |v| v.is_u64() || v.is_null());
            }
        }
    }
}

#[test]
fn csv_report_matches_schema() {
    let report = small_report();
    let csv = report.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 8, "{row}");
        assert!(["mis-feedback", "mis-global"].contains(&cols[0]));
        assert_eq!(cols[1], "cliques");
        for c in &cols[2..4] {
            c.parse::<usize>().unwrap();
        }
        for c in &cols[4..8] {
            c.parse::<f64>().unwrap();
        }
    }
}
