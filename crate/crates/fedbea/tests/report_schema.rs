//! Golden test on the verification report's field names: downstream
//! consumers parse this JSON, so the schema stays frozen.

use fedbea::cli::{verification_report, ModelKind, RunConfig, TaskKind};
use fedbea::fedcore::AlgorithmVariant;

fn keys(value: &serde_json::Value) -> Vec<String> {
    let mut out: Vec<String> = value
        .as_object()
        .expect("expected a JSON object")
        .keys()
        .cloned()
        .collect();
    out.sort();
    out
}

#[test]
fn verification_report_schema_is_stable() {
    let config = RunConfig {
        algorithm: AlgorithmVariant::FedAvg,
        task: TaskKind::Quadratic,
        m: 3,
        a: 1,
        k: 2,
        eta: 1e-3,
        rounds: 1,
        batch_size: 1,
        participation: 1.0,
        alpha: 0.2,
        heterogeneity: 2.0,
        seed: 7,
        eps_policy: None,
        metric_cadence: 1,
        eval_threshold: None,
        dimension: 4,
        classes: 2,
        features: 2,
        examples: 100,
        separation: 6.0,
        hidden: 4,
        csv_path: None,
        model: ModelKind::SoftmaxLinear,
    };
    let report = verification_report(&config).unwrap();
    let json = serde_json::to_value(&report).unwrap();

    assert_eq!(
        keys(&json),
        vec![
            "artifact_version",
            "coefficient_identities",
            "exactness",
            "residual_fits",
            "second_order_terms",
            "status",
            "suite",
            "tolerances",
            "xi_zero_mean",
        ]
    );
    assert_eq!(
        keys(&json["suite"]),
        vec!["clients", "dimension", "heterogeneity", "seed"]
    );
    assert_eq!(
        keys(&json["tolerances"]),
        vec!["exactness", "exponent_window", "xi_zero_mean"]
    );
    assert_eq!(
        keys(&json["exactness"]),
        vec!["e_steps", "eta", "gap_inf_norm", "status"]
    );
    let fits = json["residual_fits"].as_array().unwrap();
    assert_eq!(fits.len(), 2);
    assert_eq!(
        keys(&fits[0]),
        vec!["algorithm", "e_steps", "fit", "points", "status"]
    );
    assert_eq!(keys(&fits[0]["points"][0]), vec!["eta", "gap_norm"]);
    let xi = json["xi_zero_mean"].as_array().unwrap();
    assert_eq!(xi.len(), 3);
    assert_eq!(keys(&xi[0]), vec!["e_steps", "inf_norm", "status"]);
    assert_eq!(
        keys(&json["coefficient_identities"]),
        vec![
            "fedsam_dispersion_coefficient_at_cap",
            "fedsam_zero_eps_matches_fedavg",
            "partial_single_group_matches_full",
        ]
    );
    assert_eq!(
        keys(&json["second_order_terms"]),
        vec![
            "composition_gap",
            "secondary_dispersion_nonnegative",
            "transformed_matches_dispersion_at_zero_eta",
        ]
    );
    assert_eq!(json["status"], "pass");
}
