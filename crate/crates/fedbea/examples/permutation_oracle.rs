//! Exact expectation oracle vs closed-form prediction.
//!
//! Enumerates every mini-batch order per client on a quadratic suite,
//! compares the brute-force expected one-round update with the second-order
//! prediction, and shows the third-order decay of the residual.
//!
//! Run with: cargo run --release --example permutation_oracle

use fedbea::bea::{
    brute_force_expected_update, expected_round_update_prediction, monte_carlo_expected_update,
    residual_order_fit, FitOutcome, PredictionVariant,
};
use fedbea::data::synth_quadratic_tasks;
use fedbea::param::ParamVector;

fn main() -> fedbea::Result<()> {
    // E = 2 on quadratics: the prediction is exact to machine precision
    let (obj, clients) = synth_quadratic_tasks(4, 2, 8, 2.0, 7)?;
    let w0 = ParamVector::new(vec![0.25; 8]);
    let eta = 1e-3;
    let oracle = brute_force_expected_update(&obj, &clients, &w0, eta)?;
    let prediction =
        expected_round_update_prediction(&obj, &clients, &w0, eta, 1, PredictionVariant::FedAvg)?;
    println!(
        "E=2 suite: {} orders per client, |oracle - prediction|_inf = {:.3e}",
        oracle.orders_enumerated,
        oracle.expected_update.sub(&prediction).norm_inf()
    );
    println!(
        "           order-coefficient zero-mean check: {:.3e}",
        oracle.xi_mean_discrepancy.norm_inf()
    );

    // E = 3: the dropped terms are third order, so the gap decays like eta^3
    let (obj, clients) = synth_quadratic_tasks(4, 3, 8, 2.0, 7)?;
    let mut points = Vec::new();
    println!("\nE=3 suite residuals:");
    for eta in [4e-3, 2e-3, 1e-3] {
        let oracle = brute_force_expected_update(&obj, &clients, &w0, eta)?;
        let prediction = expected_round_update_prediction(
            &obj,
            &clients,
            &w0,
            eta,
            1,
            PredictionVariant::FedAvg,
        )?;
        let gap = oracle.expected_update.distance(&prediction);
        println!("  eta = {eta:<6}: |oracle - prediction| = {gap:.3e}");
        points.push((eta, gap));
    }
    match residual_order_fit(&points)? {
        FitOutcome::Exponent(slope) => println!("fitted decay exponent: {slope:.4}"),
        FitOutcome::Exact => println!("residuals at the floating-point floor"),
    }

    // past the exact-enumeration cap the Monte-Carlo estimator takes over
    let (obj, clients) = synth_quadratic_tasks(4, 8, 8, 2.0, 7)?;
    match brute_force_expected_update(&obj, &clients, &w0, 1e-3) {
        Err(e) => println!("\nE=8 exact enumeration refused: {e}"),
        Ok(_) => unreachable!("8 batches exceed the enumeration cap"),
    }
    let (mc, stderr) = monte_carlo_expected_update(&obj, &clients, &w0, 1e-3, 2000, 7)?;
    let pred =
        expected_round_update_prediction(&obj, &clients, &w0, 1e-3, 1, PredictionVariant::FedAvg)?;
    println!(
        "monte carlo (2000 trials): |estimate - prediction| = {:.3e}, stderr = {:.3e}",
        mc.distance(&pred),
        stderr
    );
    Ok(())
}
