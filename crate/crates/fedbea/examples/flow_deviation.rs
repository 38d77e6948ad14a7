//! How far discrete rounds sit from their continuous flows.
//!
//! A single gradient-descent step deviates from the exact gradient flow at
//! second order in the step size, while the expected FedAvg round tracks its
//! own modified flow to third order. Both scalings are measured against
//! fine-step Runge-Kutta references.
//!
//! Run with: cargo run --release --example flow_deviation

use fedbea::bea::{
    brute_force_expected_update, fedavg_modified_flow_field, flow_deviation, gradient_flow_field,
    integrate_flow, residual_order_fit, FitOutcome,
};
use fedbea::data::synth_quadratic_tasks;
use fedbea::data::ClientData;
use fedbea::models::{BatchId, QuadraticBatch, QuadraticObjective};
use fedbea::param::ParamVector;

fn main() -> fedbea::Result<()> {
    // one GD step on a scalar bowl vs the exponential flow
    let obj = QuadraticObjective::new(1);
    let clients = vec![ClientData {
        client_id: 0,
        batches: vec![QuadraticBatch::scalar(
            BatchId {
                client: 0,
                index: 0,
            },
            1.0,
            0.0,
        )],
    }];
    let w0 = ParamVector::new(vec![1.0]);
    let eta = 0.1;
    let step = vec![ParamVector::new(vec![1.0 - eta])];
    let reference = integrate_flow(gradient_flow_field(&obj, &clients), &w0, eta, 1, 64)?;
    let trace = flow_deviation(&step, &reference)?;
    println!(
        "one GD step (eta = {eta}) vs gradient flow: deviation {:.4e} (closed form {:.4e})",
        trace.last(),
        ((-eta).exp() - (1.0 - eta)).abs()
    );

    // expected fedavg rounds vs the modified flow: third-order tracking
    let (obj, clients) = synth_quadratic_tasks(3, 3, 4, 2.0, 13)?;
    let w0 = ParamVector::new(vec![0.4, -0.2, 0.3, 0.1]);
    let (rounds, e_steps) = (5usize, 3usize);
    let mut points = Vec::new();
    println!("\nexpected fedavg rounds vs modified flow ({rounds} rounds):");
    for eta in [4e-3, 2e-3, 1e-3] {
        let mut trajectory = Vec::new();
        let mut w = w0.clone();
        for _ in 0..rounds {
            w = brute_force_expected_update(&obj, &clients, &w, eta)?.expected_update;
            trajectory.push(w.clone());
        }
        let field = fedavg_modified_flow_field(&obj, &clients, eta, e_steps);
        let reference = integrate_flow(field, &w0, e_steps as f64 * eta, rounds, 64)?;
        let trace = flow_deviation(&trajectory, &reference)?;
        println!("  eta = {eta:<6}: final deviation {:.4e}", trace.last());
        points.push((eta, trace.last()));
    }
    match residual_order_fit(&points)? {
        FitOutcome::Exponent(slope) => println!("deviation decay exponent: {slope:.4}"),
        FitOutcome::Exact => println!("deviations at the floating-point floor"),
    }
    Ok(())
}
