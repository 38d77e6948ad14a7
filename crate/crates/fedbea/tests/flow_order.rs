//! The expected FedAvg round tracks its own modified flow to third order in
//! the step size, while a plain discrete step tracks the original gradient
//! flow only to second order.

mod common;

use fedbea::bea::{
    brute_force_expected_update, fedavg_modified_flow_field, flow_deviation, gradient_flow_field,
    integrate_flow, residual_order_fit, FitOutcome,
};
use fedbea::data::synth_quadratic_tasks;
use fedbea::models::Objective;
use fedbea::param::ParamVector;

fn deviation_points<F>(mut deviation_at: F) -> Vec<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    [4e-3, 2e-3, 1e-3]
        .into_iter()
        .map(|eta| (eta, deviation_at(eta)))
        .collect()
}

#[test]
fn expected_rounds_track_the_modified_flow_to_third_order() {
    let (obj, clients) = synth_quadratic_tasks(3, 3, 4, 2.0, 13).unwrap();
    let w0 = ParamVector::new(vec![0.4, -0.2, 0.3, 0.1]);
    let (rounds, e_steps) = (5usize, 3usize);
    let points = deviation_points(|eta| {
        let mut trajectory = Vec::new();
        let mut w = w0.clone();
        for _ in 0..rounds {
            w = brute_force_expected_update(&obj, &clients, &w, eta)
                .unwrap()
                .expected_update;
            trajectory.push(w.clone());
        }
        let field = fedavg_modified_flow_field(&obj, &clients, eta, e_steps);
        let reference = integrate_flow(field, &w0, e_steps as f64 * eta, rounds, 64).unwrap();
        flow_deviation(&trajectory, &reference).unwrap().last()
    });
    match residual_order_fit(&points).unwrap() {
        FitOutcome::Exponent(slope) => assert!(
            (2.9..=3.1).contains(&slope),
            "modified-flow deviation slope {slope} outside [2.9, 3.1]"
        ),
        FitOutcome::Exact => panic!("deviations unexpectedly at the exact floor"),
    }
}

#[test]
fn plain_steps_track_the_original_flow_to_second_order() {
    let (obj, clients) = synth_quadratic_tasks(3, 3, 4, 2.0, 13).unwrap();
    let w0 = ParamVector::new(vec![0.4, -0.2, 0.3, 0.1]);
    let rounds = 5usize;
    let points = deviation_points(|eta| {
        // deterministic per-step trajectory: one pass per round in canonical
        // batch order, compared against the original gradient flow
        let mut trajectory = Vec::new();
        let mut w = w0.clone();
        for _ in 0..rounds {
            let mut locals = Vec::new();
            for client in &clients {
                let mut wc = w.clone();
                for batch in &client.batches {
                    let g = obj.grad(batch, &wc).unwrap();
                    wc.axpy_mut(-eta, &g);
                }
                locals.push(wc);
            }
            w = ParamVector::mean(&locals).unwrap();
            trajectory.push(w.clone());
        }
        let reference = integrate_flow(
            gradient_flow_field(&obj, &clients),
            &w0,
            3.0 * eta,
            rounds,
            64,
        )
        .unwrap();
        flow_deviation(&trajectory, &reference).unwrap().last()
    });
    match residual_order_fit(&points).unwrap() {
        FitOutcome::Exponent(slope) => assert!(
            (1.8..=2.2).contains(&slope),
            "original-flow deviation slope {slope} outside [1.8, 2.2]"
        ),
        FitOutcome::Exact => panic!("deviations unexpectedly at the exact floor"),
    }
}
