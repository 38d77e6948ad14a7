//! Backward-error-analysis machinery: closed-form implicit-regularizer
//! terms, expected-update predictions, and exact brute-force oracles that
//! validate them.

mod fit;
mod flow;
mod modified_loss;
mod oracle;
mod prediction;
pub(crate) mod terms;

pub use fit::{residual_order_fit, FitOutcome};
pub use flow::{
    fedavg_modified_flow_field, flow_deviation, gradient_flow_field, integrate_flow,
    FlowDeviationTrace,
};
pub use modified_loss::{
    gd_modified_loss, modified_loss_fedavg, modified_loss_fedavg_partial,
    modified_loss_fedavg_second_order, modified_loss_fedsam, modified_loss_scaffold, Coefficients,
    ModifiedLossReport, TermValue,
};
pub use oracle::{
    brute_force_expected_update, brute_force_scaffold_expected_update, monte_carlo_expected_update,
    PermutationOracleReport, MAX_EXACT_STEPS,
};
pub use prediction::{expected_round_update_prediction, PredictionVariant};
pub use terms::{
    batch_deviation_term, dispersion_gradient, dispersion_term, global_grad, global_hvp,
    global_loss, secondary_dispersion_term, sgd_term, sgd_term_gradient,
    transformed_dispersion_term,
};
