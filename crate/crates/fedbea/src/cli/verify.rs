//! The verification battery: runs the exactness, residual-order, zero-mean,
//! coefficient-identity, and second-order checks on quadratic suites and
//! writes a JSON report with stable field names.

use std::path::{Path, PathBuf};

use rand::Rng;
use serde::Serialize;

use crate::bea::{
    brute_force_expected_update, brute_force_scaffold_expected_update, dispersion_term,
    expected_round_update_prediction, global_loss, modified_loss_fedavg,
    modified_loss_fedavg_partial, modified_loss_fedavg_second_order, modified_loss_fedsam,
    residual_order_fit, secondary_dispersion_term, transformed_dispersion_term, FitOutcome,
    PredictionVariant, MAX_EXACT_STEPS,
};
use crate::cli::config::{RunConfig, TaskKind};
use crate::cli::manifest::write_manifest;
use crate::data::synth_quadratic_tasks;
use crate::error::{Error, Result};
use crate::param::ParamVector;
use crate::rng::{domain, stream};

pub const EXACTNESS_TOLERANCE: f64 = 1e-12;
pub const XI_TOLERANCE: f64 = 1e-12;
pub const EXPONENT_WINDOW: (f64, f64) = (2.9, 3.1);
pub const RESIDUAL_ETAS: [f64; 3] = [4e-3, 2e-3, 1e-3];

fn status(ok: bool) -> String {
    if ok {
        "pass".into()
    } else {
        "fail".into()
    }
}

#[derive(Debug, Serialize)]
pub struct SuiteInfo {
    pub clients: usize,
    pub dimension: usize,
    pub heterogeneity: f64,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct Tolerances {
    pub exactness: f64,
    pub xi_zero_mean: f64,
    pub exponent_window: (f64, f64),
}

#[derive(Debug, Serialize)]
pub struct ExactnessCheck {
    pub e_steps: usize,
    pub eta: f64,
    pub gap_inf_norm: f64,
    pub status: String,
}

#[derive(Debug, Serialize)]
pub struct FitPoint {
    pub eta: f64,
    pub gap_norm: f64,
}

#[derive(Debug, Serialize)]
pub struct ResidualFit {
    pub algorithm: String,
    pub e_steps: usize,
    pub points: Vec<FitPoint>,
    pub fit: FitOutcome,
    pub status: String,
}

#[derive(Debug, Serialize)]
pub struct XiCheck {
    pub e_steps: usize,
    pub inf_norm: f64,
    pub status: String,
}

#[derive(Debug, Serialize)]
pub struct GapCheck {
    pub gap: f64,
    pub status: String,
}

#[derive(Debug, Serialize)]
pub struct ValueCheck {
    pub value: f64,
    pub status: String,
}

#[derive(Debug, Serialize)]
pub struct CoefficientIdentities {
    pub fedsam_zero_eps_matches_fedavg: GapCheck,
    pub fedsam_dispersion_coefficient_at_cap: ValueCheck,
    pub partial_single_group_matches_full: GapCheck,
}

#[derive(Debug, Serialize)]
pub struct SecondOrderChecks {
    pub transformed_matches_dispersion_at_zero_eta: GapCheck,
    pub secondary_dispersion_nonnegative: ValueCheck,
    pub composition_gap: GapCheck,
}

#[derive(Debug, Serialize)]
pub struct VerificationReport {
    pub artifact_version: String,
    pub suite: SuiteInfo,
    pub tolerances: Tolerances,
    pub exactness: ExactnessCheck,
    pub residual_fits: Vec<ResidualFit>,
    pub xi_zero_mean: Vec<XiCheck>,
    pub coefficient_identities: CoefficientIdentities,
    pub second_order_terms: SecondOrderChecks,
    pub status: String,
}

fn probe_point(dimension: usize, seed: u64) -> ParamVector {
    let mut rng = stream(seed, domain::INIT_PARAMS, &[dimension as u64]);
    ParamVector::new((0..dimension).map(|_| rng.gen_range(-0.5..0.5)).collect())
}

fn fit_ok(fit: &FitOutcome) -> bool {
    match fit {
        FitOutcome::Exact => true,
        FitOutcome::Exponent(s) => *s >= EXPONENT_WINDOW.0 && *s <= EXPONENT_WINDOW.1,
    }
}

/// Run the battery in memory.
pub fn verification_report(config: &RunConfig) -> Result<VerificationReport> {
    if config.task != TaskKind::Quadratic {
        return Err(Error::Config(
            "verification runs on quadratic suites; set task = \"quadratic\"".into(),
        ));
    }
    if config.e_steps() > MAX_EXACT_STEPS {
        return Err(Error::Capability(format!(
            "E = a*K = {} exceeds the exact-enumeration cap of {MAX_EXACT_STEPS}; \
             use monte_carlo_expected_update for larger E",
            config.e_steps()
        )));
    }
    let m = config.m;
    let d = config.dimension;
    let s = config.heterogeneity;
    let seed = config.seed;
    let w0 = probe_point(d, seed);
    let mut all_ok = true;

    // exactness floor at E = 2
    let (obj2, clients2) = synth_quadratic_tasks(m, 2, d, s, seed)?;
    let brute2 = brute_force_expected_update(&obj2, &clients2, &w0, config.eta)?;
    let pred2 = expected_round_update_prediction(
        &obj2,
        &clients2,
        &w0,
        config.eta,
        1,
        PredictionVariant::FedAvg,
    )?;
    let gap2 = brute2.expected_update.sub(&pred2).norm_inf();
    let exact_ok = gap2 <= EXACTNESS_TOLERANCE;
    all_ok &= exact_ok;
    let exactness = ExactnessCheck {
        e_steps: 2,
        eta: config.eta,
        gap_inf_norm: gap2,
        status: if exact_ok {
            "exact".into()
        } else {
            "fail".into()
        },
    };

    // third-order residual fits at E = 3
    let (obj3, clients3) = synth_quadratic_tasks(m, 3, d, s, seed)?;
    let mut residual_fits = Vec::new();
    for algorithm in ["fedavg", "scaffold"] {
        let mut points = Vec::new();
        for &eta in &RESIDUAL_ETAS {
            let (brute, pred) = match algorithm {
                "fedavg" => (
                    brute_force_expected_update(&obj3, &clients3, &w0, eta)?.expected_update,
                    expected_round_update_prediction(
                        &obj3,
                        &clients3,
                        &w0,
                        eta,
                        1,
                        PredictionVariant::FedAvg,
                    )?,
                ),
                _ => (
                    brute_force_scaffold_expected_update(&obj3, &clients3, &w0, eta)?,
                    expected_round_update_prediction(
                        &obj3,
                        &clients3,
                        &w0,
                        eta,
                        1,
                        PredictionVariant::Scaffold,
                    )?,
                ),
            };
            points.push(FitPoint {
                eta,
                gap_norm: brute.distance(&pred),
            });
        }
        let fit = residual_order_fit(
            &points
                .iter()
                .map(|p| (p.eta, p.gap_norm))
                .collect::<Vec<_>>(),
        )?;
        let ok = fit_ok(&fit);
        all_ok &= ok;
        residual_fits.push(ResidualFit {
            algorithm: algorithm.into(),
            e_steps: 3,
            points,
            fit,
            status: status(ok),
        });
    }

    // zero-mean of the second-order coefficient discrepancy, E in {2,3,4}
    let mut xi_zero_mean = Vec::new();
    for e in 2..=4 {
        let (obj, clients) = synth_quadratic_tasks(m, e, d, s, seed)?;
        let report = brute_force_expected_update(&obj, &clients, &w0, config.eta)?;
        let inf_norm = report.xi_mean_discrepancy.norm_inf();
        let ok = inf_norm <= XI_TOLERANCE;
        all_ok &= ok;
        xi_zero_mean.push(XiCheck {
            e_steps: e,
            inf_norm,
            status: status(ok),
        });
    }

    // coefficient identities
    let e_cfg = config.e_steps();
    let avg = modified_loss_fedavg(&obj2, &clients2, &w0, config.eta, e_cfg)?;
    let sam0 = modified_loss_fedsam(&obj2, &clients2, &w0, config.eta, e_cfg, 0.0)?;
    let sam_gap = [
        (avg.base_loss - sam0.base_loss).abs(),
        (avg.dispersion.raw - sam0.dispersion.raw).abs(),
        (avg.dispersion.coefficient - sam0.dispersion.coefficient).abs(),
        (avg.sgd_term.raw - sam0.sgd_term.raw).abs(),
        (avg.sgd_term.coefficient - sam0.sgd_term.coefficient).abs(),
        sam0.sam_penalty.contribution().abs(),
        sam0.scaffold_batch_term.contribution().abs(),
        (avg.modified_loss - sam0.modified_loss).abs(),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    let sam_ok = sam_gap <= EXACTNESS_TOLERANCE;
    all_ok &= sam_ok;

    let eps_cap = e_cfg as f64 * config.eta / 2.0;
    let sam_cap = modified_loss_fedsam(&obj2, &clients2, &w0, config.eta, e_cfg, eps_cap)?;
    let cap_ok = sam_cap.dispersion.coefficient == 0.0;
    all_ok &= cap_ok;

    let partial = modified_loss_fedavg_partial(
        &obj2,
        std::slice::from_ref(&clients2),
        &w0,
        config.eta,
        e_cfg,
    )?;
    let partial_gap = (partial.modified_loss - avg.modified_loss).abs();
    let partial_ok = partial_gap <= EXACTNESS_TOLERANCE;
    all_ok &= partial_ok;

    let coefficient_identities = CoefficientIdentities {
        fedsam_zero_eps_matches_fedavg: GapCheck {
            gap: sam_gap,
            status: status(sam_ok),
        },
        fedsam_dispersion_coefficient_at_cap: ValueCheck {
            value: sam_cap.dispersion.coefficient,
            status: status(cap_ok),
        },
        partial_single_group_matches_full: GapCheck {
            gap: partial_gap,
            status: status(partial_ok),
        },
    };

    // second-order term checks on the E = 3 suite
    let (a_epochs, k_steps) = (2usize, 3usize);
    let transformed0 = transformed_dispersion_term(&obj3, &clients3, &w0, a_epochs, k_steps, 0.0)?;
    let plain = dispersion_term(&obj3, &clients3, &w0)?;
    let zero_eta_gap = (transformed0 - plain).abs();
    let zero_eta_ok = zero_eta_gap == 0.0;
    all_ok &= zero_eta_ok;

    let secondary = secondary_dispersion_term(&obj3, &clients3, &w0)?;
    let secondary_ok = secondary >= 0.0;
    all_ok &= secondary_ok;

    let second_report =
        modified_loss_fedavg_second_order(&obj3, &clients3, &w0, a_epochs, k_steps, config.eta)?;
    let e = (a_epochs * k_steps) as f64;
    let assembled = global_loss(&obj3, &clients3, &w0)?
        - e * config.eta / 4.0
            * transformed_dispersion_term(&obj3, &clients3, &w0, a_epochs, k_steps, config.eta)?
        + e * e * config.eta * config.eta / 6.0 * secondary;
    let composition_gap = (second_report.modified_loss - assembled).abs();
    let composition_ok = composition_gap <= EXACTNESS_TOLERANCE;
    all_ok &= composition_ok;

    let second_order_terms = SecondOrderChecks {
        transformed_matches_dispersion_at_zero_eta: GapCheck {
            gap: zero_eta_gap,
            status: status(zero_eta_ok),
        },
        secondary_dispersion_nonnegative: ValueCheck {
            value: secondary,
            status: status(secondary_ok),
        },
        composition_gap: GapCheck {
            gap: composition_gap,
            status: status(composition_ok),
        },
    };

    Ok(VerificationReport {
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        suite: SuiteInfo {
            clients: m,
            dimension: d,
            heterogeneity: s,
            seed,
        },
        tolerances: Tolerances {
            exactness: EXACTNESS_TOLERANCE,
            xi_zero_mean: XI_TOLERANCE,
            exponent_window: EXPONENT_WINDOW,
        },
        exactness,
        residual_fits,
        xi_zero_mean,
        coefficient_identities,
        second_order_terms,
        status: status(all_ok),
    })
}

/// `verify` entry point: manifest, then battery, then `report.json`.
/// Returns the report path.
pub fn run_verification(config: &RunConfig, out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let report_path = out_dir.join("report.json");
    write_manifest(
        config,
        "verify",
        std::slice::from_ref(&report_path),
        &out_dir.join("manifest.json"),
    )?;
    let report = verification_report(config)?;
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
    Ok(report_path)
}
