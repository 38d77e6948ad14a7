//! Per-round metrics and their CSV serialization (RFC 4180, fixed column
//! order, 17-significant-digit floats, absent values as empty cells).

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub const METRICS_HEADER: &str = "round,train_loss,eval_metric,client_grad_var,batch_grad_var,\
dispersion,secondary_dispersion,fisher_trace,max_eig,epsilon_mean";

/// One CSV row, measured at a round boundary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundMetrics {
    pub round: u64,
    pub train_loss: Option<f64>,
    pub eval_metric: Option<f64>,
    pub client_grad_var: Option<f64>,
    pub batch_grad_var: Option<f64>,
    pub dispersion: Option<f64>,
    pub secondary_dispersion: Option<f64>,
    pub fisher_trace: Option<f64>,
    pub max_eig: Option<f64>,
    pub epsilon_mean: Option<f64>,
}

impl RoundMetrics {
    /// A row carrying only the round index, marking an aborted round.
    pub fn error_row(round: u64) -> Self {
        RoundMetrics {
            round,
            train_loss: None,
            eval_metric: None,
            client_grad_var: None,
            batch_grad_var: None,
            dispersion: None,
            secondary_dispersion: None,
            fisher_trace: None,
            max_eig: None,
            epsilon_mean: None,
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    // 17 significant digits round-trip any f64
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn parse_opt(cell: &str, line: usize) -> Result<Option<f64>> {
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse::<f64>().map(Some).map_err(|_| Error::Parse {
        line,
        message: format!("cell `{cell}` is not numeric"),
    })
}

/// Render rows to CSV text.
pub fn metrics_to_csv(rows: &[RoundMetrics]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.round,
            fmt_opt(r.train_loss),
            fmt_opt(r.eval_metric),
            fmt_opt(r.client_grad_var),
            fmt_opt(r.batch_grad_var),
            fmt_opt(r.dispersion),
            fmt_opt(r.secondary_dispersion),
            fmt_opt(r.fisher_trace),
            fmt_opt(r.max_eig),
            fmt_opt(r.epsilon_mean),
        ));
    }
    out
}

/// Write rows to a CSV file.
pub fn emit_metrics_csv(rows: &[RoundMetrics], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    file.write_all(metrics_to_csv(rows).as_bytes())
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Parse a metrics CSV back into rows.
pub fn parse_metrics_csv(path: &Path) -> Result<Vec<RoundMetrics>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r') == METRICS_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "missing or unexpected metrics header".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 10 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 10 cells, got {}", cells.len()),
            });
        }
        rows.push(RoundMetrics {
            round: cells[0].parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("round `{}` is not an integer", cells[0]),
            })?,
            train_loss: parse_opt(cells[1], i + 1)?,
            eval_metric: parse_opt(cells[2], i + 1)?,
            client_grad_var: parse_opt(cells[3], i + 1)?,
            batch_grad_var: parse_opt(cells[4], i + 1)?,
            dispersion: parse_opt(cells[5], i + 1)?,
            secondary_dispersion: parse_opt(cells[6], i + 1)?,
            fisher_trace: parse_opt(cells[7], i + 1)?,
            max_eig: parse_opt(cells[8], i + 1)?,
            epsilon_mean: parse_opt(cells[9], i + 1)?,
        });
    }
    Ok(rows)
}
