//! Headerless CSV ingestion: `label,f1,...,fp` per row, UTF-8, LF or CRLF.

use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};

pub fn load_csv_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let mut examples: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut width: Option<usize> = None;
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() < 2 {
            return Err(Error::Parse {
                line: line_no + 1,
                message: format!("expected `label,f1,...`, got `{line}`"),
            });
        }
        let label: usize = cells[0].trim().parse().map_err(|_| Error::Parse {
            line: line_no + 1,
            message: format!(
                "label `{}` is not a non-negative integer (headers are unsupported)",
                cells[0]
            ),
        })?;
        let mut row = Vec::with_capacity(cells.len() - 1);
        for cell in &cells[1..] {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                line: line_no + 1,
                message: format!("cell `{cell}` is not numeric"),
            })?;
            row.push(v);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    line: line_no + 1,
                    message: format!("row has {} features, previous rows have {w}", row.len()),
                });
            }
            _ => {}
        }
        labels.push(label);
        examples.push(row);
    }
    if examples.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    let num_classes = labels.iter().copied().max().unwrap() + 1;
    Ok(Dataset {
        examples,
        labels,
        num_classes,
    })
}
