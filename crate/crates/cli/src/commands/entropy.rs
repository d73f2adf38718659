use std::path::PathBuf;

use cfent_core::entanglement::schmidt;
use clap::Args;
use num_complex::Complex64;
use serde::Serialize;

use super::{csv_table, join, render};
use crate::matrix_file::read_matrix;
use crate::{CliError, Format, Outcome, EXIT_PASS};

/// Allowed deviation of `Σλ²` from 1 without --normalize.
const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Structural-matrix JSON file.
    pub file: PathBuf,
    /// Rescale the matrix to unit Frobenius norm first.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    /// Schmidt coefficients, descending.
    pub lambdas: Vec<f64>,
    /// Von Neumann entropy in nats.
    pub entropy: f64,
    pub purity: f64,
}

pub fn run(args: EntropyArgs) -> Result<Outcome, CliError> {
    let mut m = read_matrix(&args.file)?;
    let norm2 = m.norm_squared();
    if norm2 == 0.0 {
        return Err(CliError::Input("matrix is zero".into()));
    }
    if args.normalize {
        m /= Complex64::from(norm2.sqrt());
    } else if (norm2 - 1.0).abs() > NORM_TOLERANCE {
        return Err(CliError::Input(format!(
            "matrix is not normalized (Tr ΦΦ† = {norm2}); pass --normalize to rescale"
        )));
    }
    let s = schmidt(&m)?;
    let out = EntropyReport {
        entropy: s.entropy(),
        purity: s.purity(),
        lambdas: s.lambdas,
    };
    Ok(render(
        args.format,
        EXIT_PASS,
        &out,
        || {
            format!(
                "lambda   {}\nentropy  {:.7}\npurity   {:.7}\n",
                join(&out.lambdas, 7),
                out.entropy,
                out.purity
            )
        },
        || {
            let mut rows: Vec<Vec<String>> = out
                .lambdas
                .iter()
                .enumerate()
                .map(|(i, l)| vec![format!("lambda_{}", i + 1), l.to_string()])
                .collect();
            rows.push(vec!["entropy".into(), out.entropy.to_string()]);
            rows.push(vec!["purity".into(), out.purity.to_string()]);
            csv_table(&["quantity", "value"], &rows)
        },
    ))
}
