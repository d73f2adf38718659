use std::fmt::Write;
use std::path::PathBuf;

use cfent_core::algebra::{weak_equal, CompositeAlgebra, StructuralMatrix};
use cfent_core::fock::{enumerate_basis, ModeConfig, StructureFunction};
use cfent_core::linalg::CMatrix;
use cfent_core::realization::{check_conditions, check_deformed_two_mode, DeformationSpec, DEFAULT_TOLERANCE};
use cfent_core::sparse::SparseOperator;
use clap::Args;
use serde::Serialize;

use super::{csv_table, render, status};
use crate::matrix_file::read_matrix;
use crate::{CliError, Format, Outcome, EXIT_FAIL, EXIT_PASS};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Structural-matrix JSON files, one per composite mode.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Value of the structure function at n = 2 (2 is the ordinary boson).
    #[arg(long, default_value_t = 2.0)]
    pub chi2: f64,
    /// Pass/fail threshold on every residual.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Also test the weak equalities on a truncated Fock space.
    #[arg(long)]
    pub fock: bool,
    /// Boson occupation cutoff for --fock.
    #[arg(long, default_value_t = 3)]
    pub cutoff: usize,
    /// Number of composite creations applied to the vacuum for --fock
    /// [default: number of fermion modes].
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub modes: usize,
    pub shape: [usize; 2],
    pub chi2: f64,
    pub tolerance: f64,
    pub residuals: Vec<Residual>,
    pub pass: bool,
}

/// Weak-equality checks of `{A_α, A†_β} ≃ δ_αβ` and `(A†_α)² = 0`.
pub struct FockResiduals {
    pub anticommutator: f64,
    pub nilpotency: f64,
    pub states_checked: usize,
}

pub fn fock_residuals(
    phis: &[CMatrix],
    chi2: f64,
    cutoff: usize,
    depth: Option<usize>,
) -> Result<FockResiduals, CliError> {
    let (db, df) = phis[0].shape();
    let depth = depth.unwrap_or(df);
    let needed = depth.min(phis.len()) + 1;
    if cutoff < needed {
        return Err(CliError::Input(format!(
            "--cutoff {cutoff} is too small: probing {} composite excitations needs at least {needed}",
            depth.min(phis.len())
        )));
    }
    let basis = enumerate_basis(ModeConfig::new(db, df, cutoff)?)?;
    let chi = StructureFunction::with_chi2(chi2, cutoff)?;
    let alg = CompositeAlgebra::new(basis.clone(), chi)?;
    let creators = phis
        .iter()
        .map(|p| alg.creator(&StructuralMatrix::unnormalized(p.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let identity = SparseOperator::identity(basis.len());
    let zero = SparseOperator::zero(basis.len());
    let mut anticommutator: f64 = 0.0;
    let mut states_checked = 0;
    for (a, ca) in creators.iter().enumerate() {
        let ann = ca.adjoint();
        for (b, cb) in creators.iter().enumerate() {
            let rhs = if a == b { &identity } else { &zero };
            let r = weak_equal(&ann.anticommutator(cb), rhs, &creators, &basis, f64::INFINITY, Some(depth));
            anticommutator = anticommutator.max(r.max_residual);
            states_checked = states_checked.max(r.states_checked);
        }
    }
    let nilpotency = creators.iter().map(|c| c.matmul(c).max_abs()).fold(0.0, f64::max);
    Ok(FockResiduals {
        anticommutator,
        nilpotency,
        states_checked,
    })
}

pub fn run(args: VerifyArgs) -> Result<Outcome, CliError> {
    if !(args.tol > 0.0) {
        return Err(CliError::Input(format!("--tol must be positive, got {}", args.tol)));
    }
    let phis = args.files.iter().map(|p| read_matrix(p)).collect::<Result<Vec<_>, _>>()?;
    let spec = DeformationSpec::new(args.chi2)?;
    let two_mode_deformed = spec.delta() != 0.0 && phis.len() == 2 && phis[0].shape() == (2, 2);
    let report = if two_mode_deformed {
        check_deformed_two_mode(&phis[0], &phis[1], spec)?
    } else {
        check_conditions(&phis, spec)?
    };
    let mut residuals: Vec<Residual> = report
        .residuals
        .iter()
        .map(|r| Residual {
            name: r.name.clone(),
            value: r.value,
            pass: r.value < args.tol,
        })
        .collect();
    if args.fock {
        let f = fock_residuals(&phis, args.chi2, args.cutoff, args.depth)?;
        residuals.push(Residual {
            name: "fock-anticommutator".into(),
            value: f.anticommutator,
            pass: f.anticommutator < args.tol,
        });
        residuals.push(Residual {
            name: "fock-nilpotency".into(),
            value: f.nilpotency,
            pass: f.nilpotency < args.tol,
        });
    }
    let pass = residuals.iter().all(|r| r.pass);
    let (rows, cols) = phis[0].shape();
    let out = VerifyReport {
        modes: phis.len(),
        shape: [rows, cols],
        chi2: args.chi2,
        tolerance: args.tol,
        residuals,
        pass,
    };
    let code = if pass { EXIT_PASS } else { EXIT_FAIL };
    Ok(render(
        args.format,
        code,
        &out,
        || {
            let mut s = format!(
                "{} composite modes, {rows}×{cols} structural matrices, χ(2) = {}, tolerance {:e}\n",
                out.modes, out.chi2, out.tolerance
            );
            for r in &out.residuals {
                writeln!(s, "{:<22} {:>12.3e}  {}", r.name, r.value, status(r.pass)).unwrap();
            }
            writeln!(s, "{}", status(pass)).unwrap();
            s
        },
        || {
            let rows: Vec<Vec<String>> = out
                .residuals
                .iter()
                .map(|r| vec![r.name.clone(), format!("{:e}", r.value), status(r.pass).into()])
                .collect();
            csv_table(&["condition", "residual", "status"], &rows)
        },
    ))
}
