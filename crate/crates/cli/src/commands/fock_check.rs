use std::fmt::Write;

use cfent_core::algebra::{CompositeAlgebra, StructuralMatrix};
use cfent_core::fock::{enumerate_basis, ModeConfig, StructureFunction};
use cfent_core::linalg::{random_unit_vector, CMatrix};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{csv_table, render, status};
use crate::{CliError, Format, Outcome, EXIT_FAIL, EXIT_PASS};

#[derive(Debug, Args)]
pub struct FockCheckArgs {
    /// χ(2), with χ(n) = n elsewhere.
    #[arg(long, conflicts_with_all = ["chi", "q"])]
    pub chi2: Option<f64>,
    /// Full structure function χ(0), χ(1), …, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "q")]
    pub chi: Option<Vec<f64>>,
    /// q-deformation, χ(n) = (1 − qⁿ)/(1 − q).
    #[arg(long)]
    pub q: Option<f64>,
    /// Boson occupation cutoff.
    #[arg(long, default_value_t = 3)]
    pub cutoff: usize,
    /// Number of boson modes.
    #[arg(long, default_value_t = 2)]
    pub bosons: usize,
    /// Number of fermion modes.
    #[arg(long, default_value_t = 2)]
    pub fermions: usize,
    /// Number of random structural matrices per draw.
    #[arg(long, default_value_t = 2)]
    pub modes: usize,
    /// Number of random draws.
    #[arg(long, default_value_t = 3)]
    pub draws: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FockCheckReport {
    pub basis_size: usize,
    pub chi: Vec<f64>,
    pub draws: usize,
    pub tolerance: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn structure_function(args: &FockCheckArgs) -> Result<StructureFunction, CliError> {
    let chi = if let Some(values) = &args.chi {
        StructureFunction::new(values.clone())?
    } else if let Some(q) = args.q {
        StructureFunction::q_deformed(q, args.cutoff)?
    } else {
        StructureFunction::with_chi2(args.chi2.unwrap_or(2.0), args.cutoff)?
    };
    Ok(chi)
}

pub fn run(args: FockCheckArgs) -> Result<Outcome, CliError> {
    if args.modes == 0 || args.draws == 0 {
        return Err(CliError::Input("--modes and --draws must be positive".into()));
    }
    let chi = structure_function(&args)?;
    let basis = enumerate_basis(ModeConfig::new(args.bosons, args.fermions, args.cutoff)?)?;
    let alg = CompositeAlgebra::new(basis.clone(), chi.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (rows, cols) = (args.bosons, args.fermions);
    let mut anti: f64 = 0.0;
    let mut anti_nd: Option<f64> = None;
    let mut comm: f64 = 0.0;
    let mut comm_nd: Option<f64> = None;
    let mut double: f64 = 0.0;
    for _ in 0..args.draws {
        let phis = (0..args.modes)
            .map(|_| {
                let v = random_unit_vector(rows * cols, &mut rng);
                StructuralMatrix::new(CMatrix::from_column_slice(rows, cols, &v))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for pa in &phis {
            for pb in &phis {
                let c = alg.verify_anticommutator_expansion(pa, pb)?;
                anti = anti.max(c.expansion);
                if let Some(nd) = c.nondeformed {
                    anti_nd = Some(anti_nd.unwrap_or(0.0).max(nd));
                }
            }
        }
        let nested = alg.verify_nested_identities(&phis)?;
        comm = comm.max(nested.commutator);
        double = double.max(nested.double);
        if let Some(nd) = nested.commutator_nondeformed {
            comm_nd = Some(comm_nd.unwrap_or(0.0).max(nd));
        }
    }
    let mut checks = vec![("anticommutator-expansion", anti)];
    if let Some(v) = anti_nd {
        checks.push(("anticommutator-nondeformed", v));
    }
    checks.push(("commutator-closed-form", comm));
    if let Some(v) = comm_nd {
        checks.push(("commutator-nondeformed", v));
    }
    checks.push(("double-bracket-closed-form", double));
    let checks: Vec<Check> = checks
        .into_iter()
        .map(|(name, residual)| Check {
            name,
            residual,
            pass: residual < args.tol,
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    let out = FockCheckReport {
        basis_size: basis.len(),
        chi: chi.values().to_vec(),
        draws: args.draws,
        tolerance: args.tol,
        checks,
        pass,
    };
    let code = if pass { EXIT_PASS } else { EXIT_FAIL };
    Ok(render(
        args.format,
        code,
        &out,
        || {
            let mut s = format!(
                "{} basis states, χ = {:?}, {} draws of {} modes, tolerance {:e}\n",
                out.basis_size, out.chi, out.draws, args.modes, out.tolerance
            );
            for c in &out.checks {
                writeln!(s, "{:<28} {:>12.3e}  {}", c.name, c.residual, status(c.pass)).unwrap();
            }
            writeln!(s, "{}", status(pass)).unwrap();
            s
        },
        || {
            let rows: Vec<Vec<String>> = out
                .checks
                .iter()
                .map(|c| vec![c.name.to_string(), format!("{:e}", c.residual), status(c.pass).into()])
                .collect();
            csv_table(&["check", "residual", "status"], &rows)
        },
    ))
}
