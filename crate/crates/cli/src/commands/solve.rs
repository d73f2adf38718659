use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_6};
use std::fmt::Write;
use std::path::PathBuf;

use cfent_core::entanglement::schmidt;
use cfent_core::linalg::{c64, phase, random_angle, random_special_unitary, su2, CMatrix};
use cfent_core::realization::{check_conditions, DeformationSpec, FamilyTag, Frame, Params, SolutionFamily};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{csv_table, join, render, status};
use crate::matrix_file::write_matrix;
use crate::{CliError, Format, Outcome, EXIT_FAIL, EXIT_PASS};

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Solution family: two-mode-distinct, two-mode-equal, deformed-b,
    /// deformed-c-diagonal, deformed-c-nilpotent, 3mode-distinct,
    /// 3mode-two-equal, 3mode-all-equal.
    #[arg(long)]
    pub family: String,
    /// Family parameter as name=value; repeatable. Unset parameters take
    /// canonical values, or random ones with --sample.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Mode-1 angle: λ = (cos θ, sin θ) for two modes; the coefficient
    /// sin θ of the third mode for three modes.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Second mode-1 angle for 3mode-distinct: λ = (cos θ cos θ₂, cos θ sin θ₂, sin θ).
    #[arg(long)]
    pub theta2: Option<f64>,
    /// Explicit mode-1 Schmidt coefficients, comma separated; overrides the angles.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    /// Value of the structure function at n = 2 [default: 0 for deformed-b,
    /// 1 for deformed-c-*, 2 otherwise].
    #[arg(long)]
    pub chi2: Option<f64>,
    /// Seed for U₁ of the deformed families and for --sample.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Draw unset parameters and the outer unitaries at random.
    #[arg(long)]
    pub sample: bool,
    /// Directory receiving phi1.json and phi2.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeSummary {
    pub lambdas: Vec<f64>,
    pub entropy: f64,
    pub purity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub family: String,
    pub chi2: f64,
    pub params: Params,
    pub modes: Vec<ModeSummary>,
    pub residuals: Vec<(String, f64)>,
    pub pass: bool,
    pub files: Vec<String>,
}

const DEFAULT_THETA2: f64 = 0.5;
const DEFAULT_THETA_THREE_MODE: f64 = 0.3;

fn default_chi2(tag: FamilyTag) -> f64 {
    match tag {
        FamilyTag::DeformedB => 0.0,
        FamilyTag::DeformedCDiagonal | FamilyTag::DeformedCNilpotent => 1.0,
        _ => 2.0,
    }
}

fn default_d1(tag: FamilyTag, theta: Option<f64>, theta2: Option<f64>) -> Vec<f64> {
    match tag {
        FamilyTag::TwoModeEqual => vec![FRAC_1_SQRT_2; 2],
        FamilyTag::DeformedCNilpotent => vec![1.0, 0.0],
        FamilyTag::TwoModeDistinct | FamilyTag::DeformedB | FamilyTag::DeformedCDiagonal => {
            let (s, c) = theta.unwrap_or(FRAC_PI_6).sin_cos();
            vec![c, s]
        }
        FamilyTag::ThreeModeDistinct => {
            let (s1, c1) = theta.unwrap_or(DEFAULT_THETA_THREE_MODE).sin_cos();
            let (s2, c2) = theta2.unwrap_or(DEFAULT_THETA2).sin_cos();
            vec![c1 * c2, c1 * s2, s1]
        }
        FamilyTag::ThreeModeTwoEqual => {
            let (s, c) = theta.unwrap_or(DEFAULT_THETA_THREE_MODE).sin_cos();
            vec![c * FRAC_1_SQRT_2, c * FRAC_1_SQRT_2, s]
        }
        FamilyTag::ThreeModeAllEqual => vec![(1.0f64 / 3.0).sqrt(); 3],
    }
}

fn parse_params(raw: &[String]) -> Result<Params, CliError> {
    raw.iter()
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("--param expects NAME=VALUE, got '{p}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("--param {k}: '{v}' is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// `U₁` for the deformed families: Haar SU(2) for deformed-b, diagonal
/// otherwise (the c cases need `uv = 0`).
fn deformed_u1(tag: FamilyTag, rng: &mut ChaCha8Rng) -> CMatrix {
    match tag {
        FamilyTag::DeformedB => random_special_unitary(2, rng),
        _ => su2(phase(random_angle(rng)), c64(0.0, 0.0)),
    }
}

pub fn run(args: SolveArgs) -> Result<Outcome, CliError> {
    let tag: FamilyTag = args.family.parse()?;
    let chi2 = args.chi2.unwrap_or(default_chi2(tag));
    let spec = DeformationSpec::new(chi2)?;
    if !tag.is_deformed() && spec.delta() != 0.0 {
        return Err(CliError::Input(format!("family {tag} requires χ(2) = 2, got χ(2) = {chi2}")));
    }
    let d1 = args
        .lambda
        .clone()
        .unwrap_or_else(|| default_d1(tag, args.theta, args.theta2));
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let fixed_u1 = tag.is_deformed().then(|| deformed_u1(tag, &mut rng));
    let family = SolutionFamily::new(tag, d1, spec, fixed_u1)?;
    let user = parse_params(&args.params)?;
    let n = family.d1.len();
    let (mut params, frame) = if args.sample {
        (family.sample_params(&mut rng), Frame::random(n, &mut rng))
    } else {
        (family.canonical_params(), Frame::identity(n))
    };
    params.extend(user);
    let pair = family.generate(&params, &frame)?;

    let report = check_conditions(&pair.phis(), spec)?;
    let summaries = pair
        .phis()
        .iter()
        .map(|m| {
            let s = schmidt(m)?;
            Ok(ModeSummary {
                entropy: s.entropy(),
                purity: s.purity(),
                lambdas: s.lambdas,
            })
        })
        .collect::<Result<Vec<_>, cfent_core::Error>>()?;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", args.out.display())))?;
    let mut files = Vec::new();
    for (k, m) in pair.phis().iter().enumerate() {
        let path = args.out.join(format!("phi{}.json", k + 1));
        write_matrix(&path, m, Some(format!("{tag} mode {} chi2={chi2}", k + 1)))?;
        files.push(path.display().to_string());
    }

    let out = SolveReport {
        family: tag.to_string(),
        chi2,
        params: pair.params.clone(),
        modes: summaries,
        residuals: report.residuals.iter().map(|r| (r.name.clone(), r.value)).collect(),
        pass: report.pass,
        files,
    };
    let code = if report.pass { EXIT_PASS } else { EXIT_FAIL };
    Ok(render(
        args.format,
        code,
        &out,
        || {
            let mut s = format!("family   {}\nchi2     {}\n", out.family, out.chi2);
            let params: Vec<String> = out.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(s, "params   {}", params.join(" ")).unwrap();
            for (k, m) in out.modes.iter().enumerate() {
                writeln!(
                    s,
                    "phi{}     lambda = {}  entropy = {:.7}  purity = {:.7}",
                    k + 1,
                    join(&m.lambdas, 7),
                    m.entropy,
                    m.purity
                )
                .unwrap();
            }
            for (name, v) in &out.residuals {
                writeln!(s, "residual {name} {v:.3e}").unwrap();
            }
            writeln!(s, "{}", status(out.pass)).unwrap();
            writeln!(s, "wrote    {}", out.files.join(" ")).unwrap();
            s
        },
        || {
            let rows: Vec<Vec<String>> = out
                .modes
                .iter()
                .enumerate()
                .map(|(k, m)| {
                    let l: Vec<String> = m.lambdas.iter().map(f64::to_string).collect();
                    vec![(k + 1).to_string(), l.join(";"), m.entropy.to_string(), m.purity.to_string()]
                })
                .collect();
            csv_table(&["mode", "lambdas", "entropy", "purity"], &rows)
        },
    ))
}
