use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, TAU};
use std::fs;
use std::path::PathBuf;

use cfent_core::entanglement::{
    entropy_k, entropy_pair_3mode, entropy_three_mode_angles, entropy_tr_w, k_parameter, purity_theta, s2,
};
use clap::{Args, ValueEnum};

use super::csv_table;
use crate::{CliError, Outcome, EXIT_PASS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveId {
    /// Two-mode entropy S₂(θ).
    S2,
    /// Two-mode purity (3 + cos 4θ)/4.
    Purity,
    /// Three-mode entropy surface over (θ₁, θ₂).
    EquiEntropyContour,
    /// All-equal mode-2 entropy over (θ₁^(2), γ′); points with |K| > 1/2 are omitted.
    #[value(name = "entropy-K", alias = "entropy-k")]
    EntropyK,
    /// Mode-2 entropy against |Tr W′|.
    #[value(name = "entropy-trW", alias = "entropy-trw")]
    EntropyTrW,
    /// Entropies of both modes of a distinct three-mode pair over (θ₂^(1), θ₂^(2)).
    #[value(name = "pair-3mode")]
    Pair3mode,
}

impl CurveId {
    fn name(self) -> &'static str {
        match self {
            CurveId::S2 => "s2",
            CurveId::Purity => "purity",
            CurveId::EquiEntropyContour => "equi-entropy-contour",
            CurveId::EntropyK => "entropy-K",
            CurveId::EntropyTrW => "entropy-trW",
            CurveId::Pair3mode => "pair-3mode",
        }
    }

    fn is_grid(self) -> bool {
        matches!(self, CurveId::EquiEntropyContour | CurveId::EntropyK | CurveId::Pair3mode)
    }

    /// Default `(from, to, steps)` of the first axis.
    fn axis1(self) -> (f64, f64, usize) {
        match self {
            CurveId::S2 | CurveId::Purity => (0.0, FRAC_PI_2, 181),
            CurveId::EntropyTrW => (0.0, 2.0, 201),
            CurveId::EquiEntropyContour | CurveId::EntropyK => (0.0, FRAC_PI_2, 91),
            CurveId::Pair3mode => (0.0, FRAC_PI_2, 46),
        }
    }

    fn axis2(self) -> (f64, f64, usize) {
        match self {
            CurveId::EntropyK => (0.0, TAU, 91),
            CurveId::Pair3mode => (0.0, FRAC_PI_2, 46),
            _ => (0.0, FRAC_PI_2, 91),
        }
    }

    /// Closed range every grid coordinate must lie in.
    fn domain1(self) -> (f64, f64) {
        match self {
            CurveId::S2 | CurveId::Purity => (f64::NEG_INFINITY, f64::INFINITY),
            CurveId::EntropyTrW => (0.0, 2.0),
            _ => (0.0, FRAC_PI_2),
        }
    }

    fn domain2(self) -> (f64, f64) {
        match self {
            CurveId::EntropyK => (f64::NEG_INFINITY, f64::INFINITY),
            _ => (0.0, FRAC_PI_2),
        }
    }
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[arg(value_enum)]
    pub curve: CurveId,
    /// Start of the first axis.
    #[arg(long)]
    pub from: Option<f64>,
    /// End of the first axis.
    #[arg(long)]
    pub to: Option<f64>,
    /// Points on the first axis (at least 2).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Start of the second axis (surfaces only).
    #[arg(long)]
    pub from2: Option<f64>,
    #[arg(long)]
    pub to2: Option<f64>,
    #[arg(long)]
    pub steps2: Option<usize>,
    /// Fixed θ₁^(1) for pair-3mode.
    #[arg(long, default_value_t = FRAC_PI_6)]
    pub theta1: f64,
    /// Fixed γ′ for pair-3mode.
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Output CSV path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Axis {
    from: f64,
    to: f64,
    steps: usize,
}

impl Axis {
    fn resolve(
        from: Option<f64>,
        to: Option<f64>,
        steps: Option<usize>,
        default: (f64, f64, usize),
        domain: (f64, f64),
        flag: &str,
    ) -> Result<Self, CliError> {
        let a = Axis {
            from: from.unwrap_or(default.0),
            to: to.unwrap_or(default.1),
            steps: steps.unwrap_or(default.2),
        };
        if a.steps < 2 {
            return Err(CliError::Input(format!("--steps{flag} must be at least 2, got {}", a.steps)));
        }
        for (name, v) in [("from", a.from), ("to", a.to)] {
            if !v.is_finite() || v < domain.0 || v > domain.1 {
                return Err(CliError::Input(format!(
                    "--{name}{flag} = {v} outside the domain [{}, {}]",
                    domain.0, domain.1
                )));
            }
        }
        Ok(a)
    }

    fn point(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            self.to
        } else {
            self.from + (self.to - self.from) * i as f64 / (self.steps - 1) as f64
        }
    }

    fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.steps).map(|i| self.point(i))
    }
}

fn num(v: f64) -> String {
    // print −0 as 0
    (v + 0.0).to_string()
}

pub fn run(args: CurvesArgs) -> Result<Outcome, CliError> {
    let id = args.curve;
    let a1 = Axis::resolve(args.from, args.to, args.steps, id.axis1(), id.domain1(), "")?;
    let a2 = if id.is_grid() {
        Some(Axis::resolve(args.from2, args.to2, args.steps2, id.axis2(), id.domain2(), "2")?)
    } else {
        if args.from2.is_some() || args.to2.is_some() || args.steps2.is_some() {
            return Err(CliError::Input(format!("curve {} has a single axis", id.name())));
        }
        None
    };
    if id == CurveId::Pair3mode && !(args.theta1 > 0.0 && args.theta1 <= FRAC_PI_2) {
        return Err(CliError::Input(format!("--theta1 = {} outside (0, π/2]", args.theta1)));
    }

    let mut flags = format!("# cfent curves {} --from {} --to {} --steps {}", id.name(), a1.from, a1.to, a1.steps);
    if let Some(a2) = &a2 {
        flags += &format!(" --from2 {} --to2 {} --steps2 {}", a2.from, a2.to, a2.steps);
    }
    if id == CurveId::Pair3mode {
        flags += &format!(" --theta1 {} --gamma {}", args.theta1, args.gamma);
    }

    let (header, rows): (Vec<&str>, Vec<Vec<String>>) = match id {
        CurveId::S2 => (vec!["theta", "s2"], a1.points().map(|t| vec![num(t), num(s2(t))]).collect()),
        CurveId::Purity => (
            vec!["theta", "purity"],
            a1.points().map(|t| vec![num(t), num(purity_theta(t))]).collect(),
        ),
        CurveId::EntropyTrW => (
            vec!["tr_w", "entropy"],
            a1.points()
                .map(|t| Ok(vec![num(t), num(entropy_tr_w(t)?)]))
                .collect::<Result<_, cfent_core::Error>>()?,
        ),
        CurveId::EquiEntropyContour => {
            let a2 = a2.as_ref().expect("grid");
            let mut rows = Vec::new();
            for t1 in a1.points() {
                for t2 in a2.points() {
                    rows.push(vec![num(t1), num(t2), num(entropy_three_mode_angles(t1, t2))]);
                }
            }
            (vec!["theta1", "theta2", "entropy"], rows)
        }
        CurveId::EntropyK => {
            let a2 = a2.as_ref().expect("grid");
            let mut rows = Vec::new();
            for t in a1.points() {
                for g in a2.points() {
                    if let (Ok(k), Ok(s)) = (k_parameter(t, g), entropy_k(t, g)) {
                        rows.push(vec![num(t), num(g), num(k), num(s)]);
                    }
                }
            }
            (vec!["theta1_2", "gamma_prime", "k", "entropy"], rows)
        }
        CurveId::Pair3mode => {
            let a2 = a2.as_ref().expect("grid");
            let mut rows = Vec::new();
            for t21 in a1.points() {
                for t22 in a2.points() {
                    let p = entropy_pair_3mode(args.theta1, t21, t22, args.gamma)?;
                    rows.push(vec![
                        num(t21),
                        num(t22),
                        num(p.omega),
                        num(p.theta1_2),
                        num(p.s1),
                        num(p.s2),
                    ]);
                }
            }
            (vec!["theta2_1", "theta2_2", "omega", "theta1_2", "s1", "s2"], rows)
        }
    };
    let text = format!("{flags}\n{}", csv_table(&header, &rows));
    match &args.out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            Ok(Outcome {
                code: EXIT_PASS,
                stdout: format!("wrote {} rows to {}\n", rows.len(), path.display()),
            })
        }
        None => Ok(Outcome {
            code: EXIT_PASS,
            stdout: text,
        }),
    }
}
