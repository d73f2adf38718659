//! Schmidt decomposition of a composite state, entanglement entropy (nats)
//! and purity, together with the closed-form entropy expressions of the
//! two- and three-mode solution families and the quasiboson comparison case.

use std::f64::consts::{FRAC_PI_2, LN_2};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{random_unitary, svd, CMatrix};

/// Schmidt coefficients below this are treated as exact zeros.
pub const ZERO_COEFFICIENT: f64 = 1e-14;

/// Below this `|K|` the removable singularity of [`entropy_k`] is handled
/// by its series expansion.
pub const K_SERIES_THRESHOLD: f64 = 1e-8;

/// Slack allowed on closed angle intervals.
pub const ANGLE_SLACK: f64 = 1e-12;

/// `Φ = left · diag(λ) · right†` with `λ` descending.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub lambdas: Vec<f64>,
    pub left: CMatrix,
    pub right: CMatrix,
}

impl SchmidtDecomposition {
    pub fn entropy(&self) -> f64 {
        entropy_from_lambdas(&self.lambdas)
    }

    pub fn purity(&self) -> f64 {
        purity_from_lambdas(&self.lambdas)
    }

    pub fn reconstruct(&self) -> CMatrix {
        let mut l = self.left.clone();
        for (j, &s) in self.lambdas.iter().enumerate() {
            l.column_mut(j).scale_mut(s);
        }
        l * self.right.adjoint()
    }
}

pub fn schmidt(phi: &CMatrix) -> Result<SchmidtDecomposition> {
    if phi.is_empty() || phi.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::Domain("Schmidt decomposition of a zero matrix".into()));
    }
    let s = svd(phi);
    Ok(SchmidtDecomposition {
        lambdas: s.singular_values,
        left: s.u,
        right: s.v,
    })
}

pub fn entropy(s: &SchmidtDecomposition) -> f64 {
    s.entropy()
}

pub fn purity(s: &SchmidtDecomposition) -> f64 {
    s.purity()
}

/// `−Σ λ² ln λ²` with `0 · ln 0 = 0`.
pub fn entropy_from_lambdas(lambdas: &[f64]) -> f64 {
    lambdas
        .iter()
        .filter(|l| l.abs() > ZERO_COEFFICIENT)
        .map(|l| {
            let p = l * l;
            -p * p.ln()
        })
        .sum()
}

pub fn purity_from_lambdas(lambdas: &[f64]) -> f64 {
    lambdas.iter().map(|l| l.powi(4)).sum()
}

/// `−Σ p ln p` over squared coefficients `p = λ²`.
pub fn entropy_from_weights(weights: &[f64]) -> f64 {
    weights.iter().map(|&p| -xlnx(p)).sum()
}

/// `x ln x` continued by 0 at the origin.
fn xlnx(x: f64) -> f64 {
    if x <= ZERO_COEFFICIENT * ZERO_COEFFICIENT {
        0.0
    } else {
        x * x.ln()
    }
}

/// `S₂(θ) = −sin²θ ln sin²θ − cos²θ ln cos²θ`.
pub fn s2(theta: f64) -> f64 {
    let s = theta.sin().powi(2);
    let c = theta.cos().powi(2);
    -xlnx(s) - xlnx(c)
}

/// Two-mode purity `(3 + cos 4θ)/4`.
pub fn purity_theta(theta: f64) -> f64 {
    (3.0 + (4.0 * theta).cos()) / 4.0
}

/// Entropy of `λ = (cos θ₁ cos θ₂, cos θ₁ sin θ₂, sin θ₁)`:
/// `S₂(θ₁) + cos²θ₁ S₂(θ₂)`.
pub fn entropy_three_mode_angles(theta1: f64, theta2: f64) -> f64 {
    s2(theta1) + theta1.cos().powi(2) * s2(theta2)
}

/// Squared-coefficient angles for both composite modes of a three-mode
/// pair with distinct Schmidt coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEntropy {
    pub s1: f64,
    pub s2: f64,
    /// `θ₁^(2)`, fixed by the orthogonality of the two coefficient vectors.
    pub theta1_2: f64,
    pub omega: f64,
}

/// Entropies of both modes of a three-mode diagonal pair.
///
/// `Ω` is taken from `cos 2Ω = cos 2θ₂^(1) cos 2θ₂^(2) + sin 2θ₂^(1) sin 2θ₂^(2) cos γ′`
/// and must lie in `[|θ₂^(1) − θ₂^(2)|, θ₂^(1) + θ₂^(2)]`; then
/// `cos²θ₁^(2) = sin²θ₁^(1) / (1 − sin²Ω cos²θ₁^(1))`.
pub fn entropy_pair_3mode(theta1_1: f64, theta2_1: f64, theta2_2: f64, gamma_prime: f64) -> Result<PairEntropy> {
    for (name, v) in [("θ₁^(1)", theta1_1), ("θ₂^(1)", theta2_1), ("θ₂^(2)", theta2_2)] {
        if !(0.0..=FRAC_PI_2).contains(&v) {
            return Err(Error::Domain(format!("{name} = {v} outside [0, π/2]")));
        }
    }
    if theta1_1 <= 0.0 {
        return Err(Error::Domain("θ₁^(1) must be positive (ctg θ₁^(1) enters)".into()));
    }
    let cos2omega = (2.0 * theta2_1).cos() * (2.0 * theta2_2).cos()
        + (2.0 * theta2_1).sin() * (2.0 * theta2_2).sin() * gamma_prime.cos();
    let omega = 0.5 * cos2omega.clamp(-1.0, 1.0).acos();
    let lo = (theta2_1 - theta2_2).abs();
    let hi = theta2_1 + theta2_2;
    if omega < lo - ANGLE_SLACK || omega > hi + ANGLE_SLACK {
        return Err(Error::Domain(format!(
            "Ω = {omega} outside [{lo}, {hi}]"
        )));
    }
    let c1 = theta1_1.cos().powi(2);
    let denom = 1.0 - omega.sin().powi(2) * c1;
    if denom <= 0.0 {
        return Err(Error::Domain("1 − sin²Ω cos²θ₁^(1) must be positive".into()));
    }
    // tan θ₁^(2) = cos θ₁^(1) |cos Ω| / sin θ₁^(1), stable near θ₁^(2) = 0
    let theta1_2 = (theta1_1.cos() * omega.cos().abs()).atan2(theta1_1.sin());

    let s1 = entropy_three_mode_angles(theta1_1, theta2_1);
    let x = c1 / theta1_1.sin().powi(2) * omega.cos().powi(2);
    let s2_value = (s2(theta2_2) - xlnx(x)) / (1.0 + x) + (1.0 + x).ln();
    Ok(PairEntropy {
        s1,
        s2: s2_value,
        theta1_2,
        omega,
    })
}

/// Orthonormal coefficient vectors from an SU(3) parametrization:
/// `λ = (cos θ₁ cos θ₂, cos θ₁ sin θ₂, sin θ₁)` and the matching row `φ`
/// with `Σ λ_i φ̄_i = 0`.
pub fn su3_orthonormal_pair(theta1: f64, theta2: f64, theta3: f64, gamma: f64) -> Result<([f64; 3], [Complex64; 3])> {
    for (name, v) in [("θ₁", theta1), ("θ₂", theta2), ("θ₃", theta3)] {
        if !(-ANGLE_SLACK..=FRAC_PI_2 + ANGLE_SLACK).contains(&v) {
            return Err(Error::Domain(format!("{name} = {v} outside [0, π/2]")));
        }
    }
    let (s1, c1) = theta1.sin_cos();
    let (s2_, c2) = theta2.sin_cos();
    let (s3, c3) = theta3.sin_cos();
    let e = Complex64::from_polar(1.0, gamma);
    let lambda = [c1 * c2, c1 * s2_, s1];
    let phi = [
        Complex64::from(-s1 * c2 * c3) - e * (s2_ * s3),
        e * (c2 * s3) - Complex64::from(s1 * s2_ * c3),
        Complex64::from(c1 * c3),
    ];
    Ok((lambda, phi))
}

fn check_open_quarter(theta: f64, name: &str) -> Result<()> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::Domain(format!("{name} = {theta} outside (0, π/2)")));
    }
    Ok(())
}

fn check_trace_modulus(tr: f64, name: &str) -> Result<()> {
    if !(-ANGLE_SLACK..=2.0 + ANGLE_SLACK).contains(&tr) {
        return Err(Error::Domain(format!("{name} = {tr} outside [0, 2]")));
    }
    Ok(())
}

/// Mode-1 entropy with two equal Schmidt coefficients,
/// `λ² = (cos²θ₁/2, cos²θ₁/2, sin²θ₁)`: `cos²θ₁ ln 2 + S₂(θ₁)`.
pub fn entropy_two_equal_s1(theta1: f64) -> Result<f64> {
    if !(-ANGLE_SLACK..=FRAC_PI_2 + ANGLE_SLACK).contains(&theta1) {
        return Err(Error::Domain(format!("θ₁ = {theta1} outside [0, π/2]")));
    }
    Ok(theta1.cos().powi(2) * LN_2 + s2(theta1))
}

/// Mode-2 entropy of the unitary-block family, in terms of `θ₁` of mode 1
/// and `|Tr U′|`.
pub fn entropy_two_equal_s2(theta1: f64, tr_u: f64) -> Result<f64> {
    check_open_quarter(theta1, "θ₁")?;
    check_trace_modulus(tr_u, "|Tr U′|")?;
    let t = theta1.tan().powi(2);
    let s = 0.25 * tr_u * tr_u;
    Ok((t + s).ln() - (t * (0.5 * t).ln() + xlnx(s)) / (t + s))
}

/// Mode-2 entropy of the two-equal family with unequal block coefficients,
/// in the three-angle form with `a = sin θ₁ cos θ₃`, `b = sin θ₃ e^{iγ}`,
/// `c = cos θ₁ cos θ₃`:
/// `ln 2 − |a+b|² ln|a+b| − |a−b|² ln|a−b| − c² ln(2c²)`.
pub fn entropy_s2_threeangle(theta1: f64, theta3: f64, gamma: f64) -> f64 {
    let a = Complex64::from(theta1.sin() * theta3.cos());
    let b = Complex64::from_polar(theta3.sin(), gamma);
    let c2 = (theta1.cos() * theta3.cos()).powi(2);
    let plus = (a + b).norm_sqr();
    let minus = (a - b).norm_sqr();
    // |z|² ln|z| = ½ |z|² ln|z|²
    LN_2 - 0.5 * xlnx(plus) - 0.5 * xlnx(minus) - if c2 > 0.0 { c2 * (2.0 * c2).ln() } else { 0.0 }
}

/// `s̃(θ₃) + s̃(θ₃ + 2π/3) + s̃(θ₃ − 2π/3)` with `s̃(θ) = −⅔cos²θ ln(⅔cos²θ)`.
pub fn entropy_symmetric_form(theta3: f64) -> f64 {
    let third = 2.0 * std::f64::consts::PI / 3.0;
    [theta3, theta3 + third, theta3 - third]
        .iter()
        .map(|&t| -xlnx(2.0 / 3.0 * t.cos().powi(2)))
        .sum()
}

/// `K = (sin²θ₁^(2) − ½) / (cos²θ₁^(2) cos γ′)`.
pub fn k_parameter(theta1_2: f64, gamma_prime: f64) -> Result<f64> {
    let c = theta1_2.cos().powi(2);
    let cg = gamma_prime.cos();
    if c.abs() < 1e-15 {
        return Err(Error::Domain("cos θ₁^(2) = 0".into()));
    }
    if cg.abs() < 1e-15 {
        return Err(Error::Domain("cos γ′ = 0".into()));
    }
    Ok((theta1_2.sin().powi(2) - 0.5) / (c * cg))
}

/// The bracketed factor `√(1−4K²) ln(2|K|/(1+√(1−4K²))) − ln|K|`.
fn k_factor(k: f64) -> f64 {
    let a = k.abs();
    if a < K_SERIES_THRESHOLD {
        if a == 0.0 {
            return 0.0;
        }
        return a * a * (1.0 - 2.0 * a.ln());
    }
    let r = (1.0 - 4.0 * a * a).max(0.0).sqrt();
    r * (2.0 * a / (1.0 + r)).ln() - a.ln()
}

/// Mode-2 entropy of the diagonal solution when all mode-1 coefficients are
/// equal; lies in `[ln 2, ln 3]`.
pub fn entropy_k(theta1_2: f64, gamma_prime: f64) -> Result<f64> {
    let k = k_parameter(theta1_2, gamma_prime)?;
    if k.abs() > 0.5 + ANGLE_SLACK {
        return Err(Error::Domain(format!("|K| = {} exceeds 1/2", k.abs())));
    }
    Ok(s2(theta1_2) + theta1_2.cos().powi(2) * k_factor(k.clamp(-0.5, 0.5)))
}

/// Mode-2 entropy with Schmidt weights `(1, 1, |Tr W′|²)/(2 + |Tr W′|²)`.
pub fn entropy_tr_w(tr_w: f64) -> Result<f64> {
    check_trace_modulus(tr_w, "|Tr W′|")?;
    let t2 = tr_w * tr_w;
    Ok((2.0 + t2).ln() - xlnx(t2) / (2.0 + t2))
}

/// Sign `κ = ±1` of the quadratic term in the quasiboson structure function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaSign {
    Plus,
    Minus,
}

impl KappaSign {
    pub fn value(self) -> f64 {
        match self {
            KappaSign::Plus => 1.0,
            KappaSign::Minus => -1.0,
        }
    }
}

/// Returns `m` if `f = 2/m` for a positive integer `m`.
pub fn quasiboson_order(f: f64) -> Result<usize> {
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::InvalidParameter(format!("f = {f} must be positive")));
    }
    let m = 2.0 / f;
    let rounded = m.round();
    if rounded < 1.0 || (m - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(Error::InvalidParameter(format!("f = {f} is not of the form 2/m")));
    }
    Ok(rounded as usize)
}

/// `φ(n) = (1 + κf/2) n − κ(f/2) n²`.
pub fn quasiboson_phi(n: usize, f: f64, kappa: KappaSign) -> Result<f64> {
    quasiboson_order(f)?;
    let k = kappa.value();
    let n = n as f64;
    Ok((1.0 + k * f / 2.0) * n - k * (f / 2.0) * n * n)
}

/// `(ln m, 1/m)`.
pub fn quasiboson_entropy_purity(m: usize) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    Ok(((m as f64).ln(), 1.0 / m as f64))
}

/// `U₁ diag{0…0, √(f/2) U(m), 0…0} U₂†` with Haar-random unitaries; the
/// `m × m` block starts at `(offset, offset)`.
pub fn quasiboson_phi_matrix<R: Rng + ?Sized>(
    m: usize,
    rows: usize,
    cols: usize,
    offset: usize,
    rng: &mut R,
) -> Result<CMatrix> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if offset + m > rows.min(cols) {
        return Err(Error::DimensionMismatch(format!(
            "an {m}×{m} block at offset {offset} does not fit a {rows}×{cols} matrix"
        )));
    }
    let scale = Complex64::from((1.0 / m as f64).sqrt());
    let block = random_unitary(m, rng) * scale;
    let mut inner = CMatrix::zeros(rows, cols);
    inner.view_mut((offset, offset), (m, m)).copy_from(&block);
    let u1 = random_unitary(rows, rng);
    let u2 = random_unitary(cols, rng);
    Ok(u1 * inner * u2.adjoint())
}
