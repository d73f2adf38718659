//! Generators for the analytic solution families of the realization
//! conditions. Each family fixes the mode-1 Schmidt coefficients `D₁` (and
//! for the deformed families `χ(2)` and `U₁`) and maps a set of named free
//! parameters to a pair `Φ₁ = U₁D₁V₁†`, `Φ₂ = U₁Φ̃₂V₁†`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use super::{check_su2, DeformationSpec, TIE_TOLERANCE};
use crate::entanglement::{entropy_pair_3mode, k_parameter, su3_orthonormal_pair};
use crate::error::{Error, Result};
use crate::linalg::{
    c64, complex_diagonal, phase, random_angle, random_special_unitary, random_unitary, real_diagonal, su2, CMatrix,
};

/// Gap kept between coefficients when drawing random non-degenerate spectra.
const SAMPLING_GAP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyTag {
    /// Two modes, `λ₁ ≠ λ₂`: `Φ̃₂ = e^{iη′} diag(λ₂, −λ₁)`.
    TwoModeDistinct,
    /// Two modes, `λ₁ = λ₂`: `Φ̃₂ = e^{iη} λ Ũ` with `Ũ ∈ SU(2)` traceless.
    TwoModeEqual,
    /// Deformed, `χ(2) = 0` or `λ₁ = λ₂`: `Φ̃₂ = κ R diag(λ₂, λ₁)`.
    DeformedB,
    /// Deformed, `uv = 0`, `λ₁ ≠ λ₂`: `Φ̃₂ = κ diag(λ₂, −λ₁)`.
    DeformedCDiagonal,
    /// Deformed, `χ(2) = 1`, `uv = 0`, `λ = (1, 0)`: `Φ̃₂ = κ [[0, 1], [0, 0]]`.
    DeformedCNilpotent,
    ThreeModeDistinct,
    ThreeModeTwoEqual,
    ThreeModeAllEqual,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 8] = [
        FamilyTag::TwoModeDistinct,
        FamilyTag::TwoModeEqual,
        FamilyTag::DeformedB,
        FamilyTag::DeformedCDiagonal,
        FamilyTag::DeformedCNilpotent,
        FamilyTag::ThreeModeDistinct,
        FamilyTag::ThreeModeTwoEqual,
        FamilyTag::ThreeModeAllEqual,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyTag::TwoModeDistinct => "two-mode-distinct",
            FamilyTag::TwoModeEqual => "two-mode-equal",
            FamilyTag::DeformedB => "deformed-b",
            FamilyTag::DeformedCDiagonal => "deformed-c-diagonal",
            FamilyTag::DeformedCNilpotent => "deformed-c-nilpotent",
            FamilyTag::ThreeModeDistinct => "3mode-distinct",
            FamilyTag::ThreeModeTwoEqual => "3mode-two-equal",
            FamilyTag::ThreeModeAllEqual => "3mode-all-equal",
        }
    }

    pub fn modes(self) -> usize {
        match self {
            FamilyTag::ThreeModeDistinct | FamilyTag::ThreeModeTwoEqual | FamilyTag::ThreeModeAllEqual => 3,
            _ => 2,
        }
    }

    pub fn is_deformed(self) -> bool {
        matches!(
            self,
            FamilyTag::DeformedB | FamilyTag::DeformedCDiagonal | FamilyTag::DeformedCNilpotent
        )
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = FamilyTag::ALL.iter().map(|t| t.as_str()).collect();
                Error::InvalidParameter(format!("unknown family '{s}', expected one of {}", known.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParameterDomain {
    /// Any real angle; sampled uniformly on `[0, 2π)`.
    Phase,
    /// Closed interval.
    Interval(f64, f64),
    /// Integer branch selector in `0..n`.
    Choice(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParameter {
    pub name: &'static str,
    pub domain: ParameterDomain,
    /// Value used when the parameter is not supplied.
    pub canonical: f64,
}

impl FreeParameter {
    const fn phase(name: &'static str) -> Self {
        Self {
            name,
            domain: ParameterDomain::Phase,
            canonical: 0.0,
        }
    }

    const fn interval(name: &'static str, lo: f64, hi: f64, canonical: f64) -> Self {
        Self {
            name,
            domain: ParameterDomain::Interval(lo, hi),
            canonical,
        }
    }

    const fn choice(name: &'static str, n: usize) -> Self {
        Self {
            name,
            domain: ParameterDomain::Choice(n),
            canonical: 0.0,
        }
    }

    fn validate(&self, value: f64) -> Result<()> {
        let ok = value.is_finite()
            && match self.domain {
                ParameterDomain::Phase => true,
                ParameterDomain::Interval(lo, hi) => (lo..=hi).contains(&value),
                ParameterDomain::Choice(n) => value.fract() == 0.0 && value >= 0.0 && (value as usize) < n,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{} = {value} outside its domain {:?}",
                self.name, self.domain
            )))
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.domain {
            ParameterDomain::Phase => random_angle(rng),
            ParameterDomain::Interval(lo, hi) => rng.random_range(lo..=hi),
            ParameterDomain::Choice(n) => rng.random_range(0..n) as f64,
        }
    }
}

pub type Params = BTreeMap<String, f64>;

/// Outer unitaries of a generated pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub u1: CMatrix,
    pub v1: CMatrix,
}

impl Frame {
    pub fn identity(n: usize) -> Self {
        Self {
            u1: CMatrix::identity(n, n),
            v1: CMatrix::identity(n, n),
        }
    }

    /// `U₁` Haar on SU(n), `V₁` Haar on U(n).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            u1: random_special_unitary(n, rng),
            v1: random_unitary(n, rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegeneracyPattern {
    Distinct,
    TwoEqual,
    AllEqual,
}

/// Classifies coefficients by ties within [`TIE_TOLERANCE`].
pub fn detect_pattern(d1: &[f64]) -> DegeneracyPattern {
    let mut ties = 0;
    for i in 0..d1.len() {
        for j in (i + 1)..d1.len() {
            if (d1[i] - d1[j]).abs() < TIE_TOLERANCE {
                ties += 1;
            }
        }
    }
    let all = d1.len() * (d1.len().saturating_sub(1)) / 2;
    if ties == 0 {
        DegeneracyPattern::Distinct
    } else if ties == all {
        DegeneracyPattern::AllEqual
    } else {
        DegeneracyPattern::TwoEqual
    }
}

/// A generated solution together with its canonical data.
#[derive(Debug, Clone)]
pub struct SolutionPair {
    pub tag: FamilyTag,
    pub spec: DeformationSpec,
    pub phi1: CMatrix,
    pub phi2: CMatrix,
    /// Mode-1 coefficients, descending.
    pub d1: Vec<f64>,
    /// `Φ̃₂ = U₁†Φ₂V₁` in the frame where `Φ₁ = U₁ diag(d1) V₁†`.
    pub phi2_tilde: CMatrix,
    pub u1: CMatrix,
    pub v1: CMatrix,
    /// Mode-2 Schmidt coefficients implied by the construction, descending.
    pub declared_lambda2: Vec<f64>,
    pub params: Params,
}

impl SolutionPair {
    pub fn phis(&self) -> [CMatrix; 2] {
        [self.phi1.clone(), self.phi2.clone()]
    }
}

/// One analytic family with its fixed data.
#[derive(Debug, Clone)]
pub struct SolutionFamily {
    pub tag: FamilyTag,
    /// Mode-1 coefficients, descending.
    pub d1: Vec<f64>,
    pub spec: DeformationSpec,
    /// `U₁` fixed by the deformed conditions; when set it overrides the
    /// frame's `U₁`.
    pub fixed_u1: Option<CMatrix>,
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn check_normalized(d1: &[f64]) -> Result<()> {
    if d1.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Schmidt coefficients must be non-negative, got {d1:?}"
        )));
    }
    let n: f64 = d1.iter().map(|x| x * x).sum();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

/// `R = [[|u|² − |v|², 2ūv], [2uv̄, |v|² − |u|²]]`.
pub fn r_matrix(u: Complex64, v: Complex64) -> CMatrix {
    let d = u.norm_sqr() - v.norm_sqr();
    CMatrix::from_row_slice(2, 2, &[c64(d, 0.0), u.conj() * v * 2.0, u * v.conj() * 2.0, c64(-d, 0.0)])
}

/// Permutation taking the internal order `(pair, pair, single)` of a
/// two-equal spectrum to descending order.
fn two_equal_permutation(d1: &[f64]) -> (f64, f64, CMatrix) {
    if (d1[0] - d1[1]).abs() < TIE_TOLERANCE {
        (d1[0], d1[2], CMatrix::identity(3, 3))
    } else {
        // descending (single, pair, pair): internal index 2 goes first
        let mut p = CMatrix::zeros(3, 3);
        p[(0, 2)] = c64(1.0, 0.0);
        p[(1, 0)] = c64(1.0, 0.0);
        p[(2, 1)] = c64(1.0, 0.0);
        (d1[1], d1[0], p)
    }
}

impl SolutionFamily {
    pub fn new(tag: FamilyTag, d1: Vec<f64>, spec: DeformationSpec, fixed_u1: Option<CMatrix>) -> Result<Self> {
        let family = Self {
            tag,
            d1: sorted_desc(d1),
            spec,
            fixed_u1,
        };
        family.validate()?;
        Ok(family)
    }

    fn validate(&self) -> Result<()> {
        let tag = self.tag;
        if self.d1.len() != tag.modes() {
            return Err(Error::DimensionMismatch(format!(
                "family {tag} needs {} coefficients, got {}",
                tag.modes(),
                self.d1.len()
            )));
        }
        check_normalized(&self.d1)?;
        let pattern = detect_pattern(&self.d1);
        let mismatch = |what: &str| Err(Error::PatternMismatch(format!("family {tag} requires {what}, got {:?}", self.d1)));
        match tag {
            FamilyTag::TwoModeDistinct | FamilyTag::DeformedCDiagonal | FamilyTag::ThreeModeDistinct
                if pattern != DegeneracyPattern::Distinct =>
            {
                return mismatch("distinct coefficients")
            }
            FamilyTag::TwoModeEqual | FamilyTag::ThreeModeAllEqual if pattern != DegeneracyPattern::AllEqual => {
                return mismatch("equal coefficients")
            }
            FamilyTag::ThreeModeTwoEqual => {
                if pattern != DegeneracyPattern::TwoEqual {
                    return mismatch("exactly two equal coefficients");
                }
                let (pair, single, _) = two_equal_permutation(&self.d1);
                if pair <= 0.0 || single <= 0.0 {
                    return mismatch("nonzero coefficients");
                }
            }
            FamilyTag::DeformedCNilpotent if (self.d1[0] - 1.0).abs() > TIE_TOLERANCE => {
                return mismatch("coefficients (1, 0)")
            }
            _ => {}
        }
        if tag.is_deformed() {
            let u1 = self
                .fixed_u1
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter(format!("family {tag} needs a fixed U₁")))?;
            check_su2(u1)?;
            let (u, v) = (u1[(0, 0)], u1[(0, 1)]);
            let chi2 = self.spec.chi2;
            match tag {
                FamilyTag::DeformedB => {
                    if chi2.abs() > TIE_TOLERANCE && pattern != DegeneracyPattern::AllEqual {
                        return Err(Error::InvalidParameter(format!(
                            "family {tag} requires χ(2) = 0 or λ₁ = λ₂, got χ(2) = {chi2}"
                        )));
                    }
                }
                FamilyTag::DeformedCDiagonal | FamilyTag::DeformedCNilpotent => {
                    if (u * v).norm() > TIE_TOLERANCE {
                        return Err(Error::InvalidParameter(format!("family {tag} requires uv = 0")));
                    }
                    if tag == FamilyTag::DeformedCNilpotent && (chi2 - 1.0).abs() > TIE_TOLERANCE {
                        return Err(Error::InvalidParameter(format!(
                            "family {tag} requires χ(2) = 1, got χ(2) = {chi2}"
                        )));
                    }
                }
                _ => {}
            }
        } else if let Some(u1) = &self.fixed_u1 {
            if u1.shape() != (self.d1.len(), self.d1.len()) {
                return Err(Error::DimensionMismatch("fixed U₁ has the wrong size".into()));
            }
        }
        Ok(())
    }

    pub fn free_parameters(&self) -> Vec<FreeParameter> {
        match self.tag {
            FamilyTag::TwoModeDistinct => vec![FreeParameter::phase("eta_prime")],
            FamilyTag::TwoModeEqual => vec![
                FreeParameter::phase("eta"),
                FreeParameter::interval("u_im", -1.0, 1.0, 1.0),
                FreeParameter::phase("u2_arg"),
            ],
            FamilyTag::DeformedB | FamilyTag::DeformedCDiagonal | FamilyTag::DeformedCNilpotent => {
                vec![FreeParameter::phase("kappa_phase")]
            }
            FamilyTag::ThreeModeDistinct => vec![
                FreeParameter::interval("theta3", 0.0, FRAC_PI_2, FRAC_PI_4),
                FreeParameter::phase("gamma"),
                FreeParameter::phase("eta"),
            ],
            FamilyTag::ThreeModeTwoEqual => vec![
                FreeParameter::choice("branch", 2),
                FreeParameter::phase("eta"),
                FreeParameter::interval("tr_u", 0.0, 2.0, 1.0),
                FreeParameter::interval("u_im_frac", -1.0, 1.0, 0.0),
                FreeParameter::phase("u2_arg"),
                FreeParameter::choice("re_sign", 2),
                FreeParameter::interval("theta3", 0.0, FRAC_PI_2, FRAC_PI_4),
                FreeParameter::phase("gamma"),
            ],
            FamilyTag::ThreeModeAllEqual => vec![
                FreeParameter::choice("branch", 3),
                FreeParameter::phase("eta"),
                FreeParameter::interval("theta3", 0.0, FRAC_PI_2, FRAC_PI_4),
                FreeParameter::phase("gamma"),
                FreeParameter::interval("tr_w", 0.0, 2.0, 0.5),
                FreeParameter::interval("w_im_frac", -1.0, 1.0, 0.0),
                FreeParameter::phase("w2_arg"),
                FreeParameter::choice("root", 3),
            ],
        }
    }

    pub fn canonical_params(&self) -> Params {
        self.free_parameters()
            .iter()
            .map(|p| (p.name.to_string(), p.canonical))
            .collect()
    }

    pub fn sample_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Params {
        self.free_parameters()
            .iter()
            .map(|p| (p.name.to_string(), p.sample(rng)))
            .collect()
    }

    /// Merges `params` over the canonical values after validating them.
    fn resolve(&self, params: &Params) -> Result<Params> {
        let free = self.free_parameters();
        let mut out = self.canonical_params();
        for (name, &value) in params {
            let p = free.iter().find(|p| p.name == name).ok_or_else(|| {
                let known: Vec<_> = free.iter().map(|p| p.name).collect();
                Error::InvalidParameter(format!(
                    "family {} has no parameter '{name}' (parameters: {})",
                    self.tag,
                    known.join(", ")
                ))
            })?;
            p.validate(value)?;
            out.insert(name.clone(), value);
        }
        Ok(out)
    }

    /// Builds `(Φ̃₂, declared λ^(2))` in the descending frame of `D₁`.
    fn inner(&self, p: &Params) -> Result<(CMatrix, Vec<f64>)> {
        let get = |name: &str| p[name];
        let d = &self.d1;
        Ok(match self.tag {
            FamilyTag::TwoModeDistinct => {
                let k = phase(get("eta_prime"));
                (complex_diagonal(&[k * d[1], -k * d[0]]), d.clone())
            }
            FamilyTag::TwoModeEqual => {
                let a = get("u_im");
                let w = Complex64::from_polar((1.0 - a * a).max(0.0).sqrt(), get("u2_arg"));
                let u = su2(c64(0.0, a), w);
                (u * (phase(get("eta")) * d[0]), d.clone())
            }
            FamilyTag::DeformedB => {
                let u1 = self.fixed_u1.as_ref().expect("validated");
                let r = r_matrix(u1[(0, 0)], u1[(0, 1)]);
                (r * real_diagonal(&[d[1], d[0]]) * phase(get("kappa_phase")), d.clone())
            }
            FamilyTag::DeformedCDiagonal => {
                let k = phase(get("kappa_phase"));
                (complex_diagonal(&[k * d[1], -k * d[0]]), d.clone())
            }
            FamilyTag::DeformedCNilpotent => {
                let mut m = CMatrix::zeros(2, 2);
                m[(0, 1)] = phase(get("kappa_phase"));
                (m, vec![1.0, 0.0])
            }
            FamilyTag::ThreeModeDistinct => {
                let theta1 = d[2].clamp(0.0, 1.0).asin();
                let theta2 = d[1].atan2(d[0]);
                let (_, phi) = su3_orthonormal_pair(theta1, theta2, get("theta3"), get("gamma"))?;
                let e = phase(get("eta"));
                let phi: Vec<Complex64> = phi.iter().map(|z| z * e).collect();
                let declared = sorted_desc(phi.iter().map(|z| z.norm()).collect());
                (complex_diagonal(&phi), declared)
            }
            FamilyTag::ThreeModeTwoEqual => {
                let (pair, single, perm) = two_equal_permutation(d);
                let theta1 = single.clamp(0.0, 1.0).asin();
                let e = phase(get("eta"));
                let (inner, declared) = if get("branch") == 0.0 {
                    let t = 0.5 * get("tr_u");
                    let re = if get("re_sign") == 0.0 { t } else { -t };
                    let rest = (1.0 - t * t).max(0.0).sqrt();
                    let frac = get("u_im_frac");
                    let u1p = c64(re, frac * rest);
                    let u2p = Complex64::from_polar(rest * (1.0 - frac * frac).max(0.0).sqrt(), get("u2_arg"));
                    let tan2 = theta1.tan().powi(2);
                    let lambda2 = (tan2 / (2.0 * (tan2 + t * t))).sqrt();
                    let phi33 = e * (-2.0 * pair * lambda2 * re / single);
                    let mut m = CMatrix::zeros(3, 3);
                    m.view_mut((0, 0), (2, 2)).copy_from(&(su2(u1p, u2p) * (e * lambda2)));
                    m[(2, 2)] = phi33;
                    (m, sorted_desc(vec![lambda2, lambda2, phi33.norm()]))
                } else {
                    let (_, phi) = su3_orthonormal_pair(theta1, FRAC_PI_4, get("theta3"), get("gamma"))?;
                    let phi: Vec<Complex64> = phi.iter().map(|z| z * e).collect();
                    let declared = sorted_desc(phi.iter().map(|z| z.norm()).collect());
                    (complex_diagonal(&phi), declared)
                };
                (&perm * inner * perm.transpose(), declared)
            }
            FamilyTag::ThreeModeAllEqual => {
                let e = phase(get("eta"));
                match get("branch") as usize {
                    0 => {
                        let theta1 = (1.0f64 / 3.0).sqrt().asin();
                        let (_, phi) = su3_orthonormal_pair(theta1, FRAC_PI_4, get("theta3"), get("gamma"))?;
                        let phi: Vec<Complex64> = phi.iter().map(|z| z * e).collect();
                        let declared = sorted_desc(phi.iter().map(|z| z.norm()).collect());
                        (complex_diagonal(&phi), declared)
                    }
                    1 => {
                        let tr = get("tr_w");
                        let re = 0.5 * tr;
                        let rest = (1.0 - re * re).max(0.0).sqrt();
                        let frac = get("w_im_frac");
                        let w1 = c64(re, frac * rest);
                        let w2 = Complex64::from_polar(rest * (1.0 - frac * frac).max(0.0).sqrt(), get("w2_arg"));
                        // ω³ = −1 makes Tr(D₂W) vanish
                        let omega = phase(PI * (2.0 * get("root") + 1.0) / 3.0);
                        let lambda = 1.0 / (2.0 + tr * tr).sqrt();
                        let mut m = CMatrix::zeros(3, 3);
                        m.view_mut((0, 0), (2, 2)).copy_from(&(su2(w1, w2) * (e * lambda / omega)));
                        m[(2, 2)] = e * omega * omega * (tr * lambda);
                        (m, sorted_desc(vec![lambda, lambda, tr * lambda]))
                    }
                    _ => {
                        let w = phase(TAU / 3.0);
                        let s = (1.0f64 / 3.0).sqrt();
                        (complex_diagonal(&[e * s, e * w * s, e * w * w * s]), vec![s; 3])
                    }
                }
            }
        })
    }

    /// Maps parameters (missing ones take canonical values) and a frame to
    /// a solution pair.
    pub fn generate(&self, params: &Params, frame: &Frame) -> Result<SolutionPair> {
        let n = self.d1.len();
        if frame.u1.shape() != (n, n) || frame.v1.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("frame must be {n}×{n}")));
        }
        let resolved = self.resolve(params)?;
        let (phi2_tilde, declared_lambda2) = self.inner(&resolved)?;
        let u1 = self.fixed_u1.clone().unwrap_or_else(|| frame.u1.clone());
        let v1 = frame.v1.clone();
        let phi1 = &u1 * real_diagonal(&self.d1) * v1.adjoint();
        let phi2 = &u1 * &phi2_tilde * v1.adjoint();
        Ok(SolutionPair {
            tag: self.tag,
            spec: self.spec,
            phi1,
            phi2,
            d1: self.d1.clone(),
            phi2_tilde,
            u1,
            v1,
            declared_lambda2,
            params: resolved,
        })
    }

    /// Canonical parameters in the identity frame.
    pub fn canonical(&self) -> Result<SolutionPair> {
        self.generate(&Params::new(), &Frame::identity(self.d1.len()))
    }

    /// Random parameters in a random frame.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SolutionPair> {
        let params = self.sample_params(rng);
        let frame = Frame::random(self.d1.len(), rng);
        self.generate(&params, &frame)
    }

    /// A member of the family with randomly drawn fixed data (`D₁`, `χ(2)`, `U₁`).
    pub fn random<R: Rng + ?Sized>(tag: FamilyTag, rng: &mut R) -> Self {
        let nondeformed = DeformationSpec::nondeformed();
        let distinct2 = |rng: &mut R| {
            let theta = rng.random_range(SAMPLING_GAP..FRAC_PI_4 - SAMPLING_GAP);
            vec![theta.cos(), theta.sin()]
        };
        let diagonal_u1 = |rng: &mut R| {
            if rng.random_bool(0.5) {
                su2(phase(random_angle(rng)), c64(0.0, 0.0))
            } else {
                su2(c64(0.0, 0.0), phase(random_angle(rng)))
            }
        };
        let family = match tag {
            FamilyTag::TwoModeDistinct => Self::new(tag, distinct2(rng), nondeformed, None),
            FamilyTag::TwoModeEqual => Self::new(tag, vec![FRAC_1_SQRT_2; 2], nondeformed, None),
            FamilyTag::DeformedB => {
                let (d1, chi2) = if rng.random_bool(0.5) {
                    (distinct2(rng), 0.0)
                } else {
                    (vec![FRAC_1_SQRT_2; 2], rng.random_range(0.0..4.0))
                };
                let u1 = random_special_unitary(2, rng);
                Self::new(tag, d1, DeformationSpec { chi2 }, Some(u1))
            }
            FamilyTag::DeformedCDiagonal => {
                let d1 = distinct2(rng);
                let chi2 = rng.random_range(0.0..4.0);
                let u1 = diagonal_u1(rng);
                Self::new(tag, d1, DeformationSpec { chi2 }, Some(u1))
            }
            FamilyTag::DeformedCNilpotent => {
                let u1 = diagonal_u1(rng);
                Self::new(tag, vec![1.0, 0.0], DeformationSpec { chi2: 1.0 }, Some(u1))
            }
            FamilyTag::ThreeModeDistinct => loop {
                let raw: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
                let n = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
                let d1 = sorted_desc(raw.iter().map(|x| x / n).collect());
                if d1[0] - d1[1] > SAMPLING_GAP && d1[1] - d1[2] > SAMPLING_GAP && d1[2] > SAMPLING_GAP {
                    break Self::new(tag, d1, nondeformed, None);
                }
            },
            FamilyTag::ThreeModeTwoEqual => loop {
                let theta = rng.random_range(0.05..FRAC_PI_2 - 0.05);
                let pair = theta.cos() * FRAC_1_SQRT_2;
                let single = theta.sin();
                if (pair - single).abs() > SAMPLING_GAP {
                    break Self::new(tag, vec![pair, pair, single], nondeformed, None);
                }
            },
            FamilyTag::ThreeModeAllEqual => Self::new(tag, vec![(1.0f64 / 3.0).sqrt(); 3], nondeformed, None),
        };
        family.expect("randomly drawn family data satisfy the family constraints")
    }
}

/// Undeformed two-mode solutions for given `D₁`.
pub fn solve_two_mode_nondeformed(d1: &[f64]) -> Result<SolutionFamily> {
    if d1.len() != 2 {
        return Err(Error::DimensionMismatch(format!("expected 2 coefficients, got {}", d1.len())));
    }
    check_normalized(d1)?;
    let tag = match detect_pattern(d1) {
        DegeneracyPattern::Distinct => FamilyTag::TwoModeDistinct,
        _ => FamilyTag::TwoModeEqual,
    };
    SolutionFamily::new(tag, d1.to_vec(), DeformationSpec::nondeformed(), None)
}

/// Deformed two-mode solutions for given `D₁` and `U₁ ∈ SU(2)`: every case
/// whose conditions hold is returned.
pub fn solve_two_mode_deformed(d1: &[f64], u1: &CMatrix, spec: DeformationSpec) -> Result<Vec<SolutionFamily>> {
    if d1.len() != 2 {
        return Err(Error::DimensionMismatch(format!("expected 2 coefficients, got {}", d1.len())));
    }
    check_normalized(d1)?;
    check_su2(u1)?;
    let d1 = sorted_desc(d1.to_vec());
    let chi2 = spec.chi2;
    let equal = detect_pattern(&d1) == DegeneracyPattern::AllEqual;
    if (chi2 - 2.0).abs() < TIE_TOLERANCE {
        let mut f = solve_two_mode_nondeformed(&d1)?;
        f.spec = spec;
        f.fixed_u1 = Some(u1.clone());
        return Ok(vec![f]);
    }
    let mut out = Vec::new();
    if chi2.abs() < TIE_TOLERANCE || equal {
        out.push(SolutionFamily::new(FamilyTag::DeformedB, d1.clone(), spec, Some(u1.clone()))?);
    }
    let uv = (u1[(0, 0)] * u1[(0, 1)]).norm();
    if uv < TIE_TOLERANCE && !equal {
        out.push(SolutionFamily::new(
            FamilyTag::DeformedCDiagonal,
            d1.clone(),
            spec,
            Some(u1.clone()),
        )?);
        if (chi2 - 1.0).abs() < TIE_TOLERANCE && (d1[0] - 1.0).abs() < TIE_TOLERANCE {
            out.push(SolutionFamily::new(
                FamilyTag::DeformedCNilpotent,
                d1.clone(),
                spec,
                Some(u1.clone()),
            )?);
        }
    }
    Ok(out)
}

/// Undeformed three-mode solutions for `D₁` with the declared degeneracy.
pub fn solve_three_mode(d1: &[f64], pattern: DegeneracyPattern) -> Result<SolutionFamily> {
    if d1.len() != 3 {
        return Err(Error::DimensionMismatch(format!("expected 3 coefficients, got {}", d1.len())));
    }
    check_normalized(d1)?;
    let found = detect_pattern(d1);
    if found != pattern {
        return Err(Error::PatternMismatch(format!(
            "declared {pattern:?} but coefficients {d1:?} are {found:?}"
        )));
    }
    let tag = match pattern {
        DegeneracyPattern::Distinct => FamilyTag::ThreeModeDistinct,
        DegeneracyPattern::TwoEqual => FamilyTag::ThreeModeTwoEqual,
        DegeneracyPattern::AllEqual => FamilyTag::ThreeModeAllEqual,
    };
    SolutionFamily::new(tag, d1.to_vec(), DeformationSpec::nondeformed(), None)
}

/// Diagonal three-mode pair in the angle parametrization
/// `λ = (cos θ₁ cos θ₂, cos θ₁ sin θ₂, sin θ₁)` for mode 1 and
/// `|φ| = (cos θ₁′ cos θ₂′, cos θ₁′ sin θ₂′, sin θ₁′)` for mode 2, where
/// `θ₁′` follows from orthogonality and `γ′ = arg(φ̄₁₁φ₂₂)`.
pub fn three_mode_distinct_from_angles(
    theta1_1: f64,
    theta2_1: f64,
    theta2_2: f64,
    gamma_prime: f64,
    frame: &Frame,
) -> Result<SolutionPair> {
    let pair = entropy_pair_3mode(theta1_1, theta2_1, theta2_2, gamma_prime)?;
    let lambda = [theta1_1.cos() * theta2_1.cos(), theta1_1.cos() * theta2_1.sin(), theta1_1.sin()];
    let c2 = pair.theta1_2.cos();
    let phi11 = c64(c2 * theta2_2.cos(), 0.0);
    let phi22 = Complex64::from_polar(c2 * theta2_2.sin(), gamma_prime);
    let phi33 = -(phi11 * lambda[0] + phi22 * lambda[1]) / lambda[2];
    diagonal_pair(FamilyTag::ThreeModeDistinct, &lambda, &[phi11, phi22, phi33], frame)
}

/// Diagonal mode-2 solution for equal mode-1 coefficients, parametrized by
/// `θ₁^(2)` (with `|φ₃₃| = sin θ₁^(2)`) and `γ′`.
pub fn all_equal_diagonal_from_k(theta1_2: f64, gamma_prime: f64, frame: &Frame) -> Result<SolutionPair> {
    let k = k_parameter(theta1_2, gamma_prime)?;
    if k.abs() > 0.5 + 1e-12 {
        return Err(Error::Domain(format!("|K| = {} exceeds 1/2", k.abs())));
    }
    let t = 0.5 * (2.0 * k.abs()).min(1.0).asin();
    let psi = if k >= 0.0 { gamma_prime } else { gamma_prime + PI };
    let c = theta1_2.cos();
    let phi11 = c64(c * t.cos(), 0.0);
    let phi22 = Complex64::from_polar(c * t.sin(), -psi);
    let phi33 = -(phi11 + phi22);
    let lambda = [(1.0f64 / 3.0).sqrt(); 3];
    diagonal_pair(FamilyTag::ThreeModeAllEqual, &lambda, &[phi11, phi22, phi33], frame)
}

fn diagonal_pair(tag: FamilyTag, lambda: &[f64], phi: &[Complex64], frame: &Frame) -> Result<SolutionPair> {
    let n = lambda.len();
    if frame.u1.shape() != (n, n) || frame.v1.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("frame must be {n}×{n}")));
    }
    let phi2_tilde = complex_diagonal(phi);
    let phi1 = &frame.u1 * real_diagonal(lambda) * frame.v1.adjoint();
    let phi2 = &frame.u1 * &phi2_tilde * frame.v1.adjoint();
    Ok(SolutionPair {
        tag,
        spec: DeformationSpec::nondeformed(),
        phi1,
        phi2,
        d1: lambda.to_vec(),
        phi2_tilde,
        u1: frame.u1.clone(),
        v1: frame.v1.clone(),
        declared_lambda2: sorted_desc(phi.iter().map(|z| z.norm()).collect()),
        params: Params::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realization::{check_conditions, check_deformed_two_mode, check_nondeformed};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_6;

    #[test]
    fn tags_round_trip_through_strings() {
        for t in FamilyTag::ALL {
            assert_eq!(t.as_str().parse::<FamilyTag>().unwrap(), t);
        }
        assert!("nope".parse::<FamilyTag>().is_err());
    }

    #[test]
    fn pattern_detection() {
        let h = FRAC_1_SQRT_2;
        assert_eq!(detect_pattern(&[0.8, 0.6]), DegeneracyPattern::Distinct);
        assert_eq!(detect_pattern(&[h, h]), DegeneracyPattern::AllEqual);
        assert_eq!(detect_pattern(&[0.6, 0.6, 0.52915]), DegeneracyPattern::TwoEqual);
    }

    #[test]
    fn two_mode_distinct_canonical_form() {
        let (s, c) = FRAC_PI_6.sin_cos();
        let f = solve_two_mode_nondeformed(&[c, s]).unwrap();
        assert_eq!(f.tag, FamilyTag::TwoModeDistinct);
        let p = f.canonical().unwrap();
        assert!((p.phi2_tilde[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((p.phi2_tilde[(1, 1)].re + 0.8660254).abs() < 1e-7);
        assert!(check_nondeformed(&p.phis()).unwrap().max_residual() < 1e-12);
    }

    #[test]
    fn two_mode_equal_has_equal_mode2_coefficients() {
        let f = solve_two_mode_nondeformed(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        assert_eq!(f.tag, FamilyTag::TwoModeEqual);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let p = f.sample(&mut rng).unwrap();
            let s = crate::linalg::svd(&p.phi2);
            assert!((s.singular_values[0] - FRAC_1_SQRT_2).abs() < 1e-12);
            assert!((s.singular_values[1] - FRAC_1_SQRT_2).abs() < 1e-12);
            assert!(check_nondeformed(&p.phis()).unwrap().max_residual() < 1e-12);
        }
    }

    #[test]
    fn unnormalized_coefficients_are_rejected() {
        assert!(matches!(
            solve_two_mode_nondeformed(&[0.8, 0.8]),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn deformed_case_split() {
        let u1 = su2(c64(0.6, 0.0), c64(0.0, 0.8));
        let d1 = [0.8, 0.6];
        let b = solve_two_mode_deformed(&d1, &u1, DeformationSpec { chi2: 0.0 }).unwrap();
        assert_eq!(b.iter().map(|f| f.tag).collect::<Vec<_>>(), vec![FamilyTag::DeformedB]);
        let none = solve_two_mode_deformed(&d1, &u1, DeformationSpec { chi2: 1.3 }).unwrap();
        assert!(none.is_empty());
        let a = solve_two_mode_deformed(&d1, &u1, DeformationSpec::nondeformed()).unwrap();
        assert_eq!(a[0].tag, FamilyTag::TwoModeDistinct);
        let diag = su2(phase(0.3), c64(0.0, 0.0));
        let c = solve_two_mode_deformed(&[1.0, 0.0], &diag, DeformationSpec { chi2: 1.0 }).unwrap();
        let tags: Vec<_> = c.iter().map(|f| f.tag).collect();
        assert_eq!(tags, vec![FamilyTag::DeformedCDiagonal, FamilyTag::DeformedCNilpotent]);
        assert!(solve_two_mode_deformed(&d1, &real_diagonal(&[1.0, 2.0]), DeformationSpec { chi2: 0.0 }).is_err());
    }

    #[test]
    fn deformed_b_reordered_input_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u1 = random_special_unitary(2, &mut rng);
        let fams = solve_two_mode_deformed(&[0.6, 0.8], &u1, DeformationSpec { chi2: 0.0 }).unwrap();
        assert_eq!(fams[0].d1, vec![0.8, 0.6]);
        let p = fams[0].sample(&mut rng).unwrap();
        assert!(check_deformed_two_mode(&p.phi1, &p.phi2, p.spec).unwrap().pass);
    }

    #[test]
    fn nilpotent_needs_chi2_one() {
        let u1 = CMatrix::identity(2, 2);
        let f = SolutionFamily::new(FamilyTag::DeformedCNilpotent, vec![1.0, 0.0], DeformationSpec { chi2: 1.0 }, Some(u1.clone()))
            .unwrap();
        let p = f.canonical().unwrap();
        assert!(check_deformed_two_mode(&p.phi1, &p.phi2, p.spec).unwrap().max_residual() < 1e-15);
        // the same matrices violate the conditions at another χ(2)
        let r = check_deformed_two_mode(&p.phi1, &p.phi2, DeformationSpec { chi2: 1.5 }).unwrap();
        assert!(!r.pass);
        assert!(SolutionFamily::new(FamilyTag::DeformedCNilpotent, vec![1.0, 0.0], DeformationSpec { chi2: 1.5 }, Some(u1))
            .is_err());
    }

    #[test]
    fn three_mode_pattern_mismatch() {
        let t = (1.0f64 / 3.0).sqrt();
        assert!(matches!(
            solve_three_mode(&[t, t, t], DegeneracyPattern::Distinct),
            Err(Error::PatternMismatch(_))
        ));
        assert_eq!(
            solve_three_mode(&[t, t, t], DegeneracyPattern::AllEqual).unwrap().tag,
            FamilyTag::ThreeModeAllEqual
        );
    }

    #[test]
    fn every_family_samples_valid_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for tag in FamilyTag::ALL {
            for _ in 0..30 {
                let f = SolutionFamily::random(tag, &mut rng);
                let p = f.sample(&mut rng).unwrap();
                let r = check_conditions(&p.phis(), p.spec).unwrap();
                assert!(r.max_residual() < 1e-12, "{tag}: {r:?} {:?}", p.params);
                let s = crate::linalg::svd(&p.phi2);
                for (a, b) in s.singular_values.iter().zip(&p.declared_lambda2) {
                    assert!((a - b).abs() < 1e-12, "{tag}: {:?} vs {:?}", s.singular_values, p.declared_lambda2);
                }
            }
        }
    }

    #[test]
    fn unknown_and_out_of_range_parameters() {
        let f = SolutionFamily::random(FamilyTag::ThreeModeTwoEqual, &mut ChaCha8Rng::seed_from_u64(1));
        let mut p = Params::new();
        p.insert("bogus".into(), 1.0);
        assert!(f.generate(&p, &Frame::identity(3)).is_err());
        let mut p = Params::new();
        p.insert("tr_u".into(), 2.5);
        assert!(f.generate(&p, &Frame::identity(3)).is_err());
        let mut p = Params::new();
        p.insert("branch".into(), 1.5);
        assert!(f.generate(&p, &Frame::identity(3)).is_err());
    }
}
