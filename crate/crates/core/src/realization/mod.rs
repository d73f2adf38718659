//! Realization conditions on structural matrices: residual checks, the
//! canonical frame `Φ₁ = U₁D₁V₁†`, the deformed two-mode linear system,
//! the composite mode-count bound, and a Gauss–Newton polisher.
//!
//! With `δχ₂ = χ(2) − 2`, the one-composite level conditions read
//! `Tr(Φ_βΦ_α†) = δ_{αβ}` and, for all `α, β, γ`,
//! `Φ_βΦ_α†Φ_γ − Φ_γΦ_α†Φ_β + δχ₂ [diag(Φ_βΦ_α†)Φ_γ − diag(Φ_γΦ_α†)Φ_β] = 0`.

pub mod families;

use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;

use crate::algebra::{CompositeAlgebra, StructuralMatrix};
use crate::error::{Error, Result};
use crate::fock::{FockBasis, StructureFunction};
use crate::linalg::{diagonal_part, fix_determinant, svd, trace, unitarity_defect, CMatrix};
use crate::sparse::StateVector;

pub use families::{
    all_equal_diagonal_from_k, detect_pattern, r_matrix, solve_three_mode, solve_two_mode_deformed,
    solve_two_mode_nondeformed, three_mode_distinct_from_angles, DegeneracyPattern, FamilyTag, Frame, FreeParameter,
    ParameterDomain, Params, SolutionFamily, SolutionPair,
};

/// Default pass/fail threshold on condition residuals.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Singular values closer than this are treated as equal.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// Below this norm a generated state counts as vanishing.
pub const VANISHING_NORM: f64 = 1e-13;

/// The deformation datum `χ(2)` entering the one-composite conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationSpec {
    pub chi2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeformationKind {
    Nondeformed,
    Deformed,
}

impl DeformationSpec {
    pub fn new(chi2: f64) -> Result<Self> {
        if !chi2.is_finite() || chi2 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "χ(2) must be finite and non-negative, got {chi2}"
            )));
        }
        Ok(Self { chi2 })
    }

    pub fn nondeformed() -> Self {
        Self { chi2: 2.0 }
    }

    /// `δχ₂ = χ(2) − 2`.
    pub fn delta(&self) -> f64 {
        self.chi2 - 2.0
    }

    pub fn kind(&self) -> DeformationKind {
        if self.delta() == 0.0 {
            DeformationKind::Nondeformed
        } else {
            DeformationKind::Deformed
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResidual {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationReport {
    pub residuals: Vec<ConditionResidual>,
    pub tolerance: f64,
    pub pass: bool,
}

impl RealizationReport {
    fn new(residuals: Vec<ConditionResidual>, tolerance: f64) -> Self {
        let pass = residuals.iter().all(|r| r.value < tolerance);
        Self {
            residuals,
            tolerance,
            pass,
        }
    }

    /// The same residuals judged at another tolerance.
    pub fn with_tolerance(self, tolerance: f64) -> Self {
        Self::new(self.residuals, tolerance)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.value).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.name == name).map(|r| r.value)
    }
}

fn check_shapes(phis: &[CMatrix]) -> Result<()> {
    let Some(first) = phis.first() else {
        return Err(Error::DimensionMismatch("no structural matrices given".into()));
    };
    if let Some(bad) = phis.iter().find(|p| p.shape() != first.shape()) {
        return Err(Error::DimensionMismatch(format!(
            "matrices of shapes {:?} and {:?}",
            first.shape(),
            bad.shape()
        )));
    }
    Ok(())
}

/// The δχ₂-weighted cubic expression for one index triple.
pub fn cubic_condition(phi_a: &CMatrix, phi_b: &CMatrix, phi_g: &CMatrix, delta: f64) -> CMatrix {
    let ba = phi_b * phi_a.adjoint();
    let ga = phi_g * phi_a.adjoint();
    let mut x = &ba * phi_g - &ga * phi_b;
    if delta != 0.0 {
        x += (diagonal_part(&ba) * phi_g - diagonal_part(&ga) * phi_b) * Complex64::from(delta);
    }
    x
}

fn trace_residual(phis: &[CMatrix]) -> f64 {
    let mut sum = 0.0;
    for (a, pa) in phis.iter().enumerate() {
        for (b, pb) in phis.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            sum += (trace(&(pb * pa.adjoint())) - Complex64::from(target)).norm_sqr();
        }
    }
    sum.sqrt()
}

fn cubic_residual(phis: &[CMatrix], delta: f64) -> f64 {
    let mut sum = 0.0;
    for pa in phis {
        for pb in phis {
            for pg in phis {
                sum += cubic_condition(pa, pb, pg, delta).norm_squared();
            }
        }
    }
    sum.sqrt()
}

/// Residuals of all conditions for an arbitrary number of composite modes.
/// Each residual is the root-sum-square of Frobenius norms over index
/// combinations.
pub fn check_conditions(phis: &[CMatrix], spec: DeformationSpec) -> Result<RealizationReport> {
    check_shapes(phis)?;
    Ok(RealizationReport::new(
        vec![
            ConditionResidual {
                name: "trace-orthonormality".into(),
                value: trace_residual(phis),
            },
            ConditionResidual {
                name: "cubic".into(),
                value: cubic_residual(phis, spec.delta()),
            },
        ],
        DEFAULT_TOLERANCE,
    ))
}

/// Conditions for an undeformed constituent boson (`χ(2) = 2`).
pub fn check_nondeformed(phis: &[CMatrix]) -> Result<RealizationReport> {
    check_conditions(phis, DeformationSpec::nondeformed())
}

/// The two independent deformed two-mode equations, indices
/// `(α, β, γ) = (1, 1, 2)` and `(2, 1, 2)`, plus trace orthonormality.
pub fn check_deformed_two_mode(phi1: &CMatrix, phi2: &CMatrix, spec: DeformationSpec) -> Result<RealizationReport> {
    let phis = [phi1.clone(), phi2.clone()];
    check_shapes(&phis)?;
    let d = spec.delta();
    Ok(RealizationReport::new(
        vec![
            ConditionResidual {
                name: "trace-orthonormality".into(),
                value: trace_residual(&phis),
            },
            ConditionResidual {
                name: "deformed-eq1".into(),
                value: cubic_condition(phi1, phi1, phi2, d).norm(),
            },
            ConditionResidual {
                name: "deformed-eq2".into(),
                value: cubic_condition(phi2, phi1, phi2, d).norm(),
            },
        ],
        DEFAULT_TOLERANCE,
    ))
}

/// Root-sum-square of every condition residual.
pub fn residual(phis: &[CMatrix], spec: DeformationSpec) -> Result<f64> {
    check_shapes(phis)?;
    Ok(condition_vector(phis, spec.delta()).norm())
}

/// Real and imaginary parts of every condition entry.
fn condition_vector(phis: &[CMatrix], delta: f64) -> DVector<f64> {
    let mut out = Vec::new();
    for (a, pa) in phis.iter().enumerate() {
        for (b, pb) in phis.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            let t = trace(&(pb * pa.adjoint())) - Complex64::from(target);
            out.push(t.re);
            out.push(t.im);
        }
    }
    for pa in phis {
        for pb in phis {
            for pg in phis {
                for z in cubic_condition(pa, pb, pg, delta).iter() {
                    out.push(z.re);
                    out.push(z.im);
                }
            }
        }
    }
    DVector::from_vec(out)
}

/// `Φ₁ = U₁ D₁ V₁†`, `Φ₂ = U₁ Φ̃₂ V₁†`.
#[derive(Debug, Clone)]
pub struct CanonicalPair {
    /// Descending singular values of `Φ₁`.
    pub d1: Vec<f64>,
    pub phi2_tilde: CMatrix,
    /// Unitary with `det U₁ = 1`.
    pub u1: CMatrix,
    pub v1: CMatrix,
}

impl CanonicalPair {
    pub fn phi1(&self) -> CMatrix {
        &self.u1 * crate::linalg::real_diagonal(&self.d1) * self.v1.adjoint()
    }

    pub fn phi2(&self) -> CMatrix {
        &self.u1 * &self.phi2_tilde * self.v1.adjoint()
    }
}

/// Moves a square pair into the singular frame of `Φ₁`.
pub fn canonicalize(phi1: &CMatrix, phi2: &CMatrix) -> Result<CanonicalPair> {
    check_shapes(&[phi1.clone(), phi2.clone()])?;
    if !phi1.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "canonical form needs square matrices, got {:?}",
            phi1.shape()
        )));
    }
    if phi1.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::Domain("Φ₁ must be nonzero".into()));
    }
    let s = svd(phi1);
    let mut u1 = s.u;
    let det = u1.determinant();
    fix_determinant(&mut u1);
    // the same phase on V₁ leaves Φ₁ unchanged
    let n = u1.nrows() as f64;
    let ph = Complex64::from_polar(1.0, -det.arg() / n);
    let v1 = s.v * ph;
    let phi2_tilde = u1.adjoint() * phi2 * &v1;
    Ok(CanonicalPair {
        d1: s.singular_values,
        phi2_tilde,
        u1,
        v1,
    })
}

/// Coefficient matrix of the deformed two-mode linear system and its determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSystem {
    pub matrix: Matrix3<f64>,
    pub determinant: f64,
}

fn check_unit(values: &[f64], what: &str) -> Result<()> {
    let n: f64 = values.iter().map(|x| x * x).sum();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "{what} must have unit norm, got squared norm {n}"
        )));
    }
    Ok(())
}

/// The 3×3 system in `(x₁, x₂, x₃)` obtained by expanding `Φ̃₂` in the
/// basis orthogonal to `D₁`, for `U₁ = [[u, v], [−v̄, ū]]`.
pub fn deformed_linear_system(d1: [f64; 2], u: Complex64, v: Complex64, chi2: f64) -> Result<LinearSystem> {
    check_unit(&d1, "D₁")?;
    check_unit(&[u.norm(), v.norm()], "(u, v)")?;
    let (l1, l2) = (d1[0], d1[1]);
    let (a, b) = (u.norm(), v.norm());
    let d = chi2 - 2.0;
    let split = l1 * l1 - l2 * l2;
    let ab = a * a - b * b;
    let cross = chi2 * l1 * l2 * (l2 * l2 - l1 * l1);
    #[rustfmt::skip]
    let matrix = Matrix3::new(
        2.0 * d * a * a * b * b, -d * a * b * ab, 0.0,
        -d * a * b * ab, 0.5 * (chi2 * split * split + d * ab * ab), cross,
        0.0, cross, -0.5 * (chi2 * split * split - d),
    );
    Ok(LinearSystem {
        determinant: matrix.determinant(),
        matrix,
    })
}

/// `−χ(2)(χ(2) − 2)|u|²|v|²(λ₁² − λ₂²)²`.
pub fn expected_determinant(d1: [f64; 2], u: Complex64, v: Complex64, chi2: f64) -> f64 {
    let split = d1[0] * d1[0] - d1[1] * d1[1];
    -chi2 * (chi2 - 2.0) * u.norm_sqr() * v.norm_sqr() * split * split
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeBoundReport {
    /// `‖A_{α₁}A†_{α₁}A†_{α₂}…A†_{α_n}|0⟩‖`.
    pub product_norm: f64,
    /// `‖A†_{α₂}…A†_{α_n}|0⟩‖`.
    pub tail_norm: f64,
    /// Distance between the two states above.
    pub product_tail_distance: f64,
    pub vanishes: bool,
}

/// Evaluates `A_{α₁}A†_{α₁}A†_{α₂}…A†_{α_n}|0⟩` for the given modes. A
/// realization would map it to the tail state; with more composite modes
/// than fermion modes the product is always zero.
pub fn mode_count_bound_check(
    phis: &[CMatrix],
    basis: &FockBasis,
    chi: &StructureFunction,
) -> Result<ModeBoundReport> {
    check_shapes(phis)?;
    if basis.config().boson_cutoff < phis.len() {
        return Err(Error::InvalidConfig(format!(
            "boson cutoff {} is below the {} composite excitations probed",
            basis.config().boson_cutoff,
            phis.len()
        )));
    }
    let alg = CompositeAlgebra::new(basis.clone(), chi.clone())?;
    let creators = phis
        .iter()
        .map(|p| alg.creator(&StructuralMatrix::unnormalized(p.clone())))
        .collect::<Result<Vec<_>>>()?;
    let mut tail = StateVector::basis(basis.len(), basis.vacuum_index());
    for c in creators.iter().skip(1).rev() {
        tail = c.apply(&tail);
    }
    let first = &creators[0];
    let product = first.adjoint().apply(&first.apply(&tail));
    let product_norm = product.norm();
    Ok(ModeBoundReport {
        product_norm,
        tail_norm: tail.norm(),
        product_tail_distance: product.distance(&tail),
        vanishes: product_norm < VANISHING_NORM,
    })
}

#[derive(Debug, Clone)]
pub struct RefineResult {
    pub phis: Vec<CMatrix>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Step tolerance of [`refine`].
pub const REFINE_STEP_TOLERANCE: f64 = 1e-12;
/// Iteration cap of [`refine`].
pub const REFINE_MAX_ITERATIONS: usize = 50;

fn pack(phis: &[CMatrix]) -> DVector<f64> {
    DVector::from_iterator(
        phis.iter().map(|p| p.len() * 2).sum(),
        phis.iter().flat_map(|p| p.iter().flat_map(|z| [z.re, z.im])),
    )
}

fn unpack(x: &DVector<f64>, shape: (usize, usize), count: usize) -> Vec<CMatrix> {
    let per = shape.0 * shape.1;
    (0..count)
        .map(|k| {
            let base = 2 * per * k;
            // column-major, matching nalgebra's iteration order in `pack`
            CMatrix::from_iterator(
                shape.0,
                shape.1,
                (0..per).map(|i| Complex64::new(x[base + 2 * i], x[base + 2 * i + 1])),
            )
        })
        .collect()
}

/// Gauss–Newton polishing of a near-solution. The Jacobian is a central
/// difference with one Richardson step, exact up to rounding for these
/// cubic conditions; each step is the minimum-norm least-squares update.
pub fn refine(phis: &[CMatrix], spec: DeformationSpec) -> Result<RefineResult> {
    check_shapes(phis)?;
    let shape = phis[0].shape();
    let count = phis.len();
    let delta = spec.delta();
    let f = |x: &DVector<f64>| condition_vector(&unpack(x, shape, count), delta);

    let mut x = pack(phis);
    let mut r = f(&x);
    let mut iterations = 0;
    let mut converged = r.norm() < 1e-15;
    while !converged && iterations < REFINE_MAX_ITERATIONS {
        iterations += 1;
        let n = x.len();
        let mut jac = DMatrix::<f64>::zeros(r.len(), n);
        for j in 0..n {
            let diff = |h: f64| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                (f(&xp) - f(&xm)) / (2.0 * h)
            };
            let h = 1e-3;
            let coarse = diff(h);
            let fine = diff(h / 2.0);
            jac.set_column(j, &((fine * 4.0 - coarse) / 3.0));
        }
        let step = jac
            .svd(true, true)
            .solve(&(-&r), 1e-12)
            .map_err(|e| Error::Domain(format!("least-squares step failed: {e}")))?;
        x += &step;
        r = f(&x);
        if step.norm() < REFINE_STEP_TOLERANCE || r.norm() < 1e-15 {
            converged = true;
        }
    }
    Ok(RefineResult {
        residual: r.norm(),
        phis: unpack(&x, shape, count),
        iterations,
        converged,
    })
}

/// Checks that `u` is in SU(2) within `1e-10`.
pub(crate) fn check_su2(u: &CMatrix) -> Result<()> {
    if u.shape() != (2, 2) || unitarity_defect(u) > 1e-10 || (u.determinant() - Complex64::from(1.0)).norm() > 1e-10 {
        return Err(Error::InvalidParameter("U₁ must be a 2×2 special unitary matrix".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, random_unitary, real_diagonal};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_6;

    #[test]
    fn single_matrix_passes_nondeformed() {
        let p = real_diagonal(&[0.8, 0.6]);
        assert!(check_nondeformed(&[p]).unwrap().pass);
    }

    #[test]
    fn diagonal_pair_passes() {
        let (s, c) = FRAC_PI_6.sin_cos();
        let p1 = real_diagonal(&[c, s]);
        let p2 = real_diagonal(&[s, -c]);
        let r = check_nondeformed(&[p1, p2]).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.max_residual() < 1e-15);
    }

    #[test]
    fn perturbed_pair_fails() {
        let p1 = real_diagonal(&[1.0, 0.0]);
        let mut p2 = real_diagonal(&[0.0, 1.0]);
        p2[(0, 1)] = c64(0.1, 0.0);
        let r = check_nondeformed(&[p1, p2]).unwrap();
        assert!(!r.pass);
        assert!(r.get("cubic").unwrap() > 0.0);
        // Tr(Φ₂Φ₂†) = 1.01 and Tr(Φ₂Φ₁†) = 0
        assert!((r.get("trace-orthonormality").unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let r = check_nondeformed(&[real_diagonal(&[1.0]), real_diagonal(&[1.0, 0.0])]);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
        assert!(check_nondeformed(&[]).is_err());
    }

    #[test]
    fn canonicalize_recovers_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let u = random_unitary(2, &mut rng);
            let v = random_unitary(2, &mut rng);
            let p1 = &u * real_diagonal(&[0.8, 0.6]) * v.adjoint();
            let p2 = random_unitary(2, &mut rng) * c64(0.5f64.sqrt(), 0.0);
            let c = canonicalize(&p1, &p2).unwrap();
            assert!((c.d1[0] - 0.8).abs() < 1e-12 && (c.d1[1] - 0.6).abs() < 1e-12);
            assert!((c.u1.determinant() - c64(1.0, 0.0)).norm() < 1e-12);
            assert!((c.phi1() - &p1).norm() < 1e-12);
            assert!((c.phi2() - &p2).norm() < 1e-12);
        }
    }

    #[test]
    fn canonicalize_diagonal_input_is_identity_frame() {
        let p1 = real_diagonal(&[0.8, 0.6]);
        let p2 = real_diagonal(&[0.6, -0.8]);
        let c = canonicalize(&p1, &p2).unwrap();
        assert!((c.u1.map(|z| z.norm()) - real_diagonal(&[1.0, 1.0]).map(|z| z.re)).norm() < 1e-15);
        assert!((c.phi2_tilde.map(|z| z.norm()) - p2.map(|z| z.norm())).norm() < 1e-15);
    }

    #[test]
    fn determinant_examples() {
        let h = 0.5f64.sqrt();
        let s = deformed_linear_system([0.8f64.sqrt(), 0.2f64.sqrt()], c64(h, 0.0), c64(0.0, h), 1.0).unwrap();
        assert!((s.determinant - 0.09).abs() < 1e-15);
        let s2 = deformed_linear_system([0.8f64.sqrt(), 0.2f64.sqrt()], c64(0.6, 0.0), c64(0.0, 0.8), 2.0).unwrap();
        assert!(s2.determinant.abs() < 1e-15);
        let s3 = deformed_linear_system([h, h], c64(0.6, 0.0), c64(0.0, 0.8), 3.3).unwrap();
        assert!(s3.determinant.abs() < 1e-15);
        assert!(deformed_linear_system([1.0, 1.0], c64(1.0, 0.0), c64(0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn refine_repairs_a_perturbed_pair() {
        let (s, c) = FRAC_PI_6.sin_cos();
        let mut p1 = real_diagonal(&[c, s]);
        let mut p2 = real_diagonal(&[s, -c]);
        p1[(0, 1)] += c64(1e-4, -2e-4);
        p2[(1, 0)] += c64(-3e-4, 1e-4);
        let spec = DeformationSpec::nondeformed();
        assert!(residual(&[p1.clone(), p2.clone()], spec).unwrap() > 1e-5);
        let out = refine(&[p1, p2], spec).unwrap();
        assert!(out.residual < 1e-12, "{}", out.residual);
    }
}
