//! Composite-fermion operators `A†_α = Σ Φ_α^{μν} a†_μ b†_ν`, the finite
//! difference calculus `Δ_kχ`, and numerical checks of the composite
//! (anti)commutator identities and weak equalities.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{BasisState, ConstituentOperators, FockBasis, StructureFunction};
use crate::linalg::{trace, CMatrix};
use crate::sparse::{SparseOperator, StateVector};

/// Allowed deviation of `Tr(ΦΦ†)` from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Generated states with a smaller norm are treated as exact zeros by
/// [`weak_equal`].
pub const NULL_STATE_NORM: f64 = 1e-10;

/// Complex `D_b × D_f` coefficient matrix of a composite mode; rows index
/// boson modes, columns fermion modes.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralMatrix {
    data: CMatrix,
}

impl StructuralMatrix {
    /// Accepts `data` only if `Tr(ΦΦ†) = 1` within [`NORMALIZATION_TOLERANCE`].
    pub fn new(data: CMatrix) -> Result<Self> {
        let norm2 = data.norm_squared();
        if (norm2 - 1.0).abs() > NORMALIZATION_TOLERANCE || !norm2.is_finite() {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { data })
    }

    /// Rescales `data` to unit Frobenius norm.
    pub fn normalized(data: CMatrix) -> Result<Self> {
        let norm = data.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        Ok(Self {
            data: data / Complex64::from(norm),
        })
    }

    /// Wraps `data` without the normalization check, for probing the
    /// operator identities on arbitrary coefficient matrices.
    pub fn unnormalized(data: CMatrix) -> Self {
        Self { data }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }
}

/// `Δ_kχ(n) = Σ_{l=0..k} (−1)^{k−l} C(k,l) χ(n+l)`.
pub fn delta_chi(chi: &StructureFunction, k: usize, n: usize) -> Result<f64> {
    if n + k > chi.max_n() {
        return Err(Error::StructureFunctionRange {
            requested: n + k,
            available: chi.max_n(),
        });
    }
    let mut binom = 1.0;
    let mut sum = 0.0;
    for l in 0..=k {
        let sign = if (k - l) % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * chi.value(n + l).expect("range checked");
        binom = binom * (k - l) as f64 / (l + 1) as f64;
    }
    Ok(sum)
}

/// Difference operator of fixed order attached to a structure function.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaChi {
    pub chi: StructureFunction,
    pub order: usize,
}

impl DeltaChi {
    pub fn new(chi: StructureFunction, order: usize) -> Self {
        Self { chi, order }
    }

    pub fn value(&self, n: usize) -> Result<f64> {
        delta_chi(&self.chi, self.order, n)
    }

    /// Diagonal operator `Δ_kχ(n^a_μ)` on a basis. States where `n_μ + k`
    /// exceeds the tabulated range get 0; they lie outside every safe region.
    pub fn operator(&self, basis: &FockBasis, mode: usize) -> SparseOperator {
        basis.diagonal_operator(|s: &BasisState| self.value(s.boson_occupations[mode]).unwrap_or(0.0))
    }
}

/// Constituent operators on a fixed basis and structure function, from
/// which composite operators are assembled.
#[derive(Debug, Clone)]
pub struct CompositeAlgebra {
    basis: FockBasis,
    chi: StructureFunction,
    ops: ConstituentOperators,
}

impl CompositeAlgebra {
    pub fn new(basis: FockBasis, chi: StructureFunction) -> Result<Self> {
        let ops = ConstituentOperators::build(&basis, &chi)?;
        Ok(Self { basis, chi, ops })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn chi(&self) -> &StructureFunction {
        &self.chi
    }

    pub fn constituents(&self) -> &ConstituentOperators {
        &self.ops
    }

    fn check_shape(&self, phi: &CMatrix) -> Result<()> {
        let c = self.basis.config();
        if phi.nrows() != c.boson_modes || phi.ncols() != c.fermion_modes {
            return Err(Error::DimensionMismatch(format!(
                "structural matrix is {}×{} but the basis has {} boson and {} fermion modes",
                phi.nrows(),
                phi.ncols(),
                c.boson_modes,
                c.fermion_modes
            )));
        }
        Ok(())
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn identity(&self) -> SparseOperator {
        SparseOperator::identity(self.dim())
    }

    fn delta(&self, order: usize, mode: usize) -> SparseOperator {
        DeltaChi::new(self.chi.clone(), order).operator(&self.basis, mode)
    }

    /// `A† = Σ Φ^{μν} a†_μ b†_ν`.
    pub fn creator(&self, phi: &StructuralMatrix) -> Result<SparseOperator> {
        self.creator_from_matrix(phi.matrix())
    }

    pub fn annihilator(&self, phi: &StructuralMatrix) -> Result<SparseOperator> {
        Ok(self.creator(phi)?.adjoint())
    }

    fn creator_from_matrix(&self, phi: &CMatrix) -> Result<SparseOperator> {
        self.check_shape(phi)?;
        let mut acc = SparseOperator::zero(self.dim());
        for mu in 0..phi.nrows() {
            for nu in 0..phi.ncols() {
                let coeff = phi[(mu, nu)];
                if coeff.norm() == 0.0 {
                    continue;
                }
                let term = self.ops.boson_create[mu].matmul(&self.ops.fermion_create[nu]);
                acc = &acc + &term.scale(coeff);
            }
        }
        Ok(acc)
    }

    /// Three-term expansion of `{A_α, A†_β}` in constituent operators:
    /// `Σ_μ M^{μμ}Δ₁χ(n_μ) + Σ M^{μ'μ} a†_{μ'}a_μ − Σ Φ̄_α^{μν}Φ_β^{μν'} b†_{ν'}b_ν Δ₁χ(n_μ)`
    /// with `M = Φ_βΦ_α†`.
    pub fn anticommutator_expansion(&self, phi_a: &CMatrix, phi_b: &CMatrix) -> Result<SparseOperator> {
        self.check_shape(phi_a)?;
        self.check_shape(phi_b)?;
        let m = phi_b * phi_a.adjoint();
        let (db, df) = (phi_a.nrows(), phi_a.ncols());
        let mut acc = SparseOperator::zero(self.dim());
        for mu in 0..db {
            let d1 = self.delta(1, mu);
            acc = &acc + &d1.scale(m[(mu, mu)]);
            for mu2 in 0..db {
                let hop = self.ops.boson_create[mu2].matmul(&self.ops.boson_annihilate[mu]);
                acc = &acc + &hop.scale(m[(mu2, mu)]);
            }
            for nu in 0..df {
                for nu2 in 0..df {
                    let coeff = phi_a[(mu, nu)].conj() * phi_b[(mu, nu2)];
                    if coeff.norm() == 0.0 {
                        continue;
                    }
                    let term = self.ops.fermion_create[nu2]
                        .matmul(&self.ops.fermion_annihilate[nu])
                        .matmul(&d1);
                    acc = &acc - &term.scale(coeff);
                }
            }
        }
        Ok(acc)
    }

    /// Undeformed form `Tr(Φ_βΦ_α†) + Σ M^{μ'μ} a†_{μ'}a_μ − Σ (Φ_α†Φ_β)^{νν'} b†_{ν'}b_ν`.
    pub fn anticommutator_nondeformed(&self, phi_a: &CMatrix, phi_b: &CMatrix) -> Result<SparseOperator> {
        self.check_shape(phi_a)?;
        self.check_shape(phi_b)?;
        let m = phi_b * phi_a.adjoint();
        let f = phi_a.adjoint() * phi_b;
        let mut acc = self.identity().scale(trace(&m));
        for mu in 0..m.nrows() {
            for mu2 in 0..m.nrows() {
                let hop = self.ops.boson_create[mu2].matmul(&self.ops.boson_annihilate[mu]);
                acc = &acc + &hop.scale(m[(mu2, mu)]);
            }
        }
        for nu in 0..f.nrows() {
            for nu2 in 0..f.nrows() {
                let hop = self.ops.fermion_create[nu2].matmul(&self.ops.fermion_annihilate[nu]);
                acc = &acc - &hop.scale(f[(nu, nu2)]);
            }
        }
        Ok(acc)
    }

    /// Closed form of `[{A_α, A†_β}, A†_γ]`.
    pub fn commutator_closed_form(&self, phi_a: &CMatrix, phi_b: &CMatrix, phi_g: &CMatrix) -> Result<SparseOperator> {
        for p in [phi_a, phi_b, phi_g] {
            self.check_shape(p)?;
        }
        let (db, df) = (phi_a.nrows(), phi_a.ncols());
        let m_ba = phi_b * phi_a.adjoint();
        let m_ga = phi_g * phi_a.adjoint();
        let mut acc = SparseOperator::zero(self.dim());
        for mu in 0..db {
            let d1 = self.delta(1, mu);
            let d2 = self.delta(2, mu);
            let d12 = &d1 + &d2;
            for mu1 in 0..db {
                let weight = if mu == mu1 { &d12 } else { &d1 };
                for nu1 in 0..df {
                    let coeff = m_ba[(mu1, mu)] * phi_g[(mu, nu1)] - m_ga[(mu1, mu)] * phi_b[(mu, nu1)];
                    if coeff.norm() == 0.0 {
                        continue;
                    }
                    let term = self.ops.boson_create[mu1]
                        .matmul(&self.ops.fermion_create[nu1])
                        .matmul(weight);
                    acc = &acc + &term.scale(coeff);
                }
            }
            for nu in 0..df {
                for nu2 in 0..df {
                    for nu1 in 0..df {
                        let coeff = phi_a[(mu, nu)].conj() * phi_b[(mu, nu2)] * phi_g[(mu, nu1)];
                        if coeff.norm() == 0.0 {
                            continue;
                        }
                        let term = self.ops.boson_create[mu]
                            .matmul(&self.ops.fermion_create[nu2])
                            .matmul(&self.ops.fermion_create[nu1])
                            .matmul(&self.ops.fermion_annihilate[nu])
                            .matmul(&d2);
                        acc = &acc + &term.scale(coeff);
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Undeformed form of `[{A_α, A†_β}, A†_γ]`: the composite creator built
    /// from `Φ_βΦ_α†Φ_γ − Φ_γΦ_α†Φ_β`.
    pub fn commutator_nondeformed(&self, phi_a: &CMatrix, phi_b: &CMatrix, phi_g: &CMatrix) -> Result<SparseOperator> {
        let x = phi_b * phi_a.adjoint() * phi_g - phi_g * phi_a.adjoint() * phi_b;
        self.creator_from_matrix(&x)
    }

    /// Closed form of `{[{A_α, A†_β}, A†_{γ1}], A†_{γ2}}`.
    pub fn double_closed_form(
        &self,
        phi_a: &CMatrix,
        phi_b: &CMatrix,
        phi_g1: &CMatrix,
        phi_g2: &CMatrix,
    ) -> Result<SparseOperator> {
        for p in [phi_a, phi_b, phi_g1, phi_g2] {
            self.check_shape(p)?;
        }
        let (db, df) = (phi_a.nrows(), phi_a.ncols());
        let m_ba = phi_b * phi_a.adjoint();
        let m_g1a = phi_g1 * phi_a.adjoint();
        let m_g2a = phi_g2 * phi_a.adjoint();
        let mut acc = SparseOperator::zero(self.dim());
        for mu in 0..db {
            let d2 = self.delta(2, mu);
            let d3 = self.delta(3, mu);
            let d23 = &d2 + &d3;
            for mu1 in 0..db {
                let weight = if mu == mu1 { &d23 } else { &d2 };
                let bosons = self.ops.boson_create[mu].matmul(&self.ops.boson_create[mu1]);
                for nu1 in 0..df {
                    for nu2 in 0..df {
                        let coeff = m_ba[(mu1, mu)] * phi_g1[(mu, nu1)] * phi_g2[(mu, nu2)]
                            - m_g1a[(mu1, mu)] * phi_b[(mu, nu1)] * phi_g2[(mu, nu2)]
                            + m_g2a[(mu1, mu)] * phi_b[(mu, nu1)] * phi_g1[(mu, nu2)];
                        if coeff.norm() == 0.0 {
                            continue;
                        }
                        let term = bosons
                            .matmul(&self.ops.fermion_create[nu1])
                            .matmul(&self.ops.fermion_create[nu2])
                            .matmul(weight);
                        acc = &acc + &term.scale(coeff);
                    }
                }
            }
            let pair = self.ops.boson_create[mu].matmul(&self.ops.boson_create[mu]);
            for nu in 0..df {
                for nu2 in 0..df {
                    for nu1 in 0..df {
                        for nu3 in 0..df {
                            let coeff = phi_a[(mu, nu)].conj()
                                * phi_b[(mu, nu2)]
                                * phi_g1[(mu, nu1)]
                                * phi_g2[(mu, nu3)];
                            if coeff.norm() == 0.0 {
                                continue;
                            }
                            let term = pair
                                .matmul(&self.ops.fermion_create[nu2])
                                .matmul(&self.ops.fermion_create[nu1])
                                .matmul(&self.ops.fermion_create[nu3])
                                .matmul(&self.ops.fermion_annihilate[nu])
                                .matmul(&d3);
                            acc = &acc - &term.scale(coeff);
                        }
                    }
                }
            }
        }
        Ok(acc)
    }
}

/// `A†_α` on a freshly built set of constituent operators.
pub fn build_composite_creator(
    phi: &StructuralMatrix,
    basis: &FockBasis,
    chi: &StructureFunction,
) -> Result<SparseOperator> {
    CompositeAlgebra::new(basis.clone(), chi.clone())?.creator(phi)
}

/// `Σ Φ^{μν} |a_μ⟩ ⊗ |b_ν⟩`, the one-composite state.
pub fn one_cf_state(phi: &StructuralMatrix, basis: &FockBasis) -> Result<StateVector> {
    let c = basis.config();
    let m = phi.matrix();
    if m.nrows() != c.boson_modes || m.ncols() != c.fermion_modes {
        return Err(Error::DimensionMismatch(format!(
            "structural matrix is {}×{} but the basis has {} boson and {} fermion modes",
            m.nrows(),
            m.ncols(),
            c.boson_modes,
            c.fermion_modes
        )));
    }
    let mut state = StateVector::zeros(basis.len());
    for mu in 0..m.nrows() {
        for nu in 0..m.ncols() {
            let mut s = BasisState {
                boson_occupations: vec![0; c.boson_modes],
                fermion_occupations: vec![false; c.fermion_modes],
            };
            s.boson_occupations[mu] = 1;
            s.fermion_occupations[nu] = true;
            let idx = basis.index_of(&s).expect("single excitations are in the basis");
            state.amplitudes[idx] += m[(mu, nu)];
        }
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakEqualityReport {
    pub holds: bool,
    /// Largest `‖(G − H)ψ‖ / ‖ψ‖` over the generated states.
    pub max_residual: f64,
    /// Number of nonzero generated states examined.
    pub states_checked: usize,
}

/// Tests `G ≃ H` on every ordered product `A†_{γm}…A†_{γ1}|0⟩` with
/// `0 ≤ m ≤ depth` built from `generators`. `depth` defaults to the number
/// of fermion modes, beyond which every product vanishes.
///
/// The caller must pick a boson cutoff larger than the number of
/// composite excitations probed, otherwise truncation enters the result.
pub fn weak_equal(
    g: &SparseOperator,
    h: &SparseOperator,
    generators: &[SparseOperator],
    basis: &FockBasis,
    tol: f64,
    depth: Option<usize>,
) -> WeakEqualityReport {
    let depth = depth.unwrap_or(basis.config().fermion_modes);
    let diff = g - h;
    let mut frontier = vec![StateVector::basis(basis.len(), basis.vacuum_index())];
    let mut max_residual: f64 = 0.0;
    let mut states_checked = 0;
    for level in 0..=depth {
        for psi in &frontier {
            let norm = psi.norm();
            let residual = diff.apply(psi).norm() / norm;
            max_residual = max_residual.max(residual);
            states_checked += 1;
        }
        if level == depth {
            break;
        }
        frontier = frontier
            .iter()
            .flat_map(|psi| generators.iter().map(move |gen| gen.apply(psi)))
            .filter(|psi| psi.norm() >= NULL_STATE_NORM)
            .collect();
        if frontier.is_empty() {
            break;
        }
    }
    WeakEqualityReport {
        holds: max_residual < tol,
        max_residual,
        states_checked,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnticommutatorCheck {
    /// Direct `{A_α, A†_β}` against the three-term expansion.
    pub expansion: f64,
    /// Direct form against the undeformed reduction, when `χ(n) = n`.
    pub nondeformed: Option<f64>,
}

/// Compares `{A_α, A†_β}` built from operators with its constituent
/// expansion, entrywise on states with one unit of boson headroom.
pub fn verify_anticommutator_expansion(
    phi_a: &StructuralMatrix,
    phi_b: &StructuralMatrix,
    chi: &StructureFunction,
    basis: &FockBasis,
) -> Result<AnticommutatorCheck> {
    let alg = CompositeAlgebra::new(basis.clone(), chi.clone())?;
    alg.verify_anticommutator_expansion(phi_a, phi_b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedIdentityCheck {
    pub commutator: f64,
    pub commutator_nondeformed: Option<f64>,
    pub double: f64,
}

/// Compares the nested (anti)commutators with their closed forms for every
/// index combination drawn from `phis`.
pub fn verify_nested_identities(
    phis: &[StructuralMatrix],
    chi: &StructureFunction,
    basis: &FockBasis,
) -> Result<NestedIdentityCheck> {
    let alg = CompositeAlgebra::new(basis.clone(), chi.clone())?;
    alg.verify_nested_identities(phis)
}

impl CompositeAlgebra {
    pub fn verify_anticommutator_expansion(
        &self,
        phi_a: &StructuralMatrix,
        phi_b: &StructuralMatrix,
    ) -> Result<AnticommutatorCheck> {
        let a = self.annihilator(phi_a)?;
        let bd = self.creator(phi_b)?;
        let direct = a.anticommutator(&bd);
        let mask = self.basis.safe_mask(1);
        let expansion = (&direct - &self.anticommutator_expansion(phi_a.matrix(), phi_b.matrix())?)
            .max_abs_in_columns(&mask);
        let nondeformed = if self.chi.is_nondeformed() {
            let red = self.anticommutator_nondeformed(phi_a.matrix(), phi_b.matrix())?;
            Some((&direct - &red).max_abs_in_columns(&mask))
        } else {
            None
        };
        Ok(AnticommutatorCheck {
            expansion,
            nondeformed,
        })
    }

    pub fn verify_nested_identities(&self, phis: &[StructuralMatrix]) -> Result<NestedIdentityCheck> {
        let creators = phis.iter().map(|p| self.creator(p)).collect::<Result<Vec<_>>>()?;
        let mats: Vec<&CMatrix> = phis.iter().map(StructuralMatrix::matrix).collect();
        let mask2 = self.basis.safe_mask(2);
        let mask3 = self.basis.safe_mask(3);
        let nondeformed = self.chi.is_nondeformed();
        let n = phis.len();

        let mut commutator: f64 = 0.0;
        let mut commutator_nd: f64 = 0.0;
        let mut double: f64 = 0.0;
        for a in 0..n {
            let ann = creators[a].adjoint();
            for b in 0..n {
                let k = ann.anticommutator(&creators[b]);
                for g1 in 0..n {
                    let direct = k.commutator(&creators[g1]);
                    let closed = self.commutator_closed_form(mats[a], mats[b], mats[g1])?;
                    commutator = commutator.max((&direct - &closed).max_abs_in_columns(&mask2));
                    if nondeformed {
                        let red = self.commutator_nondeformed(mats[a], mats[b], mats[g1])?;
                        commutator_nd = commutator_nd.max((&direct - &red).max_abs_in_columns(&mask2));
                    }
                    for g2 in 0..n {
                        let direct2 = direct.anticommutator(&creators[g2]);
                        let closed2 = self.double_closed_form(mats[a], mats[b], mats[g1], mats[g2])?;
                        double = double.max((&direct2 - &closed2).max_abs_in_columns(&mask3));
                    }
                }
            }
        }
        Ok(NestedIdentityCheck {
            commutator,
            commutator_nondeformed: nondeformed.then_some(commutator_nd),
            double,
        })
    }
}
