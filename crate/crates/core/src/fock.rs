//! Truncated multimode Fock spaces: deformed bosons tensored with fermions,
//! and the constituent creation, annihilation and number operators on them.
//!
//! Basis states are ordered lexicographically on
//! `(n_1, …, n_{D_b}; ε_1, …, ε_{D_f})`, so the vacuum has index 0.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// Default hard limit on the number of basis states.
pub const DEFAULT_BASIS_LIMIT: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeConfig {
    pub boson_modes: usize,
    pub fermion_modes: usize,
    /// Maximum occupation of each boson mode, inclusive.
    pub boson_cutoff: usize,
}

impl ModeConfig {
    pub fn new(boson_modes: usize, fermion_modes: usize, boson_cutoff: usize) -> Result<Self> {
        let config = Self {
            boson_modes,
            fermion_modes,
            boson_cutoff,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.boson_modes == 0 || self.fermion_modes == 0 {
            return Err(Error::InvalidConfig(format!(
                "need at least one boson and one fermion mode, got D_b = {}, D_f = {}",
                self.boson_modes, self.fermion_modes
            )));
        }
        if self.boson_cutoff < 2 {
            return Err(Error::InvalidConfig(format!(
                "boson cutoff must be at least 2, got {}",
                self.boson_cutoff
            )));
        }
        Ok(())
    }

    /// `(n_max + 1)^{D_b} · 2^{D_f}`, saturating instead of overflowing.
    pub fn basis_size(&self) -> u128 {
        let per_boson = self.boson_cutoff as u128 + 1;
        let mut size: u128 = 1;
        for _ in 0..self.boson_modes {
            size = size.saturating_mul(per_boson);
        }
        for _ in 0..self.fermion_modes {
            size = size.saturating_mul(2);
        }
        size
    }
}

/// Structure function `n ↦ χ(n)` of a deformed oscillator, tabulated for
/// `0 ≤ n ≤ max_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureFunction {
    values: Vec<f64>,
}

impl StructureFunction {
    /// Validates `χ(0) = 0`, `χ(1) = 1` and `χ(n) ≥ 0`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidStructureFunction(
                "at least χ(0) and χ(1) must be given".into(),
            ));
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidStructureFunction(format!(
                "χ(0) must be 0, got {}",
                values[0]
            )));
        }
        if (values[1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidStructureFunction(format!(
                "χ(1) must be 1, got {}",
                values[1]
            )));
        }
        if let Some((n, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidStructureFunction(format!(
                "χ({n}) = {v} is not a finite non-negative number"
            )));
        }
        Ok(Self { values })
    }

    pub fn from_fn(max_n: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new((0..=max_n).map(f).collect())
    }

    /// The ordinary oscillator, `χ(n) = n`.
    pub fn identity(max_n: usize) -> Self {
        Self::from_fn(max_n, |n| n as f64).expect("χ(n) = n is a valid structure function")
    }

    /// `χ(n) = (1 − qⁿ)/(1 − q)`, reducing to `n` at `q = 1`.
    pub fn q_deformed(q: f64, max_n: usize) -> Result<Self> {
        if !q.is_finite() || q < 0.0 {
            return Err(Error::InvalidStructureFunction(format!(
                "q must be finite and non-negative, got {q}"
            )));
        }
        if (q - 1.0).abs() < 1e-15 {
            return Ok(Self::identity(max_n));
        }
        Self::from_fn(max_n, |n| (1.0 - q.powi(n as i32)) / (1.0 - q))
    }

    /// `χ(2) = chi2` and `χ(n) = n` elsewhere; the one-composite level
    /// conditions depend only on `χ(2)`.
    pub fn with_chi2(chi2: f64, max_n: usize) -> Result<Self> {
        Self::from_fn(max_n.max(2), |n| if n == 2 { chi2 } else { n as f64 })
    }

    pub fn value(&self, n: usize) -> Option<f64> {
        self.values.get(n).copied()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest tabulated `n`.
    pub fn max_n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_nondeformed(&self) -> bool {
        self.values
            .iter()
            .enumerate()
            .all(|(n, &v)| (v - n as f64).abs() < 1e-14)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Boson,
    Fermion,
}

impl Sector {
    fn name(self) -> &'static str {
        match self {
            Sector::Boson => "boson",
            Sector::Fermion => "fermion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub boson_occupations: Vec<usize>,
    pub fermion_occupations: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    config: ModeConfig,
    states: Vec<BasisState>,
}

/// Enumerates all basis states, refusing more than [`DEFAULT_BASIS_LIMIT`].
pub fn enumerate_basis(config: ModeConfig) -> Result<FockBasis> {
    enumerate_basis_with_limit(config, DEFAULT_BASIS_LIMIT)
}

pub fn enumerate_basis_with_limit(config: ModeConfig, limit: usize) -> Result<FockBasis> {
    config.validate()?;
    let size = config.basis_size();
    if size > limit as u128 {
        return Err(Error::BasisTooLarge { size, limit });
    }
    let size = size as usize;
    let fermion_states = 1usize << config.fermion_modes;
    let per_boson = config.boson_cutoff + 1;
    let states = (0..size)
        .map(|index| {
            let mut boson_part = index / fermion_states;
            let fermion_part = index % fermion_states;
            let mut boson_occupations = vec![0; config.boson_modes];
            for slot in boson_occupations.iter_mut().rev() {
                *slot = boson_part % per_boson;
                boson_part /= per_boson;
            }
            let fermion_occupations = (0..config.fermion_modes)
                .map(|nu| (fermion_part >> (config.fermion_modes - 1 - nu)) & 1 == 1)
                .collect();
            BasisState {
                boson_occupations,
                fermion_occupations,
            }
        })
        .collect();
    Ok(FockBasis { config, states })
}

impl FockBasis {
    pub fn config(&self) -> &ModeConfig {
        &self.config
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, index: usize) -> &BasisState {
        &self.states[index]
    }

    pub fn vacuum_index(&self) -> usize {
        0
    }

    /// Ordinal of a state, or `None` if it does not belong to this basis.
    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        let c = &self.config;
        if state.boson_occupations.len() != c.boson_modes
            || state.fermion_occupations.len() != c.fermion_modes
        {
            return None;
        }
        let mut index = 0usize;
        for &n in &state.boson_occupations {
            if n > c.boson_cutoff {
                return None;
            }
            index = index * (c.boson_cutoff + 1) + n;
        }
        for &e in &state.fermion_occupations {
            index = index * 2 + usize::from(e);
        }
        Some(index)
    }

    /// Marks states whose boson occupations all leave room for `headroom`
    /// further creations.
    pub fn safe_mask(&self, headroom: usize) -> Vec<bool> {
        let top = self.config.boson_cutoff;
        self.states
            .iter()
            .map(|s| s.boson_occupations.iter().all(|&n| n + headroom <= top))
            .collect()
    }

    fn check_mode(&self, sector: Sector, mode: usize) -> Result<()> {
        let count = match sector {
            Sector::Boson => self.config.boson_modes,
            Sector::Fermion => self.config.fermion_modes,
        };
        if mode >= count {
            return Err(Error::ModeOutOfRange {
                sector: sector.name(),
                mode,
                count,
            });
        }
        Ok(())
    }

    /// Diagonal operator with entries `f(state)`.
    pub fn diagonal_operator(&self, f: impl Fn(&BasisState) -> f64) -> SparseOperator {
        let values: Vec<f64> = self.states.iter().map(f).collect();
        SparseOperator::diagonal(&values)
    }
}

/// Deformed boson creator `a†_μ`: `|…n_μ…⟩ ↦ √χ(n_μ+1) |…n_μ+1…⟩`, with
/// states at the cutoff annihilated.
pub fn boson_create(basis: &FockBasis, chi: &StructureFunction, mode: usize) -> Result<SparseOperator> {
    basis.check_mode(Sector::Boson, mode)?;
    let top = basis.config.boson_cutoff;
    if chi.max_n() < top {
        return Err(Error::StructureFunctionRange {
            requested: top,
            available: chi.max_n(),
        });
    }
    let mut triplets = Vec::new();
    for (col, state) in basis.states.iter().enumerate() {
        let n = state.boson_occupations[mode];
        if n == top {
            continue;
        }
        let mut target = state.clone();
        target.boson_occupations[mode] = n + 1;
        let row = basis.index_of(&target).expect("raised state stays in the basis");
        let amp = chi.value(n + 1).expect("checked against cutoff").sqrt();
        triplets.push((row, col, Complex64::from(amp)));
    }
    SparseOperator::from_triplets(basis.len(), triplets)
}

pub fn boson_annihilate(basis: &FockBasis, chi: &StructureFunction, mode: usize) -> Result<SparseOperator> {
    Ok(boson_create(basis, chi, mode)?.adjoint())
}

/// Fermion creator `b†_ν` with sign `(−1)^{#occupied modes below ν}`.
pub fn fermion_create(basis: &FockBasis, mode: usize) -> Result<SparseOperator> {
    basis.check_mode(Sector::Fermion, mode)?;
    let mut triplets = Vec::new();
    for (col, state) in basis.states.iter().enumerate() {
        if state.fermion_occupations[mode] {
            continue;
        }
        let below = state.fermion_occupations[..mode].iter().filter(|&&e| e).count();
        let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
        let mut target = state.clone();
        target.fermion_occupations[mode] = true;
        let row = basis.index_of(&target).expect("filled state stays in the basis");
        triplets.push((row, col, Complex64::from(sign)));
    }
    SparseOperator::from_triplets(basis.len(), triplets)
}

pub fn fermion_annihilate(basis: &FockBasis, mode: usize) -> Result<SparseOperator> {
    Ok(fermion_create(basis, mode)?.adjoint())
}

/// Occupation number of one mode as a diagonal operator.
pub fn number_operator(basis: &FockBasis, sector: Sector, mode: usize) -> Result<SparseOperator> {
    basis.check_mode(sector, mode)?;
    Ok(match sector {
        Sector::Boson => basis.diagonal_operator(|s| s.boson_occupations[mode] as f64),
        Sector::Fermion => basis.diagonal_operator(|s| f64::from(u8::from(s.fermion_occupations[mode]))),
    })
}

/// All constituent creators and annihilators on one basis.
#[derive(Debug, Clone)]
pub struct ConstituentOperators {
    pub boson_create: Vec<SparseOperator>,
    pub boson_annihilate: Vec<SparseOperator>,
    pub fermion_create: Vec<SparseOperator>,
    pub fermion_annihilate: Vec<SparseOperator>,
}

impl ConstituentOperators {
    pub fn build(basis: &FockBasis, chi: &StructureFunction) -> Result<Self> {
        let c = basis.config();
        let boson_create = (0..c.boson_modes)
            .map(|mu| boson_create(basis, chi, mu))
            .collect::<Result<Vec<_>>>()?;
        let fermion_create = (0..c.fermion_modes)
            .map(|nu| fermion_create(basis, nu))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            boson_annihilate: boson_create.iter().map(SparseOperator::adjoint).collect(),
            fermion_annihilate: fermion_create.iter().map(SparseOperator::adjoint).collect(),
            boson_create,
            fermion_create,
        })
    }
}
