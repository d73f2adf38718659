//! Row-compressed complex sparse operators and dense state vectors.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Entries with modulus at or below this are not stored.
pub const DROP_TOLERANCE: f64 = 1e-15;

/// Square complex sparse matrix; each row keeps `(column, value)` pairs
/// sorted by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

fn keep(z: Complex64) -> bool {
    z.norm() > DROP_TOLERANCE
}

impl SparseOperator {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![Vec::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let rows = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let z = Complex64::from(v);
                if keep(z) {
                    vec![(i, z)]
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self {
            dim: values.len(),
            rows,
        }
    }

    /// Builds an operator from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); dim];
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside a {dim}-dimensional operator"
                )));
            }
            rows[r].push((c, v));
        }
        for row in &mut rows {
            *row = compress(std::mem::take(row));
        }
        Ok(Self { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.rows[row]
            .binary_search_by_key(&col, |&(c, _)| c)
            .map(|k| self.rows[row][k].1)
            .unwrap_or_default()
    }

    pub fn row(&self, row: usize) -> &[(usize, Complex64)] {
        &self.rows[row]
    }

    /// Iterates over stored `(row, col, value)` entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
    }

    pub fn adjoint(&self) -> Self {
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); self.dim];
        for (r, c, v) in self.entries() {
            rows[c].push((r, v.conj()));
        }
        // entries() walks rows in increasing order, so each new row is sorted
        Self {
            dim: self.dim,
            rows,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&(c, v)| (c, v * factor))
                    .filter(|&(_, v)| keep(v))
                    .collect()
            })
            .collect();
        Self {
            dim: self.dim,
            rows,
        }
    }

    fn check_dim(&self, other: &Self) {
        assert_eq!(
            self.dim, other.dim,
            "operators act on spaces of different dimension"
        );
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        self.check_dim(other);
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut merged = Vec::with_capacity(a.len() + b.len());
                merged.extend_from_slice(a);
                merged.extend(b.iter().map(|&(c, v)| (c, v * sign)));
                compress(merged)
            })
            .collect();
        Self {
            dim: self.dim,
            rows,
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        self.check_dim(other);
        let mut acc = vec![Complex64::default(); self.dim];
        let mut touched = vec![false; self.dim];
        let mut cols = Vec::new();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                cols.clear();
                for &(k, a) in row {
                    for &(j, b) in &other.rows[k] {
                        if !touched[j] {
                            touched[j] = true;
                            cols.push(j);
                        }
                        acc[j] += a * b;
                    }
                }
                cols.sort_unstable();
                let mut out = Vec::with_capacity(cols.len());
                for &j in &cols {
                    if keep(acc[j]) {
                        out.push((j, acc[j]));
                    }
                    acc[j] = Complex64::default();
                    touched[j] = false;
                }
                out
            })
            .collect();
        Self {
            dim: self.dim,
            rows,
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &self.matmul(other) + &other.matmul(self)
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        assert_eq!(self.dim, state.dim(), "state and operator dimensions differ");
        let amplitudes = self
            .rows
            .iter()
            .map(|row| row.iter().map(|&(c, v)| v * state.amplitudes[c]).sum())
            .collect();
        StateVector { amplitudes }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entry modulus among columns selected by `mask`.
    pub fn max_abs_in_columns(&self, mask: &[bool]) -> f64 {
        self.entries()
            .filter(|&(_, c, _)| mask[c])
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }
}

/// Sorts by column, sums duplicates and drops negligible entries.
fn compress(mut row: Vec<(usize, Complex64)>) -> Vec<(usize, Complex64)> {
    row.sort_by_key(|&(c, _)| c);
    let mut out: Vec<(usize, Complex64)> = Vec::with_capacity(row.len());
    for (c, v) in row {
        match out.last_mut() {
            Some((lc, lv)) if *lc == c => *lv += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|&(_, v)| keep(v));
    out
}

impl Add for &SparseOperator {
    type Output = SparseOperator;
    fn add(self, rhs: Self) -> SparseOperator {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &SparseOperator {
    type Output = SparseOperator;
    fn sub(self, rhs: Self) -> SparseOperator {
        self.combine(rhs, -1.0)
    }
}

impl Mul for &SparseOperator {
    type Output = SparseOperator;
    fn mul(self, rhs: Self) -> SparseOperator {
        self.matmul(rhs)
    }
}

impl Neg for &SparseOperator {
    type Output = SparseOperator;
    fn neg(self) -> SparseOperator {
        self.scale(Complex64::from(-1.0))
    }
}

/// Dense amplitude vector over a Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            amplitudes: vec![Complex64::default(); dim],
        }
    }

    /// Unit vector on the basis state with the given index.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut s = Self::zeros(dim);
        s.amplitudes[index] = Complex64::from(1.0);
        s
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}
