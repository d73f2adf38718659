//! Small dense complex linear algebra: singular value decomposition by
//! one-sided Jacobi rotations, Haar-random unitaries and a few matrix helpers.
//!
//! The matrices handled here are tiny (2×2, 3×3, occasionally a little
//! larger for quasiboson embeddings), so clarity wins over blocking.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;

/// Off-diagonal threshold for the Jacobi sweeps, relative to the column norms.
pub const JACOBI_TOLERANCE: f64 = 1e-14;
/// Maximum number of Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn phase(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

/// Thin singular value decomposition `A = U diag(σ) V†` with σ sorted descending.
///
/// For an `m × n` input with `k = min(m, n)`, `u` is `m × k`, `v` is `n × k`
/// and both have orthonormal columns.
#[derive(Debug, Clone)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    pub u: CMatrix,
    pub v: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let k = self.singular_values.len();
        let mut us = self.u.clone();
        for j in 0..k {
            let s = self.singular_values[j];
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.adjoint()
    }
}

/// Computes the SVD of a complex matrix.
///
/// Columns are orthogonalized pairwise by complex Jacobi rotations, which is
/// the cyclic Jacobi eigen-iteration on `A†A` carried out implicitly on `A`.
/// The right vectors accumulate the rotations; left vectors are the
/// normalized columns, with an orthonormal completion for null directions.
pub fn svd(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    if m < n {
        let t = svd(&a.adjoint());
        return Svd {
            singular_values: t.singular_values,
            u: t.v,
            v: t.u,
        };
    }
    if n == 0 {
        return Svd {
            singular_values: Vec::new(),
            u: CMatrix::zeros(m, 0),
            v: CMatrix::zeros(0, 0),
        };
    }

    let mut w = a.clone();
    let mut v = CMatrix::identity(n, n);

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g <= JACOBI_TOLERANCE * (alpha * beta).sqrt() || g < f64::MIN_POSITIVE {
                    continue;
                }
                rotated = true;

                // Make the overlap real by rephasing column q.
                let e = (gamma / g).conj();
                w.column_mut(q).scale_mut(1.0);
                for i in 0..m {
                    w[(i, q)] *= e;
                }
                for i in 0..n {
                    v[(i, q)] *= e;
                }

                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = wp * c - wq * s;
                    w[(i, q)] = wp * s + wq * c;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c - vq * s;
                    v[(i, q)] = vp * s + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let sigma_max = norms[order[0]];
    let null_threshold = (sigma_max * 1e-13).max(f64::MIN_POSITIVE);

    let mut u = CMatrix::zeros(m, n);
    let mut vs = CMatrix::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        singular_values.push(s);
        vs.set_column(k, &v.column(j));
        if s > null_threshold {
            let col = w.column(j) / Complex64::from(s);
            u.set_column(k, &col);
        } else {
            pending.push(k);
        }
    }
    complete_orthonormal_columns(&mut u, &pending);

    Svd {
        singular_values,
        u,
        v: vs,
    }
}

/// Fills the listed columns of `u` with unit vectors orthogonal to every
/// other column, drawing candidates from the canonical basis.
fn complete_orthonormal_columns(u: &mut CMatrix, pending: &[usize]) {
    let m = u.nrows();
    let mut filled: Vec<usize> = (0..u.ncols()).filter(|k| !pending.contains(k)).collect();
    for &k in pending {
        let mut best: Option<(f64, nalgebra::DVector<Complex64>)> = None;
        for e in 0..m {
            let mut cand = nalgebra::DVector::<Complex64>::zeros(m);
            cand[e] = Complex64::from(1.0);
            // two passes of Gram-Schmidt
            for _ in 0..2 {
                for &f in &filled {
                    let proj = u.column(f).dotc(&cand);
                    cand -= u.column(f) * proj;
                }
            }
            let nrm = cand.norm();
            if best.as_ref().is_none_or(|(b, _)| nrm > *b) {
                best = Some((nrm, cand));
            }
        }
        let (nrm, cand) = best.expect("matrix has at least one row");
        u.set_column(k, &(cand / Complex64::from(nrm)));
        filled.push(k);
    }
}

/// Haar-distributed unitary matrix (QR of a complex Ginibre matrix with
/// the phase of the R diagonal folded back into Q).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let z = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im)
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::from(1.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Haar-random unitary rephased to unit determinant.
pub fn random_special_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let mut u = random_unitary(n, rng);
    fix_determinant(&mut u);
    u
}

/// Multiplies `u` by the global phase that makes `det u = 1`.
pub fn fix_determinant(u: &mut CMatrix) {
    let n = u.nrows();
    if n == 0 {
        return;
    }
    let det = u.determinant();
    let ph = phase(-det.arg() / n as f64);
    u.scale_mut(1.0);
    for x in u.iter_mut() {
        *x *= ph;
    }
}

/// Uniform random phase angle in `[0, 2π)`.
pub fn random_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(0.0..std::f64::consts::TAU)
}

/// Uniformly distributed complex unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                c64(re, im)
            })
            .collect();
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 1e-8 {
            return v.into_iter().map(|z| z / nrm).collect();
        }
    }
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().copied().sum()
}

/// `diag{X^{μμ}}`: keeps the diagonal, zeroes the rest.
pub fn diagonal_part(m: &CMatrix) -> CMatrix {
    let n = m.nrows().min(m.ncols());
    let mut d = CMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..n {
        d[(i, i)] = m[(i, i)];
    }
    d
}

pub fn real_diagonal(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c64(values[i], 0.0) } else { c64(0.0, 0.0) })
}

pub fn complex_diagonal(values: &[Complex64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { values[i] } else { c64(0.0, 0.0) })
}

/// Largest entrywise deviation of `U†U` from the identity.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    let id = CMatrix::identity(g.nrows(), g.ncols());
    (g - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Block-diagonal embedding `diag(a, b)`.
pub fn block_diagonal(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut m = CMatrix::zeros(ra + rb, ca + cb);
    m.view_mut((0, 0), (ra, ca)).copy_from(a);
    m.view_mut((ra, ca), (rb, cb)).copy_from(b);
    m
}

/// `[[u, v], [−v̄, ū]]`, an SU(2) matrix when `|u|² + |v|² = 1`.
pub fn su2(u: Complex64, v: Complex64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[u, v, -v.conj(), u.conj()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn svd_of_diagonal_is_sorted() {
        let a = real_diagonal(&[0.6, 0.8]);
        let s = svd(&a);
        assert!((s.singular_values[0] - 0.8).abs() < 1e-15);
        assert!((s.singular_values[1] - 0.6).abs() < 1e-15);
        assert!(max_abs(&(s.reconstruct() - a)) < 1e-15);
    }

    #[test]
    fn svd_rank_one_nilpotent() {
        let a = CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        let s = svd(&a);
        assert_eq!(s.singular_values, vec![1.0, 0.0]);
        assert!(unitarity_defect(&s.u) < 1e-15);
        assert!(unitarity_defect(&s.v) < 1e-15);
        assert!(max_abs(&(s.reconstruct() - a)) < 1e-15);
    }

    #[test]
    fn svd_recovers_conjugated_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let u = random_unitary(3, &mut rng);
            let v = random_unitary(3, &mut rng);
            let a = &u * real_diagonal(&[0.7, 0.5, 0.0]) * v.adjoint();
            let s = svd(&a);
            assert!((s.singular_values[0] - 0.7).abs() < 1e-13);
            assert!((s.singular_values[1] - 0.5).abs() < 1e-13);
            assert!(s.singular_values[2].abs() < 1e-13);
            assert!(unitarity_defect(&s.u) < 1e-12);
            assert!(unitarity_defect(&s.v) < 1e-12);
            assert!(max_abs(&(s.reconstruct() - a)) < 1e-13);
        }
    }

    #[test]
    fn svd_rectangular_both_orientations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = CMatrix::from_fn(2, 4, |_, _| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let s = svd(&a);
        assert_eq!(s.singular_values.len(), 2);
        assert_eq!(s.u.shape(), (2, 2));
        assert_eq!(s.v.shape(), (4, 2));
        assert!(max_abs(&(s.reconstruct() - &a)) < 1e-14);

        let t = svd(&a.adjoint());
        for (x, y) in s.singular_values.iter().zip(&t.singular_values) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..5 {
            let u = random_special_unitary(n, &mut rng);
            assert!(unitarity_defect(&u) < 1e-13);
            assert!((u.determinant() - Complex64::from(1.0)).norm() < 1e-13);
        }
    }
}
