//! Dense complex matrices and the eigen/metric toolkit under the simulator.
//!
//! Everything in this crate lives in a 10-dimensional joint space (a 2-level
//! ancilla tensored with a 5-level arm register) or in 4x4 two-qubit blocks
//! cut out of it, so the algorithms here favour simplicity and predictable
//! accuracy over scalability: storage is a flat row-major `Vec`, Hermitian
//! eigenproblems go through cyclic Jacobi with exact 2x2 rotations, and the
//! general 4x4 spectrum (needed for the concurrence construction) goes
//! through Hessenberg reduction followed by Wilkinson-shifted QR.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

/// Dimension of the ancilla factor (polarization qubit).
pub const ANCILLA_DIM: usize = 2;
/// Dimension of the arm factor (photon in one of four arm modes, or absorbed).
pub const ARM_DIM: usize = 5;
/// Dimension of the joint ancilla ⊗ arm space.
pub const JOINT_DIM: usize = ANCILLA_DIM * ARM_DIM;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Which tensor factor of the joint space a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    /// Keep the 2-dimensional ancilla, trace out the arm register.
    Ancilla,
    /// Keep the 5-dimensional arm register, trace out the ancilla.
    Arm,
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// All-zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, ONE);
        }
        m
    }

    /// Builds a matrix by evaluating `f(row, col)` at every position.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds a matrix from nested row slices; all rows must share a length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// True when the matrix is square.
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Entry at `(row, col)`.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    /// Overwrites the entry at `(row, col)`.
    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.cols + col] = value;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Plain transpose (no conjugation).
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Sum of diagonal entries.
    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Matrix scaled by a complex factor.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Entrywise sum; shapes must match.
    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch in add"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Entrywise difference; shapes must match.
    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch in sub"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.get(i, j) + aik * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference `|self - other|`; shapes must match.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch in max_abs_diff"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest |M[i][j] - conj(M[j][i])| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square(), "hermiticity of a non-square matrix");
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// True when the Hermiticity defect stays below `tolerance`.
    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= tolerance
    }

    /// True when `self† · self` is the identity within `tolerance`.
    pub fn is_unitary(&self, tolerance: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let gram = self.adjoint().matmul(self);
        gram.max_abs_diff(&Self::identity(self.rows)) <= tolerance
    }
}

/// Kronecker product; the row index of the result is `i_a * b.rows() + i_b`
/// (and likewise for columns), i.e. the left factor owns the slow index.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ia in 0..a.rows() {
        for ja in 0..a.cols() {
            let f = a.get(ia, ja);
            if f == ZERO {
                continue;
            }
            for ib in 0..b.rows() {
                for jb in 0..b.cols() {
                    out.set(ia * b.rows() + ib, ja * b.cols() + jb, f * b.get(ib, jb));
                }
            }
        }
    }
    out
}

/// Partial trace of a matrix on the joint ancilla ⊗ arm space.
///
/// The joint index convention is `ancilla * ARM_DIM + arm`. Works for any
/// 10x10 matrix (not just density matrices), so algebraic identities such as
/// `partial_trace(A ⊗ B, Ancilla) = A · Tr B` hold exactly.
pub fn partial_trace(rho: &ComplexMatrix, keep: Subsystem) -> Result<ComplexMatrix> {
    if rho.rows() != JOINT_DIM || rho.cols() != JOINT_DIM {
        return Err(Error::InvalidInput(format!(
            "partial_trace expects a {JOINT_DIM}x{JOINT_DIM} matrix, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let out = match keep {
        Subsystem::Ancilla => ComplexMatrix::from_fn(ANCILLA_DIM, ANCILLA_DIM, |a, b| {
            (0..ARM_DIM)
                .map(|m| rho.get(a * ARM_DIM + m, b * ARM_DIM + m))
                .sum()
        }),
        Subsystem::Arm => ComplexMatrix::from_fn(ARM_DIM, ARM_DIM, |m, n| {
            (0..ANCILLA_DIM)
                .map(|a| rho.get(a * ARM_DIM + m, a * ARM_DIM + n))
                .sum()
        }),
    };
    Ok(out)
}

/// Result of a Hermitian eigendecomposition.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    /// Real eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as matrix columns, in the same order as
    /// `values`; present only when requested.
    pub vectors: Option<ComplexMatrix>,
}

/// Eigendecomposition of a Hermitian matrix (n ≤ 10) by cyclic Jacobi.
///
/// Each rotation diagonalizes one 2x2 principal submatrix exactly, which
/// keeps the iteration unconditionally convergent and the eigenvectors
/// orthonormal to machine precision at these sizes.
pub fn eig_hermitian(m: &ComplexMatrix, want_vectors: bool) -> Result<HermitianSpectrum> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!(
            "eig_hermitian expects a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 || n > JOINT_DIM {
        return Err(Error::InvalidInput(format!(
            "eig_hermitian is sized for 1..={JOINT_DIM}, got n={n}"
        )));
    }
    let defect = m.hermiticity_defect();
    if defect > tol::EIG_INPUT_HERMITICITY {
        return Err(Error::InvalidInput(format!(
            "eig_hermitian input is not Hermitian: defect {defect:.3e}"
        )));
    }

    // Work on the Hermitian part so round-off in the input cannot bias the
    // rotations; for exactly Hermitian inputs this is the identity map.
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| {
        (m.get(i, j) + m.get(j, i).conj()) * Complex64::new(0.5, 0.0)
    });
    let mut v = if want_vectors {
        Some(ComplexMatrix::identity(n))
    } else {
        None
    };

    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut converged = false;
    for _ in 0..tol::JACOBI_MAX_SWEEPS {
        let off: f64 = {
            let mut s = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    s += a.get(p, q).norm_sqr();
                }
            }
            s.sqrt()
        };
        if off <= tol::JACOBI_CONVERGENCE * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = a.get(p, q);
                if z == ZERO {
                    continue;
                }
                // Exact eigen-rotation of the 2x2 block [[alpha, z], [z*, beta]].
                let alpha = a.get(p, p).re;
                let beta = a.get(q, q).re;
                let delta = 0.5 * (alpha - beta);
                let r = z.norm();
                let h = delta.hypot(r);
                // lam_plus - alpha, computed without cancellation.
                let gap = if delta >= 0.0 {
                    r * r / (h + delta)
                } else {
                    h - delta
                };
                let norm = (r * r + gap * gap).sqrt();
                let u0 = z / norm;
                let u1 = Complex64::new(gap / norm, 0.0);
                // Columns of the rotation: (u0, u1) and (-conj(u1), conj(u0)).
                for k in 0..n {
                    let rp = a.get(p, k);
                    let rq = a.get(q, k);
                    a.set(p, k, u0.conj() * rp + u1.conj() * rq);
                    a.set(q, k, -u1 * rp + u0 * rq);
                }
                for k in 0..n {
                    let cp = a.get(k, p);
                    let cq = a.get(k, q);
                    a.set(k, p, cp * u0 + cq * u1);
                    a.set(k, q, -cp * u1.conj() + cq * u0.conj());
                }
                // The rotation annihilates this pair exactly in exact
                // arithmetic; pin the round-off so convergence stays monotone.
                a.set(p, q, ZERO);
                a.set(q, p, ZERO);
                let dp = a.get(p, p);
                let dq = a.get(q, q);
                a.set(p, p, Complex64::new(dp.re, 0.0));
                a.set(q, q, Complex64::new(dq.re, 0.0));
                if let Some(vm) = v.as_mut() {
                    for k in 0..n {
                        let cp = vm.get(k, p);
                        let cq = vm.get(k, q);
                        vm.set(k, p, cp * u0 + cq * u1);
                        vm.set(k, q, -cp * u1.conj() + cq * u0.conj());
                    }
                }
            }
        }
    }
    if !converged {
        return Err(Error::NumericalInvariant(format!(
            "Jacobi failed to converge in {} sweeps",
            tol::JACOBI_MAX_SWEEPS
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = v.map(|vm| ComplexMatrix::from_fn(n, n, |row, col| vm.get(row, order[col])));
    Ok(HermitianSpectrum { values, vectors })
}

/// Eigenvalues of a general complex 4x4 matrix.
///
/// Householder reduction to upper Hessenberg form, then explicit QR steps
/// with a Wilkinson shift; a subdiagonal entry deflates once it drops below
/// [`tol::QR_DEFLATION`] relative to its diagonal neighbours. Always returns
/// four values (as a multiset, in no particular order); if the iteration cap
/// is ever hit the current diagonal is returned as the best estimate.
#[allow(clippy::needless_range_loop)] // in-place pivoting reads clearest with indices
pub fn eig_general4(m: &ComplexMatrix) -> Result<[Complex64; 4]> {
    const N: usize = 4;
    if m.rows() != N || m.cols() != N {
        return Err(Error::InvalidInput(format!(
            "eig_general4 expects a 4x4 matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let mut h = [[ZERO; N]; N];
    for i in 0..N {
        for j in 0..N {
            h[i][j] = m.get(i, j);
        }
    }

    // Hessenberg reduction: annihilate column k below the subdiagonal with a
    // Householder reflection applied from both sides.
    for k in 0..N - 2 {
        let tail_sq: f64 = (k + 2..N).map(|i| h[i][k].norm_sqr()).sum();
        if tail_sq == 0.0 {
            continue;
        }
        let x0 = h[k + 1][k];
        let norm_x = (x0.norm_sqr() + tail_sq).sqrt();
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -phase * norm_x;
        let mut v = [ZERO; N]; // reflection vector, stored from row k+1
        v[k + 1] = x0 - alpha;
        for i in k + 2..N {
            v[i] = h[i][k];
        }
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let coef = 2.0 / vnorm_sq;
        // Left: H <- (I - c v v†) H
        for j in 0..N {
            let w: Complex64 = (k + 1..N).map(|i| v[i].conj() * h[i][j]).sum();
            for i in k + 1..N {
                h[i][j] -= coef * w * v[i];
            }
        }
        // Right: H <- H (I - c v v†)
        for i in 0..N {
            let w: Complex64 = (k + 1..N).map(|j| h[i][j] * v[j]).sum();
            for j in k + 1..N {
                h[i][j] -= coef * w * v[j].conj();
            }
        }
        for i in k + 2..N {
            h[i][k] = ZERO;
        }
    }

    let deflated = |h: &[[Complex64; N]; N], l: usize| -> bool {
        let neighbours = h[l - 1][l - 1].norm() + h[l][l].norm();
        h[l][l - 1].norm() <= tol::QR_DEFLATION * neighbours.max(1.0)
    };

    let mut eigs = [ZERO; N];
    let mut hi = N - 1;
    let mut iterations = 0usize;
    loop {
        // Pop converged eigenvalues off the bottom of the active window.
        loop {
            if hi == 0 {
                eigs[0] = h[0][0];
                return Ok(eigs);
            }
            if deflated(&h, hi) {
                eigs[hi] = h[hi][hi];
                hi -= 1;
            } else if hi == 1 || deflated(&h, hi - 1) {
                // Isolated trailing 2x2 block: solve its quadratic directly.
                let (l1, l2) = eig2(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi]);
                eigs[hi] = l1;
                eigs[hi - 1] = l2;
                if hi == 1 {
                    return Ok(eigs);
                }
                hi -= 2;
            } else {
                break;
            }
        }
        if iterations >= tol::QR_MAX_ITERATIONS {
            for i in 0..=hi {
                eigs[i] = h[i][i];
            }
            return Ok(eigs);
        }
        iterations += 1;

        // Start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 && !deflated(&h, lo) {
            lo -= 1;
        }

        // Wilkinson shift: the eigenvalue of the trailing 2x2 closer to the
        // bottom-right entry.
        let (m1, m2) = eig2(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi]);
        let d = h[hi][hi];
        let sigma = if (m1 - d).norm() <= (m2 - d).norm() {
            m1
        } else {
            m2
        };

        // Explicit shifted QR step on the active block.
        for i in lo..=hi {
            h[i][i] -= sigma;
        }
        let mut rot = [(ONE, ZERO); N];
        for i in lo..hi {
            let f = h[i][i];
            let g = h[i + 1][i];
            let omega = (f.norm_sqr() + g.norm_sqr()).sqrt();
            let (cf, cg) = if omega == 0.0 {
                (ONE, ZERO)
            } else {
                (f / omega, g / omega)
            };
            rot[i] = (cf, cg);
            for j in lo..=hi {
                let x = h[i][j];
                let y = h[i + 1][j];
                h[i][j] = cf.conj() * x + cg.conj() * y;
                h[i + 1][j] = -cg * x + cf * y;
            }
        }
        for i in lo..hi {
            let (cf, cg) = rot[i];
            for r in lo..=hi {
                let x = h[r][i];
                let y = h[r][i + 1];
                h[r][i] = x * cf + y * cg;
                h[r][i + 1] = -x * cg.conj() + y * cf.conj();
            }
        }
        for i in lo..=hi {
            h[i][i] += sigma;
        }
    }
}

/// Eigenvalues of a general complex 2x2 matrix `[[a, b], [c, d]]`.
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let mid = (a + d) * Complex64::new(0.5, 0.0);
    let delta = (a - d) * Complex64::new(0.5, 0.0);
    let disc = (delta * delta + b * c).sqrt();
    (mid + disc, mid - disc)
}

/// Trace distance `0.5 * Σ |eig(a - b)|` between two Hermitian matrices.
///
/// For density matrices this lands in `[0, 1]`; 0 means the states are
/// operationally indistinguishable.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if (a.rows(), a.cols()) != (b.rows(), b.cols()) || !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "trace_distance expects equal square shapes, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let diff = a.sub(b);
    let spectrum = eig_hermitian(&diff, false)?;
    Ok(0.5 * spectrum.values.iter().map(|l| l.abs()).sum::<f64>())
}

/// Purity `Tr(ρ²)` of a square matrix, as a real number.
pub fn purity(rho: &ComplexMatrix) -> f64 {
    assert!(rho.is_square(), "purity of a non-square matrix");
    let n = rho.rows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += rho.get(i, j) * rho.get(j, i);
        }
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha12Rng;
    use rand_core::{RngCore, SeedableRng};

    const TOLERANCE: f64 = 1e-10;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn uniform(rng: &mut ChaCha12Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn random_complex(rng: &mut ChaCha12Rng) -> Complex64 {
        c(2.0 * uniform(rng) - 1.0, 2.0 * uniform(rng) - 1.0)
    }

    fn random_matrix(rng: &mut ChaCha12Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| random_complex(rng))
    }

    fn random_hermitian(rng: &mut ChaCha12Rng, n: usize) -> ComplexMatrix {
        let g = random_matrix(rng, n);
        g.add(&g.adjoint()).scaled(c(0.5, 0.0))
    }

    fn random_density(rng: &mut ChaCha12Rng, n: usize) -> ComplexMatrix {
        let g = random_matrix(rng, n);
        let p = g.matmul(&g.adjoint());
        let t = p.trace().re;
        p.scaled(c(1.0 / t, 0.0))
    }

    fn pauli_y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ])
    }

    #[test]
    fn tensor_of_pauli_y_pair_matches_enumerated_table() {
        let yy = tensor(&pauli_y(), &pauli_y());
        // (sigma_y ⊗ sigma_y) worked out entry by entry: real, antidiagonal.
        let expected = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        assert_eq!(yy.max_abs_diff(&expected), 0.0);
    }

    #[test]
    fn tensor_index_convention_left_factor_is_slow() {
        let a = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)]]);
        let b = ComplexMatrix::from_rows(&[vec![c(3.0, 0.0)], vec![c(5.0, 0.0)]]);
        let t = tensor(&a, &b);
        assert_eq!(t.rows(), 2);
        assert_eq!(t.cols(), 2);
        // row = i_a * b.rows + i_b, col = j_a * b.cols + j_b
        assert_eq!(t.get(0, 0), c(3.0, 0.0));
        assert_eq!(t.get(1, 0), c(5.0, 0.0));
        assert_eq!(t.get(0, 1), c(6.0, 0.0));
        assert_eq!(t.get(1, 1), c(10.0, 0.0));
    }

    #[test]
    fn tensor_is_associative_on_dyadic_entries() {
        // Dyadic entries keep every intermediate product exactly
        // representable, so associativity holds bit for bit.
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let dyadic = |rng: &mut ChaCha12Rng| {
            let k = (rng.next_u64() % 33) as f64 - 16.0;
            let l = (rng.next_u64() % 33) as f64 - 16.0;
            c(k / 16.0, l / 16.0)
        };
        for _ in 0..50 {
            let a = ComplexMatrix::from_fn(2, 2, |_, _| dyadic(&mut rng));
            let b = ComplexMatrix::from_fn(3, 2, |_, _| dyadic(&mut rng));
            let d = ComplexMatrix::from_fn(2, 3, |_, _| dyadic(&mut rng));
            let left = tensor(&tensor(&a, &b), &d);
            let right = tensor(&a, &tensor(&b, &d));
            assert_eq!(left, right);
        }
    }

    #[test]
    fn partial_trace_recovers_tensor_factors() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = random_matrix(&mut rng, ANCILLA_DIM);
            let b = random_matrix(&mut rng, ARM_DIM);
            let joint = tensor(&a, &b);
            let kept_a = partial_trace(&joint, Subsystem::Ancilla).unwrap();
            let kept_b = partial_trace(&joint, Subsystem::Arm).unwrap();
            let expect_a = a.scaled(b.trace());
            let expect_b = b.scaled(a.trace());
            assert!(kept_a.max_abs_diff(&expect_a) <= 1e-12);
            assert!(kept_b.max_abs_diff(&expect_b) <= 1e-12);
        }
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..100 {
            let m = random_matrix(&mut rng, JOINT_DIM);
            let ta = partial_trace(&m, Subsystem::Ancilla).unwrap();
            let tb = partial_trace(&m, Subsystem::Arm).unwrap();
            assert!((ta.trace() - m.trace()).norm() <= 1e-12);
            assert!((tb.trace() - m.trace()).norm() <= 1e-12);
        }
    }

    #[test]
    fn partial_trace_rejects_wrong_shape() {
        let m = ComplexMatrix::identity(4);
        assert!(matches!(
            partial_trace(&m, Subsystem::Ancilla),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn eig_hermitian_solves_pauli_y() {
        let spectrum = eig_hermitian(&pauli_y(), true).unwrap();
        assert!((spectrum.values[0] + 1.0).abs() <= TOLERANCE);
        assert!((spectrum.values[1] - 1.0).abs() <= TOLERANCE);
        let v = spectrum.vectors.unwrap();
        assert!(v.is_unitary(TOLERANCE));
    }

    #[test]
    fn eig_hermitian_leaves_diagonal_matrices_alone() {
        let d = ComplexMatrix::from_rows(&[
            vec![c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        ]);
        let spectrum = eig_hermitian(&d, false).unwrap();
        assert_eq!(spectrum.values, vec![-1.0, 0.5, 3.0]);
    }

    #[test]
    fn eig_hermitian_reconstructs_random_inputs() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for trial in 0..1000 {
            let n = 2 + (trial % (JOINT_DIM - 1));
            let m = random_hermitian(&mut rng, n);
            let spectrum = eig_hermitian(&m, true).unwrap();
            let v = spectrum.vectors.as_ref().unwrap();
            assert!(
                v.is_unitary(TOLERANCE),
                "eigenvectors not orthonormal (n={n})"
            );
            let d = ComplexMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    c(spectrum.values[i], 0.0)
                } else {
                    ZERO
                }
            });
            let rebuilt = v.matmul(&d).matmul(&v.adjoint());
            assert!(
                rebuilt.max_abs_diff(&m) <= TOLERANCE,
                "reconstruction defect {:.3e} (n={n})",
                rebuilt.max_abs_diff(&m)
            );
            let sum: f64 = spectrum.values.iter().sum();
            assert!((sum - m.trace().re).abs() <= TOLERANCE);
            let sorted = {
                let mut s = spectrum.values.clone();
                s.sort_by(f64::total_cmp);
                s
            };
            assert_eq!(sorted, spectrum.values, "eigenvalues not ascending");
        }
    }

    #[test]
    fn eig_hermitian_rejects_non_hermitian_input() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        assert!(matches!(
            eig_hermitian(&m, false),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn eig_general4_solves_complex_diagonal() {
        let d = ComplexMatrix::from_fn(4, 4, |i, j| {
            if i != j {
                return ZERO;
            }
            [c(0.0, 1.0), c(0.0, -1.0), c(1.0, 1.0), c(2.0, 0.0)][i]
        });
        let eigs = eig_general4(&d).unwrap();
        for target in [c(0.0, 1.0), c(0.0, -1.0), c(1.0, 1.0), c(2.0, 0.0)] {
            assert!(
                eigs.iter().any(|l| (l - target).norm() <= 1e-9),
                "missing eigenvalue {target}"
            );
        }
    }

    #[test]
    fn eig_general4_finds_companion_matrix_roots() {
        // Companion matrix of (x-1)(x-2)(x-3)(x-4) = x^4 - 10x^3 + 35x^2 - 50x + 24.
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-24.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(50.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(-35.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(10.0, 0.0)],
        ]);
        let eigs = eig_general4(&m).unwrap();
        for root in [1.0, 2.0, 3.0, 4.0] {
            assert!(
                eigs.iter().any(|l| (l - c(root, 0.0)).norm() <= 1e-9),
                "missing root {root}: got {eigs:?}"
            );
        }
    }

    #[test]
    fn eig_general4_on_nilpotent_shift_is_all_zero() {
        let m = ComplexMatrix::from_fn(4, 4, |i, j| if j == i + 1 { ONE } else { ZERO });
        let eigs = eig_general4(&m).unwrap();
        for l in eigs {
            assert!(l.norm() <= 1e-9);
        }
    }

    #[test]
    fn eig_general4_eigenvalue_sum_matches_trace() {
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        for _ in 0..1000 {
            let m = random_matrix(&mut rng, 4);
            let eigs = eig_general4(&m).unwrap();
            let sum: Complex64 = eigs.iter().sum();
            assert!(
                (sum - m.trace()).norm() <= 1e-9,
                "trace defect {:.3e}",
                (sum - m.trace()).norm()
            );
        }
    }

    #[test]
    fn trace_distance_basics() {
        let maximally_mixed = ComplexMatrix::identity(2).scaled(c(0.5, 0.0));
        let ground = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        assert!(trace_distance(&ground, &ground).unwrap() <= 1e-14);
        let d = trace_distance(&maximally_mixed, &ground).unwrap();
        assert!((d - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn trace_distance_triangle_inequality_and_symmetry() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..100 {
            let a = random_density(&mut rng, 4);
            let b = random_density(&mut rng, 4);
            let m = random_density(&mut rng, 4);
            let dab = trace_distance(&a, &b).unwrap();
            let dba = trace_distance(&b, &a).unwrap();
            let dam = trace_distance(&a, &m).unwrap();
            let dmb = trace_distance(&m, &b).unwrap();
            assert!((dab - dba).abs() <= 1e-12);
            assert!(dab <= dam + dmb + 1e-12);
            assert!((0.0..=1.0 + 1e-12).contains(&dab));
        }
    }

    #[test]
    fn trace_distance_rejects_shape_mismatch() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert!(matches!(
            trace_distance(&a, &b),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn purity_of_pure_and_mixed_states() {
        let pure = ComplexMatrix::from_rows(&[
            vec![c(0.5, 0.0), c(0.5, 0.0)],
            vec![c(0.5, 0.0), c(0.5, 0.0)],
        ]);
        assert!((purity(&pure) - 1.0).abs() <= 1e-12);
        let mixed = ComplexMatrix::identity(2).scaled(c(0.5, 0.0));
        assert!((purity(&mixed) - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn matmul_against_adjoint_identities() {
        let mut rng = ChaCha12Rng::seed_from_u64(29);
        let a = random_matrix(&mut rng, 5);
        let b = random_matrix(&mut rng, 5);
        let lhs = a.matmul(&b).adjoint();
        let rhs = b.adjoint().matmul(&a.adjoint());
        assert!(lhs.max_abs_diff(&rhs) <= 1e-13);
    }
}
