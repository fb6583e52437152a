//! Simulated polarization tomography for the post-selected two-qubit states.
//!
//! The measurement model mirrors a coincidence experiment: each of the 36
//! analyzer settings (all pairs of the six single-qubit polarization
//! eigenstates) collects a fixed number of shots, the observed counts
//! fluctuate with Poisson statistics, and a density matrix is recovered by
//! least-squares linear inversion followed by projection onto the physical
//! set. Monte-Carlo repetition of the sample–reconstruct cycle yields error
//! bars for the concurrence.
//!
//! All randomness flows through a seeded [`ChaCha12Rng`] so that counts,
//! reconstructions, and error bars are reproducible.

use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dynamics::concurrence;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, tensor, ComplexMatrix};
use crate::tol;

const SETTINGS: usize = 36;
const OPERATOR_DIM: usize = 16;
const TWO_QUBIT_DIM: usize = 4;
/// Above this mean the Poisson sampler switches to a rounded normal draw.
const POISSON_NORMAL_CROSSOVER: f64 = 50.0;

/// Single-qubit polarization analyzer setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolState {
    /// Horizontal.
    H,
    /// Vertical.
    V,
    /// Diagonal, (H+V)/√2.
    D,
    /// Anti-diagonal, (H−V)/√2.
    A,
    /// Right circular, (H+iV)/√2.
    R,
    /// Left circular, (H−iV)/√2.
    L,
}

impl PolState {
    /// The six settings in the fixed enumeration order used everywhere.
    pub const ALL: [PolState; 6] = [
        PolState::H,
        PolState::V,
        PolState::D,
        PolState::A,
        PolState::R,
        PolState::L,
    ];

    /// Normalized two-component amplitude vector of the setting.
    pub fn ket(self) -> [Complex64; 2] {
        let one = Complex64::new(1.0, 0.0);
        let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            PolState::H => [one, Complex64::new(0.0, 0.0)],
            PolState::V => [Complex64::new(0.0, 0.0), one],
            PolState::D => [inv_sqrt2, inv_sqrt2],
            PolState::A => [inv_sqrt2, -inv_sqrt2],
            PolState::R => [inv_sqrt2, i * inv_sqrt2],
            PolState::L => [inv_sqrt2, -i * inv_sqrt2],
        }
    }

    /// Single-letter label (`"H"`, `"V"`, ...).
    pub fn label(self) -> &'static str {
        match self {
            PolState::H => "H",
            PolState::V => "V",
            PolState::D => "D",
            PolState::A => "A",
            PolState::R => "R",
            PolState::L => "L",
        }
    }
}

impl std::fmt::Display for PolState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// The 36 two-qubit polarization projectors plus the precomputed
/// least-squares inverse used by [`reconstruct`].
#[derive(Debug, Clone)]
pub struct ProjectorSet {
    projectors: Vec<ComplexMatrix>,
    labels: Vec<(PolState, PolState)>,
    basis: Vec<ComplexMatrix>,
    pinv: Vec<f64>,
}

impl ProjectorSet {
    /// The projectors in enumeration order (outer ancilla setting, inner arm setting).
    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    /// Polarization-pair label of each projector, same order as [`Self::projectors`].
    pub fn labels(&self) -> &[(PolState, PolState)] {
        &self.labels
    }
}

fn qubit_projector(pol: PolState) -> ComplexMatrix {
    let ket = pol.ket();
    ComplexMatrix::from_fn(2, 2, |r, c| ket[r] * ket[c].conj())
}

fn hermitian_basis() -> Vec<ComplexMatrix> {
    let mut basis = Vec::with_capacity(OPERATOR_DIM);
    for d in 0..TWO_QUBIT_DIM {
        let mut m = ComplexMatrix::zeros(TWO_QUBIT_DIM, TWO_QUBIT_DIM);
        m.set(d, d, Complex64::new(1.0, 0.0));
        basis.push(m);
    }
    for r in 0..TWO_QUBIT_DIM {
        for c in (r + 1)..TWO_QUBIT_DIM {
            let mut re = ComplexMatrix::zeros(TWO_QUBIT_DIM, TWO_QUBIT_DIM);
            re.set(r, c, Complex64::new(1.0, 0.0));
            re.set(c, r, Complex64::new(1.0, 0.0));
            basis.push(re);
            let mut im = ComplexMatrix::zeros(TWO_QUBIT_DIM, TWO_QUBIT_DIM);
            im.set(r, c, Complex64::new(0.0, -1.0));
            im.set(c, r, Complex64::new(0.0, 1.0));
            basis.push(im);
        }
    }
    basis
}

fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let n = a.rows();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..n {
        for c in 0..n {
            acc += a.get(r, c) * b.get(c, r);
        }
    }
    acc
}

#[allow(clippy::needless_range_loop)] // in-place pivoting reads clearest with indices
fn invert_real(matrix: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = matrix.len();
    let mut work: Vec<Vec<f64>> = matrix
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let mut extended = row.clone();
            extended.extend((0..n).map(|c| if c == r { 1.0 } else { 0.0 }));
            extended
        })
        .collect();
    for col in 0..n {
        let pivot_row =
            (col..n).max_by(|&a, &b| work[a][col].abs().total_cmp(&work[b][col].abs()))?;
        if work[pivot_row][col].abs() < 1e-12 {
            return None;
        }
        work.swap(col, pivot_row);
        let pivot = work[col][col];
        for value in work[col].iter_mut() {
            *value /= pivot;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = work[row][col];
            if factor == 0.0 {
                continue;
            }
            for c in 0..2 * n {
                work[row][c] -= factor * work[col][c];
            }
        }
    }
    Some(work.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Builds the full 36-setting projector set with its reconstruction inverse.
pub fn projector_set() -> ProjectorSet {
    let mut projectors = Vec::with_capacity(SETTINGS);
    let mut labels = Vec::with_capacity(SETTINGS);
    for ancilla in PolState::ALL {
        for arm in PolState::ALL {
            projectors.push(tensor(&qubit_projector(ancilla), &qubit_projector(arm)));
            labels.push((ancilla, arm));
        }
    }
    let basis = hermitian_basis();
    // Design matrix A maps basis coordinates to the 36 Born probabilities;
    // its pseudoinverse (AᵀA)⁻¹Aᵀ is exact because the set spans all 16
    // operator dimensions.
    let design: Vec<Vec<f64>> = projectors
        .iter()
        .map(|projector| {
            basis
                .iter()
                .map(|b| trace_product(projector, b).re)
                .collect()
        })
        .collect();
    let mut gram = vec![vec![0.0; OPERATOR_DIM]; OPERATOR_DIM];
    for row in &design {
        for (i, &ri) in row.iter().enumerate() {
            for (j, &rj) in row.iter().enumerate() {
                gram[i][j] += ri * rj;
            }
        }
    }
    let gram_inv = invert_real(&gram).expect("36-setting design matrix has full rank");
    let mut pinv = vec![0.0; OPERATOR_DIM * SETTINGS];
    for (m, inv_row) in gram_inv.iter().enumerate() {
        for (k, design_row) in design.iter().enumerate() {
            pinv[m * SETTINGS + k] = inv_row.iter().zip(design_row).map(|(&g, &a)| g * a).sum();
        }
    }
    ProjectorSet {
        projectors,
        labels,
        basis,
        pinv,
    }
}

/// Born-rule probabilities `Tr(ρ Πᵢ)` for all 36 settings, in set order.
pub fn expected_probs(rho: &ComplexMatrix, set: &ProjectorSet) -> Vec<f64> {
    set.projectors
        .iter()
        .map(|projector| trace_product(projector, rho).re.clamp(0.0, 1.0))
        .collect()
}

fn uniform01(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn sample_poisson(rng: &mut ChaCha12Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < POISSON_NORMAL_CROSSOVER {
        let target = uniform01(rng);
        let mut k = 0u64;
        let mut term = (-mean).exp();
        let mut cumulative = term;
        while target > cumulative {
            k += 1;
            term *= mean / k as f64;
            cumulative += term;
            if term < f64::MIN_POSITIVE {
                break;
            }
        }
        k
    } else {
        let u1 = 1.0 - uniform01(rng);
        let u2 = uniform01(rng);
        let gaussian = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        let value = (mean + mean.sqrt() * gaussian).round();
        if value < 0.0 {
            0
        } else {
            value as u64
        }
    }
}

/// Draws one Poisson-fluctuating count per setting, deterministically in `seed`.
pub fn sample_counts(probs: &[f64], shots: u64, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    probs
        .iter()
        .map(|&p| sample_poisson(&mut rng, p * shots as f64))
        .collect()
}

/// Least-squares state reconstruction from (possibly fractional) counts,
/// projected onto the physical set by eigenvalue clipping and renormalization.
pub fn reconstruct(counts: &[f64], set: &ProjectorSet, shots: u64) -> Result<ComplexMatrix> {
    if counts.len() != SETTINGS {
        return Err(Error::InvalidInput(format!(
            "expected {SETTINGS} counts, got {}",
            counts.len()
        )));
    }
    if shots == 0 {
        return Err(Error::InvalidInput(
            "shots per projector must be at least 1".into(),
        ));
    }
    if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::InvalidInput(
            "counts must be finite and nonnegative".into(),
        ));
    }
    if counts.iter().all(|&c| c == 0.0) {
        return Err(Error::InvalidInput(
            "all counts are zero; nothing to reconstruct".into(),
        ));
    }
    let frequencies: Vec<f64> = counts.iter().map(|&c| c / shots as f64).collect();
    let mut linear = ComplexMatrix::zeros(TWO_QUBIT_DIM, TWO_QUBIT_DIM);
    for (m, basis_op) in set.basis.iter().enumerate() {
        let coordinate: f64 = set.pinv[m * SETTINGS..(m + 1) * SETTINGS]
            .iter()
            .zip(&frequencies)
            .map(|(&w, &f)| w * f)
            .sum();
        linear = linear.add(&basis_op.scaled(Complex64::new(coordinate, 0.0)));
    }
    let spectrum = eig_hermitian(&linear, true)?;
    let vectors = spectrum
        .vectors
        .expect("eigenvectors requested from eig_hermitian");
    let clipped: Vec<f64> = spectrum.values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= tol::EMPTY_SECTOR_WEIGHT {
        return Err(Error::InvalidInput(
            "reconstruction collapsed to zero weight".into(),
        ));
    }
    let rho = ComplexMatrix::from_fn(TWO_QUBIT_DIM, TWO_QUBIT_DIM, |r, c| {
        (0..TWO_QUBIT_DIM)
            .map(|i| vectors.get(r, i) * vectors.get(c, i).conj() * (clipped[i] / total))
            .sum()
    });
    Ok(rho)
}

/// Reconstruction of a state with Monte-Carlo concurrence error bars.
#[derive(Debug, Clone)]
pub struct TomographyResult {
    /// Reconstruction from the noise-free expected counts.
    pub rho_hat: ComplexMatrix,
    /// Per-run noisy reconstructions, ordered by run index.
    pub mc_samples: Vec<ComplexMatrix>,
    /// Mean concurrence over the Monte-Carlo reconstructions.
    pub c_mean: f64,
    /// Sample standard deviation of the Monte-Carlo concurrences.
    pub c_std: f64,
    /// Base seed; run `j` samples with `seed + j`.
    pub seed: u64,
    /// Coincidence shots collected per projector setting.
    pub shots_per_projector: u64,
}

/// Runs `runs` sample–reconstruct cycles on `rho_true` and aggregates the
/// concurrence statistics.
pub fn mc_errorbars(
    rho_true: &ComplexMatrix,
    shots: u64,
    runs: usize,
    seed: u64,
) -> Result<TomographyResult> {
    if runs < 2 {
        return Err(Error::InvalidInput(format!(
            "at least 2 Monte-Carlo runs are needed for a standard deviation, got {runs}"
        )));
    }
    let set = projector_set();
    let probs = expected_probs(rho_true, &set);
    let noiseless: Vec<f64> = probs.iter().map(|&p| p * shots as f64).collect();
    let rho_hat = reconstruct(&noiseless, &set, shots)?;
    let mut mc_samples = Vec::with_capacity(runs);
    let mut concurrences = Vec::with_capacity(runs);
    for run in 0..runs {
        let counts = sample_counts(&probs, shots, seed.wrapping_add(run as u64));
        let as_reals: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let rho = reconstruct(&as_reals, &set, shots)?;
        concurrences.push(concurrence(&rho)?);
        mc_samples.push(rho);
    }
    let c_mean = concurrences.iter().sum::<f64>() / runs as f64;
    let c_std = (concurrences
        .iter()
        .map(|c| (c - c_mean).powi(2))
        .sum::<f64>()
        / (runs as f64 - 1.0))
        .sqrt();
    Ok(TomographyResult {
        rho_hat,
        mc_samples,
        c_mean,
        c_std,
        seed,
        shots_per_projector: shots,
    })
}
