//! Repeated collisions and the entanglement bookkeeping on top of them.
//!
//! [`evolve`] drives a joint state through `n` identical collision steps
//! and records, after every step, the two post-selected two-qubit states:
//! ancilla ⊗ system-arm polarization and ancilla ⊗ environment-arm
//! polarization. Their concurrences `C_as(k)` and `C_ae(k)` are the
//! quantities of interest: a `C_as` that only ever decreases signals
//! memoryless decay, while any increase means entanglement flowed back
//! from the environment. [`nm_measure`] sums those increases into a single
//! non-negative number, and [`sweep`] tabulates everything over grids of
//! filter transmission and phase.
//!
//! Post-selection can fail honestly: if a sector carries no population
//! (say the system arm is empty after a full swap), the corresponding
//! concurrence is undefined and is reported as `None` rather than zero.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eig_general4, ComplexMatrix, ANCILLA_DIM};
use crate::model::{apply_channel, joint_index, step_channel, ArmBasis, JointState, StepConfig};
use crate::tol;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Which arm's polarization qubit to keep alongside the ancilla.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// Ancilla ⊗ system-arm polarization.
    Sys,
    /// Ancilla ⊗ environment-arm polarization.
    Env,
}

impl Sector {
    fn name(self) -> &'static str {
        match self {
            Sector::Sys => "system",
            Sector::Env => "environment",
        }
    }

    /// Arm states spanning this sector, in the order used for the qubit.
    fn arm_states(self) -> [ArmBasis; 2] {
        match self {
            Sector::Sys => [ArmBasis::SysH, ArmBasis::SysV],
            Sector::Env => [ArmBasis::EnvH, ArmBasis::EnvV],
        }
    }
}

/// Projects the joint state onto one arm sector and renormalizes.
///
/// Returns the 4×4 two-qubit density matrix (ancilla index slow, arm
/// polarization fast) and the sector weight, i.e. the probability of the
/// projection succeeding. Fails with [`Error::EmptySector`] when the
/// weight is below [`tol::EMPTY_SECTOR_WEIGHT`].
pub fn post_select(state: &JointState, sector: Sector) -> Result<(ComplexMatrix, f64)> {
    let arms = sector.arm_states();
    let mut indices = [0usize; 4];
    for ancilla in 0..ANCILLA_DIM {
        for (p, arm) in arms.iter().enumerate() {
            indices[ancilla * 2 + p] = joint_index(ancilla, *arm);
        }
    }
    let block = ComplexMatrix::from_fn(4, 4, |i, j| state.rho().get(indices[i], indices[j]));
    let weight = block.trace().re;
    if weight <= tol::EMPTY_SECTOR_WEIGHT {
        return Err(Error::EmptySector {
            sector: sector.name(),
            weight,
        });
    }
    let normalized = block.scaled(Complex64::new(1.0 / weight, 0.0));
    Ok((normalized, weight))
}

/// The spin-flip operator σy ⊗ σy in the computational basis.
fn spin_flip() -> ComplexMatrix {
    let o = Complex64::new(0.0, 0.0);
    let p = Complex64::new(1.0, 0.0);
    let n = Complex64::new(-1.0, 0.0);
    ComplexMatrix::from_rows(&[
        vec![o, o, o, n],
        vec![o, o, p, o],
        vec![o, p, o, o],
        vec![n, o, o, o],
    ])
}

/// Concurrence of a two-qubit density matrix.
///
/// Computed from the square roots of the eigenvalues of `ρ·ρ̃`, where
/// `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`: with the roots `λ₁ ≥ λ₂ ≥ λ₃ ≥ λ₄`,
/// `C = max(0, λ₁ - λ₂ - λ₃ - λ₄)`. The product matrix is not Hermitian,
/// so its eigenvalues come from the general 4×4 solver; they are real and
/// non-negative for any physical input, and tiny negative or imaginary
/// parts from roundoff are clamped away.
pub fn concurrence(rho: &ComplexMatrix) -> Result<f64> {
    if rho.rows() != 4 || rho.cols() != 4 {
        return Err(Error::InvalidInput(format!(
            "concurrence needs a 4x4 density matrix, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let defect = rho.hermiticity_defect();
    if defect > tol::EIG_INPUT_HERMITICITY {
        return Err(Error::InvalidInput(format!(
            "two-qubit state is not Hermitian: defect {defect:.3e}"
        )));
    }
    let trace_err = (rho.trace() - ONE).norm();
    if trace_err > tol::EIG_INPUT_HERMITICITY {
        return Err(Error::InvalidInput(format!(
            "two-qubit state trace deviates from 1 by {trace_err:.3e}"
        )));
    }
    let flip = spin_flip();
    let rho_tilde = flip.matmul(&rho.conj()).matmul(&flip);
    let product = rho.matmul(&rho_tilde);
    let eigs = eig_general4(&product)?;
    let mut roots = [0.0f64; 4];
    for (slot, eig) in roots.iter_mut().zip(eigs.iter()) {
        if eig.im.abs() > 1e-8 {
            return Err(Error::NumericalInvariant(format!(
                "spin-flip spectrum has imaginary part {:.3e}",
                eig.im
            )));
        }
        let mut value = eig.re;
        if value < -tol::EIGENVALUE_CLAMP {
            return Err(Error::NumericalInvariant(format!(
                "spin-flip spectrum has negative eigenvalue {value:.3e}"
            )));
        }
        if value <= tol::EIGENVALUE_NOISE_FLOOR {
            value = 0.0;
        }
        *slot = value.sqrt();
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    Ok((roots[0] - roots[1] - roots[2] - roots[3]).max(0.0))
}

/// State of the simulation after `k` collisions, with both post-selected
/// sectors worked out.
#[derive(Debug, Clone)]
pub struct StepRecord {
    /// Number of collisions applied (0 is the input state).
    pub k: usize,
    /// Full joint state.
    pub rho_joint: JointState,
    /// Ancilla ⊗ system-arm state, `None` if the sector is empty.
    pub rho_as: Option<ComplexMatrix>,
    /// Ancilla ⊗ environment-arm state, `None` if the sector is empty.
    pub rho_ae: Option<ComplexMatrix>,
    /// Probability weight of the system sector (0 when empty).
    pub weight_s: f64,
    /// Probability weight of the environment sector (0 when empty).
    pub weight_e: f64,
    /// Concurrence of `rho_as`.
    pub c_as: Option<f64>,
    /// Concurrence of `rho_ae`.
    pub c_ae: Option<f64>,
    /// Purity of the joint state.
    pub purity: f64,
}

impl StepRecord {
    fn build(k: usize, state: JointState) -> Result<Self> {
        let mut record = StepRecord {
            k,
            purity: state.purity(),
            rho_joint: state,
            rho_as: None,
            rho_ae: None,
            weight_s: 0.0,
            weight_e: 0.0,
            c_as: None,
            c_ae: None,
        };
        for sector in [Sector::Sys, Sector::Env] {
            match post_select(&record.rho_joint, sector) {
                Ok((rho, weight)) => {
                    let c = concurrence(&rho)?;
                    match sector {
                        Sector::Sys => {
                            record.rho_as = Some(rho);
                            record.weight_s = weight;
                            record.c_as = Some(c);
                        }
                        Sector::Env => {
                            record.rho_ae = Some(rho);
                            record.weight_e = weight;
                            record.c_ae = Some(c);
                        }
                    }
                }
                Err(Error::EmptySector { .. }) => {}
                Err(other) => return Err(other),
            }
        }
        Ok(record)
    }
}

/// A full evolution: one record per collision count, starting at the input.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Step parameters the trajectory was generated with.
    pub config: StepConfig,
    /// Records `0..=steps`.
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    /// System-sector concurrence per step; `None` where undefined.
    pub fn c_as_series(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.c_as).collect()
    }

    /// Environment-sector concurrence per step; `None` where undefined.
    pub fn c_ae_series(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.c_ae).collect()
    }

    /// Defined system-sector concurrences in step order.
    pub fn c_as_defined(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.c_as).collect()
    }
}

/// Runs `steps ≥ 1` collisions from `initial`, recording every
/// intermediate state including the input itself.
pub fn evolve(initial: &JointState, cfg: &StepConfig, steps: usize) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidInput("evolve needs at least one step".into()));
    }
    let channel = step_channel(cfg)?;
    let mut records = Vec::with_capacity(steps + 1);
    records.push(StepRecord::build(0, initial.clone())?);
    let mut state = initial.clone();
    for k in 1..=steps {
        state = apply_channel(&channel, &state)?;
        records.push(StepRecord::build(k, state.clone())?);
    }
    Ok(Trajectory {
        config: *cfg,
        records,
    })
}

/// Result of the backflow measure: the summed positive increments of a
/// concurrence series and where they occurred.
#[derive(Debug, Clone, PartialEq)]
pub struct NmResult {
    /// Total of all positive increments.
    pub n: f64,
    /// `(step index, increment)` for every counted rise; the index is the
    /// position in the series where the rise completed.
    pub increments: Vec<(usize, f64)>,
}

/// Sums the rises of a concurrence series: `N = Σ_k max(0, C(k) - C(k-1))`.
///
/// Increments at or below [`tol::NM_INCREMENT`] are treated as roundoff
/// and ignored. The series must contain at least two values.
pub fn nm_measure(series: &[f64]) -> Result<NmResult> {
    if series.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "backflow measure needs at least two samples, got {}",
            series.len()
        )));
    }
    let mut n = 0.0;
    let mut increments = Vec::new();
    for (i, pair) in series.windows(2).enumerate() {
        let delta = pair[1] - pair[0];
        if delta > tol::NM_INCREMENT {
            n += delta;
            increments.push((i + 1, delta));
        }
    }
    Ok(NmResult { n, increments })
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Filter transmission for this trajectory.
    pub transmission: f64,
    /// Phase for this trajectory, radians.
    pub theta: f64,
    /// Collision count.
    pub step: usize,
    /// System-sector concurrence, `None` if undefined.
    pub c_as: Option<f64>,
    /// Environment-sector concurrence, `None` if undefined.
    pub c_ae: Option<f64>,
    /// Backflow accumulated over the defined `C_as` values up to this step.
    pub n_cum: f64,
}

/// Evolves `initial` for every combination of the given transmissions and
/// phases, emitting rows ordered lexicographically by
/// `(transmission, theta, step)`.
///
/// The remaining step parameters are taken from `base`. The cumulative
/// backflow column counts rises between consecutive *defined* `C_as`
/// values, skipping steps where the sector is empty.
pub fn sweep(
    initial: &JointState,
    base: &StepConfig,
    transmissions: &[f64],
    thetas: &[f64],
    steps: usize,
) -> Result<Vec<SweepRow>> {
    if transmissions.is_empty() || thetas.is_empty() {
        return Err(Error::InvalidInput(
            "sweep needs at least one transmission and one theta".into(),
        ));
    }
    let mut ts = transmissions.to_vec();
    ts.sort_by(|a, b| a.total_cmp(b));
    let mut angles = thetas.to_vec();
    angles.sort_by(|a, b| a.total_cmp(b));

    let mut rows = Vec::with_capacity(ts.len() * angles.len() * (steps + 1));
    for &transmission in &ts {
        for &theta in &angles {
            let cfg = StepConfig::new(base.r, transmission, theta, base.eta_s, base.eta_e)?;
            let trajectory = evolve(initial, &cfg, steps).map_err(|e| {
                Error::NumericalInvariant(format!(
                    "sweep failed at transmission={transmission}, theta={theta}: {e}"
                ))
            })?;
            let mut n_cum = 0.0;
            let mut last_defined: Option<f64> = None;
            for record in &trajectory.records {
                if let Some(c) = record.c_as {
                    if let Some(prev) = last_defined {
                        let delta = c - prev;
                        if delta > tol::NM_INCREMENT {
                            n_cum += delta;
                        }
                    }
                    last_defined = Some(c);
                }
                rows.push(SweepRow {
                    transmission,
                    theta,
                    step: record.k,
                    c_as: record.c_as,
                    c_ae: record.c_ae,
                    n_cum,
                });
            }
        }
    }
    Ok(rows)
}
