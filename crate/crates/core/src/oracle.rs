//! Independent cross-check of the channel construction.
//!
//! The main simulator works with a 10-dimensional density matrix and Kraus
//! operators whose absorbers were derived by hand. This module rebuilds the
//! same physics from scratch in a different picture: every optical mode —
//! including the external modes that the filter and the loss ports leak
//! into — is kept explicitly, the global state stays a pure vector, and
//! nothing is traced out until the very end. If the hand-derived channel
//! and this brute-force route disagree, one of them is wrong.
//!
//! A basis state is a bitmask: bit *j* is the occupation (0 or 1) of mode
//! *j*. The first six modes are fixed — ancilla H/V, system arm H/V,
//! environment arm H/V — and each collision appends fresh external modes:
//! a pair for the filter ports and, when an arm is lossy, a pair per lossy
//! arm. Absorption events at different steps or of different polarizations
//! land in different external modes, so they stay incoherent after
//! reduction exactly like distinct Kraus branches.
//!
//! Keeping every mode makes the state grow with the step count, so the
//! route is capped at [`MAX_ORACLE_STEPS`] collisions — plenty for a
//! cross-check, useless for production runs.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::dynamics::evolve;
use crate::error::{Error, Result};
use crate::linalg::{trace_distance, ComplexMatrix, JOINT_DIM};
use crate::model::{InputDescriptor, StepConfig};
use crate::tol;

/// Largest collision count the explicit-mode route will simulate.
pub const MAX_ORACLE_STEPS: usize = 4;

/// Hard ceiling on simultaneously tracked basis states.
const MAX_AMPLITUDES: usize = 1 << 20;

/// Bits of the six permanent modes.
const LOW_MASK: u64 = 0b11_1111;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pure state over explicit optical modes, stored sparsely as
/// `bitmask → amplitude`.
#[derive(Debug, Clone)]
pub struct FockState {
    amps: HashMap<u64, Complex64>,
    modes: usize,
}

/// Permanent mode indices of the two-photon input.
impl FockState {
    /// Ancilla, horizontal polarization.
    pub const ANCILLA_H: usize = 0;
    /// Ancilla, vertical polarization.
    pub const ANCILLA_V: usize = 1;
    /// System arm, horizontal polarization.
    pub const SYS_H: usize = 2;
    /// System arm, vertical polarization.
    pub const SYS_V: usize = 3;
    /// Environment arm, horizontal polarization.
    pub const ENV_H: usize = 4;
    /// Environment arm, vertical polarization.
    pub const ENV_V: usize = 5;

    /// Builds an input state from `(bitmask, amplitude)` pairs.
    ///
    /// Every mask must populate exactly one ancilla mode and exactly one
    /// arm mode of the six permanent ones, and the amplitudes must be
    /// normalized.
    pub fn from_pairs(pairs: &[(u64, Complex64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidInput("input state has no amplitudes".into()));
        }
        let mut amps = HashMap::new();
        let mut norm_sqr = 0.0;
        for &(mask, amp) in pairs {
            if mask & !LOW_MASK != 0 {
                return Err(Error::InvalidInput(format!(
                    "input mask {mask:#b} uses modes beyond the permanent six"
                )));
            }
            if (mask & 0b11).count_ones() != 1 {
                return Err(Error::InvalidInput(format!(
                    "input mask {mask:#b} must hold exactly one ancilla photon"
                )));
            }
            if (mask >> 2).count_ones() != 1 {
                return Err(Error::InvalidInput(format!(
                    "input mask {mask:#b} must hold exactly one arm photon"
                )));
            }
            norm_sqr += amp.norm_sqr();
            if amps.insert(mask, amp).is_some() {
                return Err(Error::InvalidInput(format!(
                    "input mask {mask:#b} appears twice"
                )));
            }
        }
        if (norm_sqr - 1.0).abs() > tol::STATE_TRACE {
            return Err(Error::InvalidInput(format!(
                "input amplitudes are not normalized: |ψ|² = {norm_sqr}"
            )));
        }
        Ok(Self { amps, modes: 6 })
    }

    /// Number of modes tracked so far.
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Squared norm of the state; stays 1 through unitary steps.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// The sparse amplitude table.
    pub fn amplitudes(&self) -> &HashMap<u64, Complex64> {
        &self.amps
    }

    fn alloc_mode(&mut self) -> Result<usize> {
        if self.modes == 64 {
            return Err(Error::CapacityExceeded(
                "mode register exhausted the 64-bit mask".into(),
            ));
        }
        let idx = self.modes;
        self.modes += 1;
        Ok(idx)
    }

    /// Multiplies the amplitude of every basis state occupying `mode`.
    fn phase(&mut self, mode: usize, factor: Complex64) {
        let bit = 1u64 << mode;
        for (mask, amp) in self.amps.iter_mut() {
            if mask & bit != 0 {
                *amp *= factor;
            }
        }
    }

    /// Applies a 2×2 unitary to the single-photon subspace of two modes:
    /// a photon in `m0` scatters with column `(u[0][0], u[1][0])`, one in
    /// `m1` with column `(u[0][1], u[1][1])`.
    fn couple(&mut self, m0: usize, m1: usize, u: [[Complex64; 2]; 2]) -> Result<()> {
        let b0 = 1u64 << m0;
        let b1 = 1u64 << m1;
        let mut next: HashMap<u64, Complex64> = HashMap::with_capacity(self.amps.len() * 2);
        let mut push = |mask: u64, amp: Complex64| {
            if amp != ZERO {
                *next.entry(mask).or_insert(ZERO) += amp;
            }
        };
        for (&mask, &amp) in &self.amps {
            match (mask & b0 != 0, mask & b1 != 0) {
                (false, false) => push(mask, amp),
                (true, false) => {
                    push(mask, amp * u[0][0]);
                    push(mask & !b0 | b1, amp * u[1][0]);
                }
                (false, true) => {
                    push(mask & !b1 | b0, amp * u[0][1]);
                    push(mask, amp * u[1][1]);
                }
                (true, true) => {
                    return Err(Error::NumericalInvariant(format!(
                        "modes {m0} and {m1} are both occupied; the single-photon \
                         scattering rule does not apply"
                    )));
                }
            }
        }
        next.retain(|_, a| *a != ZERO);
        self.amps = next;
        Ok(())
    }

    /// One collision in the explicit-mode picture: beam splitter, the two
    /// waveplates and the phase, then filter and loss ports coupling into
    /// freshly appended external modes.
    pub fn step(&mut self, cfg: &StepConfig) -> Result<()> {
        cfg.validate()?;
        let filter_h = self.alloc_mode()?;
        let filter_v = self.alloc_mode()?;
        let loss_s = if cfg.eta_s < 1.0 {
            Some((self.alloc_mode()?, self.alloc_mode()?))
        } else {
            None
        };
        let loss_e = if cfg.eta_e < 1.0 {
            Some((self.alloc_mode()?, self.alloc_mode()?))
        } else {
            None
        };

        let refl = Complex64::new(0.0, cfg.r.sqrt());
        let trans = Complex64::new((1.0 - cfg.r).sqrt(), 0.0);
        let bs = [[refl, trans], [trans, refl]];
        self.couple(Self::SYS_H, Self::ENV_H, bs)?;
        self.couple(Self::SYS_V, Self::ENV_V, bs)?;

        self.phase(Self::SYS_V, Complex64::new(0.0, 1.0));
        self.phase(Self::ENV_V, Complex64::new(-1.0, 0.0));
        let theta = Complex64::new(cfg.theta.cos(), -cfg.theta.sin());
        self.phase(Self::SYS_H, theta);
        self.phase(Self::SYS_V, theta);

        let keep_port = |keep: f64| {
            let k = Complex64::new(keep.sqrt(), 0.0);
            let l = Complex64::new((1.0 - keep).sqrt(), 0.0);
            [[k, -l], [l, k]]
        };
        let filter = keep_port(cfg.transmission);
        self.couple(Self::ENV_H, filter_h, filter)?;
        self.couple(Self::ENV_V, filter_v, filter)?;
        if let Some((h, v)) = loss_s {
            let port = keep_port(cfg.eta_s);
            self.couple(Self::SYS_H, h, port)?;
            self.couple(Self::SYS_V, v, port)?;
        }
        if let Some((h, v)) = loss_e {
            let port = keep_port(cfg.eta_e);
            self.couple(Self::ENV_H, h, port)?;
            self.couple(Self::ENV_V, v, port)?;
        }

        if self.amps.len() > MAX_AMPLITUDES {
            return Err(Error::CapacityExceeded(format!(
                "state grew to {} amplitudes",
                self.amps.len()
            )));
        }
        Ok(())
    }

    /// Traces out every external mode, returning the density matrix on the
    /// ancilla ⊗ arm space.
    ///
    /// Amplitudes sharing an external-mode configuration stay coherent;
    /// different configurations add incoherently. Basis states where the
    /// arm photon sits in an external mode reduce to the vacuum arm state.
    pub fn reduce(&self) -> Result<ComplexMatrix> {
        let mut buckets: HashMap<u64, [Complex64; JOINT_DIM]> = HashMap::new();
        for (&mask, &amp) in &self.amps {
            if mask.count_ones() != 2 {
                return Err(Error::NumericalInvariant(format!(
                    "basis state {mask:#b} does not hold exactly two photons"
                )));
            }
            let joint = joint_index_of(mask & LOW_MASK)?;
            let bucket = buckets.entry(mask & !LOW_MASK).or_insert([ZERO; JOINT_DIM]);
            bucket[joint] += amp;
        }
        let mut rho = ComplexMatrix::zeros(JOINT_DIM, JOINT_DIM);
        for vector in buckets.values() {
            for i in 0..JOINT_DIM {
                if vector[i] == ZERO {
                    continue;
                }
                for j in 0..JOINT_DIM {
                    let v = rho.get(i, j) + vector[i] * vector[j].conj();
                    rho.set(i, j, v);
                }
            }
        }
        Ok(rho)
    }
}

/// Maps the six permanent-mode occupations to a joint-space index.
fn joint_index_of(low: u64) -> Result<usize> {
    let ancilla = match low & 0b11 {
        0b01 => 0,
        0b10 => 1,
        other => {
            return Err(Error::NumericalInvariant(format!(
                "ancilla occupation {other:#b} is not a single photon"
            )))
        }
    };
    let arm = match (low >> 2) & 0b1111 {
        0b0000 => 4,
        0b0001 => 0,
        0b0010 => 1,
        0b0100 => 2,
        0b1000 => 3,
        other => {
            return Err(Error::NumericalInvariant(format!(
                "arm occupation {other:#b} holds more than one photon"
            )))
        }
    };
    Ok(ancilla * 5 + arm)
}

/// Amplitude pairs of the maximally entangled input with the given sign.
fn bell_pairs(sign: f64) -> Vec<(u64, Complex64)> {
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        (
            1 << FockState::ANCILLA_H | 1 << FockState::SYS_V,
            Complex64::new(amp, 0.0),
        ),
        (
            1 << FockState::ANCILLA_V | 1 << FockState::SYS_H,
            Complex64::new(sign * amp, 0.0),
        ),
    ]
}

/// Runs the explicit-mode simulation and reduces to the joint space.
///
/// Pure inputs are simulated directly. The Werner input is not pure, so it
/// is decomposed into its four orthogonal eigenstates — the two maximally
/// entangled states and the two aligned product states — which are
/// simulated separately and recombined with their weights.
pub fn simulate_fock(
    input: &InputDescriptor,
    cfg: &StepConfig,
    steps: usize,
) -> Result<ComplexMatrix> {
    if steps > MAX_ORACLE_STEPS {
        return Err(Error::CapacityExceeded(format!(
            "the explicit-mode route is capped at {MAX_ORACLE_STEPS} steps, got {steps}"
        )));
    }
    let runs: Vec<(f64, Vec<(u64, Complex64)>)> = match *input {
        InputDescriptor::BellPlus => vec![(1.0, bell_pairs(1.0))],
        InputDescriptor::BellMinus => vec![(1.0, bell_pairs(-1.0))],
        InputDescriptor::Werner(fidelity) => {
            if !(0.25..=1.0).contains(&fidelity) {
                return Err(Error::InvalidInput(format!(
                    "Werner fidelity must be in [0.25, 1], got {fidelity}"
                )));
            }
            let p = (4.0 * fidelity - 1.0) / 3.0;
            let q = (1.0 - p) / 4.0;
            let one = Complex64::new(1.0, 0.0);
            vec![
                (p + q, bell_pairs(1.0)),
                (q, bell_pairs(-1.0)),
                (
                    q,
                    vec![(1 << FockState::ANCILLA_H | 1 << FockState::SYS_H, one)],
                ),
                (
                    q,
                    vec![(1 << FockState::ANCILLA_V | 1 << FockState::SYS_V, one)],
                ),
            ]
        }
    };
    let mut rho = ComplexMatrix::zeros(JOINT_DIM, JOINT_DIM);
    for (weight, pairs) in runs {
        let mut state = FockState::from_pairs(&pairs)?;
        for _ in 0..steps {
            state.step(cfg)?;
        }
        rho = rho.add(&state.reduce()?.scaled(Complex64::new(weight, 0.0)));
    }
    Ok(rho)
}

/// Trace distance between the explicit-mode route and the Kraus-channel
/// route after the same number of collisions.
pub fn compare(input: &InputDescriptor, cfg: &StepConfig, steps: usize) -> Result<f64> {
    let reduced = simulate_fock(input, cfg, steps)?;
    let initial = input.state()?;
    let reference = if steps == 0 {
        initial.rho().clone()
    } else {
        evolve(&initial, cfg, steps)?.records[steps]
            .rho_joint
            .rho()
            .clone()
    };
    trace_distance(&reduced, &reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha12Rng;
    use rand_core::{RngCore, SeedableRng};

    const TOLERANCE: f64 = 1e-10;

    fn uniform(rng: &mut ChaCha12Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn matches_the_channel_route_for_ideal_steps() {
        for steps in 1..=3 {
            let d = compare(&InputDescriptor::BellPlus, &StepConfig::ideal(), steps).unwrap();
            assert!(d <= TOLERANCE, "distance {d:.3e} after {steps} steps");
        }
    }

    #[test]
    fn matches_the_channel_route_with_a_filter() {
        let cfg = StepConfig::new(0.3, 0.5, 1.1, 1.0, 1.0).unwrap();
        for input in [InputDescriptor::BellMinus, InputDescriptor::Werner(0.9)] {
            let d = compare(&input, &cfg, 2).unwrap();
            assert!(d <= TOLERANCE, "distance {d:.3e} for {input}");
        }
    }

    #[test]
    fn matches_the_channel_route_with_loss() {
        let cfg = StepConfig::new(0.5, 0.7, 0.4, 0.8, 0.9).unwrap();
        let d = compare(&InputDescriptor::BellPlus, &cfg, 2).unwrap();
        assert!(d <= TOLERANCE, "distance {d:.3e}");
        let asymmetric = StepConfig::new(0.5, 1.0, 0.0, 1.0, 0.6).unwrap();
        let d = compare(&InputDescriptor::Werner(0.8), &asymmetric, 2).unwrap();
        assert!(d <= TOLERANCE, "distance {d:.3e}");
    }

    #[test]
    fn matches_the_channel_route_on_random_configs() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for trial in 0..8 {
            let cfg = StepConfig::new(
                uniform(&mut rng),
                uniform(&mut rng),
                uniform(&mut rng) * std::f64::consts::TAU,
                1.0,
                1.0,
            )
            .unwrap();
            let steps = 1 + (rng.next_u64() % 3) as usize;
            let d = compare(&InputDescriptor::BellPlus, &cfg, steps).unwrap();
            assert!(d <= TOLERANCE, "trial {trial}: distance {d:.3e}");
        }
    }

    #[test]
    fn every_basis_state_keeps_two_photons() {
        let mut state = FockState::from_pairs(&bell_pairs(1.0)).unwrap();
        let cfg = StepConfig::new(0.4, 0.6, 0.9, 0.85, 0.95).unwrap();
        for _ in 0..3 {
            state.step(&cfg).unwrap();
        }
        for mask in state.amplitudes().keys() {
            assert_eq!(mask.count_ones(), 2, "mask {mask:#b}");
        }
        assert!((state.norm_sqr() - 1.0).abs() <= 1e-12);
        // 6 permanent + 3 × (2 filter + 2 + 2 loss) modes.
        assert_eq!(state.modes(), 24);
    }

    #[test]
    fn reduction_of_the_input_is_the_input() {
        let state = FockState::from_pairs(&bell_pairs(-1.0)).unwrap();
        let rho = state.reduce().unwrap();
        let reference = InputDescriptor::BellMinus.state().unwrap();
        assert!(trace_distance(&rho, reference.rho()).unwrap() <= 1e-12);
    }

    #[test]
    fn werner_decomposition_reproduces_the_input() {
        let rho = simulate_fock(&InputDescriptor::Werner(0.6), &StepConfig::ideal(), 0).unwrap();
        let reference = InputDescriptor::Werner(0.6).state().unwrap();
        assert!(trace_distance(&rho, reference.rho()).unwrap() <= 1e-12);
    }

    #[test]
    fn step_cap_is_enforced() {
        let result = simulate_fock(&InputDescriptor::BellPlus, &StepConfig::ideal(), 5);
        assert!(matches!(result, Err(Error::CapacityExceeded(_))));
    }

    #[test]
    fn from_pairs_rejects_malformed_inputs() {
        let one = Complex64::new(1.0, 0.0);
        // No ancilla photon.
        assert!(FockState::from_pairs(&[(0b000100, one)]).is_err());
        // Two arm photons.
        assert!(FockState::from_pairs(&[(0b001101, one)]).is_err());
        // Mode outside the permanent six.
        assert!(FockState::from_pairs(&[(0b1000101, one)]).is_err());
        // Not normalized.
        let half = Complex64::new(0.5, 0.0);
        assert!(FockState::from_pairs(&[(0b000101, half)]).is_err());
        assert!(FockState::from_pairs(&[]).is_err());
    }
}
