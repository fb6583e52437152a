//! States and optical elements of the collision model.
//!
//! The simulator tracks two photons. One is a polarization qubit (the
//! *ancilla*) that never enters the interferometer. The other starts in the
//! *system* arm and is repeatedly split between the system arm and an
//! *environment* arm; the environment arm leaks through a transmission
//! filter into external modes that are never observed. Because at most one
//! photon occupies the arms, the arm register needs only five states:
//!
//! | index | meaning                          |
//! |-------|----------------------------------|
//! | 0     | photon in system arm, H          |
//! | 1     | photon in system arm, V          |
//! | 2     | photon in environment arm, H     |
//! | 3     | photon in environment arm, V     |
//! | 4     | photon absorbed (vacuum in arms) |
//!
//! The joint space is ancilla ⊗ arm with index `ancilla * 5 + arm`, ancilla
//! H = 0 and V = 1. One collision step applies, in order: beam splitter,
//! quarter-wave plate on the system arm, half-wave plate on the environment
//! arm, relative phase on the system arm, then the filter (and optional
//! per-arm loss). Everything up to the filter is unitary on the joint
//! space; the filter and loss trace out external modes and are therefore
//! Kraus channels.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, purity, tensor, ComplexMatrix, ANCILLA_DIM, ARM_DIM, JOINT_DIM,
};
use crate::tol;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const IM: Complex64 = Complex64::new(0.0, 1.0);

/// Basis states of the 5-dimensional arm register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmBasis {
    /// Photon in the system arm with horizontal polarization.
    SysH = 0,
    /// Photon in the system arm with vertical polarization.
    SysV = 1,
    /// Photon in the environment arm with horizontal polarization.
    EnvH = 2,
    /// Photon in the environment arm with vertical polarization.
    EnvV = 3,
    /// Photon absorbed into an external mode; both arms empty.
    Vacuum = 4,
}

impl ArmBasis {
    /// All five arm states in index order.
    pub const ALL: [ArmBasis; ARM_DIM] = [
        ArmBasis::SysH,
        ArmBasis::SysV,
        ArmBasis::EnvH,
        ArmBasis::EnvV,
        ArmBasis::Vacuum,
    ];

    /// Position of this state in the arm register.
    pub fn index(self) -> usize {
        self as usize
    }
}

/// Joint-space index of `(ancilla, arm)`; ancilla 0 is H, 1 is V.
pub fn joint_index(ancilla: usize, arm: ArmBasis) -> usize {
    assert!(ancilla < ANCILLA_DIM, "ancilla index out of range");
    ancilla * ARM_DIM + arm.index()
}

/// Relative sign between the two branches of the entangled input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellSign {
    /// `(|H⟩|sysV⟩ + |V⟩|sysH⟩)/√2`
    Plus,
    /// `(|H⟩|sysV⟩ - |V⟩|sysH⟩)/√2`
    Minus,
}

/// Initial ancilla–system states the simulator accepts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputDescriptor {
    /// Maximally entangled state with positive relative sign.
    BellPlus,
    /// Maximally entangled state with negative relative sign.
    BellMinus,
    /// Werner mixture with the given singlet fraction in `[0.25, 1]`.
    Werner(f64),
}

impl InputDescriptor {
    /// Builds the corresponding joint state.
    pub fn state(&self) -> Result<JointState> {
        match *self {
            InputDescriptor::BellPlus => Ok(bell_state(BellSign::Plus)),
            InputDescriptor::BellMinus => Ok(bell_state(BellSign::Minus)),
            InputDescriptor::Werner(f) => werner_state(f),
        }
    }
}

impl FromStr for InputDescriptor {
    type Err = Error;

    /// Parses `bell+`, `bell-`, or `werner:<fidelity>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bell+" => Ok(InputDescriptor::BellPlus),
            "bell-" => Ok(InputDescriptor::BellMinus),
            other => {
                if let Some(raw) = other.strip_prefix("werner:") {
                    let f: f64 = raw.parse().map_err(|_| {
                        Error::InvalidInput(format!("unparsable Werner fidelity {raw:?}"))
                    })?;
                    Ok(InputDescriptor::Werner(f))
                } else {
                    Err(Error::InvalidInput(format!(
                        "unknown input {other:?}; expected bell+, bell-, or werner:<f>"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for InputDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputDescriptor::BellPlus => write!(f, "bell+"),
            InputDescriptor::BellMinus => write!(f, "bell-"),
            InputDescriptor::Werner(x) => write!(f, "werner:{x}"),
        }
    }
}

/// Density matrix on the 10-dimensional joint space, validated on
/// construction: Hermitian, unit trace, and positive semidefinite within
/// the tolerances in [`crate::tol`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    rho: ComplexMatrix,
}

impl JointState {
    /// Validates and wraps a density matrix.
    pub fn from_matrix(rho: ComplexMatrix) -> Result<Self> {
        if rho.rows() != JOINT_DIM || rho.cols() != JOINT_DIM {
            return Err(Error::InvalidInput(format!(
                "joint state must be {JOINT_DIM}x{JOINT_DIM}, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        let defect = rho.hermiticity_defect();
        if defect > tol::STATE_HERMITICITY {
            return Err(Error::InvalidInput(format!(
                "state is not Hermitian: defect {defect:.3e}"
            )));
        }
        let trace_err = (rho.trace() - ONE).norm();
        if trace_err > tol::STATE_TRACE {
            return Err(Error::InvalidInput(format!(
                "state trace deviates from 1 by {trace_err:.3e}"
            )));
        }
        let spectrum = eig_hermitian(&rho, false)?;
        let min_eig = spectrum.values[0];
        if min_eig < -tol::STATE_POSITIVITY {
            return Err(Error::InvalidInput(format!(
                "state has negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { rho })
    }

    /// The underlying density matrix.
    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    /// Consumes the state, returning the density matrix.
    pub fn into_matrix(self) -> ComplexMatrix {
        self.rho
    }

    /// Purity `Tr(ρ²)` of the joint state.
    pub fn purity(&self) -> f64 {
        purity(&self.rho)
    }
}

/// Maximally entangled ancilla–system input: the ancilla polarization is
/// anti-correlated with the system photon's polarization, the environment
/// arm is empty.
pub fn bell_state(sign: BellSign) -> JointState {
    let s = match sign {
        BellSign::Plus => 1.0,
        BellSign::Minus => -1.0,
    };
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = [ZERO; JOINT_DIM];
    psi[joint_index(0, ArmBasis::SysV)] = Complex64::new(amp, 0.0);
    psi[joint_index(1, ArmBasis::SysH)] = Complex64::new(s * amp, 0.0);
    let rho = ComplexMatrix::from_fn(JOINT_DIM, JOINT_DIM, |i, j| psi[i] * psi[j].conj());
    JointState::from_matrix(rho).expect("Bell state is a valid density matrix")
}

/// Werner input: a mixture of the plus-sign Bell state with weight
/// `(4f - 1)/3` and the maximally mixed state on the ancilla ⊗ system-arm
/// block with the remaining weight. `f` is the overlap with the Bell state
/// and must lie in `[0.25, 1]`; `f = 1` reproduces [`bell_state`] and
/// `f = 0.25` the fully mixed block.
pub fn werner_state(fidelity: f64) -> Result<JointState> {
    if !(0.25..=1.0).contains(&fidelity) {
        return Err(Error::InvalidInput(format!(
            "Werner fidelity must be in [0.25, 1], got {fidelity}"
        )));
    }
    let p = (4.0 * fidelity - 1.0) / 3.0;
    let mut rho = bell_state(BellSign::Plus)
        .into_matrix()
        .scaled(Complex64::new(p, 0.0));
    let mix = (1.0 - fidelity) / 3.0;
    for ancilla in 0..ANCILLA_DIM {
        for arm in [ArmBasis::SysH, ArmBasis::SysV] {
            let i = joint_index(ancilla, arm);
            let v = rho.get(i, i) + Complex64::new(mix, 0.0);
            rho.set(i, i, v);
        }
    }
    JointState::from_matrix(rho)
}

/// Embeds an arm-register operator into the joint space (identity on the
/// ancilla).
fn embed_arm(op: &ComplexMatrix) -> ComplexMatrix {
    tensor(&ComplexMatrix::identity(ANCILLA_DIM), op)
}

/// Beam splitter with reflectivity `r`, polarization independent, identity
/// on the ancilla and on the vacuum state.
///
/// Convention: the reflected amplitude picks up a factor `i`, so on each
/// polarization's `{sys, env}` pair the action is
/// `sys → i√r·sys + √(1-r)·env` and `env → i√r·env + √(1-r)·sys`.
pub fn bs_unitary(r: f64) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidInput(format!(
            "beam-splitter reflectivity must be in [0, 1], got {r}"
        )));
    }
    let refl = IM * r.sqrt();
    let trans = Complex64::new((1.0 - r).sqrt(), 0.0);
    let mut arm = ComplexMatrix::zeros(ARM_DIM, ARM_DIM);
    for (sys, env) in [
        (ArmBasis::SysH.index(), ArmBasis::EnvH.index()),
        (ArmBasis::SysV.index(), ArmBasis::EnvV.index()),
    ] {
        arm.set(sys, sys, refl);
        arm.set(env, sys, trans);
        arm.set(env, env, refl);
        arm.set(sys, env, trans);
    }
    arm.set(ArmBasis::Vacuum.index(), ArmBasis::Vacuum.index(), ONE);
    let joint = embed_arm(&arm);
    debug_assert!(joint.is_unitary(tol::UNITARITY));
    Ok(joint)
}

/// Quarter-wave plate on the system arm: the V component picks up a
/// factor `i`, everything else is untouched.
pub fn qwp_unitary() -> ComplexMatrix {
    let mut arm = ComplexMatrix::identity(ARM_DIM);
    arm.set(ArmBasis::SysV.index(), ArmBasis::SysV.index(), IM);
    embed_arm(&arm)
}

/// Half-wave plate on the environment arm: the V component flips sign,
/// everything else is untouched.
pub fn hwp_unitary() -> ComplexMatrix {
    let mut arm = ComplexMatrix::identity(ARM_DIM);
    arm.set(ArmBasis::EnvV.index(), ArmBasis::EnvV.index(), -ONE);
    embed_arm(&arm)
}

/// Relative phase `e^{-iθ}` on the system arm (both polarizations); the
/// environment arm and the vacuum are untouched.
///
/// The sign convention (system arm retarded rather than advanced) is the one
/// under which entanglement revivals grow with the filter transmissivity at
/// θ = π/4; the opposite sign freezes the ancilla–system concurrence at that
/// angle. Either sign is a valid reading of "relative phase between the
/// arms", so the dynamically meaningful one is used.
pub fn phase_unitary(theta: f64) -> ComplexMatrix {
    let factor = Complex64::new(theta.cos(), -theta.sin());
    let mut arm = ComplexMatrix::identity(ARM_DIM);
    arm.set(ArmBasis::SysH.index(), ArmBasis::SysH.index(), factor);
    arm.set(ArmBasis::SysV.index(), ArmBasis::SysV.index(), factor);
    embed_arm(&arm)
}

/// Trace-preserving channel given by a set of Kraus operators.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
    dim: usize,
}

impl KrausChannel {
    /// Validates completeness `Σ K†K = I` and wraps the operator set.
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| {
            Error::InvalidInput("a Kraus channel needs at least one operator".into())
        })?;
        let dim = first.rows();
        if ops.iter().any(|k| k.rows() != dim || k.cols() != dim) {
            return Err(Error::InvalidInput(
                "all Kraus operators must be square with a common dimension".into(),
            ));
        }
        let mut gram = ComplexMatrix::zeros(dim, dim);
        for k in &ops {
            gram = gram.add(&k.adjoint().matmul(k));
        }
        let defect = gram.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > tol::KRAUS_COMPLETENESS {
            return Err(Error::InvalidInput(format!(
                "Kraus set is not trace preserving: completeness defect {defect:.3e}"
            )));
        }
        Ok(Self { ops, dim })
    }

    /// Channel consisting of a single unitary operator.
    pub fn from_unitary(u: ComplexMatrix) -> Result<Self> {
        if !u.is_unitary(tol::UNITARITY) {
            return Err(Error::InvalidInput(
                "operator handed to from_unitary is not unitary".into(),
            ));
        }
        Self::new(vec![u])
    }

    /// The Kraus operators.
    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// Dimension the channel acts on.
    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Transmission filter on the environment arm.
///
/// A photon in the environment arm survives with amplitude `√t`; the lost
/// amplitude is absorbed into an external mode and shows up as vacuum. The
/// two polarizations are absorbed by *distinct* external states, so their
/// coherence does not survive absorption — hence one damping operator plus
/// one absorber per polarization rather than a single combined absorber.
pub fn filter_channel(transmission: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&transmission) {
        return Err(Error::InvalidInput(format!(
            "filter transmission must be in [0, 1], got {transmission}"
        )));
    }
    absorbing_channel(transmission, &[ArmBasis::EnvH, ArmBasis::EnvV])
}

/// Which arm(s) a loss channel damps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossTarget {
    /// Damp the system arm only.
    SystemArm,
    /// Damp the environment arm only.
    EnvironmentArm,
    /// Damp both arms with the same transmission.
    Both,
}

/// Photon loss with transmission `eta` on the selected arm(s); identical in
/// structure to [`filter_channel`] but aimed at a different part of the
/// register.
pub fn loss_channel(eta: f64, target: LossTarget) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidInput(format!(
            "loss transmission must be in [0, 1], got {eta}"
        )));
    }
    let damped: &[ArmBasis] = match target {
        LossTarget::SystemArm => &[ArmBasis::SysH, ArmBasis::SysV],
        LossTarget::EnvironmentArm => &[ArmBasis::EnvH, ArmBasis::EnvV],
        LossTarget::Both => &[
            ArmBasis::SysH,
            ArmBasis::SysV,
            ArmBasis::EnvH,
            ArmBasis::EnvV,
        ],
    };
    absorbing_channel(eta, damped)
}

/// Common construction for filter and loss: damp the listed arm states by
/// `√keep` and route the complement to vacuum through per-state absorbers.
fn absorbing_channel(keep: f64, damped: &[ArmBasis]) -> Result<KrausChannel> {
    let survive = Complex64::new(keep.sqrt(), 0.0);
    let mut k0 = ComplexMatrix::identity(ARM_DIM);
    for state in damped {
        k0.set(state.index(), state.index(), survive);
    }
    let mut ops = vec![embed_arm(&k0)];
    if keep < 1.0 {
        let absorb = Complex64::new((1.0 - keep).sqrt(), 0.0);
        for state in damped {
            let mut k = ComplexMatrix::zeros(ARM_DIM, ARM_DIM);
            k.set(ArmBasis::Vacuum.index(), state.index(), absorb);
            ops.push(embed_arm(&k));
        }
    }
    KrausChannel::new(ops)
}

/// Parameters of one collision step.
///
/// `theta` may be any real number and is stored reduced modulo 2π by
/// [`StepConfig::new`]; all other parameters must lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    /// Beam-splitter reflectivity.
    pub r: f64,
    /// Filter transmission on the environment arm.
    pub transmission: f64,
    /// Relative phase on the system arm, radians.
    pub theta: f64,
    /// Loss transmission on the system arm (1 = lossless).
    pub eta_s: f64,
    /// Loss transmission on the environment arm (1 = lossless).
    pub eta_e: f64,
}

impl StepConfig {
    /// Validating constructor; reduces `theta` modulo 2π.
    pub fn new(r: f64, transmission: f64, theta: f64, eta_s: f64, eta_e: f64) -> Result<Self> {
        let cfg = Self {
            r,
            transmission,
            theta: theta.rem_euclid(TAU),
            eta_s,
            eta_e,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Balanced lossless step with full transmission and zero phase.
    pub fn ideal() -> Self {
        Self {
            r: 0.5,
            transmission: 1.0,
            theta: 0.0,
            eta_s: 1.0,
            eta_e: 1.0,
        }
    }

    /// Checks every parameter range; `theta` only has to be finite.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("r", self.r),
            ("transmission", self.transmission),
            ("eta_s", self.eta_s),
            ("eta_e", self.eta_e),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be in [0, 1], got {value}"
                )));
            }
        }
        if !self.theta.is_finite() {
            return Err(Error::InvalidInput(format!(
                "theta must be finite, got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

/// The complete collision step as a Kraus channel: beam splitter, both
/// waveplates, and the phase as one unitary, followed by the filter and
/// then per-arm loss.
///
/// With `transmission = 1` and lossless arms the result is a single unitary
/// Kraus operator.
pub fn step_channel(cfg: &StepConfig) -> Result<KrausChannel> {
    cfg.validate()?;
    let unitary = phase_unitary(cfg.theta)
        .matmul(&hwp_unitary())
        .matmul(&qwp_unitary())
        .matmul(&bs_unitary(cfg.r)?);
    debug_assert!(unitary.is_unitary(tol::UNITARITY));
    let filter = filter_channel(cfg.transmission)?;
    let loss_s = loss_channel(cfg.eta_s, LossTarget::SystemArm)?;
    let loss_e = loss_channel(cfg.eta_e, LossTarget::EnvironmentArm)?;

    let mut ops = Vec::new();
    for le in loss_e.ops() {
        for ls in loss_s.ops() {
            for f in filter.ops() {
                let op = le.matmul(ls).matmul(f).matmul(&unitary);
                // Products of an absorber with another absorber's output are
                // structurally zero; keep the operator set minimal.
                if op.max_abs() > 0.0 {
                    ops.push(op);
                }
            }
        }
    }
    KrausChannel::new(ops)
}

/// Applies a channel to a joint state: `ρ ↦ Σ K ρ K†`.
pub fn apply_channel(channel: &KrausChannel, state: &JointState) -> Result<JointState> {
    if channel.dim() != JOINT_DIM {
        return Err(Error::InvalidInput(format!(
            "channel dimension {} does not match the joint space {JOINT_DIM}",
            channel.dim()
        )));
    }
    let mut out = ComplexMatrix::zeros(JOINT_DIM, JOINT_DIM);
    for k in channel.ops() {
        out = out.add(&k.matmul(state.rho()).matmul(&k.adjoint()));
    }
    JointState::from_matrix(out)
        .map_err(|e| Error::NumericalInvariant(format!("channel output is not a state: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Subsystem;

    const TOLERANCE: f64 = 1e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bell_state_has_the_four_expected_entries() {
        for (sign, s) in [(BellSign::Plus, 1.0), (BellSign::Minus, -1.0)] {
            let rho = bell_state(sign);
            let m = rho.rho();
            let hv = joint_index(0, ArmBasis::SysV);
            let vh = joint_index(1, ArmBasis::SysH);
            assert!((m.get(hv, hv) - c(0.5, 0.0)).norm() <= TOLERANCE);
            assert!((m.get(vh, vh) - c(0.5, 0.0)).norm() <= TOLERANCE);
            assert!((m.get(hv, vh) - c(0.5 * s, 0.0)).norm() <= TOLERANCE);
            assert!((m.get(vh, hv) - c(0.5 * s, 0.0)).norm() <= TOLERANCE);
            let nonzero = (0..JOINT_DIM)
                .flat_map(|i| (0..JOINT_DIM).map(move |j| (i, j)))
                .filter(|&(i, j)| m.get(i, j) != c(0.0, 0.0))
                .count();
            assert_eq!(nonzero, 4);
            assert!((rho.purity() - 1.0).abs() <= TOLERANCE);
        }
    }

    #[test]
    fn werner_interpolates_between_bell_and_mixed_block() {
        let pure = werner_state(1.0).unwrap();
        assert!(pure.rho().max_abs_diff(bell_state(BellSign::Plus).rho()) <= TOLERANCE);

        let mixed = werner_state(0.25).unwrap();
        for ancilla in 0..ANCILLA_DIM {
            for arm in [ArmBasis::SysH, ArmBasis::SysV] {
                let i = joint_index(ancilla, arm);
                assert!((mixed.rho().get(i, i) - c(0.25, 0.0)).norm() <= TOLERANCE);
            }
        }
    }

    #[test]
    fn werner_overlap_with_bell_state_equals_fidelity() {
        for fidelity in [0.25, 0.4, 0.6, 0.9712, 1.0] {
            let omega = werner_state(fidelity).unwrap();
            let bell = bell_state(BellSign::Plus);
            // ⟨ψ|Ω|ψ⟩ = Tr(Ω |ψ⟩⟨ψ|) for the rank-one Bell projector.
            let overlap = omega.rho().matmul(bell.rho()).trace().re;
            assert!(
                (overlap - fidelity).abs() <= TOLERANCE,
                "overlap {overlap} for fidelity {fidelity}"
            );
        }
    }

    #[test]
    fn werner_purity_matches_its_spectrum() {
        let fidelity = 0.9712;
        let p = (4.0 * fidelity - 1.0) / 3.0;
        // Spectrum of the ancilla ⊗ system block: p + (1-p)/4 once and
        // (1-p)/4 three times; the rest of the joint space is empty.
        let q = (1.0 - p) / 4.0;
        let expected = (p + q) * (p + q) + 3.0 * q * q;
        let omega = werner_state(fidelity).unwrap();
        assert!((omega.purity() - expected).abs() <= TOLERANCE);
    }

    #[test]
    fn werner_rejects_out_of_range_fidelity() {
        assert!(matches!(werner_state(0.2), Err(Error::InvalidInput(_))));
        assert!(matches!(werner_state(1.01), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn joint_state_validation_rejects_bad_matrices() {
        // Wrong shape.
        assert!(JointState::from_matrix(ComplexMatrix::identity(4)).is_err());
        // Right shape, trace 10.
        assert!(JointState::from_matrix(ComplexMatrix::identity(JOINT_DIM)).is_err());
        // Negative eigenvalue.
        let mut m = ComplexMatrix::zeros(JOINT_DIM, JOINT_DIM);
        m.set(0, 0, c(1.5, 0.0));
        m.set(1, 1, c(-0.5, 0.0));
        assert!(JointState::from_matrix(m).is_err());
    }

    #[test]
    fn bs_block_matches_the_stated_convention() {
        let r = 0.37;
        let u = bs_unitary(r).unwrap();
        let refl = c(0.0, r.sqrt());
        let trans = c((1.0 - r).sqrt(), 0.0);
        for ancilla in 0..ANCILLA_DIM {
            for (sys, env) in [
                (ArmBasis::SysH, ArmBasis::EnvH),
                (ArmBasis::SysV, ArmBasis::EnvV),
            ] {
                let s = joint_index(ancilla, sys);
                let e = joint_index(ancilla, env);
                assert_eq!(u.get(s, s), refl);
                assert_eq!(u.get(e, s), trans);
                assert_eq!(u.get(e, e), refl);
                assert_eq!(u.get(s, e), trans);
            }
        }
    }

    #[test]
    fn element_unitaries_are_unitary() {
        for r in [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0] {
            assert!(bs_unitary(r).unwrap().is_unitary(tol::UNITARITY));
        }
        assert!(qwp_unitary().is_unitary(tol::UNITARITY));
        assert!(hwp_unitary().is_unitary(tol::UNITARITY));
        for theta in [-1.3, 0.0, 0.4, 2.0, 7.9] {
            assert!(phase_unitary(theta).is_unitary(tol::UNITARITY));
        }
        assert!(bs_unitary(1.2).is_err());
        assert!(bs_unitary(-0.1).is_err());
    }

    #[test]
    fn waveplates_have_the_right_orders() {
        // QWP is a quarter turn on the system V amplitude: fourth power is
        // the identity, square is not.
        let qwp = qwp_unitary();
        let qwp2 = qwp.matmul(&qwp);
        let qwp4 = qwp2.matmul(&qwp2);
        let id = ComplexMatrix::identity(JOINT_DIM);
        assert_eq!(qwp4.max_abs_diff(&id), 0.0);
        assert!(qwp2.max_abs_diff(&id) > 0.5);
        // HWP is an involution.
        let hwp = hwp_unitary();
        assert_eq!(hwp.matmul(&hwp).max_abs_diff(&id), 0.0);
    }

    #[test]
    fn phase_composes_additively() {
        for (a, b) in [(0.3, 0.9), (2.5, 4.1), (5.9, 1.7), (-0.8, 0.8)] {
            let lhs = phase_unitary(a).matmul(&phase_unitary(b));
            let rhs = phase_unitary(a + b);
            assert!(lhs.max_abs_diff(&rhs) <= TOLERANCE);
        }
        assert_eq!(
            phase_unitary(0.0).max_abs_diff(&ComplexMatrix::identity(JOINT_DIM)),
            0.0
        );
    }

    #[test]
    fn filter_kraus_structure() {
        let full = filter_channel(1.0).unwrap();
        assert_eq!(full.ops().len(), 1);
        assert_eq!(
            full.ops()[0].max_abs_diff(&ComplexMatrix::identity(JOINT_DIM)),
            0.0
        );
        let half = filter_channel(0.5).unwrap();
        assert_eq!(half.ops().len(), 3);
        assert!(filter_channel(-0.1).is_err());
        assert!(filter_channel(1.5).is_err());
    }

    #[test]
    fn filter_moves_environment_population_to_vacuum() {
        // Diagonal state: environment-arm H population q, system-arm H rest.
        let q = 0.3;
        let mut m = ComplexMatrix::zeros(JOINT_DIM, JOINT_DIM);
        m.set(
            joint_index(0, ArmBasis::EnvH),
            joint_index(0, ArmBasis::EnvH),
            c(q, 0.0),
        );
        m.set(
            joint_index(0, ArmBasis::SysH),
            joint_index(0, ArmBasis::SysH),
            c(1.0 - q, 0.0),
        );
        let state = JointState::from_matrix(m).unwrap();
        let out = apply_channel(&filter_channel(0.5).unwrap(), &state).unwrap();
        let vac = joint_index(0, ArmBasis::Vacuum);
        let env = joint_index(0, ArmBasis::EnvH);
        assert!((out.rho().get(vac, vac).re - q / 2.0).abs() <= TOLERANCE);
        assert!((out.rho().get(env, env).re - q / 2.0).abs() <= TOLERANCE);
    }

    #[test]
    fn loss_channel_targets_the_right_arm() {
        let mut m = ComplexMatrix::zeros(JOINT_DIM, JOINT_DIM);
        m.set(
            joint_index(0, ArmBasis::SysH),
            joint_index(0, ArmBasis::SysH),
            c(0.5, 0.0),
        );
        m.set(
            joint_index(0, ArmBasis::EnvH),
            joint_index(0, ArmBasis::EnvH),
            c(0.5, 0.0),
        );
        let state = JointState::from_matrix(m).unwrap();

        let sys_only =
            apply_channel(&loss_channel(0.2, LossTarget::SystemArm).unwrap(), &state).unwrap();
        assert!((sys_only.rho().get(0, 0).re - 0.1).abs() <= TOLERANCE);
        assert!((sys_only.rho().get(2, 2).re - 0.5).abs() <= TOLERANCE);

        let both = apply_channel(&loss_channel(0.2, LossTarget::Both).unwrap(), &state).unwrap();
        assert!((both.rho().get(0, 0).re - 0.1).abs() <= TOLERANCE);
        assert!((both.rho().get(2, 2).re - 0.1).abs() <= TOLERANCE);
        let vac = joint_index(0, ArmBasis::Vacuum);
        assert!((both.rho().get(vac, vac).re - 0.8).abs() <= TOLERANCE);
    }

    #[test]
    fn kraus_constructor_rejects_incomplete_sets() {
        let half = ComplexMatrix::identity(3).scaled(c(0.5, 0.0));
        assert!(matches!(
            KrausChannel::new(vec![half]),
            Err(Error::InvalidInput(_))
        ));
        assert!(KrausChannel::new(vec![]).is_err());
    }

    #[test]
    fn ideal_step_is_a_single_unitary() {
        let channel = step_channel(&StepConfig::ideal()).unwrap();
        assert_eq!(channel.ops().len(), 1);
        assert!(channel.ops()[0].is_unitary(tol::UNITARITY));
    }

    #[test]
    fn filtered_step_has_three_operators() {
        let cfg = StepConfig::new(0.5, 0.25, 0.0, 1.0, 1.0).unwrap();
        let channel = step_channel(&cfg).unwrap();
        assert_eq!(channel.ops().len(), 3);
    }

    #[test]
    fn opaque_filter_step_dumps_the_reflected_photon() {
        // One step on the Bell input with an opaque filter: the part of the
        // photon sent to the environment arm (weight 1 - r) is absorbed.
        for r in [0.3, 0.5, 0.8] {
            let cfg = StepConfig::new(r, 0.0, 0.0, 1.0, 1.0).unwrap();
            let channel = step_channel(&cfg).unwrap();
            let out = apply_channel(&channel, &bell_state(BellSign::Plus)).unwrap();
            let arm = crate::linalg::partial_trace(out.rho(), Subsystem::Arm).unwrap();
            let vac = ArmBasis::Vacuum.index();
            assert!(
                (arm.get(vac, vac).re - (1.0 - r)).abs() <= TOLERANCE,
                "vacuum population at r={r}"
            );
        }
    }

    #[test]
    fn step_output_stays_a_valid_state() {
        let configs = [
            StepConfig::ideal(),
            StepConfig::new(0.3, 0.7, 1.1, 0.9, 0.8).unwrap(),
            StepConfig::new(0.9, 0.1, 4.4, 0.5, 1.0).unwrap(),
            StepConfig::new(0.5, 0.0, 2.2, 1.0, 0.3).unwrap(),
        ];
        for cfg in configs {
            let channel = step_channel(&cfg).unwrap();
            let mut state = werner_state(0.9).unwrap();
            for _ in 0..4 {
                state = apply_channel(&channel, &state).unwrap();
                assert!((state.rho().trace().re - 1.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn step_config_reduces_theta_and_validates() {
        let cfg = StepConfig::new(0.5, 1.0, -std::f64::consts::PI, 1.0, 1.0).unwrap();
        assert!((cfg.theta - std::f64::consts::PI).abs() <= 1e-15);
        assert!(StepConfig::new(1.1, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(StepConfig::new(0.5, 1.0, 0.0, -0.2, 1.0).is_err());
        assert!(StepConfig::new(0.5, 1.0, f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn input_descriptor_parses_and_prints() {
        for text in ["bell+", "bell-", "werner:0.9712"] {
            let d: InputDescriptor = text.parse().unwrap();
            assert_eq!(d.to_string(), text);
            assert!(d.state().is_ok());
        }
        assert!("bell".parse::<InputDescriptor>().is_err());
        assert!("werner:abc".parse::<InputDescriptor>().is_err());
        assert!("werner:0.1"
            .parse::<InputDescriptor>()
            .unwrap()
            .state()
            .is_err());
    }
}
