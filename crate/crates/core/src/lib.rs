//! Simulator core for a photonic collision model.
//!
//! A polarization-entangled photon pair is split between a held *ancilla*
//! and a *system* photon that repeatedly collides with an environment arm
//! on a beam splitter. Each collision entangles a little more of the
//! system's state with the environment; a transmission filter in the
//! environment arm controls how much of that amplitude comes back, which
//! moves the reduced dynamics between memoryless decay and
//! information-backflow behaviour.
//!
//! - [`linalg`] — dense complex matrices and the eigensolvers everything
//!   else is built on.
//! - [`model`] — the joint Hilbert space, input states, and the optical
//!   elements of one collision step as unitaries and Kraus channels.
//! - [`dynamics`] — repeated steps, post-selected two-qubit states,
//!   concurrence, and the backflow measure.
//! - [`oracle`] — an independent mode-occupation simulation used to
//!   cross-check the channel construction.
//! - [`tomography`] — projector sets, simulated counts with shot noise,
//!   and state reconstruction.

pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod tol;
pub mod tomography;

pub use dynamics::{
    concurrence, evolve, nm_measure, post_select, sweep, NmResult, Sector, StepRecord, SweepRow,
    Trajectory,
};
pub use error::{Error, Result};
pub use linalg::{
    eig_general4, eig_hermitian, partial_trace, purity, tensor, trace_distance, ComplexMatrix,
    HermitianSpectrum, Subsystem, ANCILLA_DIM, ARM_DIM, JOINT_DIM,
};
pub use model::{
    apply_channel, bell_state, bs_unitary, filter_channel, hwp_unitary, joint_index, loss_channel,
    phase_unitary, qwp_unitary, step_channel, werner_state, ArmBasis, BellSign, InputDescriptor,
    JointState, KrausChannel, LossTarget, StepConfig,
};
pub use oracle::{compare, simulate_fock, FockState};
pub use tomography::{
    expected_probs, mc_errorbars, projector_set, reconstruct, sample_counts, PolState,
    ProjectorSet, TomographyResult,
};
