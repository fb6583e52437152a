//! Numerical tolerances and iteration caps, collected in one place.
//!
//! Every cutoff the simulator relies on lives here so that a change in one
//! tolerance cannot silently disagree with another. Values are chosen for
//! 10-dimensional double-precision workloads: matrix products and
//! eigendecompositions at this size resolve to ~1e-14, so validation
//! thresholds sit a few orders of magnitude above that and decision
//! thresholds (empty sectors, backflow increments) sit at 1e-12.

/// Maximum allowed |M - M†| entry for a matrix handed to the Hermitian
/// eigensolver.
pub const EIG_INPUT_HERMITICITY: f64 = 1e-8;

/// Relative off-diagonal mass at which a Jacobi sweep is considered
/// converged.
pub const JACOBI_CONVERGENCE: f64 = 1e-14;

/// Hard cap on Jacobi sweeps; convergence is quadratic, so hitting this
/// indicates a malformed input rather than a slow case.
pub const JACOBI_MAX_SWEEPS: usize = 60;

/// Subdiagonal magnitude below which the shifted-QR iteration deflates.
pub const QR_DEFLATION: f64 = 1e-12;

/// Total shifted-QR iterations allowed before falling back to the current
/// diagonal.
pub const QR_MAX_ITERATIONS: usize = 200;

/// Maximum allowed |U†U - I| entry for a matrix that claims to be unitary.
pub const UNITARITY: f64 = 1e-12;

/// Maximum allowed |Σ K†K - I| entry for a Kraus operator set.
pub const KRAUS_COMPLETENESS: f64 = 1e-10;

/// Maximum allowed |ρ - ρ†| entry for a physical state.
pub const STATE_HERMITICITY: f64 = 1e-10;

/// Maximum allowed |Tr ρ - 1| for a physical state.
pub const STATE_TRACE: f64 = 1e-10;

/// Most negative eigenvalue a physical state may carry (numerical slack on
/// positive semidefiniteness).
pub const STATE_POSITIVITY: f64 = 1e-10;

/// Sector weight below which post-selection is reported as empty instead of
/// returning a normalized state built from noise.
pub const EMPTY_SECTOR_WEIGHT: f64 = 1e-12;

/// Concurrence increment below which a step is not counted as backflow.
pub const NM_INCREMENT: f64 = 1e-12;

/// Width of the band [-EIGENVALUE_CLAMP, 0) in which slightly negative
/// spectrum values are clamped to zero before taking square roots.
pub const EIGENVALUE_CLAMP: f64 = 1e-10;

/// Spin-flip spectrum values with magnitude below this are indistinguishable
/// from exact zeros at f64 precision and are treated as such. Without the
/// floor, the square root amplifies O(1e-16) eigenvalue noise on singular
/// products to O(1e-8) concurrence noise.
pub const EIGENVALUE_NOISE_FLOOR: f64 = 1e-14;
