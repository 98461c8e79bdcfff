//! Default numerical tolerances, stated once and inherited everywhere.

/// Hermiticity of stored matrices. Constructors symmetrize their input, so
/// stored entries satisfy `a[i][j] == conj(a[j][i])` to better than this.
pub const HERMITICITY_CONSTRUCTION: f64 = 1e-12;

/// Hermiticity gate on raw input. Deviations beyond this are an error,
/// smaller ones are treated as roundoff and symmetrized away.
pub const HERMITICITY_VALIDATION: f64 = 1e-9;

/// Eigenvalues above this count towards the rank and the support.
pub const RANK_TOL: f64 = 1e-9;

/// Eigenvalues in `[-EIGENVALUE_CLAMP, 0)` are set to zero after validation;
/// anything more negative is rejected as genuinely non-PSD.
pub const EIGENVALUE_CLAMP: f64 = 1e-10;

/// Most negative eigenvalue a PSD square root will tolerate.
pub const PSD_SQRT_FLOOR: f64 = -1e-9;

/// Unit-trace check for density matrices.
pub const TRACE_TOL: f64 = 1e-12;

/// Smallest admissible ensemble weight.
pub const WEIGHT_FLOOR: f64 = 1e-8;

/// Reconstruction accuracy required of an ensemble against its target state.
pub const MIX_TOL: f64 = 1e-9;

/// Isometry gate: max-entry deviation of `W†W` from the identity.
pub const ISOMETRY_TOL: f64 = 1e-8;

/// Commutator gate for symmetry checks (`[D, U] = 0`), separate from the
/// hermiticity tolerance so that near-symmetric inputs fail loudly.
pub const COMMUTATOR_TOL: f64 = 1e-10;

/// Objectives within this of the best restart contribute states to a facet.
pub const CLUSTER_TOL: f64 = 1e-6;

/// Pure states closer than this in trace distance are deduplicated.
pub const STATE_TOL: f64 = 1e-6;

/// Affinity tolerance across a facet hull.
pub const FACET_TOL: f64 = 1e-6;

/// Agreement required between a closed form and the brute-force search.
pub const CROSS_TOL: f64 = 1e-4;
