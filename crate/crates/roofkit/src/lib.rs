//! # roofkit
//!
//! Entropy of the diagonal (maximal commutative) subalgebra with respect to a
//! state, and the convex-roof optimization underneath it.
//!
//! For a density matrix `D` on a `d`-dimensional Hilbert space the library
//! computes:
//!
//! - `S̃(D)`: Shannon entropy of the diagonal of `D` (the restriction of the
//!   state to the diagonal subalgebra);
//! - `R(D) = inf Σ pⱼ S̃(ψⱼ)`: the convex roof over all pure-state
//!   decompositions `D = Σ pⱼ |ψⱼ⟩⟨ψⱼ|`, along with an optimal ensemble;
//! - `H(D) = S̃(D) − R(D)`: the subalgebra entropy, zero exactly on pure
//!   states;
//! - the concave counterpart `sup Σ pⱼ S̃(ψⱼ)` and the facet of pure states
//!   that appear in optimal decompositions.
//!
//! Two special families have closed forms or one-parameter reductions that
//! the generic optimizer is cross-validated against:
//!
//! - rank-two states invariant under a basis transposition ([`ranktwo`]),
//!   where the optimal decomposition is an explicit pair of pure states;
//! - real permutation-invariant states ([`symmetric`]), where optimization
//!   reduces to a circle, the optimal ensembles are triangle or hexagon
//!   orbits, and the switch between the two happens at a bifurcation value
//!   `z* ≈ −0.14` for `d = 3`.
//!
//! A brute-force search ([`oracle`]) shares nothing with the main optimizer
//! and serves as the test bedrock for every closed form.
//!
//! All operations are pure functions over immutable values; for a fixed seed
//! results are bit-identical regardless of thread count.

#![forbid(unsafe_code)]

pub mod error;
pub mod hermitian;
pub mod mat;
pub mod oracle;
pub mod parallel;
pub mod ranktwo;
pub mod rng;
pub mod roof;
pub mod subalgebra;
pub mod symmetric;
pub mod tol;

pub use error::{Error, Result};
pub use hermitian::{DensityMatrix, EigenDecomposition, HermitianMatrix, PureState};
pub use mat::CMatrix;
pub use oracle::{brute_force_roof, verify_lemma, LemmaCheck, LemmaTag, OracleReport};
pub use ranktwo::{
    lemma6_applicable, pauli_frame, rank2_roof, rank2_support, Rank2Solution, Transposition,
};
pub use roof::{
    check_support_functional, concave_roof, convex_roof, ensembles_from_isometry, facet_of,
    subalgebra_entropy, Ensemble, Facet, OptimizerConfig, RoofResult, SupportCheck,
    SupportFunctional,
};
pub use subalgebra::{
    entropy_term, reduce, tilde_entropy, tilde_entropy_pure, von_neumann_entropy,
    ProbabilityVector, SubalgebraBasis,
};
pub use symmetric::{
    ansatz_minimize, antipode_overlap, bifurcation_scan, circle_minima, circle_objective,
    circle_state, hexagon_ensemble, sphere_params, symmetric_state, triangle_decomposition,
    AnsatzResult, HexagonDecomposition, RealAnsatzVector, SymmetricState,
};
