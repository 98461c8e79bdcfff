//! The fixed maximal commutative subalgebra (diagonal matrices in the
//! standard basis), the reduction map onto it, and entropy primitives.
//!
//! Every other maximal commutative subalgebra is unitarily equivalent, so
//! callers conjugate their inputs instead of carrying a basis object around.
//! Natural logarithms throughout.

use crate::error::{Error, Result};
use crate::hermitian::{DensityMatrix, HermitianMatrix, PureState};

/// Minimal projectors P_j = |j⟩⟨j| of the diagonal subalgebra.
#[derive(Clone, Debug)]
pub struct SubalgebraBasis {
    dim: usize,
}

impl SubalgebraBasis {
    pub fn new(dim: usize) -> Self {
        SubalgebraBasis { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn projector(&self, j: usize) -> HermitianMatrix {
        PureState::basis(self.dim, j).projector()
    }
}

/// Probability vector: the image of a state under the reduction map.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        for p in probs.iter_mut() {
            if *p < 0.0 {
                if *p < -1e-12 {
                    return Err(Error::DomainError {
                        value: *p,
                        lo: 0.0,
                        hi: 1.0,
                    });
                }
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidTrace {
                trace: sum,
                tolerance: 1e-9,
            });
        }
        Ok(ProbabilityVector { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn shannon_entropy(&self) -> f64 {
        self.probs.iter().map(|&p| entropy_term_clamped(p)).sum()
    }
}

/// −x·ln x with the convention s(0) = 0.
pub fn entropy_term(x: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-9).contains(&x) {
        return Err(Error::DomainError {
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(entropy_term_clamped(x))
}

/// The same map with silent clamping to [0, 1]; hot paths use this after
/// their own validation.
#[inline]
pub(crate) fn entropy_term_clamped(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

/// Reduction map: the diagonal of the density matrix as a probability vector.
pub fn reduce(d: &DensityMatrix) -> ProbabilityVector {
    ProbabilityVector::new(d.diagonal()).expect("diagonal of a state is a probability vector")
}

/// Shannon entropy of the reduction, S̃(D) ∈ [0, ln d].
pub fn tilde_entropy(d: &DensityMatrix) -> f64 {
    reduce(d).shannon_entropy()
}

/// S̃ of a pure state without building the projector.
pub fn tilde_entropy_pure(psi: &PureState) -> f64 {
    psi.probabilities()
        .iter()
        .map(|&p| entropy_term_clamped(p))
        .sum()
}

/// Von Neumann entropy from the cached spectrum; never exceeds S̃.
pub fn von_neumann_entropy(d: &DensityMatrix) -> f64 {
    d.eigenvalues()
        .iter()
        .map(|&l| entropy_term_clamped(l))
        .sum()
}
