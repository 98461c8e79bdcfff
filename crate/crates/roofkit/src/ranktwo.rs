//! Exact closed forms for rank-two states invariant under a transposition.
//!
//! For such a state the support carries a Pauli frame (σ₁, σ₃) determined by
//! the support projector alone: σ₃ = U·Q, and σ₁ ∝ Q(Pᵢ − Pⱼ)Q normalized to
//! square to Q. The optimal decomposition is a single pair of pure states
//! swapped by the transposition, and R reduces to two entropy terms.

use crate::error::{Error, Result};
use crate::hermitian::{DensityMatrix, HermitianMatrix, PureState};
use crate::mat::CMatrix;
use crate::oracle;
use crate::subalgebra::entropy_term_clamped;
use crate::tol;
use num_complex::Complex64;

/// Permutation unitary swapping two basis projectors and fixing the rest.
#[derive(Clone, Debug)]
pub struct Transposition {
    dim: usize,
    first: usize,
    second: usize,
    unitary: CMatrix,
}

impl Transposition {
    pub fn new(dim: usize, first: usize, second: usize) -> Result<Self> {
        if first >= second || second >= dim {
            return Err(Error::OutOfRange {
                value: second as f64,
                lo: first as f64 + 1.0,
                hi: dim as f64 - 1.0,
            });
        }
        let mut unitary = CMatrix::identity(dim);
        unitary[(first, first)] = Complex64::new(0.0, 0.0);
        unitary[(second, second)] = Complex64::new(0.0, 0.0);
        unitary[(first, second)] = Complex64::new(1.0, 0.0);
        unitary[(second, first)] = Complex64::new(1.0, 0.0);
        Ok(Transposition {
            dim,
            first,
            second,
            unitary,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> (usize, usize) {
        (self.first, self.second)
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    /// U M U (U is an involution, so this is conjugation).
    pub fn conjugate(&self, m: &CMatrix) -> CMatrix {
        self.unitary.mul(m).mul(&self.unitary)
    }

    /// Swap the two components of a state vector.
    pub fn transform_state(&self, psi: &PureState) -> PureState {
        let mut v = psi.amplitudes().to_vec();
        v.swap(self.first, self.second);
        PureState::from_unnormalized(v).expect("permutation preserves the norm")
    }

    pub fn commutator_with(&self, d: &DensityMatrix) -> f64 {
        self.unitary.commutator_norm(d.matrix().matrix())
    }
}

/// Closed-form artifacts for one rank-two symmetric state.
#[derive(Clone, Debug)]
pub struct Rank2Solution {
    /// Support projector of the state.
    pub support: HermitianMatrix,
    pub sigma1: HermitianMatrix,
    pub sigma3: HermitianMatrix,
    /// Coefficient of σ₁ in the optimal pure states; fixed ≥ 0, which only
    /// picks an order for the unordered pair.
    pub x1: f64,
    /// Coefficient of σ₃ in the state: D = (Q + x₃σ₃)/2.
    pub x3: f64,
    /// Normalization of σ₁, y = √(Qᵢᵢ Qⱼⱼ − |Qᵢⱼ|²) > 0.
    pub y: f64,
    pub r_value: f64,
    pub h_value: f64,
    /// The two optimal pure states, swapped by the transposition.
    pub optimal_pair: (PureState, PureState),
}

/// Support projector of a rank-two state from the closed formula
/// Q = 2(D − D²)/(1 − Tr D²).
pub fn rank2_support(d: &DensityMatrix) -> Result<HermitianMatrix> {
    let rank = d.rank();
    if rank != 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            found: rank,
        });
    }
    let purity = d.purity();
    if purity >= 1.0 - 1e-12 {
        return Err(Error::DegenerateTrace { purity });
    }
    let m = d.matrix().matrix();
    let q = m.sub(&m.mul(m)).scale(2.0 / (1.0 - purity));
    HermitianMatrix::new(q)
}

/// Pauli frame on a rank-two support commuting with the transposition:
/// σ₃ = UQ and σ₁ = Q(Pᵢ − Pⱼ)Q / y. Both square to Q and anticommute.
pub fn pauli_frame(
    q: &HermitianMatrix,
    t: &Transposition,
) -> Result<(HermitianMatrix, HermitianMatrix)> {
    if q.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            left: q.dim(),
            right: t.dim(),
        });
    }
    let commutator = t.unitary().commutator_norm(q.matrix());
    if commutator > tol::COMMUTATOR_TOL {
        return Err(Error::NotSymmetric {
            deviation: commutator,
        });
    }
    let (i, j) = t.indices();
    // Tr(PᵢQ) = Qᵢᵢ and Tr(PᵢQPⱼQ) = |Qᵢⱼ|² for rank-one basis projectors
    let qii = q.entry(i, i).re;
    let qjj = q.entry(j, j).re;
    let y_sqr = qii * qjj - q.entry(i, j).norm_sqr();
    let y = y_sqr.max(0.0).sqrt();
    if y <= 1e-10 {
        return Err(Error::DegenerateFrame { y });
    }
    // Q(Pᵢ − Pⱼ)Q = qᵢqᵢ† − qⱼqⱼ† with qₖ the k-th column of Q
    let col_i = q.matrix().column(i);
    let col_j = q.matrix().column(j);
    let numerator = CMatrix::outer(&col_i).sub(&CMatrix::outer(&col_j));
    let sigma1 = HermitianMatrix::new(numerator.scale(1.0 / y))?;
    let sigma3 = HermitianMatrix::new(t.unitary().mul(q.matrix()))?;
    Ok((sigma1, sigma3))
}

/// Closed-form convex roof for a rank-two state commuting with the
/// transposition: the optimal decomposition is the pair
/// D ± (x₁/2)σ₁ and R is a two-term entropy expression in the diagonal.
pub fn rank2_roof(d: &DensityMatrix, t: &Transposition) -> Result<Rank2Solution> {
    let commutator = t.commutator_with(d);
    if commutator > tol::COMMUTATOR_TOL {
        return Err(Error::NotSymmetric {
            deviation: commutator,
        });
    }
    let support = rank2_support(d)?;
    let (sigma1, sigma3) = pauli_frame(&support, t)?;
    let (i, j) = t.indices();

    // D = (Q + x₃σ₃)/2 on the support; σ₃ is traceless there
    let x3 = d.matrix().trace_product(&sigma3);
    let span_deviation = d
        .matrix()
        .matrix()
        .max_abs_diff(&support.add(&sigma3.scale(x3)).scale(0.5).matrix().clone());
    if span_deviation > 1e-8 {
        return Err(Error::NotSymmetric {
            deviation: span_deviation,
        });
    }
    let x1 = (1.0 - x3 * x3).max(0.0).sqrt();

    // (x₁ y / 2)² = Tr(PᵢD)Tr(PⱼD) − Tr(PᵢDPⱼD), evaluated from the entries
    let dii = d.entry(i, i).re;
    let djj = d.entry(j, j).re;
    let half_x1y = (dii * djj - d.entry(i, j).norm_sqr()).max(0.0).sqrt();

    let y = {
        let qii = support.entry(i, i).re;
        let qjj = support.entry(j, j).re;
        (qii * qjj - support.entry(i, j).norm_sqr()).max(0.0).sqrt()
    };

    let s = entropy_term_clamped;
    let mut rest = 0.0;
    for k in 0..d.dim() {
        if k != i && k != j {
            rest += s(d.entry(k, k).re);
        }
    }
    let r_value = s(dii + half_x1y) + s(dii - half_x1y) + rest;
    let h_value = 2.0 * s(dii) - s(dii + half_x1y) - s(dii - half_x1y);

    let rho_matrix = d.matrix().add(&sigma1.scale(0.5 * x1));
    let rho = top_eigenstate(&rho_matrix);
    let rho_swapped = t.transform_state(&rho);

    Ok(Rank2Solution {
        support,
        sigma1,
        sigma3,
        x1,
        x3,
        y,
        r_value,
        h_value,
        optimal_pair: (rho, rho_swapped),
    })
}

fn top_eigenstate(m: &HermitianMatrix) -> PureState {
    let eig = m.eigh();
    PureState::from_unnormalized(eig.eigenvectors.column(m.dim() - 1))
        .expect("eigenvector is a unit vector")
}

/// Whether the closed form applies: the state commutes with U, U rotates the
/// support non-trivially, and the candidate pair is confirmed optimal by the
/// brute-force search within the cross tolerance. The confirmation step is
/// unavoidable: the remaining condition quantifies over all optimal
/// decompositions, which only a search can certify numerically.
pub fn lemma6_applicable(
    d: &DensityMatrix,
    t: &Transposition,
    oracle_budget: usize,
    seed: u64,
) -> Result<bool> {
    let rank = d.rank();
    if rank != 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            found: rank,
        });
    }
    if t.commutator_with(d) > tol::COMMUTATOR_TOL {
        return Ok(false);
    }
    let solution = match rank2_roof(d, t) {
        Ok(solution) => solution,
        // trivial rotation of the support: the frame degenerates
        Err(Error::DegenerateFrame { .. }) => return Ok(false),
        Err(e) => return Err(e),
    };
    let oracle_value = oracle::brute_force_roof(d, 4, oracle_budget.max(1000), seed);
    Ok(solution.r_value <= oracle_value + tol::CROSS_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use crate::subalgebra::{tilde_entropy, tilde_entropy_pure};
    use std::f64::consts::LN_2;

    fn diag_state(values: &[f64]) -> DensityMatrix {
        DensityMatrix::new(HermitianMatrix::diagonal(values)).unwrap()
    }

    /// Rank-two state commuting with the transposition and acted on
    /// non-trivially: mix a symmetric-subspace vector with weight mu and the
    /// antisymmetric vector (eᵢ − eⱼ)/√2 with weight 1 − mu.
    pub(crate) fn random_symmetric_rank2(
        rng: &mut Rng,
        dim: usize,
        t: &Transposition,
        mu: f64,
    ) -> DensityMatrix {
        let (i, j) = t.indices();
        let sym = loop {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            let shared = rng.complex_normal();
            v[i] = shared;
            v[j] = shared;
            for (k, slot) in v.iter_mut().enumerate() {
                if k != i && k != j {
                    *slot = rng.complex_normal();
                }
            }
            let psi = PureState::from_unnormalized(v).unwrap();
            // keep a solid component on the swapped pair so the frame is
            // far from degenerate
            if psi.amplitudes()[i].norm() > 0.25 {
                break psi;
            }
        };
        let mut anti = vec![Complex64::new(0.0, 0.0); dim];
        anti[i] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        anti[j] = Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let anti = PureState::new(anti).unwrap();
        let m = CMatrix::outer(sym.amplitudes())
            .scale(mu)
            .add(&CMatrix::outer(anti.amplitudes()).scale(1.0 - mu));
        DensityMatrix::from_matrix(m.hermitized()).unwrap()
    }

    #[test]
    fn transposition_identities() {
        let t = Transposition::new(4, 1, 3).unwrap();
        let u = t.unitary();
        // involution and self-adjointness
        assert!(u.mul(u).max_abs_diff(&CMatrix::identity(4)) < 1e-15);
        assert!(u.adjoint().max_abs_diff(u) < 1e-15);
        // U P₁ U = P₃, U P₀ U = P₀
        let p1 = PureState::basis(4, 1).projector();
        let p3 = PureState::basis(4, 3).projector();
        assert!(t.conjugate(p1.matrix()).max_abs_diff(p3.matrix()) < 1e-15);
        let p0 = PureState::basis(4, 0).projector();
        assert!(t.conjugate(p0.matrix()).max_abs_diff(p0.matrix()) < 1e-15);
    }

    #[test]
    fn support_formula_examples() {
        let d = diag_state(&[0.5, 0.5, 0.0]);
        let q = rank2_support(&d).unwrap();
        let expected = HermitianMatrix::diagonal(&[1.0, 1.0, 0.0]);
        assert!(q.matrix().max_abs_diff(expected.matrix()) < 1e-12);

        let d = diag_state(&[0.75, 0.25]);
        let q = rank2_support(&d).unwrap();
        assert!(q.matrix().max_abs_diff(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn support_formula_matches_spectral_support() {
        let mut rng = Rng::new(31);
        for trial in 0..30 {
            let dim = 3 + trial % 3;
            let t = Transposition::new(dim, 0, 1).unwrap();
            let mu = 0.3 + 0.4 * rng.uniform();
            let d = random_symmetric_rank2(&mut rng, dim, &t, mu);
            let q = rank2_support(&d).unwrap();
            let spectral = d.support_projector(tol::RANK_TOL);
            assert!(
                q.matrix().max_abs_diff(spectral.matrix()) < 1e-9,
                "trial {trial}"
            );
        }
    }

    #[test]
    fn support_rejects_wrong_rank_and_pure_states() {
        assert!(matches!(
            rank2_support(&diag_state(&[0.5, 0.3, 0.2])),
            Err(Error::RankMismatch { .. })
        ));
        assert!(matches!(
            rank2_support(&PureState::basis(2, 0).density()),
            Err(Error::RankMismatch { .. })
        ));
    }

    #[test]
    fn pauli_frame_explicit_example() {
        // Q = diag(1,1,0), swap (0,1): y = √(1·1 − 0) = 1 from the formula,
        // σ₁ = diag(1,−1,0), σ₃ the off-diagonal swap block
        let q = HermitianMatrix::diagonal(&[1.0, 1.0, 0.0]);
        let t = Transposition::new(3, 0, 1).unwrap();
        let (sigma1, sigma3) = pauli_frame(&q, &t).unwrap();
        let expected1 = HermitianMatrix::diagonal(&[1.0, -1.0, 0.0]);
        assert!(sigma1.matrix().max_abs_diff(expected1.matrix()) < 1e-12);
        let expected3 =
            HermitianMatrix::from_real(3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(sigma3.matrix().max_abs_diff(expected3.matrix()) < 1e-12);
    }

    #[test]
    fn pauli_frame_algebra() {
        let mut rng = Rng::new(47);
        for trial in 0..25 {
            let dim = 3 + trial % 4;
            let t = Transposition::new(dim, trial % 2, 2 + trial % (dim - 2)).unwrap();
            let mu = 0.25 + 0.5 * rng.uniform();
            let d = random_symmetric_rank2(&mut rng, dim, &t, mu);
            let q = rank2_support(&d).unwrap();
            let (sigma1, sigma3) = pauli_frame(&q, &t).unwrap();
            // involutions on the support
            assert!(
                sigma1
                    .matrix()
                    .mul(sigma1.matrix())
                    .max_abs_diff(q.matrix())
                    < 1e-10
            );
            assert!(
                sigma3
                    .matrix()
                    .mul(sigma3.matrix())
                    .max_abs_diff(q.matrix())
                    < 1e-10
            );
            // anticommutation, both with U and with each other
            let anti = sigma1
                .matrix()
                .mul(t.unitary())
                .add(&t.unitary().mul(sigma1.matrix()));
            assert!(anti.max_abs() < 1e-10);
            let anti = sigma1
                .matrix()
                .mul(sigma3.matrix())
                .add(&sigma3.matrix().mul(sigma1.matrix()));
            assert!(anti.max_abs() < 1e-10);
            // anticommuting involutions are trace-orthogonal
            assert!(sigma1.trace_product(&sigma3).abs() < 1e-10);
        }
    }

    #[test]
    fn pauli_frame_degenerate_when_action_is_trivial() {
        // support spanned by the symmetric vector (e₀+e₁)/√2 and e₂: U acts
        // as the identity there
        let sym = PureState::from_real(&[1.0, 1.0, 0.0]).unwrap();
        let m = CMatrix::outer(sym.amplitudes())
            .scale(0.6)
            .add(&CMatrix::outer(PureState::basis(3, 2).amplitudes()).scale(0.4));
        let d = DensityMatrix::from_matrix(m).unwrap();
        let q = rank2_support(&d).unwrap();
        let t = Transposition::new(3, 0, 1).unwrap();
        assert!(matches!(
            pauli_frame(&q, &t),
            Err(Error::DegenerateFrame { .. })
        ));
    }

    #[test]
    fn roof_of_half_mixed_pair() {
        // D = (P₀+P₁)/2 in d = 3: x₁y/2 = 1/2, R = 0, H = ln 2
        let d = diag_state(&[0.5, 0.5, 0.0]);
        let t = Transposition::new(3, 0, 1).unwrap();
        let sol = rank2_roof(&d, &t).unwrap();
        assert!(sol.r_value.abs() < 1e-12);
        assert!((sol.h_value - LN_2).abs() < 1e-12);
        assert!((sol.x3).abs() < 1e-12);
        assert!((sol.x1 - 1.0).abs() < 1e-12);
        // optimal pair must be the basis states
        let p0 = PureState::basis(3, 0);
        let p1 = PureState::basis(3, 1);
        let (a, b) = &sol.optimal_pair;
        let direct = a.trace_distance(&p0).max(b.trace_distance(&p1));
        let crossed = a.trace_distance(&p1).max(b.trace_distance(&p0));
        assert!(direct.min(crossed) < 1e-8);
    }

    #[test]
    fn roof_matches_projected_state_for_qubits() {
        // d = 2: averaging ψ = (cos π/8, sin π/8) with its swap gives a state
        // whose roof is S̃(ψ), with x₁y = cos π/4
        let c = (std::f64::consts::PI / 8.0).cos();
        let s = (std::f64::consts::PI / 8.0).sin();
        let psi = PureState::from_real(&[c, s]).unwrap();
        let t = Transposition::new(2, 0, 1).unwrap();
        let swapped = t.transform_state(&psi);
        let m = CMatrix::outer(psi.amplitudes())
            .add(&CMatrix::outer(swapped.amplitudes()))
            .scale(0.5);
        let d = DensityMatrix::from_matrix(m).unwrap();
        let sol = rank2_roof(&d, &t).unwrap();
        assert!((sol.x1 * sol.y - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((sol.r_value - 0.4164955306996875).abs() < 1e-12);
        assert!((sol.r_value - tilde_entropy_pure(&psi)).abs() < 1e-12);
    }

    #[test]
    fn roof_invariants_on_random_instances() {
        let mut rng = Rng::new(61);
        for trial in 0..40 {
            let dim = 2 + trial % 5;
            let t = if dim == 2 {
                Transposition::new(2, 0, 1).unwrap()
            } else {
                Transposition::new(dim, trial % 2, 2 + trial % (dim - 2)).unwrap()
            };
            let mu = 0.2 + 0.6 * rng.uniform();
            let d = random_symmetric_rank2(&mut rng, dim, &t, mu);
            let sol = rank2_roof(&d, &t).unwrap();
            let (i, j) = t.indices();

            // Bloch coefficients: x₃² = 2TrD² − 1 and x₁² + x₃² = 1
            assert!((sol.x3 * sol.x3 - (2.0 * d.purity() - 1.0)).abs() < 1e-10);
            assert!((sol.x1 * sol.x1 + sol.x3 * sol.x3 - 1.0).abs() < 1e-10);

            // both members pure, swapped by U, mixing back to D
            let (rho_a, rho_b) = &sol.optimal_pair;
            let swapped = t.transform_state(rho_a);
            let swap_dev = swapped
                .projector()
                .matrix()
                .max_abs_diff(rho_b.projector().matrix());
            assert!(swap_dev < 1e-10, "swap covariance deviation {swap_dev}");
            let mixed = CMatrix::outer(rho_a.amplitudes())
                .add(&CMatrix::outer(rho_b.amplitudes()))
                .scale(0.5);
            assert!(mixed.max_abs_diff(d.matrix().matrix()) < 1e-10);

            // the pair members are genuinely pure as projectors
            let proj = CMatrix::outer(rho_a.amplitudes());
            assert!(proj.mul(&proj).max_abs_diff(&proj) < 1e-9);

            // diagonal identities: untouched entries agree, swapped pair
            // entries sum to 2·TrPᵢD
            let d_rho = rho_a.projector();
            for k in 0..dim {
                if k != i && k != j {
                    assert!((d_rho.entry(k, k).re - d.entry(k, k).re).abs() < 1e-10);
                }
            }
            let pair_sum = d_rho.entry(i, i).re + d_rho.entry(j, j).re;
            assert!((pair_sum - 2.0 * d.entry(i, i).re).abs() < 1e-10);

            // H = S̃ − R and the pair attains R
            assert!((sol.h_value - (tilde_entropy(&d) - sol.r_value)).abs() < 1e-10);
            let attained =
                0.5 * tilde_entropy_pure(rho_a) + 0.5 * tilde_entropy_pure(rho_b);
            assert!((attained - sol.r_value).abs() < 1e-10);
        }
    }

    #[test]
    fn roof_rejects_asymmetric_states() {
        let d = diag_state(&[0.6, 0.0, 0.4]);
        let t = Transposition::new(3, 0, 1).unwrap();
        assert!(matches!(
            rank2_roof(&d, &t),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn lemma6_examples() {
        // commuting, non-trivially rotated, pair optimal
        let d = diag_state(&[0.5, 0.5, 0.0]);
        let t = Transposition::new(3, 0, 1).unwrap();
        assert!(lemma6_applicable(&d, &t, 1000, 7).unwrap());

        // [D, U] ≠ 0
        let d = diag_state(&[0.5, 0.0, 0.5]);
        assert!(!lemma6_applicable(&d, &t, 1000, 7).unwrap());

        // support inside the symmetric subspace of U: trivial action
        let sym = PureState::from_real(&[1.0, 1.0, 0.0]).unwrap();
        let m = CMatrix::outer(sym.amplitudes())
            .scale(0.6)
            .add(&CMatrix::outer(PureState::basis(3, 2).amplitudes()).scale(0.4));
        let d = DensityMatrix::from_matrix(m).unwrap();
        assert!(!lemma6_applicable(&d, &t, 1000, 7).unwrap());

        // wrong rank errors out
        assert!(matches!(
            lemma6_applicable(&DensityMatrix::maximally_mixed(3), &t, 1000, 7),
            Err(Error::RankMismatch { .. })
        ));
    }
}
