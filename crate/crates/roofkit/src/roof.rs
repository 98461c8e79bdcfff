//! Convex roof `R`, concave roof, subalgebra entropy `H = S̃ − R`, and the
//! ensemble-space optimization behind them.
//!
//! Decompositions of a rank-`k` state are parameterized by `m×k` isometries
//! over its eigen-ensemble: `u_j = Σ_i W_ji √λ_i v_i` yields weights
//! `p_j = ‖u_j‖²` and states `u_j/‖u_j‖`, and every length-`m` decomposition
//! arises this way. The optimizer is a multistart projected gradient descent
//! on the isometry manifold with QR retraction, small random escape moves,
//! and a consolidation pass that merges duplicate states so returned
//! ensembles respect the rank² length bound.
//!
//! Restarts run on independent derived seeds and may execute in parallel;
//! the best-of merge is by restart index, so results are bit-identical for a
//! fixed seed under any thread count.

use crate::error::{Error, Result};
use crate::hermitian::{DensityMatrix, HermitianMatrix, PureState};
use crate::mat::CMatrix;
use crate::parallel;
use crate::rng::Rng;
use crate::subalgebra::{entropy_term_clamped, tilde_entropy, tilde_entropy_pure};
use crate::tol;
use num_complex::Complex64;

/// Explicit optimizer configuration; there is no global mutable state.
#[derive(Clone, Debug)]
pub struct OptimizerConfig {
    pub seed: u64,
    /// Number of starts. Start 0 is the eigen-ensemble, start 1 a fixed
    /// mixing frame, the rest are random isometries.
    pub restarts: usize,
    pub max_iters: usize,
    /// Ensemble length m for random starts; `None` means d². Clamped to
    /// [rank, d²].
    pub ensemble_len: Option<usize>,
    pub weight_floor: f64,
    /// Convergence: improvement below this for `conv_window` accepted steps.
    pub conv_tol: f64,
    pub conv_window: usize,
    /// Random perturbation kicks after convergence, per restart.
    pub escape_moves: usize,
    /// Restrict the search to real isometries (for real states).
    pub real_only: bool,
    /// Worker threads for restarts; 0 = all available.
    pub threads: usize,
    pub rank_tol: f64,
    /// Restarts within this of the best contribute states to a facet.
    pub cluster_tol: f64,
    /// Facet states closer than this in trace distance are deduplicated.
    pub state_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            seed: 1,
            restarts: 32,
            max_iters: 2000,
            ensemble_len: None,
            weight_floor: tol::WEIGHT_FLOOR,
            conv_tol: 1e-10,
            conv_window: 50,
            escape_moves: 3,
            real_only: false,
            threads: 1,
            rank_tol: tol::RANK_TOL,
            cluster_tol: tol::CLUSTER_TOL,
            state_tol: tol::STATE_TOL,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iters(mut self, iters: usize) -> Self {
        self.max_iters = iters;
        self
    }

    pub fn with_ensemble_len(mut self, m: usize) -> Self {
        self.ensemble_len = Some(m);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_real_only(mut self, real_only: bool) -> Self {
        self.real_only = real_only;
        self
    }
}

/// Convex decomposition of a target state into weighted pure states.
///
/// Construction validates the length cap m ≤ d², the weight floor, and that
/// the mixture reproduces the declared target. Weights are renormalized to
/// sum to one exactly.
#[derive(Clone, Debug)]
pub struct Ensemble {
    weights: Vec<f64>,
    states: Vec<PureState>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, states: Vec<PureState>, target: &DensityMatrix) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(Error::InvalidEnsemble {
                reason: format!(
                    "{} weights vs {} states",
                    weights.len(),
                    states.len()
                ),
            });
        }
        let d = target.dim();
        if weights.len() > d * d {
            return Err(Error::InvalidEnsemble {
                reason: format!("length {} exceeds d² = {}", weights.len(), d * d),
            });
        }
        for s in &states {
            if s.dim() != d {
                return Err(Error::DimensionMismatch {
                    left: s.dim(),
                    right: d,
                });
            }
        }
        if let Some(&w) = weights.iter().find(|&&w| w < tol::WEIGHT_FLOOR) {
            return Err(Error::InvalidEnsemble {
                reason: format!("weight {w:.3e} below floor {:.1e}", tol::WEIGHT_FLOOR),
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidEnsemble {
                reason: format!("weights sum to {total}"),
            });
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let ensemble = Ensemble { weights, states };
        let deviation = ensemble
            .mix_matrix()
            .max_abs_diff(target.matrix().matrix());
        if deviation > tol::MIX_TOL {
            return Err(Error::InvalidEnsemble {
                reason: format!("mixture misses the target by {deviation:.3e}"),
            });
        }
        Ok(ensemble)
    }

    /// Trivial decomposition of a pure state.
    pub fn singleton(state: PureState) -> Self {
        Ensemble {
            weights: vec![1.0],
            states: vec![state],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    fn mix_matrix(&self) -> CMatrix {
        let d = self.states[0].dim();
        let mut out = CMatrix::zeros(d, d);
        for (w, s) in self.weights.iter().zip(&self.states) {
            out = out.add(&CMatrix::outer(s.amplitudes()).scale(*w));
        }
        out.hermitized()
    }

    /// Σ pⱼ |ψⱼ⟩⟨ψⱼ|.
    pub fn mix(&self) -> DensityMatrix {
        DensityMatrix::from_matrix(self.mix_matrix())
            .expect("mixture of pure states is a valid state")
    }

    /// Σ pⱼ S̃(ψⱼ), the roof objective of this decomposition.
    pub fn objective(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.states)
            .map(|(w, s)| w * tilde_entropy_pure(s))
            .sum()
    }
}

/// Outcome of a roof optimization.
#[derive(Clone, Debug)]
pub struct RoofResult {
    /// The roof estimate; always attained by `ensemble`.
    pub value: f64,
    pub ensemble: Ensemble,
    pub converged: bool,
    pub restarts_used: usize,
    /// Running best across restarts: non-increasing for the convex roof,
    /// non-decreasing for the concave roof.
    pub objective_history: Vec<f64>,
}

/// Hermitian operator A whose expectation supports the convex roof from
/// below: Tr(Aρ) ≤ S̃(ρ) on pure states.
#[derive(Clone, Debug)]
pub struct SupportFunctional {
    operator: HermitianMatrix,
}

impl SupportFunctional {
    pub fn new(operator: HermitianMatrix) -> Self {
        SupportFunctional { operator }
    }

    pub fn zero(dim: usize) -> Self {
        SupportFunctional {
            operator: HermitianMatrix::diagonal(&vec![0.0; dim]),
        }
    }

    pub fn operator(&self) -> &HermitianMatrix {
        &self.operator
    }

    pub fn expectation_pure(&self, state: &PureState) -> f64 {
        self.operator.expectation(state)
    }

    pub fn expectation(&self, state: &DensityMatrix) -> f64 {
        self.operator.trace_product(state.matrix())
    }
}

/// Report from sampling a support functional against pure states.
#[derive(Clone, Debug)]
pub struct SupportCheck {
    pub samples: usize,
    pub seed: u64,
    /// max over samples of Tr(Aρ) − S̃(ρ); ≤ tolerance means A stays below.
    pub max_violation: f64,
    /// Samples violating the bound by more than 1e-8.
    pub violations: usize,
    pub expectation_at_target: f64,
    pub roof_at_target: Option<f64>,
    /// Whether Tr(AD) matches the supplied roof value within `match_tol`.
    pub supports_at_target: Option<bool>,
}

/// Sample `samples` seeded pure states and report the worst violation of
/// Tr(Aρ) ≤ S̃(ρ); when a roof value at `target` is supplied, also report
/// whether A touches it there.
pub fn check_support_functional(
    functional: &SupportFunctional,
    target: &DensityMatrix,
    samples: usize,
    seed: u64,
    roof_at_target: Option<f64>,
    match_tol: f64,
) -> SupportCheck {
    let d = target.dim();
    let mut rng = Rng::new(seed);
    let mut max_violation = f64::NEG_INFINITY;
    let mut violations = 0;
    for _ in 0..samples {
        let v: Vec<Complex64> = (0..d).map(|_| rng.complex_normal()).collect();
        let psi = PureState::from_unnormalized(v).expect("gaussian vector is nonzero");
        let gap = functional.expectation_pure(&psi) - tilde_entropy_pure(&psi);
        if gap > 1e-8 {
            violations += 1;
        }
        max_violation = max_violation.max(gap);
    }
    let expectation_at_target = functional.expectation(target);
    let supports_at_target =
        roof_at_target.map(|r| (expectation_at_target - r).abs() <= match_tol);
    SupportCheck {
        samples,
        seed,
        max_violation,
        violations,
        expectation_at_target,
        roof_at_target,
        supports_at_target,
    }
}

/// Pure states that appear in optimal decompositions of a state, with any
/// supporting functionals known to achieve equality there.
#[derive(Clone, Debug)]
pub struct Facet {
    generators: Vec<PureState>,
    supports: Vec<SupportFunctional>,
}

impl Facet {
    pub fn generators(&self) -> &[PureState] {
        &self.generators
    }

    pub fn size(&self) -> usize {
        self.generators.len()
    }

    pub fn supports(&self) -> &[SupportFunctional] {
        &self.supports
    }

    pub fn attach_support(&mut self, functional: SupportFunctional) {
        self.supports.push(functional);
    }
}

// ---------------------------------------------------------------------------
// Schrödinger-mixture machinery
// ---------------------------------------------------------------------------

/// Eigen-frame of the target restricted to its support: everything needed to
/// map isometries to decompositions.
struct Frame {
    dim: usize,
    rank: usize,
    /// k×d, row i = √λᵢ · vᵢ; decompositions are rows of W·rows.
    rows: CMatrix,
    /// d×k eigenvector columns, for projecting ensembles back to isometries.
    vectors: CMatrix,
    sqrt_eigenvalues: Vec<f64>,
}

impl Frame {
    fn new(d: &DensityMatrix, rank_tol: f64) -> Frame {
        let dim = d.dim();
        let keep: Vec<usize> = (0..dim)
            .filter(|&i| d.eigenvalues()[i] > rank_tol)
            .collect();
        let rank = keep.len();
        let mut rows = CMatrix::zeros(rank, dim);
        let mut vectors = CMatrix::zeros(dim, rank);
        let mut sqrt_eigenvalues = Vec::with_capacity(rank);
        for (i, &idx) in keep.iter().enumerate() {
            let root = d.eigenvalues()[idx].sqrt();
            sqrt_eigenvalues.push(root);
            for a in 0..dim {
                let component = d.eigenvectors()[(a, idx)];
                rows[(i, a)] = component * root;
                vectors[(a, i)] = component;
            }
        }
        Frame {
            dim,
            rank,
            rows,
            vectors,
            sqrt_eigenvalues,
        }
    }
}

/// Σⱼ pⱼ S̃(ψⱼ) written in the unnormalized rows u of W·frame.rows:
/// Σⱼₐ s(|uⱼₐ|²) − Σⱼ s(pⱼ). Smooth in W away from vanishing entries.
fn rows_objective(u: &CMatrix) -> f64 {
    let mut total = 0.0;
    for j in 0..u.rows() {
        let mut p = 0.0;
        let mut entry_sum = 0.0;
        for z in u.row(j) {
            let x = z.norm_sqr();
            p += x;
            entry_sum += entropy_term_clamped(x);
        }
        total += entry_sum - entropy_term_clamped(p.min(1.0));
    }
    total
}

/// Wirtinger gradient of the objective with respect to conj(W). The log
/// factor is clamped where |ψⱼₐ|² drops below 1e-12: the descent direction
/// is preserved without the unbounded slope of s at zero.
fn rows_gradient_w(u: &CMatrix, frame: &Frame) -> CMatrix {
    let mut g = CMatrix::zeros(u.rows(), u.cols());
    for j in 0..u.rows() {
        let p: f64 = u.row(j).iter().map(|z| z.norm_sqr()).sum();
        if p < 1e-300 {
            continue;
        }
        for a in 0..u.cols() {
            let z = u[(j, a)];
            let ratio = (z.norm_sqr() / p).max(1e-12);
            g[(j, a)] = z * (-ratio.ln());
        }
    }
    g.mul(&frame.rows.adjoint())
}

/// Tangent projection on the isometry manifold: G − W·herm(W†G).
fn tangent_project(w: &CMatrix, g: &CMatrix) -> CMatrix {
    let wg = w.adjoint().mul(g);
    let herm = wg.add(&wg.adjoint()).scale(0.5);
    g.sub(&w.mul(&herm))
}

/// Thin QR orthonormalization (modified Gram-Schmidt with reorthogonalization)
/// with positive real diagonal, used as the retraction.
fn qr_orthonormalize(mut y: CMatrix) -> CMatrix {
    let (m, k) = (y.rows(), y.cols());
    for j in 0..k {
        for _pass in 0..2 {
            for prev in 0..j {
                let mut proj = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    proj += y[(i, prev)].conj() * y[(i, j)];
                }
                for i in 0..m {
                    let correction = proj * y[(i, prev)];
                    y[(i, j)] -= correction;
                }
            }
        }
        let norm: f64 = (0..m).map(|i| y[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-14 {
            // degenerate column: replace by the first basis vector orthogonal
            // to the columns already fixed
            for cand in 0..m {
                for i in 0..m {
                    y[(i, j)] = Complex64::new(0.0, 0.0);
                }
                y[(cand, j)] = Complex64::new(1.0, 0.0);
                for prev in 0..j {
                    let mut proj = Complex64::new(0.0, 0.0);
                    for i in 0..m {
                        proj += y[(i, prev)].conj() * y[(i, j)];
                    }
                    for i in 0..m {
                        let correction = proj * y[(i, prev)];
                        y[(i, j)] -= correction;
                    }
                }
                let n2: f64 = (0..m).map(|i| y[(i, j)].norm_sqr()).sum();
                if n2 > 0.5 {
                    break;
                }
            }
        }
        let norm: f64 = (0..m).map(|i| y[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        let inv = 1.0 / norm;
        for i in 0..m {
            y[(i, j)] *= inv;
        }
    }
    y
}

/// W(W†W)^{-1/2}; errors when the columns do not span a rank-k frame.
fn polar_orthonormalize(w: &CMatrix) -> Result<CMatrix> {
    let gram = HermitianMatrix::new(w.adjoint().mul(w))
        .expect("W†W is Hermitian by construction");
    let eig = gram.eigh();
    let smallest = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if smallest < 1e-12 {
        return Err(Error::NotIsometry {
            deviation: 1.0 - smallest,
        });
    }
    let inv_roots: Vec<f64> = eig.eigenvalues.iter().map(|&v| 1.0 / v.sqrt()).collect();
    let correction = eig.assemble(&inv_roots);
    Ok(w.mul(correction.matrix()))
}

fn random_isometry(rng: &mut Rng, m: usize, k: usize, real_only: bool) -> CMatrix {
    let y = CMatrix::from_fn(m, k, |_, _| {
        if real_only {
            Complex64::new(rng.normal(), 0.0)
        } else {
            rng.complex_normal()
        }
    });
    qr_orthonormalize(y)
}

/// Deterministic k×k mixing start: the Fourier frame, or an orthonormalized
/// cosine frame when restricted to real entries.
fn mixer_start(k: usize, real_only: bool) -> CMatrix {
    if real_only {
        let y = CMatrix::from_fn(k, k, |i, j| {
            Complex64::new((((i + 1) * (j + 1)) as f64).cos() + if i == j { 1e-3 } else { 0.0 }, 0.0)
        });
        qr_orthonormalize(y)
    } else {
        let scale = 1.0 / (k as f64).sqrt();
        CMatrix::from_fn(k, k, |i, j| {
            let angle = std::f64::consts::TAU * (i * j) as f64 / k as f64;
            Complex64::new(angle.cos() * scale, angle.sin() * scale)
        })
    }
}

struct Descent<'a> {
    frame: &'a Frame,
    /// +1 minimizes the objective (convex roof), −1 maximizes (concave roof).
    sign: f64,
    real_only: bool,
}

impl Descent<'_> {
    fn signed_objective(&self, u: &CMatrix) -> f64 {
        self.sign * rows_objective(u)
    }

    fn signed_gradient(&self, u: &CMatrix) -> CMatrix {
        let mut g = rows_gradient_w(u, self.frame).scale(self.sign);
        if self.real_only {
            g = CMatrix::from_fn(g.rows(), g.cols(), |i, j| Complex64::new(g[(i, j)].re, 0.0));
        }
        g
    }

    /// Projected gradient descent with backtracking line search. Returns the
    /// final frame, the signed objective, and whether the convergence
    /// criterion (rather than the iteration cap) ended the run.
    fn run(
        &self,
        w0: CMatrix,
        max_iters: usize,
        conv_tol: f64,
        conv_window: usize,
    ) -> Result<(CMatrix, f64, bool)> {
        let mut w = w0;
        let mut u = w.mul(&self.frame.rows);
        let mut value = self.signed_objective(&u);
        let mut eta: f64 = 0.25;
        let mut quiet = 0usize;
        let mut converged = false;
        for _ in 0..max_iters {
            let g = self.signed_gradient(&u);
            let t = tangent_project(&w, &g);
            let t_norm_sqr = t.frobenius_sqr();
            if t_norm_sqr < 1e-28 {
                converged = true;
                break;
            }
            eta = (eta * 2.0).min(1.0);
            let mut accepted = false;
            while eta > 1e-16 {
                let trial = qr_orthonormalize(w.sub(&t.scale(eta)));
                let u_trial = trial.mul(&self.frame.rows);
                let v_trial = self.signed_objective(&u_trial);
                if v_trial <= value - 1e-4 * eta * t_norm_sqr {
                    if v_trial > value + 1e-6 {
                        return Err(Error::OptimizerDiverged {
                            increase: v_trial - value,
                        });
                    }
                    let improvement = value - v_trial;
                    w = trial;
                    u = u_trial;
                    value = v_trial;
                    accepted = true;
                    if improvement < conv_tol {
                        quiet += 1;
                    } else {
                        quiet = 0;
                    }
                    break;
                }
                eta *= 0.5;
            }
            if !accepted {
                converged = true;
                break;
            }
            if quiet >= conv_window {
                converged = true;
                break;
            }
        }
        Ok((w, value, converged))
    }

    /// Descent plus small random perturbation kicks to escape shallow basins.
    fn run_with_escapes(
        &self,
        w0: CMatrix,
        cfg: &OptimizerConfig,
        rng: &mut Rng,
    ) -> Result<(CMatrix, f64, bool)> {
        let (mut w, mut value, mut converged) =
            self.run(w0, cfg.max_iters, cfg.conv_tol, cfg.conv_window)?;
        for _ in 0..cfg.escape_moves {
            let kick = CMatrix::from_fn(w.rows(), w.cols(), |_, _| {
                let z = if self.real_only {
                    Complex64::new(rng.normal(), 0.0)
                } else {
                    rng.complex_normal()
                };
                z * 0.05
            });
            let start = qr_orthonormalize(w.add(&tangent_project(&w, &kick)));
            let (w2, v2, c2) = self.run(start, cfg.max_iters, cfg.conv_tol, cfg.conv_window)?;
            if v2 < value {
                w = w2;
                value = v2;
                converged = c2;
            }
        }
        Ok((w, value, converged))
    }
}

// ---------------------------------------------------------------------------
// Ensemble extraction and consolidation
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct WeightedState {
    weight: f64,
    state: PureState,
}

fn rows_to_pairs(u: &CMatrix, drop_below: f64) -> Vec<WeightedState> {
    let mut pairs = Vec::with_capacity(u.rows());
    for j in 0..u.rows() {
        let p: f64 = u.row(j).iter().map(|z| z.norm_sqr()).sum();
        if p < drop_below {
            continue;
        }
        let state = PureState::from_unnormalized(u.row(j).to_vec())
            .expect("row with positive weight is nonzero");
        pairs.push(WeightedState { weight: p, state });
    }
    let total: f64 = pairs.iter().map(|p| p.weight).sum();
    for p in pairs.iter_mut() {
        p.weight /= total;
    }
    pairs
}

/// Merge states closer than `merge_tol` in trace distance; each cluster is
/// replaced by the top eigenvector of its weighted mixture.
fn merge_close_states(pairs: &[WeightedState], merge_tol: f64) -> Vec<WeightedState> {
    let n = pairs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    let fid_threshold = 1.0 - merge_tol * merge_tol;
    for i in 0..n {
        for j in (i + 1)..n {
            if pairs[i].state.fidelity(&pairs[j].state) >= fid_threshold {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut cluster_of = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if cluster_of[root] == usize::MAX {
            cluster_of[root] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[cluster_of[root]].push(i);
    }
    clusters
        .into_iter()
        .map(|members| {
            let weight: f64 = members.iter().map(|&i| pairs[i].weight).sum();
            if members.len() == 1 {
                return WeightedState {
                    weight,
                    state: pairs[members[0]].state.clone(),
                };
            }
            let dim = pairs[members[0]].state.dim();
            let mut mixture = CMatrix::zeros(dim, dim);
            for &i in &members {
                mixture = mixture.add(
                    &CMatrix::outer(pairs[i].state.amplitudes()).scale(pairs[i].weight / weight),
                );
            }
            let eig = HermitianMatrix::new(mixture.hermitized())
                .expect("cluster mixture is Hermitian")
                .eigh();
            let top = eig.eigenvectors.column(dim - 1);
            WeightedState {
                weight,
                state: PureState::from_unnormalized(top).expect("top eigenvector is unit"),
            }
        })
        .collect()
}

/// Drop weights below the floor (keeping at least `min_len` states) and
/// renormalize.
fn prune_weights(mut pairs: Vec<WeightedState>, floor: f64, min_len: usize) -> Vec<WeightedState> {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| pairs[b].weight.total_cmp(&pairs[a].weight));
    let keep: Vec<bool> = {
        let mut keep = vec![false; pairs.len()];
        for (rank, &idx) in order.iter().enumerate() {
            keep[idx] = rank < min_len || pairs[idx].weight >= floor;
        }
        keep
    };
    let mut kept: Vec<WeightedState> = Vec::new();
    for (i, pair) in pairs.drain(..).enumerate() {
        if keep[i] {
            kept.push(pair);
        }
    }
    let total: f64 = kept.iter().map(|p| p.weight).sum();
    for p in kept.iter_mut() {
        p.weight /= total;
    }
    kept
}

/// Project a weighted ensemble back onto an exact isometry over the frame.
fn isometry_from_pairs(frame: &Frame, pairs: &[WeightedState]) -> Result<CMatrix> {
    let m = pairs.len();
    let k = frame.rank;
    let mut w = CMatrix::zeros(m, k);
    for (c, pair) in pairs.iter().enumerate() {
        let root = pair.weight.sqrt();
        for i in 0..k {
            let mut coeff = Complex64::new(0.0, 0.0);
            for a in 0..frame.dim {
                coeff += frame.vectors[(a, i)].conj() * pair.state.amplitudes()[a];
            }
            w[(c, i)] = coeff * root / frame.sqrt_eigenvalues[i];
        }
    }
    polar_orthonormalize(&w)
}

/// Merge duplicates, prune structural zeros, repair to an exact isometry,
/// and polish. Guarantees the returned ensemble mixes exactly to the target
/// and respects the weight floor.
fn consolidate(
    frame: &Frame,
    target: &DensityMatrix,
    descent: &Descent,
    w: &CMatrix,
    cfg: &OptimizerConfig,
    merge_tol: f64,
) -> Result<(Ensemble, f64, bool)> {
    let polish_tol = cfg.conv_tol.min(1e-13);
    let mut pairs = rows_to_pairs(&w.mul(&frame.rows), 1e-12);
    let mut converged = true;
    for _round in 0..5 {
        let merged = merge_close_states(&pairs, merge_tol);
        let pruned = prune_weights(merged, 2.0 * cfg.weight_floor, frame.rank);
        let stable = pruned.len() == pairs.len();
        let repaired = isometry_from_pairs(frame, &pruned)?;
        let (w2, _, conv) = descent.run(repaired, 1500, polish_tol, 40)?;
        converged = conv;
        pairs = rows_to_pairs(&w2.mul(&frame.rows), 1e-12);
        let floor_ok = pairs.iter().all(|p| p.weight >= cfg.weight_floor);
        let separated = {
            let mut ok = true;
            'outer: for i in 0..pairs.len() {
                for j in (i + 1)..pairs.len() {
                    if pairs[i].state.fidelity(&pairs[j].state) >= 1.0 - merge_tol * merge_tol {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            ok
        };
        if stable && floor_ok && separated {
            break;
        }
    }
    let weights: Vec<f64> = pairs.iter().map(|p| p.weight).collect();
    let states: Vec<PureState> = pairs.iter().map(|p| p.state.clone()).collect();
    let ensemble = Ensemble::new(weights, states, target)?;
    let value = ensemble.objective();
    Ok((ensemble, value, converged))
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Ensemble reachable from an isometry over the eigen-ensemble of `target`:
/// weights `‖uⱼ‖²` and states `uⱼ/‖uⱼ‖` with `uⱼ = Σᵢ Wⱼᵢ √λᵢ vᵢ`. Entries
/// below the weight floor are dropped with renormalization.
pub fn ensembles_from_isometry(target: &DensityMatrix, w: &CMatrix) -> Result<Ensemble> {
    let frame = Frame::new(target, tol::RANK_TOL);
    let d = target.dim();
    if w.cols() != frame.rank {
        return Err(Error::DimensionMismatch {
            left: w.cols(),
            right: frame.rank,
        });
    }
    if w.rows() < w.cols() || w.rows() > d * d {
        return Err(Error::InvalidEnsemble {
            reason: format!("isometry has {} rows for rank {}, d² = {}", w.rows(), frame.rank, d * d),
        });
    }
    let gram = w.adjoint().mul(w);
    let deviation = gram.max_abs_diff(&CMatrix::identity(w.cols()));
    if deviation > tol::ISOMETRY_TOL {
        return Err(Error::NotIsometry { deviation });
    }
    let pairs = rows_to_pairs(&w.mul(&frame.rows), tol::WEIGHT_FLOOR);
    Ensemble::new(
        pairs.iter().map(|p| p.weight).collect(),
        pairs.iter().map(|p| p.state.clone()).collect(),
        target,
    )
}

struct StartOutcome {
    signed_value: f64,
    w: CMatrix,
    converged: bool,
}

fn multistart(
    target: &DensityMatrix,
    cfg: &OptimizerConfig,
    sign: f64,
) -> Result<(Frame, Vec<StartOutcome>)> {
    let frame = Frame::new(target, cfg.rank_tol);
    let k = frame.rank;
    let d = frame.dim;
    let m_random = cfg
        .ensemble_len
        .unwrap_or(d * d)
        .clamp(k, d * d);
    let n = cfg.restarts.max(1);
    let root = Rng::new(cfg.seed);
    let descent = Descent {
        frame: &frame,
        sign,
        real_only: cfg.real_only,
    };
    let outcomes: Vec<Result<StartOutcome>> = parallel::map_indexed(n, cfg.threads, |i| {
        let mut rng = root.derive(0x726f_6f66 ^ (i as u64) << 8);
        let w0 = match i {
            0 => CMatrix::identity(k),
            1 => mixer_start(k, cfg.real_only),
            _ => random_isometry(&mut rng, m_random, k, cfg.real_only),
        };
        let (w, signed_value, converged) = descent.run_with_escapes(w0, cfg, &mut rng)?;
        Ok(StartOutcome {
            signed_value,
            w,
            converged,
        })
    });
    let mut collected = Vec::with_capacity(n);
    for outcome in outcomes {
        collected.push(outcome?);
    }
    Ok((frame, collected))
}

fn roof_result(
    target: &DensityMatrix,
    cfg: &OptimizerConfig,
    sign: f64,
) -> Result<RoofResult> {
    let frame = Frame::new(target, cfg.rank_tol);
    if frame.rank <= 1 {
        // A rank-one state admits only the trivial decomposition.
        let state = PureState::from_unnormalized(frame.vectors.column(0))
            .expect("support eigenvector is a unit vector");
        let value = tilde_entropy_pure(&state);
        return Ok(RoofResult {
            value,
            ensemble: Ensemble::singleton(state),
            converged: true,
            restarts_used: 0,
            objective_history: vec![value],
        });
    }
    let (frame, outcomes) = multistart(target, cfg, sign)?;
    let mut history = Vec::with_capacity(outcomes.len());
    let mut best_idx = 0;
    let mut best = f64::INFINITY;
    for (i, outcome) in outcomes.iter().enumerate() {
        if outcome.signed_value < best {
            best = outcome.signed_value;
            best_idx = i;
        }
        history.push(sign * best);
    }
    let descent = Descent {
        frame: &frame,
        sign,
        real_only: cfg.real_only,
    };
    let mut merge_tol = 1e-4;
    let mut last_err = None;
    for _attempt in 0..3 {
        match consolidate(&frame, target, &descent, &outcomes[best_idx].w, cfg, merge_tol) {
            Ok((ensemble, value, polished)) => {
                let regression = sign * value - best;
                if regression > 1e-6 {
                    // merging destroyed the optimum; retry more cautiously
                    last_err = Some(Error::OptimizerDiverged {
                        increase: regression,
                    });
                    merge_tol *= 1e-2;
                    continue;
                }
                if sign * value < best - 1e-12 {
                    history.push(value);
                }
                return Ok(RoofResult {
                    value,
                    ensemble,
                    converged: outcomes[best_idx].converged && polished,
                    restarts_used: outcomes.len(),
                    objective_history: history,
                });
            }
            Err(e) => {
                last_err = Some(e);
                merge_tol *= 1e-2;
            }
        }
    }
    Err(last_err.expect("at least one consolidation attempt ran"))
}

/// Convex roof R(D): infimum of Σ pⱼ S̃(ψⱼ) over pure-state decompositions
/// of D, together with an ensemble attaining the reported value.
pub fn convex_roof(target: &DensityMatrix, cfg: &OptimizerConfig) -> Result<RoofResult> {
    roof_result(target, cfg, 1.0)
}

/// Concave roof: supremum of the same functional.
pub fn concave_roof(target: &DensityMatrix, cfg: &OptimizerConfig) -> Result<RoofResult> {
    roof_result(target, cfg, -1.0)
}

/// Subalgebra entropy H(D) = S̃(D) − R(D) ∈ [0, S̃(D)].
pub fn subalgebra_entropy(target: &DensityMatrix, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(tilde_entropy(target) - convex_roof(target, cfg)?.value)
}

/// Pure states appearing in near-optimal decompositions across restarts:
/// every restart within `cluster_tol` of the best contributes its states
/// (weight ≥ 1e-3), deduplicated at `state_tol` in trace distance and
/// ordered lexicographically for reproducibility.
pub fn facet_of(target: &DensityMatrix, cfg: &OptimizerConfig) -> Result<Facet> {
    let frame = Frame::new(target, cfg.rank_tol);
    if frame.rank <= 1 {
        let state = PureState::from_unnormalized(frame.vectors.column(0))
            .expect("support eigenvector is a unit vector");
        return Ok(Facet {
            generators: vec![state],
            supports: Vec::new(),
        });
    }
    let (frame, outcomes) = multistart(target, cfg, 1.0)?;
    let best = outcomes
        .iter()
        .map(|o| o.signed_value)
        .fold(f64::INFINITY, f64::min);
    let descent = Descent {
        frame: &frame,
        sign: 1.0,
        real_only: cfg.real_only,
    };
    let mut harvested: Vec<PureState> = Vec::new();
    for outcome in &outcomes {
        if outcome.signed_value > best + cfg.cluster_tol {
            continue;
        }
        let (ensemble, value, _) =
            consolidate(&frame, target, &descent, &outcome.w, cfg, 1e-4)?;
        if value > best + cfg.cluster_tol {
            continue;
        }
        for (w, s) in ensemble.weights().iter().zip(ensemble.states()) {
            if *w >= 1e-3 {
                harvested.push(s.clone());
            }
        }
    }
    let mut generators: Vec<PureState> = Vec::new();
    for state in harvested {
        if generators
            .iter()
            .all(|kept| kept.trace_distance(&state) > cfg.state_tol)
        {
            generators.push(state);
        }
    }
    generators.sort_by(compare_states);
    Ok(Facet {
        generators,
        supports: Vec::new(),
    })
}

/// Lexicographic ordering on phase-normalized amplitudes.
fn compare_states(a: &PureState, b: &PureState) -> std::cmp::Ordering {
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
        let re = x.re.total_cmp(&y.re);
        if re != std::cmp::Ordering::Equal && (x.re - y.re).abs() > 1e-9 {
            return re;
        }
        let im = x.im.total_cmp(&y.im);
        if im != std::cmp::Ordering::Equal && (x.im - y.im).abs() > 1e-9 {
            return im;
        }
    }
    std::cmp::Ordering::Equal
}

/// Largest violation of affinity of R over the convex hull of facet
/// generators: samples seeded convex combinations, estimates R there with a
/// warm start at the combination itself plus the configured restarts, and
/// returns max(Σ qᵢ S̃(ρᵢ) − R_est) over the samples. Zero within facet_tol
/// certifies the roof is affine across the hull.
pub fn facet_affinity_gap(
    facet: &Facet,
    cfg: &OptimizerConfig,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if facet.size() < 2 {
        return Ok(0.0);
    }
    let mut rng = Rng::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let mut q: Vec<f64> = (0..facet.size()).map(|_| -rng.uniform().ln()).collect();
        let total: f64 = q.iter().sum();
        for w in q.iter_mut() {
            *w /= total;
        }
        let dim = facet.generators()[0].dim();
        let mut mixture = CMatrix::zeros(dim, dim);
        for (w, s) in q.iter().zip(facet.generators()) {
            mixture = mixture.add(&CMatrix::outer(s.amplitudes()).scale(*w));
        }
        let target = DensityMatrix::from_matrix(mixture.hermitized())?;
        let expected: f64 = q
            .iter()
            .zip(facet.generators())
            .map(|(w, s)| w * tilde_entropy_pure(s))
            .sum();
        // warm start at the sampled combination itself
        let frame = Frame::new(&target, cfg.rank_tol);
        let warm_value = if frame.rank <= 1 {
            tilde_entropy(&target)
        } else {
            let pairs: Vec<WeightedState> = q
                .iter()
                .zip(facet.generators())
                .filter(|(w, _)| **w > 1e-12)
                .map(|(w, s)| WeightedState {
                    weight: *w,
                    state: s.clone(),
                })
                .collect();
            let descent = Descent {
                frame: &frame,
                sign: 1.0,
                real_only: cfg.real_only,
            };
            let w0 = isometry_from_pairs(&frame, &pairs)?;
            let (_, v, _) = descent.run(w0, cfg.max_iters, cfg.conv_tol, cfg.conv_window)?;
            v
        };
        let cold = convex_roof(&target, cfg)?.value;
        let estimate = warm_value.min(cold);
        worst = worst.max(expected - estimate);
    }
    Ok(worst)
}
