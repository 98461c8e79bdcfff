//! Real permutation-invariant states: the one-parameter `z` family, the
//! sphere geometry of their optimal vectors, triangle and hexagon
//! decompositions for `d = 3`, and the bifurcation finder.
//!
//! A real state commuting with all permutation matrices has `1/d` on the
//! diagonal and a common value `z ∈ [−1/(d(d−1)), 1/d]` off the diagonal.
//! Candidate optimal vectors are real unit vectors with fixed component sum
//! `a = √(1 + z d(d−1))`, a `(d−2)`-sphere of radius `r = √(1 − a²/d)`.
//! For `d = 3` that sphere is a circle; minima of the diagonal entropy over
//! it come in cyclic orbits of three which mix back to the state exactly.

use crate::error::{Error, Result};
use crate::hermitian::{DensityMatrix, PureState};
use crate::mat::CMatrix;
use crate::roof::Ensemble;
use crate::subalgebra::entropy_term_clamped;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_6, PI, TAU};

/// Fixed orthonormal circle frame for d = 3: together with the symmetric
/// direction u = (1,1,1)/√3, the pair (e, f) spans its orthogonal
/// complement. The triangle vertex sits at θ = π/6 in this frame for every
/// admissible z.
const FRAME_E: [f64; 3] = [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2, 0.0];
const FRAME_F: [f64; 3] = [
    0.408_248_290_463_863_1,
    0.408_248_290_463_863_1,
    -0.816_496_580_927_726_1,
];

/// Angle of the triangle-symmetric critical point in the fixed frame.
pub const TRIANGLE_ANGLE: f64 = FRAC_PI_6;

/// One state of the permutation-invariant real family.
#[derive(Clone, Copy, Debug)]
pub struct SymmetricState {
    dim: usize,
    z: f64,
    a: f64,
    r: f64,
}

impl SymmetricState {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Component sum of admissible real vectors, fixed ≥ 0.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Radius of the sphere of admissible vectors.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Density matrix (1/d)I + z(J − I).
    pub fn density(&self) -> DensityMatrix {
        let d = self.dim;
        let z = self.z;
        let m = CMatrix::from_fn(d, d, |i, j| {
            Complex64::new(if i == j { 1.0 / d as f64 } else { z }, 0.0)
        });
        DensityMatrix::from_matrix(m).expect("admissible z yields a valid state")
    }
}

fn admissible_range(dim: usize) -> (f64, f64) {
    let d = dim as f64;
    (-1.0 / (d * (d - 1.0)), 1.0 / d)
}

/// The permutation-invariant state with off-diagonal value z.
pub fn symmetric_state(dim: usize, z: f64) -> Result<SymmetricState> {
    if dim < 2 {
        return Err(Error::OutOfRange {
            value: dim as f64,
            lo: 2.0,
            hi: f64::INFINITY,
        });
    }
    let (lo, hi) = admissible_range(dim);
    if z < lo - 1e-12 || z > hi + 1e-12 {
        return Err(Error::OutOfRange { value: z, lo, hi });
    }
    let (a, r) = sphere_params(dim, z)?;
    Ok(SymmetricState { dim, z, a, r })
}

/// (a, r) = (√(1 + z d(d−1)), √((d−1)(1 − zd)/d)); satisfies r² = 1 − a²/d.
pub fn sphere_params(dim: usize, z: f64) -> Result<(f64, f64)> {
    let d = dim as f64;
    let (lo, hi) = admissible_range(dim);
    if z < lo - 1e-12 || z > hi + 1e-12 {
        return Err(Error::OutOfRange { value: z, lo, hi });
    }
    let a = (1.0 + z * d * (d - 1.0)).max(0.0).sqrt();
    let r = ((d - 1.0) * (1.0 - z * d) / d).max(0.0).sqrt();
    Ok((a, r))
}

/// Overlap ⟨φ, φ⊥⟩ = 1 − 2r² of antipodal sphere vectors; changes sign at
/// r = √0.5.
pub fn antipode_overlap(r: f64) -> f64 {
    1.0 - 2.0 * r * r
}

/// Real unit vector with fixed component sum.
#[derive(Clone, Debug)]
pub struct RealAnsatzVector {
    components: Vec<f64>,
}

impl RealAnsatzVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        let norm_sqr: f64 = components.iter().map(|x| x * x).sum();
        if (norm_sqr - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState {
                reason: format!("squared norm is {norm_sqr}, expected 1"),
            });
        }
        Ok(RealAnsatzVector { components })
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// Component sum (the hyperplane value a).
    pub fn component_sum(&self) -> f64 {
        self.components.iter().sum()
    }

    pub fn state(&self) -> PureState {
        PureState::from_real(&self.components).expect("unit vector")
    }

    /// S̃ of the associated pure state.
    pub fn objective(&self) -> f64 {
        self.components
            .iter()
            .map(|&x| entropy_term_clamped(x * x))
            .sum()
    }

    /// Number of distinct component values at resolution 1e-9.
    pub fn distinct_values(&self) -> usize {
        let mut sorted = self.components.clone();
        sorted.sort_by(f64::total_cmp);
        let mut count = 1;
        for pair in sorted.windows(2) {
            if (pair[1] - pair[0]).abs() > 1e-9 {
                count += 1;
            }
        }
        count
    }
}

/// Simplicial decomposition into the d states d·√D Pⱼ √D, weights 1/d.
/// The states are permutations of one another and mix back to D exactly.
pub fn triangle_decomposition(state: &SymmetricState) -> Result<Ensemble> {
    let d = state.dim();
    let density = state.density();
    let root = density.psd_sqrt();
    let scale = (d as f64).sqrt();
    let mut states = Vec::with_capacity(d);
    for j in 0..d {
        let column: Vec<Complex64> = root.matrix().column(j).iter().map(|z| z * scale).collect();
        states.push(PureState::from_unnormalized(column)?);
    }
    Ensemble::new(vec![1.0 / d as f64; d], states, &density)
}

/// Raw circle vector φ(θ) = (a/√3)u + r(cos θ·e + sin θ·f) for d = 3; its
/// component sum is a by construction.
pub fn circle_vector(z: f64, theta: f64) -> Result<RealAnsatzVector> {
    let (a, r) = sphere_params(3, z)?;
    let (sin, cos) = theta.sin_cos();
    // (a/√3)·u has uniform components a/3
    let components: Vec<f64> = (0..3)
        .map(|k| a / 3.0 + r * (cos * FRAME_E[k] + sin * FRAME_F[k]))
        .collect();
    RealAnsatzVector::new(components)
}

/// Pure-state view of the circle vector (global sign dropped).
pub fn circle_state(z: f64, theta: f64) -> Result<PureState> {
    Ok(circle_vector(z, theta)?.state())
}

/// S̃ of the circle state at angle θ.
pub fn circle_objective(z: f64, theta: f64) -> Result<f64> {
    Ok(circle_vector(z, theta)?.objective())
}

fn golden_minimize(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Local minima of θ ↦ circle_objective over one period, refined by golden
/// section to 1e-10 and deduplicated. A flat objective (z = 1/3) reports a
/// single representative angle.
pub fn circle_minima(z: f64, grid: usize) -> Result<Vec<f64>> {
    let n = grid.max(16);
    let values: Vec<f64> = (0..n)
        .map(|i| circle_objective(z, TAU * i as f64 / n as f64))
        .collect::<Result<_>>()?;
    let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < 1e-14 {
        return Ok(vec![0.0]);
    }
    let step = TAU / n as f64;
    let mut minima = Vec::new();
    for i in 0..n {
        let prev = values[(i + n - 1) % n];
        let next = values[(i + 1) % n];
        let here = values[i];
        if here < prev && here <= next {
            let theta = step * i as f64;
            let refined = golden_minimize(
                |t| circle_objective(z, t).expect("admissible z"),
                theta - step,
                theta + step,
                1e-10,
            );
            minima.push(refined.rem_euclid(TAU));
        }
    }
    minima.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for m in minima {
        let distinct = out.iter().all(|&kept| {
            let diff = (m - kept).abs();
            diff.min(TAU - diff) > 1e-6
        });
        if distinct {
            out.push(m);
        }
    }
    Ok(out)
}

/// Second derivative in θ of the circle objective at the triangle-symmetric
/// critical point, by central differences.
fn triangle_curvature(z: f64, step: f64) -> Result<f64> {
    let plus = circle_objective(z, TRIANGLE_ANGLE + step)?;
    let center = circle_objective(z, TRIANGLE_ANGLE)?;
    let minus = circle_objective(z, TRIANGLE_ANGLE - step)?;
    Ok((plus - 2.0 * center + minus) / (step * step))
}

/// Locate the bifurcation value z* where the triangle-symmetric critical
/// point turns from a local minimum into a local maximum: grid scan for a
/// sign change of the θ-curvature, then bisection to `refine_tol`.
/// Deterministic; no randomness is involved.
pub fn bifurcation_scan(z_lo: f64, z_hi: f64, grid: usize, refine_tol: f64) -> Result<f64> {
    let (lo_adm, hi_adm) = admissible_range(3);
    if !(z_lo > lo_adm && z_lo < z_hi && z_hi < hi_adm) {
        return Err(Error::OutOfRange {
            value: z_lo,
            lo: lo_adm,
            hi: hi_adm,
        });
    }
    const STEP: f64 = 1e-4;
    let n = grid.max(8);
    let mut bracket = None;
    let mut prev_z = z_lo;
    let mut prev_g = triangle_curvature(z_lo, STEP)?;
    for i in 1..=n {
        let z = z_lo + (z_hi - z_lo) * i as f64 / n as f64;
        let g = triangle_curvature(z, STEP)?;
        if prev_g.signum() != g.signum() {
            bracket = Some((prev_z, prev_g, z));
            break;
        }
        prev_z = z;
        prev_g = g;
    }
    let (mut lo, mut g_lo, mut hi) = match bracket {
        Some(b) => b,
        None => return Err(Error::NoSignChange { lo: z_lo, hi: z_hi }),
    };
    while hi - lo > refine_tol {
        let mid = 0.5 * (lo + hi);
        let g_mid = triangle_curvature(mid, STEP)?;
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The two simplicial decompositions in the hexagon regime, labelled so a
/// transposition swaps 1a↔2b, 1b↔2a, 3a↔3b.
#[derive(Clone, Debug)]
pub struct HexagonDecomposition {
    pub triad_a: Ensemble,
    pub triad_b: Ensemble,
    /// Angles of triad a: θ₁ₐ, θ₂ₐ, θ₃ₐ (cyclic orbit, 2π/3 apart).
    pub angles_a: [f64; 3],
    pub angles_b: [f64; 3],
    pub objective_a: f64,
    pub objective_b: f64,
    /// Whether the transposition action pattern on the six states verified.
    pub swap_pattern_verified: bool,
}

/// Both hexagon triads for d = 3 and z below the bifurcation value. The six
/// circle minima split as π/6 ± δ modulo 2π/3; triad a collects the −δ
/// orbit, triad b the +δ orbit. Errors when the minima census is not six.
pub fn hexagon_ensemble(z: f64, grid: usize) -> Result<HexagonDecomposition> {
    let minima = circle_minima(z, grid.max(720))?;
    if minima.len() != 6 {
        return Err(Error::NotHexagonRegime {
            found: minima.len(),
        });
    }
    // the two minima circularly nearest to π/6 are π/6 ± δ
    let mut by_distance: Vec<(f64, f64)> = minima
        .iter()
        .map(|&m| {
            let mut diff = (m - TRIANGLE_ANGLE).rem_euclid(TAU);
            if diff > PI {
                diff -= TAU;
            }
            (diff.abs(), diff)
        })
        .collect();
    by_distance.sort_by(|x, y| x.0.total_cmp(&y.0));
    let delta = 0.5 * (by_distance[0].0 + by_distance[1].0);
    if by_distance[0].1.signum() == by_distance[1].1.signum() {
        return Err(Error::NotHexagonRegime { found: minima.len() });
    }

    // exact cyclic orbits: members 2π/3 apart mix back to the state exactly
    let theta_1a = TRIANGLE_ANGLE - delta;
    let theta_1b = TRIANGLE_ANGLE + delta;
    let angles_a = [theta_1a, theta_1a + TAU / 3.0, theta_1a + 2.0 * TAU / 3.0];
    let angles_b = [theta_1b, theta_1b + TAU / 3.0, theta_1b + 2.0 * TAU / 3.0];

    let state = symmetric_state(3, z)?;
    let density = state.density();
    let states_a: Vec<PureState> = angles_a
        .iter()
        .map(|&t| circle_state(z, t))
        .collect::<Result<_>>()?;
    let states_b: Vec<PureState> = angles_b
        .iter()
        .map(|&t| circle_state(z, t))
        .collect::<Result<_>>()?;

    let objective_a = angles_a
        .iter()
        .map(|&t| circle_objective(z, t))
        .sum::<Result<f64>>()?
        / 3.0;
    let objective_b = angles_b
        .iter()
        .map(|&t| circle_objective(z, t))
        .sum::<Result<f64>>()?
        / 3.0;

    // transposition swapping components 0 and 1 acts as θ ↦ π − θ in the
    // frame: check 1a↔2b, 1b↔2a, 3a↔3b on the actual states
    let swap = |psi: &PureState| {
        let mut v = psi.amplitudes().to_vec();
        v.swap(0, 1);
        PureState::from_unnormalized(v).expect("swap preserves the norm")
    };
    let close = |x: &PureState, y: &PureState| x.trace_distance(y) < 1e-6;
    let swap_pattern_verified = close(&swap(&states_a[0]), &states_b[1])
        && close(&swap(&states_b[0]), &states_a[1])
        && close(&swap(&states_a[2]), &states_b[2]);

    let triad_a = Ensemble::new(vec![1.0 / 3.0; 3], states_a, &density)?;
    let triad_b = Ensemble::new(vec![1.0 / 3.0; 3], states_b, &density)?;
    Ok(HexagonDecomposition {
        triad_a,
        triad_b,
        angles_a,
        angles_b,
        objective_a,
        objective_b,
        swap_pattern_verified,
    })
}

/// Outcome of the restricted variational search over vectors with at most
/// three distinct component values.
#[derive(Clone, Debug)]
pub struct AnsatzResult {
    pub value: f64,
    pub vector: RealAnsatzVector,
    /// Multiplicity pattern of the best vector (ascending multiplicities).
    pub pattern: Vec<usize>,
    /// Best value per multiplicity pattern examined.
    pub per_pattern: Vec<(Vec<usize>, f64)>,
    /// Whether a two-value (or one-value) pattern matched the overall best.
    pub two_value_optimal: bool,
}

/// Minimize S̃ over real unit vectors with component sum a whose entries take
/// at most three distinct values, enumerating multiplicity patterns. For one
/// and two values the constraints pin the candidates; for three values the
/// feasible set is a circle searched on a grid with golden refinement.
pub fn ansatz_minimize(dim: usize, z: f64, grid: usize) -> Result<AnsatzResult> {
    if dim < 3 {
        return Err(Error::OutOfRange {
            value: dim as f64,
            lo: 3.0,
            hi: f64::INFINITY,
        });
    }
    let (a, _r) = sphere_params(dim, z)?;
    let d = dim as f64;
    let mut best: Option<(f64, Vec<f64>, Vec<usize>)> = None;
    let mut per_pattern: Vec<(Vec<usize>, f64)> = Vec::new();

    let consider =
        |pattern: &[usize], values: &[f64], best: &mut Option<(f64, Vec<f64>, Vec<usize>)>| {
            let value: f64 = pattern
                .iter()
                .zip(values)
                .map(|(&m, &t)| m as f64 * entropy_term_clamped(t * t))
                .sum();
            let mut components = Vec::with_capacity(dim);
            for (&m, &t) in pattern.iter().zip(values) {
                components.extend(std::iter::repeat_n(t, m));
            }
            if best.as_ref().is_none_or(|(v, _, _)| value < *v) {
                *best = Some((value, components, pattern.to_vec()));
            }
            value
        };

    // one value: feasible only at the pure endpoint a² = d
    if (a * a - d).abs() < 1e-9 {
        let t = a / d;
        let mut pattern_best: Option<(f64, Vec<f64>, Vec<usize>)> = None;
        let v = consider(&[dim], &[t], &mut pattern_best);
        per_pattern.push((vec![dim], v));
        if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
            best = pattern_best;
        }
    }

    // two values, multiplicities m1 ≤ m2
    for m1 in 1..=(dim / 2) {
        let m2 = dim - m1;
        let (m1f, m2f) = (m1 as f64, m2 as f64);
        let disc = m2f * (d - a * a) / m1f;
        if disc < -1e-12 {
            continue;
        }
        let root = disc.max(0.0).sqrt();
        let mut pattern_value = f64::INFINITY;
        let mut pattern_best: Option<(f64, Vec<f64>, Vec<usize>)> = None;
        for sign in [1.0, -1.0] {
            let t1 = (a + sign * root) / d;
            let t2 = (a - m1f * t1) / m2f;
            let v = consider(&[m1, m2], &[t1, t2], &mut pattern_best);
            pattern_value = pattern_value.min(v);
        }
        per_pattern.push((vec![m1, m2], pattern_value));
        if let Some((v, comp, pat)) = pattern_best {
            if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                best = Some((v, comp, pat));
            }
        }
    }

    // three values, multiplicities m1 ≤ m2 ≤ m3: circle search
    let n_grid = grid.max(90);
    for m1 in 1..=dim {
        for m2 in m1..=dim {
            if m1 + m2 >= dim {
                break;
            }
            let m3 = dim - m1 - m2;
            if m3 < m2 {
                continue;
            }
            let mults = [m1, m2, m3];
            let w: Vec<f64> = mults.iter().map(|&m| (m as f64).sqrt()).collect();
            // orthonormal pair perpendicular to w in value space
            let e1 = {
                let raw = [w[1], -w[0], 0.0];
                let norm = (raw[0] * raw[0] + raw[1] * raw[1]).sqrt();
                [raw[0] / norm, raw[1] / norm, 0.0]
            };
            let e2 = {
                let raw = [
                    w[1] * e1[2] - w[2] * e1[1],
                    w[2] * e1[0] - w[0] * e1[2],
                    w[0] * e1[1] - w[1] * e1[0],
                ];
                let norm = (raw.iter().map(|x| x * x).sum::<f64>()).sqrt();
                [raw[0] / norm, raw[1] / norm, raw[2] / norm]
            };
            let rho = (1.0 - a * a / d).max(0.0).sqrt();
            let eval = |alpha: f64| -> f64 {
                let (sin, cos) = alpha.sin_cos();
                let mut total = 0.0;
                for idx in 0..3 {
                    let psi = (a / d) * w[idx] + rho * (cos * e1[idx] + sin * e2[idx]);
                    let t = psi / w[idx];
                    total += mults[idx] as f64 * entropy_term_clamped(t * t);
                }
                total
            };
            let mut pattern_value = f64::INFINITY;
            let mut pattern_best: Option<(f64, Vec<f64>, Vec<usize>)> = None;
            let values: Vec<f64> = (0..n_grid)
                .map(|i| eval(TAU * i as f64 / n_grid as f64))
                .collect();
            let step = TAU / n_grid as f64;
            for i in 0..n_grid {
                let prev = values[(i + n_grid - 1) % n_grid];
                let next = values[(i + 1) % n_grid];
                if values[i] < prev && values[i] <= next {
                    let alpha = golden_minimize(
                        eval,
                        step * i as f64 - step,
                        step * i as f64 + step,
                        1e-12,
                    );
                    let (sin, cos) = alpha.sin_cos();
                    let ts: Vec<f64> = (0..3)
                        .map(|idx| {
                            ((a / d) * w[idx] + rho * (cos * e1[idx] + sin * e2[idx])) / w[idx]
                        })
                        .collect();
                    let v = consider(&mults, &ts, &mut pattern_best);
                    pattern_value = pattern_value.min(v);
                }
            }
            if pattern_value.is_finite() {
                per_pattern.push((mults.to_vec(), pattern_value));
                if let Some((v, comp, pat)) = pattern_best {
                    if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                        best = Some((v, comp, pat));
                    }
                }
            }
        }
    }

    let (value, mut components, pattern) = best.expect("at least one pattern is feasible");
    components.sort_by(|x, y| y.total_cmp(x));
    // renormalize away accumulated roundoff before constructing the vector
    let norm: f64 = components.iter().map(|x| x * x).sum::<f64>().sqrt();
    for c in components.iter_mut() {
        *c /= norm;
    }
    let vector = RealAnsatzVector::new(components)?;
    let best_short = per_pattern
        .iter()
        .filter(|(p, _)| p.len() <= 2)
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    let best_three = per_pattern
        .iter()
        .filter(|(p, _)| p.len() == 3)
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    let two_value_optimal = best_short <= best_three + 1e-12;
    Ok(AnsatzResult {
        value,
        vector,
        pattern,
        per_pattern,
        two_value_optimal,
    })
}
