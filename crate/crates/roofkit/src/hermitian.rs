//! Dense complex Hermitian linear algebra for small dimensions.
//!
//! Eigendecomposition is a cyclic complex Jacobi iteration: for `d ≤ 64`
//! robustness and determinism matter more than speed. Eigenvectors carry a
//! fixed phase convention (first significant component real and positive) so
//! results are reproducible across runs.

use crate::error::{Error, Result};
use crate::mat::CMatrix;
use crate::tol;
use num_complex::Complex64;

/// Hermitian operator. Construction symmetrizes, so stored entries satisfy
/// `a[i][j] == conj(a[j][i])` exactly; raw input deviating more than the
/// validation tolerance is rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    matrix: CMatrix,
}

impl HermitianMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let deviation = matrix.hermiticity_deviation();
        if deviation > tol::HERMITICITY_VALIDATION {
            return Err(Error::NonHermitianInput {
                deviation,
                tolerance: tol::HERMITICITY_VALIDATION,
            });
        }
        Ok(HermitianMatrix {
            matrix: matrix.hermitized(),
        })
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        HermitianMatrix::new(CMatrix::from_real(dim, dim, entries))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        HermitianMatrix {
            matrix: CMatrix::diagonal(values),
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix {
            matrix: CMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            matrix: self.matrix.add(&other.matrix),
        }
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            matrix: self.matrix.sub(&other.matrix),
        }
    }

    pub fn scale(&self, factor: f64) -> HermitianMatrix {
        HermitianMatrix {
            matrix: self.matrix.scale(factor),
        }
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Tr(self · other), real for Hermitian arguments.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        self.matrix.mul(&other.matrix).trace().re
    }

    pub fn expectation(&self, state: &PureState) -> f64 {
        let hv = self.matrix.matvec(state.amplitudes());
        state
            .amplitudes()
            .iter()
            .zip(&hv)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// Eigendecomposition, eigenvalues ascending, orthonormal eigenvector
    /// columns with a deterministic phase convention.
    pub fn eigh(&self) -> EigenDecomposition {
        jacobi_eigh(&self.matrix)
    }

    /// Principal square root for PSD input; eigenvalues slightly negative
    /// from roundoff are clamped, anything below the floor is rejected.
    pub fn psd_sqrt(&self) -> Result<HermitianMatrix> {
        let eig = self.eigh();
        if let Some(&lowest) = eig
            .eigenvalues
            .first()
            .filter(|&&v| v < tol::PSD_SQRT_FLOOR)
        {
            return Err(Error::NegativeEigenvalue { value: lowest });
        }
        let roots: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&v| if v > 0.0 { v.sqrt() } else { 0.0 })
            .collect();
        Ok(eig.assemble(&roots))
    }
}

/// Result of `eigh`: `H = V diag(λ) V†`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns, column `i` belongs to `eigenvalues[i]`.
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    /// Rebuild `V diag(f(λ)) V†` from transformed eigenvalues.
    pub fn assemble(&self, values: &[f64]) -> HermitianMatrix {
        let d = self.eigenvectors.rows();
        let mut out = CMatrix::zeros(d, d);
        for (k, &v) in values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let col = self.eigenvectors.column(k);
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] += col[i] * col[j].conj() * v;
                }
            }
        }
        HermitianMatrix {
            matrix: out.hermitized(),
        }
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.assemble(&self.eigenvalues)
    }
}

fn jacobi_eigh(input: &CMatrix) -> EigenDecomposition {
    let n = input.rows();
    let mut a = input.clone();
    let mut v = CMatrix::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let stop = scale * 1e-15;

    for _sweep in 0..60 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= stop * 1e-2 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / mag;
                // small-magnitude root of t² − 2τt − 1 = 0, the tangent of
                // the rotation angle zeroing the (p,q) entry
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / ((1.0 + tau * tau).sqrt() - tau)
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = s * phase; // s·e^{iφ}
                let spc = s * phase.conj(); // s·e^{-iφ}

                // column update A ← A R with R = [[c, -s e^{iφ}], [s e^{-iφ}, c]]
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c + aiq * spc;
                    a[(i, q)] = aiq * c - aip * sp;
                }
                // row update A ← R† A
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c + aqj * sp;
                    a[(q, j)] = aqj * c - apj * spc;
                }
                // eigenvector columns rotate like the columns of A
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c + viq * spc;
                    v[(i, q)] = viq * c - vip * sp;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        let col = fix_phase(v.column(old_col));
        for i in 0..n {
            vectors[(i, new_col)] = col[i];
        }
    }
    EigenDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    }
}

/// Rotate a global phase so the first component with significant modulus is
/// real and positive.
pub(crate) fn fix_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let lead = v.iter().find(|z| z.norm() > 1e-8).copied();
    if let Some(z) = lead {
        let phase = z / z.norm();
        let inv = phase.conj();
        for a in v.iter_mut() {
            *a *= inv;
        }
    }
    v
}

/// Density matrix: Hermitian, PSD, unit trace, with its eigendecomposition
/// cached (eigenvalues ascending, clamped to be non-negative).
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl DensityMatrix {
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let trace = h.trace();
        if (trace - 1.0).abs() > tol::TRACE_TOL {
            return Err(Error::InvalidTrace {
                trace,
                tolerance: tol::TRACE_TOL,
            });
        }
        let eig = h.eigh();
        let mut eigenvalues = eig.eigenvalues;
        for v in eigenvalues.iter_mut() {
            if *v < 0.0 {
                if *v < -tol::EIGENVALUE_CLAMP {
                    return Err(Error::NegativeEigenvalue { value: *v });
                }
                *v = 0.0;
            }
        }
        Ok(DensityMatrix {
            matrix: h,
            eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        DensityMatrix::new(HermitianMatrix::new(m)?)
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        let h = HermitianMatrix::identity(dim).scale(1.0 / dim as f64);
        DensityMatrix::new(h).expect("I/d is a valid state")
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix.entry(i, j)
    }

    /// Ascending, clamped to `≥ 0`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.matrix().real_diagonal()
    }

    /// Tr D².
    pub fn purity(&self) -> f64 {
        self.eigenvalues.iter().map(|&l| l * l).sum()
    }

    /// Number of eigenvalues above `rank_tol`.
    pub fn rank_of(&self, rank_tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > rank_tol).count()
    }

    pub fn rank(&self) -> usize {
        self.rank_of(tol::RANK_TOL)
    }

    /// Orthogonal projector onto the span of eigenvectors with eigenvalue
    /// above `rank_tol`.
    pub fn support_projector(&self, rank_tol: f64) -> HermitianMatrix {
        let ones: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&l| if l > rank_tol { 1.0 } else { 0.0 })
            .collect();
        EigenDecomposition {
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: self.eigenvectors.clone(),
        }
        .assemble(&ones)
    }

    /// √D from the cached decomposition; eigenvalues are already clamped.
    pub fn psd_sqrt(&self) -> HermitianMatrix {
        let roots: Vec<f64> = self.eigenvalues.iter().map(|&l| l.sqrt()).collect();
        EigenDecomposition {
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: self.eigenvectors.clone(),
        }
        .assemble(&roots)
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.matrix.matrix().max_abs_diff(other.matrix.matrix())
    }
}

/// Unit-norm state vector; the first significant component is kept real and
/// positive so equal states compare equal.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        let norm = norm_sqr.sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState {
                reason: format!("vector norm is {norm}, expected 1"),
            });
        }
        Ok(PureState::from_unnormalized(amplitudes).expect("norm checked above"))
    }

    /// Normalize and apply the phase convention.
    pub fn from_unnormalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr < 1e-24 {
            return Err(Error::InvalidState {
                reason: "vector is numerically zero".into(),
            });
        }
        let inv = 1.0 / norm_sqr.sqrt();
        let scaled: Vec<Complex64> = amplitudes.iter().map(|z| z * inv).collect();
        Ok(PureState {
            amplitudes: fix_phase(scaled),
        })
    }

    pub fn from_real(components: &[f64]) -> Result<Self> {
        PureState::from_unnormalized(
            components
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect(),
        )
    }

    /// Standard basis vector |j⟩.
    pub fn basis(dim: usize, j: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[j] = Complex64::new(1.0, 0.0);
        PureState { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn projector(&self) -> HermitianMatrix {
        HermitianMatrix {
            matrix: CMatrix::outer(&self.amplitudes).hermitized(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::new(self.projector()).expect("projector of a unit vector is a state")
    }

    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨ψ|φ⟩|².
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.overlap(other).norm_sqr().min(1.0)
    }

    /// Trace distance between the two projectors, √(1 − |⟨ψ|φ⟩|²).
    pub fn trace_distance(&self, other: &PureState) -> f64 {
        (1.0 - self.fidelity(other)).max(0.0).sqrt()
    }

    /// |ψ_a|² for every component.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }
}
