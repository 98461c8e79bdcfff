//! Property tests for the numerical primitives.

use num_complex::Complex64;
use proptest::prelude::*;
use roofkit::{
    antipode_overlap, ensembles_from_isometry, entropy_term, reduce, sphere_params,
    tilde_entropy, von_neumann_entropy, CMatrix, DensityMatrix, HermitianMatrix,
};

fn complex_entries(dim: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), dim * dim)
}

fn density_from_entries(dim: usize, raw: &[(f64, f64)]) -> DensityMatrix {
    let g = CMatrix::from_fn(dim, dim, |i, j| {
        let (re, im) = raw[i * dim + j];
        Complex64::new(re, im)
    });
    let m = g.mul(&g.adjoint());
    let trace = m.trace().re.max(1e-6);
    DensityMatrix::from_matrix(m.scale(1.0 / trace)).expect("Gaussian square is a state")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigh_reconstructs_and_orders(dim in 2usize..7, raw in complex_entries(6)) {
        let h = {
            let g = CMatrix::from_fn(dim, dim, |i, j| {
                let (re, im) = raw[(i * dim + j) % raw.len()];
                Complex64::new(re, im)
            });
            HermitianMatrix::new(g.hermitized()).unwrap()
        };
        let eig = h.eigh();
        let err = eig.reconstruct().matrix().max_abs_diff(h.matrix());
        prop_assert!(err < 1e-10, "reconstruction error {err}");
        for pair in eig.eigenvalues.windows(2) {
            prop_assert!(pair[0] <= pair[1] + 1e-14);
        }
    }

    #[test]
    fn psd_sqrt_squares_to_the_state(dim in 2usize..7, raw in complex_entries(6)) {
        let d = density_from_entries(dim, &{
            let mut padded = raw.clone();
            padded.resize(dim * dim, (0.3, -0.1));
            padded
        });
        let root = d.psd_sqrt();
        let err = root.matrix().mul(root.matrix()).max_abs_diff(d.matrix().matrix());
        prop_assert!(err < 1e-10, "sqrt error {err}");
    }

    #[test]
    fn entropy_chain_is_ordered(dim in 2usize..7, raw in complex_entries(6)) {
        let d = density_from_entries(dim, &{
            let mut padded = raw.clone();
            padded.resize(dim * dim, (-0.4, 0.2));
            padded
        });
        let s = von_neumann_entropy(&d);
        let st = tilde_entropy(&d);
        prop_assert!(s >= -1e-12);
        prop_assert!(st >= s - 1e-10);
        prop_assert!(st <= (dim as f64).ln() + 1e-12);
    }

    #[test]
    fn reduction_is_affine(p in 0.0f64..1.0, raw_a in complex_entries(3), raw_b in complex_entries(3)) {
        let a = density_from_entries(3, &raw_a);
        let b = density_from_entries(3, &raw_b);
        let mix = DensityMatrix::from_matrix(
            a.matrix().matrix().scale(p).add(&b.matrix().matrix().scale(1.0 - p)),
        ).unwrap();
        let lhs = reduce(&mix);
        let ra = reduce(&a);
        let rb = reduce(&b);
        for j in 0..3 {
            let rhs = p * ra.probs()[j] + (1.0 - p) * rb.probs()[j];
            prop_assert!((lhs.probs()[j] - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn entropy_term_bounds(x in 0.0f64..=1.0) {
        let s = entropy_term(x).unwrap();
        prop_assert!(s >= 0.0);
        prop_assert!(s <= std::f64::consts::E.recip() + 1e-12);
    }

    #[test]
    fn sphere_identities(dim in 2usize..7, t in 0.0f64..=1.0) {
        let d = dim as f64;
        let lo = -1.0 / (d * (d - 1.0));
        let hi = 1.0 / d;
        let z = lo + (hi - lo) * t;
        let (a, r) = sphere_params(dim, z).unwrap();
        prop_assert!((r * r - (1.0 - a * a / d)).abs() < 1e-12);
        prop_assert!((antipode_overlap(r) - (2.0 * a * a / d - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn random_isometries_reconstruct_the_state(seed in 0u64..5000, raw in complex_entries(3)) {
        let d = density_from_entries(3, &raw);
        let k = d.rank();
        let m = 6usize;
        // orthonormalize a seeded Gaussian frame
        let mut rng = roofkit::rng::Rng::new(seed);
        let mut w = CMatrix::from_fn(m, k, |_, _| rng.complex_normal());
        for j in 0..k {
            for prev in 0..j {
                let mut proj = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    proj += w[(i, prev)].conj() * w[(i, j)];
                }
                for i in 0..m {
                    let c = proj * w[(i, prev)];
                    w[(i, j)] -= c;
                }
            }
            let norm: f64 = (0..m).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            for i in 0..m {
                w[(i, j)] /= norm;
            }
        }
        let ensemble = ensembles_from_isometry(&d, &w).unwrap();
        let err = ensemble.mix().max_abs_diff(&d);
        prop_assert!(err < 1e-9, "reconstruction error {err}");
        prop_assert!(ensemble.len() <= m);
    }
}
