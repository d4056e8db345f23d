use holosim_core::channel::{assemble_element_channel, phased_channel, spectrum_from_sigmas};
use holosim_core::geometry::default_user_origin;
use holosim_core::precoding::{mmse, mrt, zf};
use holosim_core::{
    correlation_eigenvalues, draw_wavenumber_channel, harmonic_basis, per_stream_sinr, separable_sigma, variance_map,
    ArrayGeometry, ChannelRealization, HarmonicBasis, SeparableSigma, Side,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bases(tx: &ArrayGeometry, rx: &ArrayGeometry, users: usize) -> (SeparableSigma, Vec<HarmonicBasis>, HarmonicBasis) {
    let tx_map = variance_map(tx).unwrap();
    let rx_map = variance_map(rx).unwrap();
    let sigma = separable_sigma(&rx_map, &tx_map, users).unwrap();
    let u_s = harmonic_basis(tx, tx_map.lattice(), Side::Transmit).unwrap();
    let u_r = (0..users)
        .map(|m| {
            let origin = default_user_origin(m, 1.0);
            harmonic_basis(rx, rx_map.lattice(), Side::Receive { origin }).unwrap()
        })
        .collect();
    (sigma, u_r, u_s)
}

#[test]
fn entry_variance_follows_sigma_product() {
    let sigma = SeparableSigma::from_vectors(vec![2.0, 0.5], vec![1.0, 3.0], 1).unwrap();
    let draws = 100_000;
    let mut acc = DMatrix::<f64>::zeros(2, 2);
    for seed in 0..draws {
        let h = draw_wavenumber_channel(&sigma, seed);
        acc += h.h_a().map(|z| z.norm_sqr());
    }
    acc /= draws as f64;
    let expected = DMatrix::from_row_slice(2, 2, &[4.0, 36.0, 0.25, 2.25]);
    for (got, want) in acc.iter().zip(expected.iter()) {
        assert!((got / want - 1.0).abs() < 0.05, "{got} vs {want}");
    }
}

#[test]
fn sample_covariance_is_diagonal_sigma_squared() {
    let sigma = SeparableSigma::from_vectors(vec![1.0, 0.6, 1.3], vec![0.9, 1.4], 2).unwrap();
    let draws = 20_000;
    let dim = 12;
    let mut cov = DMatrix::<Complex64>::zeros(dim, dim);
    for seed in 0..draws {
        let h = draw_wavenumber_channel(&sigma, 1_000_000 + seed);
        let v = DVector::from_iterator(dim, h.h_a().iter().copied());
        cov += &v * v.adjoint();
    }
    cov /= Complex64::from(draws as f64);
    let target: Vec<f64> = sigma.matrix().iter().map(|s| s * s).collect();
    for i in 0..dim {
        assert!((cov[(i, i)].re / target[i] - 1.0).abs() < 0.05);
        for j in 0..dim {
            if i != j {
                // Off-diagonal terms, including across user blocks, vanish.
                let scale = (target[i] * target[j]).sqrt();
                assert!(cov[(i, j)].norm() / scale < 0.05, "({i},{j})");
            }
        }
    }
}

#[test]
fn assembled_channel_keeps_frobenius_norm_and_round_trips() {
    let tx = ArrayGeometry::new(6, 6, 1.0 / 3.0).unwrap();
    let rx = ArrayGeometry::new(4, 4, 1.0 / 3.0).unwrap();
    let (sigma, u_r, u_s) = bases(&tx, &rx, 3);
    let h = draw_wavenumber_channel(&sigma, 17);
    let big = assemble_element_channel(&h, &u_r, &u_s).unwrap();
    assert_eq!(big.shape(), (3 * 16, 36));
    assert!((big.norm() - h.h_a().norm()).abs() < 1e-9);
    for (m, basis) in u_r.iter().enumerate() {
        let block = big.rows(16 * m, 16);
        let back = basis.matrix().adjoint() * block * u_s.matrix();
        assert!((back - h.user_block(m)).norm() < 1e-9);
    }
}

#[test]
fn scalar_channel_with_constant_bases_is_rank_one() {
    // A unit-square lattice of one cell, (0,0), gives constant columns.
    let g = ArrayGeometry::new(2, 2, 0.5).unwrap();
    let lattice = holosim_core::WavenumberLattice::from_cells(vec![(0, 0)], 1.0, 1.0).unwrap();
    let u_s = harmonic_basis(&g, &lattice, Side::Transmit).unwrap();
    let u_r = harmonic_basis(&g, &lattice, Side::Receive { origin: [0.0; 3] }).unwrap();
    let h = ChannelRealization::from_matrix(DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)), 1, 0).unwrap();
    let big = assemble_element_channel(&h, std::slice::from_ref(&u_r), &u_s).unwrap();
    let expected = u_r.matrix() * u_s.matrix().adjoint();
    assert!((big - &expected).norm() < 1e-14);
    assert_eq!(expected.rank(1e-12), 1);
    assert!(assemble_element_channel(&h, &[], &u_s).is_err());
}

#[test]
fn toy_spectrum_matches_brute_force_correlation() {
    // σ_r² = [1, 3], σ_s² = [2, 4] on a 2x2 link with unitary bases.
    let sigma = SeparableSigma::from_vectors(vec![1.0, 3f64.sqrt()], vec![2f64.sqrt(), 2.0], 1).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let u = DMatrix::from_row_slice(2, 2, &[
        Complex64::new(s, 0.0), Complex64::new(s, 0.0),
        Complex64::new(s, 0.0), Complex64::new(-s, 0.0),
    ]);
    let draws = 100_000;
    let mut r = DMatrix::<Complex64>::zeros(4, 4);
    for seed in 0..draws {
        let ha = draw_wavenumber_channel(&sigma, seed);
        let h = &u * ha.h_a() * u.adjoint();
        let v = DVector::from_iterator(4, h.iter().copied());
        r += &v * v.adjoint();
    }
    r /= Complex64::from(draws as f64);
    let mut eig: Vec<f64> = r.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let analytic = spectrum_from_sigmas(sigma.rx(), sigma.tx(), 4).unwrap();
    for (e, a) in eig.iter().zip(analytic.eigenvalues()) {
        assert!((e / a - 1.0).abs() < 0.05, "{e} vs {a}");
    }
    for (a, want) in analytic.eigenvalues().iter().zip([12.0, 6.0, 4.0, 2.0]) {
        assert!((a - want).abs() < 1e-12);
    }
}

#[test]
fn spectrum_trace_and_rank() {
    let tx = ArrayGeometry::new(12, 12, 1.0 / 3.0).unwrap();
    let rx = ArrayGeometry::new(6, 6, 1.0 / 3.0).unwrap();
    let (tx_map, rx_map) = (variance_map(&tx).unwrap(), variance_map(&rx).unwrap());
    let spec = correlation_eigenvalues(&rx_map, &tx_map);
    assert_eq!(spec.eigenvalues().len(), 144 * 36);
    assert_eq!(spec.rank(), rx_map.harmonics() * tx_map.harmonics());
    assert!((spec.trace() / (144.0 * 36.0) - 1.0).abs() < 1e-6);
    assert!(spec.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    assert!(spec.eigenvalues().iter().all(|&e| e >= 0.0));
}

#[test]
fn half_wavelength_spectrum_is_not_flat() {
    let tx = ArrayGeometry::new(30, 30, 1.0 / 3.0).unwrap();
    let rx = ArrayGeometry::new(24, 24, 0.5).unwrap();
    let spec = correlation_eigenvalues(&variance_map(&rx).unwrap(), &variance_map(&tx).unwrap());
    let nz = &spec.eigenvalues()[..spec.rank()];
    assert!(nz[0] / nz[nz.len() - 1] > 2.0);
}

#[test]
fn phase_profile_leaves_every_sinr_unchanged() {
    let tx = ArrayGeometry::new(8, 8, 1.0 / 3.0).unwrap();
    let rx = ArrayGeometry::new(3, 3, 1.0 / 3.0).unwrap();
    let (sigma, _, u_s) = bases(&tx, &rx, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..5 {
        let h = draw_wavenumber_channel(&sigma, trial).into_matrix();
        let phase: Vec<Complex64> = (0..64)
            .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
            .collect();
        let ht = phased_channel(&h, &u_s, &phase).unwrap();
        for p_u in [0.1, 10.0] {
            let pairs = [
                (mrt(&h).unwrap(), mrt(&ht).unwrap()),
                (zf(&h).unwrap(), zf(&ht).unwrap()),
                (mmse(&h, p_u).unwrap(), mmse(&ht, p_u).unwrap()),
            ];
            for (a, b) in pairs {
                let sa = per_stream_sinr(&h, a.v(), p_u, 1.0).unwrap();
                let sb = per_stream_sinr(&ht, b.v(), p_u, 1.0).unwrap();
                for (x, y) in sa.iter().zip(&sb) {
                    assert!((x - y).abs() <= 1e-9 * x.max(1.0), "{x} vs {y}");
                }
            }
        }
    }
}

#[test]
fn fig3_count_grows_with_receive_spacing() {
    let tx_map = variance_map(&ArrayGeometry::new(30, 30, 1.0 / 3.0).unwrap()).unwrap();
    let counts: Vec<usize> = [1.0 / 6.0, 1.0 / 3.0, 0.5]
        .iter()
        .map(|&d| {
            let rx_map = variance_map(&ArrayGeometry::new(24, 24, d).unwrap()).unwrap();
            correlation_eigenvalues(&rx_map, &tx_map).count_above(0.01)
        })
        .collect();
    assert!(counts[0] < counts[1] && counts[1] < counts[2], "{counts:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bases_are_semi_unitary(nh in 2usize..12, nv in 2usize..12, k in 0usize..4) {
        let delta = [1.0 / 15.0, 1.0 / 6.0, 1.0 / 3.0, 0.5][k];
        let g = ArrayGeometry::new(nh, nv, delta).unwrap();
        let map = variance_map(&g).unwrap();
        let tx = harmonic_basis(&g, map.lattice(), Side::Transmit).unwrap();
        let rx = harmonic_basis(&g, map.lattice(), Side::Receive { origin: default_user_origin(2, 1.0) }).unwrap();
        prop_assert!(tx.orthonormality_defect() < 1e-10);
        prop_assert!(rx.orthonormality_defect() < 1e-10);
    }

    #[test]
    fn block_frobenius_identity(nr in 2usize..8, ns in 3usize..10) {
        let rx = variance_map(&ArrayGeometry::new(nr, nr, 1.0 / 3.0).unwrap()).unwrap();
        let tx = variance_map(&ArrayGeometry::new(ns, ns, 1.0 / 3.0).unwrap()).unwrap();
        let sigma = separable_sigma(&rx, &tx, 3).unwrap();
        let block = sigma.matrix().rows(0, sigma.per_user_rows()).map(|s| s * s).sum();
        prop_assert!((block / (nr * nr * ns * ns) as f64 - 1.0).abs() < 1e-9);
    }
}
