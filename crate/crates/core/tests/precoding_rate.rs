use holosim_core::precoding::{mmse, mrt, neumann_inverse, ns_zf, zf, Scheme};
use holosim_core::rate::{db_to_linear, simulated_se, theory_curve, Theory};
use holosim_core::{
    draw_wavenumber_channel, mrt_theoretical_bound, per_stream_sinr, separable_sigma, variance_map, ArrayGeometry,
    SeparableSigma,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian(rows: usize, cols: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    })
}

fn off_diagonal_peak(g: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            if i != j {
                worst = worst.max(g[(i, j)].norm());
            }
        }
    }
    worst
}

/// Right pseudo-inverse from a QR factorisation of `H^H`:
/// `H^H = QR` gives `H^+ = Q R^{-H}`.
fn qr_pseudo_inverse(h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let qr = h.adjoint().qr();
    let (q, r) = (qr.q(), qr.r());
    let r_inv_h = r.adjoint().try_inverse().unwrap();
    q * r_inv_h
}

#[test]
fn mrt_matches_direct_formula() {
    let h = gaussian(2, 8, 1);
    let p = mrt(&h).unwrap();
    let direct = h.adjoint() / Complex64::from(h.norm());
    assert!((p.v() - direct).camax() < 1e-12);
}

#[test]
fn mrt_on_orthogonal_rows_has_no_interference() {
    let mut h = DMatrix::<Complex64>::zeros(3, 5);
    h[(0, 0)] = Complex64::new(1.0, 1.0);
    h[(1, 2)] = Complex64::new(0.0, 2.0);
    h[(2, 4)] = Complex64::new(-1.0, 0.5);
    let g = &h * mrt(&h).unwrap().v();
    assert!(off_diagonal_peak(&g) < 1e-15);
}

#[test]
fn zf_diagonal_matches_qr_oracle() {
    let h = gaussian(3, 6, 2);
    let p = zf(&h).unwrap();
    let f = qr_pseudo_inverse(&h);
    let k = 3.0f64;
    let g = &h * p.v();
    for i in 0..3 {
        let want = 1.0 / (k.sqrt() * f.column(i).norm());
        assert!((g[(i, i)].re - want).abs() < 1e-10);
        assert!(g[(i, i)].im.abs() < 1e-10);
        assert!((p.stream_gains().unwrap()[i] - 1.0 / f.column(i).norm()).abs() < 1e-10);
    }
}

#[test]
fn zf_sinr_closed_form() {
    let h = gaussian(4, 9, 3);
    let p = zf(&h).unwrap();
    let sinr = per_stream_sinr(&h, p.v(), 5.0, 0.7).unwrap();
    for (i, s) in sinr.iter().enumerate() {
        let gain = p.stream_gains().unwrap()[i];
        let want = 5.0 * gain * gain / (4.0 * 0.7);
        assert!((s / want - 1.0).abs() < 1e-9);
    }
}

#[test]
fn mmse_high_snr_limit_is_zf() {
    let h = gaussian(3, 7, 4);
    let z = zf(&h).unwrap();
    let m = mmse(&h, 1e12).unwrap();
    assert!((m.v() - z.v()).camax() < 1e-8);
}

#[test]
fn mmse_low_snr_columns_align_with_mrt() {
    let h = gaussian(3, 7, 5);
    let m = mmse(&h, 1e-9).unwrap();
    let r = mrt(&h).unwrap();
    for i in 0..3 {
        let a = m.v().column(i);
        let b = r.v().column(i);
        let cos = a.dotc(&b).norm() / (a.norm() * b.norm());
        assert!((cos - 1.0).abs() < 1e-8);
    }
}

#[test]
fn neumann_diverges_without_diagonal_dominance() {
    let w = DMatrix::from_row_slice(2, 2, &[
        Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0),
        Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0),
    ]);
    let residual = |k| (neumann_inverse(&w, k).unwrap() * &w - DMatrix::identity(2, 2)).norm();
    let r: Vec<f64> = (0..6).map(residual).collect();
    assert!(r.windows(2).all(|p| p[1] > p[0]), "{r:?}");
}

#[test]
fn neumann_residual_contracts_geometrically() {
    let base = gaussian(4, 60, 6);
    let w = &base * base.adjoint();
    let residual = |k| (neumann_inverse(&w, k).unwrap() * &w - DMatrix::identity(4, 4)).norm();
    let r: Vec<f64> = (0..8).map(residual).collect();
    assert!(r.windows(2).all(|p| p[1] < p[0]), "{r:?}");
}

#[test]
fn ns_zf_converges_to_zf() {
    let sigma = SeparableSigma::from_vectors(vec![1.0, 0.7], vec![1.1; 80], 1).unwrap();
    let h = draw_wavenumber_channel(&sigma, 9).into_matrix();
    let z = zf(&h).unwrap();
    let ns = ns_zf(&h, &sigma.row_sigma(), 50).unwrap();
    assert!((ns.v() - z.v()).camax() < 1e-8);
    assert!(ns_zf(&h, &[1.0, 0.0], 3).is_err());
}

#[test]
fn uniform_mrt_bound_is_below_simulation() {
    let sigma = SeparableSigma::from_vectors(vec![1.0; 4], vec![1.0; 40], 1).unwrap();
    let grid = [-10.0, 0.0, 10.0, 20.0];
    let sim = simulated_se(&sigma, Scheme::Mrt, &grid, 400, 21).unwrap();
    let bound = theory_curve(&sigma, Theory::MrtBound, &grid).unwrap();
    for s in 0..grid.len() {
        for i in 0..4 {
            let slack = 3.0 * sim.per_stream_stderr[(i, s)];
            assert!(sim.per_stream[(i, s)] >= bound[(i, s)] - slack);
        }
    }
}

#[test]
fn se_grows_with_snr_and_transmit_size() {
    let rx = variance_map(&ArrayGeometry::new(4, 4, 1.0 / 3.0).unwrap()).unwrap();
    let grid = [-10.0, 0.0, 10.0, 20.0, 30.0];
    let mut last = 0.0;
    for n in [10usize, 12, 14] {
        let tx = variance_map(&ArrayGeometry::new(n, n, 1.0 / 3.0).unwrap()).unwrap();
        let sigma = separable_sigma(&rx, &tx, 3).unwrap();
        let zf = simulated_se(&sigma, Scheme::Zf, &grid, 60, 5).unwrap();
        for w in zf.sum_se.windows(2) {
            assert!(w[1] >= w[0] - 1e-3);
        }
        assert!(zf.sum_se[2] > last);
        last = zf.sum_se[2];
    }
}

#[test]
fn mrt_plateaus_at_high_snr() {
    let rx = variance_map(&ArrayGeometry::new(4, 4, 1.0 / 3.0).unwrap()).unwrap();
    let tx = variance_map(&ArrayGeometry::new(12, 12, 1.0 / 3.0).unwrap()).unwrap();
    let sigma = separable_sigma(&rx, &tx, 3).unwrap();
    let r = simulated_se(&sigma, Scheme::Mrt, &[20.0, 30.0], 100, 8).unwrap();
    for i in 0..r.streams() {
        assert!(r.per_stream[(i, 1)] - r.per_stream[(i, 0)] < 0.1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn every_precoder_has_unit_power(k in 1usize..5, extra in 0usize..6, seed in 0u64..1000, snr in 0.01f64..1e4) {
        let h = gaussian(k, k + extra + 1, seed);
        let sig = vec![1.0; k];
        for p in [mrt(&h).unwrap(), zf(&h).unwrap(), mmse(&h, snr).unwrap(), ns_zf(&h, &sig, 3).unwrap()] {
            prop_assert!((p.power() - 1.0).abs() < 1e-9);
            prop_assert_eq!(p.streams(), k);
        }
    }

    #[test]
    fn zf_nulls_interference(k in 2usize..6, extra in 0usize..8, seed in 0u64..1000) {
        let h = gaussian(k, k + extra, seed);
        let g = &h * zf(&h).unwrap().v();
        prop_assert!(off_diagonal_peak(&g) < 1e-9 * g.norm());
    }

    #[test]
    fn sinr_is_scale_invariant(seed in 0u64..500, p in 0.01f64..100.0, scale in 0.001f64..1000.0) {
        let h = gaussian(3, 8, seed);
        let v = mrt(&h).unwrap();
        let a = per_stream_sinr(&h, v.v(), p, 1.0).unwrap();
        let b = per_stream_sinr(&h, v.v(), p * scale, scale).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }
    }

    #[test]
    fn single_stream_mrt_sinr(n in 1usize..10, seed in 0u64..500, p_db in -20.0f64..30.0) {
        let h = gaussian(1, n, seed);
        let p_u = db_to_linear(p_db);
        let s = per_stream_sinr(&h, mrt(&h).unwrap().v(), p_u, 0.5).unwrap();
        let want = p_u * h.norm_squared() / 0.5;
        prop_assert!((s[0] / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mrt_bound_is_finite_and_monotone(k in 1usize..8, ns in 3usize..60, p in 0.01f64..1e3) {
        let rx: Vec<f64> = (0..k).map(|i| 0.5 + 0.1 * i as f64).collect();
        let tx: Vec<f64> = (0..ns).map(|j| 0.8 + 0.01 * j as f64).collect();
        let lo = mrt_theoretical_bound(&rx, &tx, p, 1.0, 0).unwrap();
        let hi = mrt_theoretical_bound(&rx, &tx, 2.0 * p, 1.0, 0).unwrap();
        prop_assert!(lo.is_finite() && lo >= 0.0 && hi >= lo);
    }
}
