//! Random wavenumber-domain channels and their element-domain images.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::HarmonicBasis;
use crate::spectrum::{SeparableSigma, VarianceMap};

/// Seed of the `index`-th child stream of `seed`. Children of one parent
/// are independent ChaCha streams, so per-trial draws can be generated in
/// any order.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

/// One draw of the stacked wavenumber-domain channel `H_a = Σ ⊙ W`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    h_a: DMatrix<Complex64>,
    per_user_rows: usize,
    seed: u64,
}

impl ChannelRealization {
    /// Wraps an existing matrix; rows must split evenly into users.
    pub fn from_matrix(h_a: DMatrix<Complex64>, per_user_rows: usize, seed: u64) -> Result<Self> {
        if per_user_rows == 0 || !h_a.nrows().is_multiple_of(per_user_rows) {
            return Err(Error::DimensionMismatch {
                context: "rows per user",
                expected: per_user_rows,
                found: h_a.nrows(),
            });
        }
        Ok(Self {
            h_a,
            per_user_rows,
            seed,
        })
    }

    /// `(M n_r) x n_s` wavenumber-domain channel.
    pub fn h_a(&self) -> &DMatrix<Complex64> {
        &self.h_a
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.h_a
    }

    pub fn per_user_rows(&self) -> usize {
        self.per_user_rows
    }

    pub fn users(&self) -> usize {
        self.h_a.nrows() / self.per_user_rows
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Rows belonging to user `m`, `H_a^(m)`.
    pub fn user_block(&self, m: usize) -> DMatrix<Complex64> {
        self.h_a
            .rows(m * self.per_user_rows, self.per_user_rows)
            .into_owned()
    }
}

/// Circularly-symmetric complex Gaussian sample with unit variance.
pub fn complex_gaussian<R: RngCore + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// `Σ ⊙ W` with `W` drawn from `rng` in column-major order.
pub fn draw_with_rng<R: RngCore + ?Sized>(sigma: &SeparableSigma, rng: &mut R) -> DMatrix<Complex64> {
    let s = sigma.matrix();
    DMatrix::from_fn(s.nrows(), s.ncols(), |_, _| complex_gaussian(rng))
        .zip_map(s, |w, sd| w * sd)
}

/// Draws `H_a = Σ ⊙ W` from a ChaCha8 stream seeded with `seed`.
pub fn draw_wavenumber_channel(sigma: &SeparableSigma, seed: u64) -> ChannelRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ChannelRealization {
        h_a: draw_with_rng(sigma, &mut rng),
        per_user_rows: sigma.per_user_rows(),
        seed,
    }
}

/// Stacks `U_r^(m) H_a^(m) U_s^H` over users.
pub fn assemble_element_channel(
    realization: &ChannelRealization,
    rx_bases: &[HarmonicBasis],
    tx_basis: &HarmonicBasis,
) -> Result<DMatrix<Complex64>> {
    let users = realization.users();
    if rx_bases.len() != users {
        return Err(Error::DimensionMismatch {
            context: "receive bases per user",
            expected: users,
            found: rx_bases.len(),
        });
    }
    let h = realization.h_a();
    let u_s = tx_basis.matrix();
    if u_s.ncols() != h.ncols() {
        return Err(Error::DimensionMismatch {
            context: "transmit harmonics",
            expected: h.ncols(),
            found: u_s.ncols(),
        });
    }
    let n_r = realization.per_user_rows();
    let mut blocks = Vec::with_capacity(users);
    for (m, basis) in rx_bases.iter().enumerate() {
        let u_r = basis.matrix();
        if u_r.ncols() != n_r {
            return Err(Error::DimensionMismatch {
                context: "receive harmonics",
                expected: n_r,
                found: u_r.ncols(),
            });
        }
        blocks.push(u_r * h.rows(m * n_r, n_r) * u_s.adjoint());
    }
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, u_s.nrows());
    let mut at = 0;
    for b in blocks {
        out.rows_mut(at, b.nrows()).copy_from(&b);
        at += b.nrows();
    }
    Ok(out)
}

/// Effective channel seen by a precoder acting on patches through a
/// unit-modulus phase profile: `H_a U_s^H diag(phase)`.
pub fn phased_channel(
    h_a: &DMatrix<Complex64>,
    tx_basis: &HarmonicBasis,
    phase: &[Complex64],
) -> Result<DMatrix<Complex64>> {
    let u_s = tx_basis.matrix();
    if phase.len() != u_s.nrows() || u_s.ncols() != h_a.ncols() {
        return Err(Error::DimensionMismatch {
            context: "phase profile",
            expected: u_s.nrows(),
            found: phase.len(),
        });
    }
    let mut out = h_a * u_s.adjoint();
    for (mut col, p) in out.column_iter_mut().zip(phase) {
        col *= *p;
    }
    Ok(out)
}

/// Eigenvalues of one user's correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSpectrum {
    eigenvalues: Vec<f64>,
    rank: usize,
}

impl CorrelationSpectrum {
    /// Nonincreasing, nonnegative, padded with zeros to `N_r N_s`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Number of structurally nonzero eigenvalues, `n_r n_s`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Eigenvalues divided by the largest one.
    pub fn normalized(&self) -> Vec<f64> {
        let top = self.largest();
        if top <= 0.0 {
            return self.eigenvalues.clone();
        }
        self.eigenvalues.iter().map(|e| e / top).collect()
    }

    /// Count of eigenvalues at least `fraction` of the largest.
    pub fn count_above(&self, fraction: f64) -> usize {
        let cut = fraction * self.largest();
        self.eigenvalues.iter().take_while(|&&e| e >= cut).count()
    }
}

/// Spectrum from per-harmonic standard deviations; `dimension` is the
/// padded length `N_r N_s`.
pub fn spectrum_from_sigmas(rx: &[f64], tx: &[f64], dimension: usize) -> Result<CorrelationSpectrum> {
    if rx.is_empty() || tx.is_empty() {
        return Err(Error::EmptySigma);
    }
    let rank = rx.len() * tx.len();
    if dimension < rank {
        return Err(Error::DimensionMismatch {
            context: "correlation dimension",
            expected: rank,
            found: dimension,
        });
    }
    let mut eigenvalues = Vec::with_capacity(dimension);
    for r in rx {
        for s in tx {
            eigenvalues.push((r * r * s * s).max(0.0));
        }
    }
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    eigenvalues.resize(dimension, 0.0);
    Ok(CorrelationSpectrum { eigenvalues, rank })
}

/// The semi-unitary Kronecker factors leave only the products
/// `σ_r,i² σ_s,j²` as nonzero eigenvalues, so the full matrix is never formed.
pub fn correlation_eigenvalues(rx_map: &VarianceMap, tx_map: &VarianceMap) -> CorrelationSpectrum {
    let dimension = rx_map.patches() * tx_map.patches();
    spectrum_from_sigmas(rx_map.normalized_sigma(), tx_map.normalized_sigma(), dimension)
        .expect("variance maps are nonempty and no larger than their arrays")
}
