//! Simulation core for holographic MIMO links between planar surfaces in
//! isotropic scattering: Fourier plane-wave channel model, precoders and
//! spectral-efficiency estimates.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod error;
pub mod geometry;
pub mod precoding;
pub mod quadrature;
pub mod rate;
pub mod spectrum;

pub use channel::{
    assemble_element_channel, correlation_eigenvalues, derive_seed, draw_wavenumber_channel,
    ChannelRealization, CorrelationSpectrum,
};
pub use error::{Error, Result};
pub use geometry::{harmonic_basis, lattice_ellipse, patch_positions, ArrayGeometry, HarmonicBasis, Side, WavenumberLattice};
pub use precoding::{mmse, mrt, neumann_inverse, ns_zf, zf, Precoder, Scheme};
pub use rate::{mrt_theoretical_bound, per_stream_sinr, simulated_se, zf_theoretical, SeResult};
pub use spectrum::{cell_variance, separable_sigma, variance_map, SeparableSigma, VarianceMap};
