//! Linear precoders operating on the wavenumber-domain channel.
//!
//! Every precoder is normalised per realization to `‖V‖_F = 1`.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

// Float supplies libm-backed math when std is absent.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Gram matrices with a larger eigenvalue spread are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Neumann terms used by the low-complexity zero-forcing precoder.
pub const DEFAULT_NS_ITERATIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Mrt,
    Zf,
    Mmse,
    NsZf { iterations: usize },
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Mrt => f.write_str("mrt"),
            Scheme::Zf => f.write_str("zf"),
            Scheme::Mmse => f.write_str("mmse"),
            Scheme::NsZf { iterations } => write!(f, "ns-zf-{iterations}"),
        }
    }
}

/// Precoding matrix `V` (`n_s x K`) with its normalisation data.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    v: DMatrix<Complex64>,
    scheme: Scheme,
    alpha: f64,
    stream_gains: Option<Vec<f64>>,
}

impl Precoder {
    pub fn v(&self) -> &DMatrix<Complex64> {
        &self.v
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.v
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Global scaling applied to the unnormalised matrix. For the
    /// column-normalised schemes this is `1/sqrt(K)`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `1/‖f_i‖` for each column of the unnormalised pseudo-inverse
    /// (zero-forcing variants only).
    pub fn stream_gains(&self) -> Option<&[f64]> {
        self.stream_gains.as_deref()
    }

    pub fn streams(&self) -> usize {
        self.v.ncols()
    }

    /// `‖V‖_F`.
    pub fn power(&self) -> f64 {
        self.v.norm()
    }
}

/// Maximum-ratio transmission `V = H^H / ‖H‖_F`.
pub fn mrt(h: &DMatrix<Complex64>) -> Result<Precoder> {
    let norm = h.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroChannel);
    }
    let alpha = 1.0 / norm;
    Ok(Precoder {
        v: h.adjoint() * Complex64::from(alpha),
        scheme: Scheme::Mrt,
        alpha,
        stream_gains: None,
    })
}

fn check_streams(h: &DMatrix<Complex64>) -> Result<()> {
    if h.nrows() > h.ncols() {
        return Err(Error::InfeasibleStreams {
            streams: h.nrows(),
            harmonics: h.ncols(),
        });
    }
    if h.nrows() == 0 {
        return Err(Error::ZeroChannel);
    }
    Ok(())
}

/// Inverts a Hermitian positive-definite matrix after checking its
/// eigenvalue spread.
fn hermitian_inverse(gram: DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let eig = gram.clone().symmetric_eigenvalues();
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::Singular { condition });
    }
    let chol = gram.cholesky().ok_or(Error::Singular { condition })?;
    Ok(chol.inverse())
}

/// Scales column `i` of `f` to `f_i / (sqrt(K) ‖f_i‖)`.
fn column_normalize(f: DMatrix<Complex64>, scheme: Scheme) -> Result<Precoder> {
    let k = f.ncols();
    let alpha = 1.0 / (k as f64).sqrt();
    let mut gains = Vec::with_capacity(k);
    let mut v = f;
    for mut col in v.column_iter_mut() {
        let n = col.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroChannel);
        }
        gains.push(1.0 / n);
        col *= Complex64::from(alpha / n);
    }
    Ok(Precoder {
        v,
        scheme,
        alpha,
        stream_gains: Some(gains),
    })
}

/// Zero forcing through the right pseudo-inverse `H^H (H H^H)^{-1}`, with
/// each column scaled to `1/sqrt(K)`.
pub fn zf(h: &DMatrix<Complex64>) -> Result<Precoder> {
    check_streams(h)?;
    let inv = hermitian_inverse(h * h.adjoint())?;
    column_normalize(h.adjoint() * inv, Scheme::Zf)
}

/// Regularised zero forcing `H^H (H H^H + (K/snr) I)^{-1}`.
///
/// Columns get the same `1/sqrt(K)` scaling as [`zf`], so the high-SNR
/// limit is exactly the zero-forcing precoder.
pub fn mmse(h: &DMatrix<Complex64>, snr: f64) -> Result<Precoder> {
    if snr.is_nan() || snr <= 0.0 {
        return Err(Error::NonPositive("snr"));
    }
    if h.nrows() == 0 || h.norm() == 0.0 {
        return Err(Error::ZeroChannel);
    }
    let k = h.nrows();
    let mut gram = h * h.adjoint();
    let load = Complex64::from(k as f64 / snr);
    for i in 0..k {
        gram[(i, i)] += load;
    }
    let inv = gram.cholesky().ok_or(Error::Singular { condition: f64::INFINITY })?.inverse();
    column_normalize(h.adjoint() * inv, Scheme::Mmse)
}

/// Truncated Neumann series `Σ_{i=0}^{iterations} (-D^{-1}E)^i D^{-1}` for
/// `W = D + E`, evaluated as `X ← D^{-1} - D^{-1} E X`.
pub fn neumann_inverse(w: &DMatrix<Complex64>, iterations: usize) -> Result<DMatrix<Complex64>> {
    if !w.is_square() {
        return Err(Error::DimensionMismatch {
            context: "square Gram matrix",
            expected: w.nrows(),
            found: w.ncols(),
        });
    }
    let n = w.nrows();
    let mut d_inv = DVector::<Complex64>::zeros(n);
    for i in 0..n {
        let d = w[(i, i)];
        if d.norm_sqr() == 0.0 {
            return Err(Error::ZeroDiagonal(i));
        }
        d_inv[i] = d.inv();
    }
    let d_inv_mat = DMatrix::from_diagonal(&d_inv);

    // -D^{-1} E
    let mut step = w.clone();
    step.fill_diagonal(Complex64::from(0.0));
    for (i, mut row) in step.row_iter_mut().enumerate() {
        row *= -d_inv[i];
    }

    let mut x = d_inv_mat.clone();
    for _ in 0..iterations {
        x = &d_inv_mat + &step * &x;
    }
    Ok(x)
}

/// Zero forcing with the Gram inverse replaced by a Neumann series on the
/// whitened Gram `diag(σ_r)^{-1} H H^H diag(σ_r)^{-1}`.
pub fn ns_zf(h: &DMatrix<Complex64>, rx_sigma: &[f64], iterations: usize) -> Result<Precoder> {
    check_streams(h)?;
    if rx_sigma.len() != h.nrows() {
        return Err(Error::DimensionMismatch {
            context: "receive sigma per stream",
            expected: h.nrows(),
            found: rx_sigma.len(),
        });
    }
    let mut inv_sigma = Vec::with_capacity(rx_sigma.len());
    for (i, &s) in rx_sigma.iter().enumerate() {
        if s == 0.0 || !s.is_finite() {
            return Err(Error::ZeroSigma(i));
        }
        inv_sigma.push(1.0 / s);
    }
    let scale = |m: &mut DMatrix<Complex64>| {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                m[(i, j)] *= inv_sigma[i] * inv_sigma[j];
            }
        }
    };
    let mut w = h * h.adjoint();
    scale(&mut w);
    let mut z_inv = neumann_inverse(&w, iterations)?;
    scale(&mut z_inv);
    column_normalize(h.adjoint() * z_inv, Scheme::NsZf { iterations })
}

/// Builds the precoder for `scheme`. `snr` is only used by MMSE and
/// `rx_sigma` only by NS-ZF.
pub fn precode(h: &DMatrix<Complex64>, scheme: Scheme, snr: f64, rx_sigma: &[f64]) -> Result<Precoder> {
    match scheme {
        Scheme::Mrt => mrt(h),
        Scheme::Zf => zf(h),
        Scheme::Mmse => mmse(h, snr),
        Scheme::NsZf { iterations } => ns_zf(h, rx_sigma, iterations),
    }
}
