//! Per-stream SINR, Monte Carlo spectral efficiency and the closed-form
//! MRT and ZF approximations.
//!
//! Noise power is fixed to one; an SNR of `x` dB sets `p_u = 10^(x/10)`.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

// Float supplies libm-backed math when std is absent.
#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::{derive_seed, draw_wavenumber_channel};
use crate::error::{Error, Result};
use crate::precoding::{precode, Scheme};
use crate::spectrum::SeparableSigma;

/// Upper clamp for SINR values (reached with nulled interference and no
/// noise).
pub const SINR_CAP: f64 = 1e12;

/// Redraws allowed per trial before a singular channel becomes an error.
pub const MAX_REDRAWS: u64 = 64;

/// Noise variance used by the simulations.
pub const NOISE_VAR: f64 = 1.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// SINR of every stream for channel `h` (`K x n_s`) and precoder `v`
/// (`n_s x K`); interference counts every other column of `v`.
pub fn per_stream_sinr(h: &DMatrix<Complex64>, v: &DMatrix<Complex64>, p_u: f64, noise_var: f64) -> Result<Vec<f64>> {
    if h.ncols() != v.nrows() || h.nrows() != v.ncols() {
        return Err(Error::DimensionMismatch {
            context: "precoder shape",
            expected: h.nrows(),
            found: v.ncols(),
        });
    }
    if p_u.is_nan() || p_u <= 0.0 {
        return Err(Error::NonPositive("transmit power"));
    }
    if noise_var.is_nan() || noise_var < 0.0 {
        return Err(Error::NonPositive("noise variance"));
    }
    let g = h * v;
    let k = g.nrows();
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let row = g.row(i);
        let total: f64 = row.iter().map(|z| z.norm_sqr()).sum();
        let signal = row[i].norm_sqr();
        let interference = (total - signal).max(0.0);
        let denom = p_u * interference + noise_var;
        let sinr = if denom > 0.0 { p_u * signal / denom } else { f64::INFINITY };
        out.push(if sinr.is_nan() { 0.0 } else { sinr.min(SINR_CAP) });
    }
    Ok(out)
}

/// Spectral efficiencies of one channel draw: `K x snr` bits/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub se: DMatrix<f64>,
    pub rejections: u64,
}

/// Runs one Monte Carlo trial. Draws that make the zero-forcing Gram
/// singular are replaced by draws from child seeds of `trial_seed`.
pub fn simulate_trial(sigma: &SeparableSigma, scheme: Scheme, snr_grid_db: &[f64], trial_seed: u64) -> Result<TrialOutcome> {
    let row_sigma = sigma.row_sigma();
    let mut seed = trial_seed;
    let mut rejections = 0;
    loop {
        let h = draw_wavenumber_channel(sigma, seed).into_matrix();
        match evaluate(&h, scheme, snr_grid_db, &row_sigma) {
            Ok(se) => return Ok(TrialOutcome { se, rejections }),
            Err(Error::Singular { condition }) => {
                rejections += 1;
                if rejections > MAX_REDRAWS {
                    return Err(Error::Singular { condition });
                }
                seed = derive_seed(trial_seed, rejections);
            }
            Err(e) => return Err(e),
        }
    }
}

fn evaluate(h: &DMatrix<Complex64>, scheme: Scheme, snr_grid_db: &[f64], row_sigma: &[f64]) -> Result<DMatrix<f64>> {
    let k = h.nrows();
    let mut se = DMatrix::zeros(k, snr_grid_db.len());
    // Only MMSE depends on the SNR.
    let fixed = match scheme {
        Scheme::Mmse => None,
        _ => Some(precode(h, scheme, 1.0, row_sigma)?),
    };
    for (s, &db) in snr_grid_db.iter().enumerate() {
        let p_u = db_to_linear(db);
        let sinr = match &fixed {
            Some(p) => per_stream_sinr(h, p.v(), p_u, NOISE_VAR)?,
            None => {
                let p = precode(h, scheme, p_u / NOISE_VAR, row_sigma)?;
                per_stream_sinr(h, p.v(), p_u, NOISE_VAR)?
            }
        };
        for (i, x) in sinr.into_iter().enumerate() {
            se[(i, s)] = (1.0 + x).log2();
        }
    }
    Ok(se)
}

/// Running sums over trials; feed outcomes in trial order for
/// reproducible floating-point results.
#[derive(Debug, Clone)]
pub struct SeAccumulator {
    sum: DMatrix<f64>,
    sum_sq: DMatrix<f64>,
    total: Vec<f64>,
    total_sq: Vec<f64>,
    trials: usize,
    rejections: u64,
}

impl SeAccumulator {
    pub fn new(streams: usize, snr_points: usize) -> Self {
        Self {
            sum: DMatrix::zeros(streams, snr_points),
            sum_sq: DMatrix::zeros(streams, snr_points),
            total: alloc::vec![0.0; snr_points],
            total_sq: alloc::vec![0.0; snr_points],
            trials: 0,
            rejections: 0,
        }
    }

    pub fn push(&mut self, outcome: &TrialOutcome) {
        self.sum += &outcome.se;
        self.sum_sq += outcome.se.component_mul(&outcome.se);
        for (s, col) in outcome.se.column_iter().enumerate() {
            let t = col.sum();
            self.total[s] += t;
            self.total_sq[s] += t * t;
        }
        self.trials += 1;
        self.rejections += outcome.rejections;
    }

    pub fn finish(self, scheme: Scheme, snr_grid_db: &[f64], per_user_rows: usize) -> SeResult {
        let n = self.trials as f64;
        let stderr = |s: f64, sq: f64| {
            if self.trials < 2 {
                return 0.0;
            }
            let mean = s / n;
            let var = ((sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        };
        let per_stream = self.sum.map(|s| s / n);
        let per_stream_stderr = self.sum.zip_map(&self.sum_sq, stderr);
        let sum_se = per_stream.column_iter().map(|c| c.sum()).collect();
        let sum_stderr = self
            .total
            .iter()
            .zip(&self.total_sq)
            .map(|(&s, &q)| stderr(s, q))
            .collect();
        SeResult {
            scheme,
            snr_grid_db: snr_grid_db.to_vec(),
            per_stream,
            per_stream_stderr,
            sum_se,
            sum_stderr,
            trials: self.trials,
            rejections: self.rejections,
            per_user_rows,
        }
    }
}

/// Monte Carlo spectral efficiency of one scheme over an SNR grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SeResult {
    pub scheme: Scheme,
    pub snr_grid_db: Vec<f64>,
    /// Mean SE, streams x SNR points.
    pub per_stream: DMatrix<f64>,
    /// Standard error of each mean.
    pub per_stream_stderr: DMatrix<f64>,
    pub sum_se: Vec<f64>,
    pub sum_stderr: Vec<f64>,
    pub trials: usize,
    /// Singular draws that were replaced.
    pub rejections: u64,
    pub per_user_rows: usize,
}

impl SeResult {
    pub fn streams(&self) -> usize {
        self.per_stream.nrows()
    }

    /// `(user, stream)` of stacked stream index `i`.
    pub fn stream_label(&self, i: usize) -> (usize, usize) {
        (i / self.per_user_rows, i % self.per_user_rows)
    }

    pub fn rejection_rate(&self) -> f64 {
        self.rejections as f64 / self.trials.max(1) as f64
    }

    /// True when more than 1% of trials needed a redraw.
    pub fn rejections_notable(&self) -> bool {
        self.rejection_rate() > 0.01
    }
}

/// Averages `trials` independent draws. Trial `t` uses the child seed
/// `derive_seed(seed, t)`, so the same seed reproduces the same channels for
/// every scheme.
pub fn simulated_se(sigma: &SeparableSigma, scheme: Scheme, snr_grid_db: &[f64], trials: usize, seed: u64) -> Result<SeResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required"));
    }
    let mut acc = SeAccumulator::new(sigma.streams(), snr_grid_db.len());
    for t in 0..trials {
        acc.push(&simulate_trial(sigma, scheme, snr_grid_db, derive_seed(seed, t as u64))?);
    }
    Ok(acc.finish(scheme, snr_grid_db, sigma.per_user_rows()))
}

fn check_sigmas(rx_sigma: &[f64], tx_sigma: &[f64], stream: usize) -> Result<()> {
    if rx_sigma.is_empty() || tx_sigma.is_empty() {
        return Err(Error::EmptySigma);
    }
    if stream >= rx_sigma.len() {
        return Err(Error::DimensionMismatch {
            context: "stream index",
            expected: rx_sigma.len(),
            found: stream,
        });
    }
    Ok(())
}

fn mean_square(v: &[f64]) -> f64 {
    v.iter().map(|s| s * s).sum::<f64>() / v.len() as f64
}

/// Jensen-type lower bound on the MRT rate of `stream`. `rx_sigma` holds
/// the receive sigma of every stream (length `K`).
pub fn mrt_theoretical_bound(rx_sigma: &[f64], tx_sigma: &[f64], p_u: f64, noise_var: f64, stream: usize) -> Result<f64> {
    check_sigmas(rx_sigma, tx_sigma, stream)?;
    let n_s = tx_sigma.len();
    if n_s <= 2 {
        return Err(Error::InvalidArgument("the MRT bound needs more than two transmit harmonics"));
    }
    let s_hat = mean_square(tx_sigma);
    let r2 = rx_sigma[stream] * rx_sigma[stream];
    let total_r2: f64 = rx_sigma.iter().map(|s| s * s).sum();
    let others = total_r2 - r2;
    let num = p_u * n_s as f64 * s_hat * r2 * r2;
    let den = p_u * s_hat * r2 * others + noise_var * total_r2;
    Ok((1.0 + num / den).log2())
}

/// Large-system ZF approximation `log2(1 + p_u (n_s - K + 1) σ_r,i² σ̂_s² / (K σ_w²))`.
pub fn zf_theoretical(rx_sigma: &[f64], tx_sigma: &[f64], p_u: f64, noise_var: f64, stream: usize) -> Result<f64> {
    check_sigmas(rx_sigma, tx_sigma, stream)?;
    let k = rx_sigma.len();
    let n_s = tx_sigma.len();
    if k > n_s {
        return Err(Error::InfeasibleStreams {
            streams: k,
            harmonics: n_s,
        });
    }
    let dof = (n_s - k + 1) as f64;
    let r2 = rx_sigma[stream] * rx_sigma[stream];
    Ok((1.0 + p_u / (k as f64 * noise_var) * dof * r2 * mean_square(tx_sigma)).log2())
}

/// Which closed form [`theory_curve`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theory {
    MrtBound,
    Zf,
}

/// Closed-form SE for every stream and SNR point (`K x snr`).
pub fn theory_curve(sigma: &SeparableSigma, theory: Theory, snr_grid_db: &[f64]) -> Result<DMatrix<f64>> {
    let rx = sigma.row_sigma();
    let tx = sigma.tx();
    let mut out = DMatrix::zeros(rx.len(), snr_grid_db.len());
    for (s, &db) in snr_grid_db.iter().enumerate() {
        let p_u = db_to_linear(db);
        for i in 0..rx.len() {
            out[(i, s)] = match theory {
                Theory::MrtBound => mrt_theoretical_bound(&rx, tx, p_u, NOISE_VAR, i)?,
                Theory::Zf => zf_theoretical(&rx, tx, p_u, NOISE_VAR, i)?,
            };
        }
    }
    Ok(out)
}
