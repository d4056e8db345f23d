//! Variances of the Fourier plane-wave coefficients under isotropic
//! scattering.
//!
//! Each harmonic `(ℓx, ℓy)` owns the wavenumber cell
//! `[ℓx λ/L_x, (ℓx+1) λ/L_x] x [ℓy λ/L_y, (ℓy+1) λ/L_y]` in normalised
//! coordinates. Its variance is the solid angle of the part of the upper
//! hemisphere that projects into the cell, scaled by `1/(4π)`:
//!
//! ```text
//! σ²(ℓx, ℓy) = 1/(4π) ∬_cell∩disk k_r / sqrt(1 - k_r²) dk_r dφ
//! ```
//!
//! The cell is reflected into the first orthant, split at the azimuths of its
//! corners into three sub-regions, and every sub-region is integrated in
//! closed form. The same split integrated numerically in φ is kept as an
//! independent path and as the fallback when a closed-form value is not finite.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

// Float supplies libm-backed math when std is absent.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{enumeration_range, lattice_ellipse, ArrayGeometry, WavenumberLattice};
use crate::quadrature;

/// Absolute tolerance of the φ-quadrature path.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// Corners closer than this to the unit circle count as outside.
const RIM_SLACK: f64 = 1e-12;

/// Isotropic spectral factor `A² = (2π)² / k` for a wavenumber `k > 0`.
pub fn isotropic_spectral_factor(wavenumber: f64) -> Result<f64> {
    if wavenumber.is_nan() || wavenumber <= 0.0 {
        return Err(Error::NonPositive("wavenumber"));
    }
    Ok(4.0 * PI * PI / wavenumber)
}

/// How a cell integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integration {
    /// Antiderivatives per sub-region; quadrature only if the result is not
    /// finite.
    ClosedForm,
    /// Adaptive quadrature in azimuth of the analytic radial integral.
    Quadrature,
}

/// Quadrant of the normalised wavenumber plane containing a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orthant {
    First,
    Second,
    Third,
    Fourth,
}

impl Orthant {
    /// Classifies `[a, b] x [c, d]` by the signs of its corners; `None` if
    /// the cell straddles an axis.
    pub fn of(a: f64, b: f64, c: f64, d: f64) -> Option<Self> {
        let right = a >= 0.0;
        let left = b <= 0.0;
        let up = c >= 0.0;
        let down = d <= 0.0;
        match (right, left, up, down) {
            (true, _, true, _) => Some(Self::First),
            (_, true, true, _) => Some(Self::Second),
            (_, true, _, true) => Some(Self::Third),
            (true, _, _, true) => Some(Self::Fourth),
            _ => None,
        }
    }

    /// Mirrors a cell of this orthant onto the first one.
    fn reflect(self, a: f64, b: f64, c: f64, d: f64) -> Rect {
        let (x0, x1) = match self {
            Self::First | Self::Fourth => (a, b),
            Self::Second | Self::Third => (-b, -a),
        };
        let (y0, y1) = match self {
            Self::First | Self::Second => (c, d),
            Self::Third | Self::Fourth => (-d, -c),
        };
        // Adding zero turns a mirrored -0.0 into +0.0 so atan2 stays in the
        // first quadrant.
        Rect {
            a: x0 + 0.0,
            b: x1 + 0.0,
            c: y0 + 0.0,
            d: y1 + 0.0,
        }
    }
}

/// A first-orthant rectangle `[a, b] x [c, d]` with `0 <= a < b`, `0 <= c < d`.
#[derive(Debug, Clone, Copy)]
struct Rect {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

/// Azimuth breakpoints `φ1 <= φ2 <= φ3 <= φ4` of a first-orthant cell.
#[derive(Debug, Clone, Copy)]
struct Breakpoints {
    phi: [f64; 4],
    /// True when the middle band is bounded by the horizontal edges.
    horizontal_band: bool,
}

impl Rect {
    fn breakpoints(&self) -> Breakpoints {
        let through_ac = self.c.atan2(self.a);
        let through_bd = self.d.atan2(self.b);
        Breakpoints {
            phi: [
                self.c.atan2(self.b),
                through_ac.min(through_bd),
                through_ac.max(through_bd),
                self.d.atan2(self.a),
            ],
            horizontal_band: through_bd <= through_ac,
        }
    }

    fn outside_disk(&self) -> bool {
        self.a * self.a + self.c * self.c >= 1.0 - RIM_SLACK
    }

    /// `∬ 1/sqrt(1 - x² - y²)` over the rectangle clipped to the unit disk.
    fn solid_angle(&self, method: Integration) -> Result<f64> {
        if self.outside_disk() {
            return Ok(0.0);
        }
        match method {
            Integration::ClosedForm => match self.closed_form() {
                Some(v) => Ok(v),
                None => self.quadrature(),
            },
            Integration::Quadrature => self.quadrature(),
        }
    }

    fn closed_form(&self) -> Option<f64> {
        let Breakpoints {
            phi: [p1, p2, p3, p4],
            horizontal_band,
        } = self.breakpoints();
        let Rect { a, b, c, d } = *self;

        let lower = sine_edge(c, p1, p2) - cosine_edge(b, p1, p2);
        let middle = if horizontal_band {
            sine_edge(c, p2, p3) - sine_edge(d, p2, p3)
        } else {
            cosine_edge(a, p2, p3) - cosine_edge(b, p2, p3)
        };
        let upper = cosine_edge(a, p3, p4) - sine_edge(d, p3, p4);
        let total = lower + middle + upper;
        total.is_finite().then_some(total)
    }

    /// Radial integral `sqrt(1 - min(1, r_in)²) - sqrt(1 - min(1, r_out)²)`
    /// along the ray at azimuth `phi`.
    fn radial(&self, phi: f64) -> f64 {
        let (s, co) = (phi.sin(), phi.cos());
        let over = |num: f64, den: f64| {
            if num == 0.0 {
                0.0
            } else if den <= 0.0 {
                f64::INFINITY
            } else {
                num / den
            }
        };
        let r_in = over(self.a, co).max(over(self.c, s));
        let r_out = over(self.b, co).min(over(self.d, s));
        if r_out <= r_in {
            return 0.0;
        }
        let g = |r: f64| (1.0 - r.min(1.0).powi(2)).max(0.0).sqrt();
        g(r_in) - g(r_out)
    }

    fn quadrature(&self) -> Result<f64> {
        let Breakpoints { phi, .. } = self.breakpoints();
        let (start, end) = (phi[0], phi[3]);
        let mut knots: Vec<f64> = Vec::with_capacity(8);
        knots.push(start);
        knots.extend_from_slice(&phi[1..3]);
        // Azimuths where an edge leaves the disk; the integrand has a
        // square-root kink there.
        for edge in [self.c, self.d] {
            if edge < 1.0 {
                knots.push(edge.asin());
            }
        }
        for edge in [self.a, self.b] {
            if edge < 1.0 {
                knots.push(edge.acos());
            }
        }
        knots.push(end);
        knots.retain(|&k| k >= start && k <= end);
        knots.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
        knots.dedup();

        let pieces = (knots.len() - 1).max(1) as f64;
        let mut total = 0.0;
        for w in knots.windows(2) {
            total += quadrature::integrate(
                |phi| self.radial(phi),
                w[0],
                w[1],
                QUADRATURE_TOLERANCE / pieces,
            )?;
        }
        Ok(total)
    }
}

/// `∫ sqrt(1 - min(1, t²/sin²φ)) dφ` over `[lo, hi] ⊂ [0, π/2]`, the radial
/// contribution of a horizontal edge at height `t`.
fn sine_edge(t: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo || t >= 1.0 {
        return 0.0;
    }
    if t <= 0.0 {
        return hi - lo;
    }
    let enters = t.asin();
    // Both terms share the slack so its rounding error cancels to first
    // order where the edge meets the circle.
    let antiderivative = |phi: f64| {
        let (s, co) = (phi.sin(), phi.cos());
        let slack = (s * s - t * t).max(0.0).sqrt();
        t * (t * co).atan2(slack) - co.atan2(slack)
    };
    antiderivative(hi.max(enters)) - antiderivative(lo.max(enters))
}

/// `∫ sqrt(1 - min(1, t²/cos²φ)) dφ` over `[lo, hi] ⊂ [0, π/2]`, the radial
/// contribution of a vertical edge at abscissa `t`.
fn cosine_edge(t: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo || t >= 1.0 {
        return 0.0;
    }
    if t <= 0.0 {
        return hi - lo;
    }
    let leaves = t.acos();
    let antiderivative = |phi: f64| {
        let (s, co) = (phi.sin(), phi.cos());
        let slack = (co * co - t * t).max(0.0).sqrt();
        -t * (t * s).atan2(slack) + s.atan2(slack)
    };
    antiderivative(hi.min(leaves)) - antiderivative(lo.min(leaves))
}

/// Splits an interval at zero so each piece has a definite sign.
fn split_at_zero(lo: f64, hi: f64) -> ([(f64, f64); 2], usize) {
    if lo < 0.0 && hi > 0.0 {
        ([(lo, 0.0), (0.0, hi)], 2)
    } else {
        ([(lo, hi), (lo, hi)], 1)
    }
}

/// Variance of harmonic `(lx, ly)` on an aperture with normalised sides
/// `side_x = L_x/λ`, `side_y = L_y/λ`.
pub fn cell_variance(lx: i32, ly: i32, side_x: f64, side_y: f64) -> Result<f64> {
    cell_variance_with(lx, ly, side_x, side_y, Integration::ClosedForm)
}

pub fn cell_variance_with(
    lx: i32,
    ly: i32,
    side_x: f64,
    side_y: f64,
    method: Integration,
) -> Result<f64> {
    if !(side_x > 0.0 && side_y > 0.0) {
        return Err(Error::NonPositive("aperture side"));
    }
    let a = lx as f64 / side_x;
    let b = (lx + 1) as f64 / side_x;
    let c = ly as f64 / side_y;
    let d = (ly + 1) as f64 / side_y;
    rect_variance(a, b, c, d, method)
}

/// Variance of an arbitrary normalised wavenumber rectangle `[a,b] x [c,d]`.
pub fn rect_variance(a: f64, b: f64, c: f64, d: f64, method: Integration) -> Result<f64> {
    if !(a < b && c < d) {
        return Err(Error::InvalidArgument("rectangle bounds must be increasing"));
    }
    let (xs, nx) = split_at_zero(a, b);
    let (ys, ny) = split_at_zero(c, d);
    let mut total = 0.0;
    for &(x0, x1) in &xs[..nx] {
        for &(y0, y1) in &ys[..ny] {
            let orthant = Orthant::of(x0, x1, y0, y1)
                .ok_or(Error::InvalidArgument("cell split left a straddling piece"))?;
            total += orthant.reflect(x0, x1, y0, y1).solid_angle(method)?;
        }
    }
    Ok(total / (4.0 * PI))
}

/// Sum of the variances of every cell in the enumeration rectangle; equals
/// the upper-hemisphere total 1/2.
pub fn hemisphere_total(side_x: f64, side_y: f64) -> Result<f64> {
    let (x0, x1) = enumeration_range(side_x);
    let (y0, y1) = enumeration_range(side_y);
    let mut total = 0.0;
    for ly in y0..=y1 {
        for lx in x0..=x1 {
            total += cell_variance(lx, ly, side_x, side_y)?;
        }
    }
    Ok(total)
}

/// Per-harmonic variances of one surface.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceMap {
    lattice: WavenumberLattice,
    raw: Vec<f64>,
    normalized_sigma: Vec<f64>,
    patches: usize,
    hemisphere_total: f64,
    dropped: Vec<(i32, i32)>,
}

impl VarianceMap {
    /// Lattice cells that carry energy, in lattice order.
    pub fn lattice(&self) -> &WavenumberLattice {
        &self.lattice
    }

    /// `σ²(ℓx, ℓy)` including the `1/(4π)` prefactor.
    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    /// `sqrt(N σ² / Σσ²)`; squares sum to the patch count.
    pub fn normalized_sigma(&self) -> &[f64] {
        &self.normalized_sigma
    }

    pub fn patches(&self) -> usize {
        self.patches
    }

    pub fn harmonics(&self) -> usize {
        self.raw.len()
    }

    /// Variance summed over the full enumeration rectangle (1/2 up to
    /// integration error).
    pub fn hemisphere_total(&self) -> f64 {
        self.hemisphere_total
    }

    /// Fraction of the hemisphere power captured by the retained cells.
    pub fn captured_fraction(&self) -> f64 {
        self.raw.iter().sum::<f64>() / self.hemisphere_total
    }

    /// Ellipse points whose cell lies outside the disk and was dropped.
    pub fn dropped_cells(&self) -> &[(i32, i32)] {
        &self.dropped
    }

    /// Mean of the squared normalised sigmas, `σ̂²`.
    pub fn mean_square_sigma(&self) -> f64 {
        self.normalized_sigma.iter().map(|s| s * s).sum::<f64>() / self.harmonics() as f64
    }
}

/// Integrates every lattice cell of `geometry` and normalises the result.
/// Ellipse points whose cell only touches the disk boundary carry no power
/// and are removed from the lattice.
pub fn variance_map(geometry: &ArrayGeometry) -> Result<VarianceMap> {
    let full = lattice_ellipse(geometry);
    let (sx, sy) = full.sides();
    let mut raw_all = Vec::with_capacity(full.cardinality());
    for &(lx, ly) in full.cells() {
        raw_all.push(cell_variance(lx, ly, sx, sy)?);
    }
    let dropped: Vec<(i32, i32)> = full
        .cells()
        .iter()
        .zip(&raw_all)
        .filter(|(_, &v)| v <= 0.0)
        .map(|(&c, _)| c)
        .collect();
    let lattice = full.retain(|idx, _| raw_all[idx] > 0.0);
    let raw: Vec<f64> = raw_all.into_iter().filter(|&v| v > 0.0).collect();
    if raw.is_empty() {
        return Err(Error::EmptySigma);
    }

    let patches = geometry.patch_count();
    let sum: f64 = raw.iter().sum();
    let normalized_sigma = raw
        .iter()
        .map(|v| (patches as f64 * v / sum).sqrt())
        .collect();

    Ok(VarianceMap {
        lattice,
        raw,
        normalized_sigma,
        patches,
        hemisphere_total: hemisphere_total(sx, sy)?,
        dropped,
    })
}

/// Stacked per-user standard deviations `Σ^(m) = σ_r σ_s^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableSigma {
    rx: Vec<f64>,
    tx: Vec<f64>,
    users: usize,
    matrix: DMatrix<f64>,
}

impl SeparableSigma {
    /// Builds the stacked matrix from one user's receive vector and the
    /// transmit vector; all users share the receive statistics.
    pub fn from_vectors(rx: Vec<f64>, tx: Vec<f64>, users: usize) -> Result<Self> {
        if users == 0 {
            return Err(Error::InvalidArgument("at least one user is required"));
        }
        if rx.is_empty() || tx.is_empty() {
            return Err(Error::EmptySigma);
        }
        let n_r = rx.len();
        let matrix = DMatrix::from_fn(users * n_r, tx.len(), |i, j| rx[i % n_r] * tx[j]);
        Ok(Self {
            rx,
            tx,
            users,
            matrix,
        })
    }

    /// `(M n_r) x n_s` matrix with entry `(i, j) = σ_r,i σ_s,j`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rx(&self) -> &[f64] {
        &self.rx
    }

    pub fn tx(&self) -> &[f64] {
        &self.tx
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// Receive harmonics per user, `n_r`.
    pub fn per_user_rows(&self) -> usize {
        self.rx.len()
    }

    /// Transmit harmonics `n_s`.
    pub fn tx_harmonics(&self) -> usize {
        self.tx.len()
    }

    /// Total streams `K = M n_r`.
    pub fn streams(&self) -> usize {
        self.users * self.rx.len()
    }

    /// Receive sigmas repeated for every user (length `K`).
    pub fn row_sigma(&self) -> Vec<f64> {
        (0..self.streams()).map(|i| self.rx[i % self.rx.len()]).collect()
    }

    /// Mean squared transmit sigma `σ̂_s²`.
    pub fn mean_tx_power(&self) -> f64 {
        self.tx.iter().map(|s| s * s).sum::<f64>() / self.tx.len() as f64
    }
}

pub fn separable_sigma(rx_map: &VarianceMap, tx_map: &VarianceMap, users: usize) -> Result<SeparableSigma> {
    SeparableSigma::from_vectors(
        rx_map.normalized_sigma().to_vec(),
        tx_map.normalized_sigma().to_vec(),
        users,
    )
}
