//! Planar patch arrays, the wavenumber lattice ellipse and the discretised
//! plane-wave harmonic bases built on top of them.
//!
//! All lengths are expressed in units of the reference wavelength unless a
//! geometry is built with an explicit wavelength.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

// Float supplies libm-backed math when std is absent.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// A rectangular grid of `n_h x n_v` patch antennas with uniform spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    n_h: usize,
    n_v: usize,
    spacing: f64,
    wavelength: f64,
}

impl ArrayGeometry {
    /// `spacing` is the centre-to-centre distance in wavelengths (Δ/λ).
    pub fn new(n_h: usize, n_v: usize, spacing: f64) -> Result<Self> {
        Self::with_wavelength(n_h, n_v, spacing, 1.0)
    }

    pub fn with_wavelength(n_h: usize, n_v: usize, spacing: f64, wavelength: f64) -> Result<Self> {
        if n_h == 0 || n_v == 0 {
            return Err(Error::InvalidGeometry("patch counts must be at least 1"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidGeometry("spacing must be positive"));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidGeometry("wavelength must be positive"));
        }
        Ok(Self {
            n_h,
            n_v,
            spacing,
            wavelength,
        })
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    /// Spacing in wavelengths.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn patch_count(&self) -> usize {
        self.n_h * self.n_v
    }

    /// Physical patch spacing Δ in length units.
    pub fn spacing_length(&self) -> f64 {
        self.spacing * self.wavelength
    }

    /// Side lengths `(L_x, L_y)` in length units.
    pub fn side_lengths(&self) -> (f64, f64) {
        let d = self.spacing_length();
        (self.n_h as f64 * d, self.n_v as f64 * d)
    }

    /// Side lengths divided by the wavelength.
    pub fn normalized_sides(&self) -> (f64, f64) {
        (
            self.n_h as f64 * self.spacing,
            self.n_v as f64 * self.spacing,
        )
    }

    /// Grid indices `(i, j)` of the `n`-th patch (0-based), row by row.
    pub fn grid_index(&self, n: usize) -> (usize, usize) {
        (n % self.n_h, n / self.n_h)
    }

    /// In-plane coordinates of the `n`-th patch in the surface frame, where
    /// the surface spans the local x-y plane and z is its normal.
    fn local_position(&self, n: usize) -> [f64; 3] {
        let (i, j) = self.grid_index(n);
        let d = self.spacing_length();
        [i as f64 * d, j as f64 * d, 0.0]
    }
}

/// Patch locations `[0, i(n)Δ, j(n)Δ]` with `i(n) = n mod n_h` and
/// `j(n) = floor(n / n_h)` for 0-based `n`.
pub fn patch_positions(geometry: &ArrayGeometry) -> Vec<[f64; 3]> {
    let d = geometry.spacing_length();
    (0..geometry.patch_count())
        .map(|n| {
            let (i, j) = geometry.grid_index(n);
            [0.0, i as f64 * d, j as f64 * d]
        })
        .collect()
}

/// Integer harmonic indices `(ℓx, ℓy)` inside the lattice ellipse of an
/// aperture, ordered by `ℓy` and then `ℓx`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavenumberLattice {
    cells: Vec<(i32, i32)>,
    side_x: f64,
    side_y: f64,
}

/// Slack for points that sit on the ellipse up to rounding of `n * Δ`.
const ELLIPSE_SLACK: f64 = 1e-12;

impl WavenumberLattice {
    /// Builds a lattice from explicit cells. Cells are sorted into the
    /// canonical order and deduplicated.
    pub fn from_cells(mut cells: Vec<(i32, i32)>, side_x: f64, side_y: f64) -> Result<Self> {
        if !(side_x > 0.0 && side_y > 0.0) {
            return Err(Error::NonPositive("aperture side"));
        }
        cells.sort_by_key(|&(lx, ly)| (ly, lx));
        cells.dedup();
        Ok(Self {
            cells,
            side_x,
            side_y,
        })
    }

    pub fn cells(&self) -> &[(i32, i32)] {
        &self.cells
    }

    pub fn cardinality(&self) -> usize {
        self.cells.len()
    }

    /// Aperture sides `(L_x/λ, L_y/λ)` the lattice was built for.
    pub fn sides(&self) -> (f64, f64) {
        (self.side_x, self.side_y)
    }

    pub fn contains(&self, cell: (i32, i32)) -> bool {
        self.cells
            .binary_search_by_key(&(cell.1, cell.0), |&(lx, ly)| (ly, lx))
            .is_ok()
    }

    /// Keeps only cells for which `keep` returns true, preserving order.
    pub fn retain(&self, mut keep: impl FnMut(usize, (i32, i32)) -> bool) -> Self {
        let cells = self
            .cells
            .iter()
            .enumerate()
            .filter(|&(idx, &c)| keep(idx, c))
            .map(|(_, &c)| c)
            .collect();
        Self {
            cells,
            side_x: self.side_x,
            side_y: self.side_y,
        }
    }
}

/// Inclusive index range `[-ceil(L/λ), ceil(L/λ) - 1]` of the cells that tile
/// the square `[-1, 1]` in normalised wavenumber.
pub fn enumeration_range(side: f64) -> (i32, i32) {
    let r = (side - ELLIPSE_SLACK).ceil() as i32;
    (-r, r - 1)
}

/// Every integer pair with `(ℓx λ/L_x)^2 + (ℓy λ/L_y)^2 <= 1`.
pub fn lattice_ellipse(geometry: &ArrayGeometry) -> WavenumberLattice {
    let (sx, sy) = geometry.normalized_sides();
    let rx = (sx + ELLIPSE_SLACK).floor() as i32;
    let ry = (sy + ELLIPSE_SLACK).floor() as i32;
    let mut cells = Vec::new();
    for ly in -ry..=ry {
        for lx in -rx..=rx {
            let u = lx as f64 / sx;
            let v = ly as f64 / sy;
            if u * u + v * v <= 1.0 + ELLIPSE_SLACK {
                cells.push((lx, ly));
            }
        }
    }
    WavenumberLattice {
        cells,
        side_x: sx,
        side_y: sy,
    }
}

/// Which end of the link a basis describes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Side {
    /// Base-station surface: negative exponent, anchored at the origin.
    Transmit,
    /// User surface: positive exponent, translated to `origin` (length units).
    Receive { origin: [f64; 3] },
}

/// Default position of the `m`-th user surface (0-based): 25λ above the base
/// station and 10λ·m along x.
pub fn default_user_origin(m: usize, wavelength: f64) -> [f64; 3] {
    [10.0 * wavelength * m as f64, 0.0, 25.0 * wavelength]
}

/// Semi-unitary matrix whose columns are the sampled plane-wave harmonics of
/// a lattice on an array.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    matrix: DMatrix<Complex64>,
    geometry: ArrayGeometry,
    lattice: WavenumberLattice,
    side: Side,
}

impl HarmonicBasis {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn lattice(&self) -> &WavenumberLattice {
        &self.lattice
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Largest entry of `|U^H U - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0f64;
        for (idx, z) in gram.iter().enumerate() {
            let (r, c) = (idx % gram.nrows(), idx / gram.nrows());
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((z - Complex64::new(target, 0.0)).norm());
        }
        worst
    }
}

/// Axial wavenumber `γ(ℓx, ℓy) = (2π/λ) sqrt(1 - (λℓx/L_x)^2 - (λℓy/L_y)^2)`,
/// clamped at zero on the ellipse boundary.
pub fn axial_wavenumber(cell: (i32, i32), sides: (f64, f64), wavelength: f64) -> f64 {
    let u = cell.0 as f64 / sides.0;
    let v = cell.1 as f64 / sides.1;
    2.0 * PI / wavelength * (1.0 - u * u - v * v).max(0.0).sqrt()
}

/// Builds the `N x n` harmonic basis of `lattice` on `geometry`. Entry
/// `(j, c)` is `exp(∓i(2π ℓx x_j/L_x + 2π ℓy y_j/L_y + γ z_j)) / sqrt(N)`.
pub fn harmonic_basis(
    geometry: &ArrayGeometry,
    lattice: &WavenumberLattice,
    side: Side,
) -> Result<HarmonicBasis> {
    let sides = geometry.normalized_sides();
    let (lat_x, lat_y) = lattice.sides();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if !close(lat_x, sides.0) || !close(lat_y, sides.1) {
        return Err(Error::LatticeMismatch {
            lattice_x: lat_x,
            lattice_y: lat_y,
            geometry_x: sides.0,
            geometry_y: sides.1,
        });
    }

    let (sign, origin) = match side {
        Side::Transmit => (-1.0, [0.0; 3]),
        Side::Receive { origin } => (1.0, origin),
    };
    let (len_x, len_y) = geometry.side_lengths();
    let n = geometry.patch_count();
    let scale = 1.0 / (n as f64).sqrt();
    let positions: Vec<[f64; 3]> = (0..n)
        .map(|j| {
            let p = geometry.local_position(j);
            [p[0] + origin[0], p[1] + origin[1], p[2] + origin[2]]
        })
        .collect();

    let matrix = DMatrix::from_fn(n, lattice.cardinality(), |j, c| {
        let cell = lattice.cells()[c];
        let gamma = axial_wavenumber(cell, sides, geometry.wavelength());
        let p = positions[j];
        let phase = 2.0 * PI * cell.0 as f64 * p[0] / len_x
            + 2.0 * PI * cell.1 as f64 * p[1] / len_y
            + gamma * p[2];
        let theta = sign * phase;
        Complex64::new(scale * theta.cos(), scale * theta.sin())
    });

    Ok(HarmonicBasis {
        matrix,
        geometry: *geometry,
        lattice: lattice.clone(),
        side,
    })
}
