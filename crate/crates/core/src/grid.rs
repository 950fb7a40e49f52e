//! Periodic-box discretization, discrete Fourier transforms, the Bessel
//! multiplier `(1+|ξ|²)^s`, and the norms built on top of them.
//!
//! The box is the torus `[-L/2, L/2)^d` sampled at `n` points per axis,
//! stored row-major with axis 0 slowest. Frequencies are angular,
//! `ξ_k = 2πk/L`, so the discrete symbol is literally `(1+|ξ|²)^s`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fft::{self, Direction};
use num_traits::Float;

/// Smallest accepted number of points per axis.
pub const MIN_POINTS: usize = 4;

/// Periodic box descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    lengths: [f64; 3],
}

impl Grid {
    /// Cubic box of side `box_length`.
    pub fn new(dim: usize, n: usize, box_length: f64) -> Result<Self> {
        Self::with_lengths(dim, n, &[box_length; 3][..dim.min(3)])
    }

    /// Box with one side length per axis.
    pub fn with_lengths(dim: usize, n: usize, lengths: &[f64]) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(alloc::format!("dimension {dim} is not in {{1,2,3}}")));
        }
        if n < MIN_POINTS {
            return Err(Error::InvalidGrid(alloc::format!(
                "{n} points per axis, need at least {MIN_POINTS}"
            )));
        }
        if lengths.len() != dim {
            return Err(Error::InvalidGrid(alloc::format!(
                "{} box lengths given for dimension {dim}",
                lengths.len()
            )));
        }
        let mut stored = [0.0; 3];
        for (slot, &len) in stored.iter_mut().zip(lengths) {
            if !(len.is_finite() && len > 0.0) {
                return Err(Error::InvalidGrid(alloc::format!("box length {len} must be positive")));
            }
            *slot = len;
        }
        n.checked_pow(dim as u32)
            .filter(|&total| total <= (1usize << 31))
            .ok_or_else(|| Error::InvalidGrid(alloc::format!("{n}^{dim} points is too many")))?;
        Ok(Grid {
            dim,
            n,
            lengths: stored,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dim]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths().iter().product()
    }

    /// Whether the fast radix-2 transform applies; other sizes use the exact DFT.
    pub fn is_power_of_two(&self) -> bool {
        self.n.is_power_of_two()
    }

    /// Coordinate of sample `i` along `axis`.
    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        -0.5 * self.lengths[axis] + i as f64 * self.spacing(axis)
    }

    /// Per-axis indices of a flat row-major index.
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            idx[axis] = rest % self.n;
            rest /= self.n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.dim).fold(0, |acc, &i| acc * self.n + i)
    }

    /// Physical coordinates of a flat index (unused axes are zero).
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = self.coordinate(axis, idx[axis]);
        }
        x
    }

    /// Signed integer wavenumber of DFT bin `j`, in `(-n/2, n/2]`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if 2 * j <= n {
            j
        } else {
            j - n
        }
    }

    /// Angular frequency `2πk/L` of bin `j` along `axis`.
    pub fn frequency(&self, axis: usize, j: usize) -> f64 {
        2.0 * PI * self.wavenumber(j) as f64 / self.lengths[axis]
    }

    /// `|ξ|²` for every bin, in storage order.
    pub fn frequency_sq(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = (0..self.dim)
            .map(|a| (0..self.n).map(|j| self.frequency(a, j).powi(2)).collect())
            .collect();
        (0..self.len())
            .map(|flat| {
                let idx = self.multi_index(flat);
                (0..self.dim).map(|a| per_axis[a][idx[a]]).sum()
            })
            .collect()
    }

    /// Minimal periodic distance between two flat indices.
    pub fn periodic_distance(&self, a: usize, b: usize) -> f64 {
        let ia = self.multi_index(a);
        let ib = self.multi_index(b);
        let mut sq = 0.0;
        for axis in 0..self.dim {
            let d = ia[axis].abs_diff(ib[axis]);
            let d = d.min(self.n - d) as f64 * self.spacing(axis);
            sq += d * d;
        }
        sq.sqrt()
    }
}

/// Shorthand for [`Grid::new`].
pub fn make_grid(dim: usize, n: usize, box_length: f64) -> Result<Grid> {
    Grid::new(dim, n, box_length)
}

/// Real samples on a [`Grid`], one per point, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Field {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Wraps sampled values, rejecting wrong lengths and non-finite entries.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(alloc::format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field samples"));
        }
        Ok(Field { grid, values })
    }

    /// Samples `f` at every grid point; `f` receives the first `dim` coordinates.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| f(&grid.point(i)[..grid.dim()]))
            .collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Field, mut f: impl FnMut(f64, f64) -> f64) -> Result<Field> {
        self.check_grid(other)?;
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + c * b)
    }

    /// `L²` inner product with rectangle quadrature.
    pub fn dot(&self, other: &Field) -> Result<f64> {
        self.check_grid(other)?;
        let sum: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(sum * self.grid.cell_volume())
    }

    /// `Σ u · cell_volume`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|u|` over the outermost layer of cells.
    pub fn boundary_max_abs(&self) -> f64 {
        let n = self.grid.n();
        let dim = self.grid.dim();
        (0..self.values.len())
            .filter(|&i| {
                let idx = self.grid.multi_index(i);
                idx[..dim].iter().any(|&k| k == 0 || k == n - 1)
            })
            .fold(0.0, |m, i| m.max(self.values[i].abs()))
    }

    /// Periodic shift by whole cells along `axis`: `out(x) = u(x - shift·h)`.
    pub fn roll(&self, axis: usize, shift: isize) -> Field {
        let n = self.grid.n() as isize;
        let mut out = vec![0.0; self.values.len()];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut idx = self.grid.multi_index(i);
            idx[axis] = (idx[axis] as isize - shift).rem_euclid(n) as usize;
            *slot = self.values[self.grid.flat_index(&idx)];
        }
        Field {
            grid: self.grid,
            values: out,
        }
    }

    pub(crate) fn check_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Unnormalized DFT coefficients of a field, indexed like the field.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub fn from_parts(grid: Grid, coefficients: Vec<Complex64>) -> Self {
        assert_eq!(coefficients.len(), grid.len(), "one coefficient per grid point");
        Spectrum { grid, coefficients }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    /// `Σ|û_k|² · cell_volume / n^d`, equal to `‖u‖²_{L²}` by Parseval.
    pub fn power(&self) -> f64 {
        let scale = self.grid.cell_volume() / self.grid.len() as f64;
        self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>() * scale
    }
}

pub fn transform(field: &Field) -> Spectrum {
    let grid = field.grid;
    let mut coefficients: Vec<Complex64> =
        field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::transform(&mut coefficients, grid.n(), grid.dim(), Direction::Forward);
    Spectrum { grid, coefficients }
}

/// Inverse DFT; the imaginary part (roundoff for Hermitian input) is dropped.
pub fn inverse_transform(spectrum: &Spectrum) -> Result<Field> {
    let grid = spectrum.grid;
    let mut data = spectrum.coefficients.clone();
    fft::transform(&mut data, grid.n(), grid.dim(), Direction::Inverse);
    let scale = 1.0 / grid.len() as f64;
    Field::from_values(grid, data.iter().map(|c| c.re * scale).collect())
}

/// Multiplies the spectrum of `field` by `symbol(|ξ|²)`.
pub fn apply_radial_symbol(field: &Field, symbol: impl Fn(f64) -> f64) -> Result<Field> {
    let mut spectrum = transform(field);
    let freq_sq = field.grid.frequency_sq();
    for (c, &xi2) in spectrum.coefficients.iter_mut().zip(&freq_sq) {
        *c *= symbol(xi2);
    }
    inverse_transform(&spectrum)
}

/// `(I-Δ)^s u`, the Fourier multiplier `(1+|ξ|²)^s`.
pub fn apply_multiplier(field: &Field, s: f64) -> Result<Field> {
    if !s.is_finite() {
        return Err(invalid("s", "multiplier exponent must be finite"));
    }
    apply_radial_symbol(field, |xi2| (1.0 + xi2).powf(s))
}

/// Spectral derivative along `axis`; the Nyquist bin of even grids is zeroed.
pub fn spectral_derivative(field: &Field, axis: usize) -> Result<Field> {
    let grid = field.grid;
    if axis >= grid.dim() {
        return Err(invalid("axis", "axis outside the grid dimension"));
    }
    let mut spectrum = transform(field);
    let n = grid.n();
    for (flat, c) in spectrum.coefficients.iter_mut().enumerate() {
        let j = grid.multi_index(flat)[axis];
        if n.is_multiple_of(2) && j == n / 2 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c *= Complex64::new(0.0, grid.frequency(axis, j));
        }
    }
    inverse_transform(&spectrum)
}

/// `‖(I-Δ)^{α/2} u‖²` over the box, via the Parseval sum.
pub fn bessel_norm_sq(field: &Field, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(invalid("alpha", "order must be finite"));
    }
    if !field.is_finite() {
        return Err(Error::NonFinite("bessel_norm_sq input"));
    }
    let grid = field.grid;
    let spectrum = transform(field);
    let freq_sq = grid.frequency_sq();
    let sum: f64 = spectrum
        .coefficients
        .iter()
        .zip(&freq_sq)
        .map(|(c, &xi2)| (1.0 + xi2).powf(alpha) * c.norm_sqr())
        .sum();
    Ok(sum * grid.cell_volume() / grid.len() as f64)
}

/// `Σ V u² · cell_volume`.
pub fn potential_energy_sq(field: &Field, potential: &Field) -> Result<f64> {
    field.check_grid(potential)?;
    let sum: f64 = field
        .values
        .iter()
        .zip(&potential.values)
        .map(|(u, v)| v * u * u)
        .sum();
    Ok(sum * field.grid.cell_volume())
}

/// `‖u‖_λ² = ‖(I-Δ)^{α/2}u‖² + λ∫V u²`.
pub fn weighted_norm_sq(field: &Field, alpha: f64, potential: &Field, lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(invalid("lambda", alloc::format!("{lambda} must be non-negative")));
    }
    if let Some(v) = potential.values.iter().find(|v| **v < 0.0) {
        return Err(invalid(
            "potential",
            alloc::format!("sample {v} is negative; the weighted norm needs V >= 0"),
        ));
    }
    Ok(bessel_norm_sq(field, alpha)? + lambda * potential_energy_sq(field, potential)?)
}

/// `(Σ|u|^r · cell_volume)^{1/r}`; `r = ∞` gives the max norm.
pub fn lp_norm(field: &Field, r: f64) -> Result<f64> {
    if r.is_nan() || r < 1.0 {
        return Err(invalid("r", alloc::format!("{r} is below 1")));
    }
    if r.is_infinite() {
        return Ok(field.max_abs());
    }
    let sum: f64 = field.values.iter().map(|u| u.abs().powf(r)).sum();
    Ok((sum * field.grid.cell_volume()).powf(1.0 / r))
}
