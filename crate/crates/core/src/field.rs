use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// A real-valued field sampled on the grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "field length {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    /// Sample a function of the physical coordinates.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        let mut coords = [0.0f64; 3];
        for flat in 0..grid.len() {
            let idx = grid.unravel(flat);
            for axis in 0..grid.dim() {
                coords[axis] = grid.coordinate(idx[axis]);
            }
            values.push(f(&coords[..grid.dim()]));
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Pointwise map; the result is re-validated for finiteness.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise linear combination `a * self + b * other`.
    pub fn linear_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("fields live on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Self::new(self.grid, values)
    }

    pub fn scale(&self, a: f64) -> Result<Self> {
        self.map(|v| a * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Discrete Fourier coefficients of a real field, full complex storage in
/// row-major mode order (storage index `i` carries signed mode `i` or `i - N`).
///
/// The normalization puts the field mean in `coeff(0)`: the forward transform
/// divides by `N^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "coefficient length {} does not match grid size {}",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    /// Worst Hermitian-symmetry violation and the signed mode where it occurs.
    pub fn hermitian_violation(&self) -> (f64, Vec<i64>) {
        let mut worst = 0.0f64;
        let mut worst_mode = vec![0i64; self.grid.dim()];
        for flat in 0..self.coeffs.len() {
            let conj_flat = self.grid.conjugate_index(flat);
            let diff = (self.coeffs[conj_flat] - self.coeffs[flat].conj()).norm();
            if diff > worst {
                worst = diff;
                let idx = self.grid.unravel(flat);
                worst_mode = (0..self.grid.dim()).map(|a| self.grid.signed_mode(idx[a])).collect();
            }
        }
        (worst, worst_mode)
    }
}

/// Snapshot of the evolving pair `(u, u_t)` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub u: RealField,
    pub ut: RealField,
    pub time: f64,
}

impl StatePair {
    pub fn new(u: RealField, ut: RealField, time: f64) -> Result<Self> {
        if u.grid() != ut.grid() {
            return Err(Error::InvalidGrid("u and u_t live on different grids".into()));
        }
        if !time.is_finite() || time < 0.0 {
            return Err(Error::Domain(format!("state time must be nonnegative, got {time}")));
        }
        Ok(Self { u, ut, time })
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }
}
