use crate::error::{Error, Result};

/// Discretization of the periodic box `[-L, L)^dim` together with the operator
/// exponent `sigma` of the fractional Laplacian `(-Delta)^sigma`.
///
/// Grid spacing is `dx = 2L/N` and the wavenumber attached to the signed index
/// `k in [-N/2, N/2)` along each axis is `xi_k = (pi / L) * k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    points: usize,
    half_length: f64,
    sigma: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points: usize, half_length: f64, sigma: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim must be 1, 2 or 3, got {dim}")));
        }
        if points < 4 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points must be a power of two >= 4, got {points}"
            )));
        }
        if !half_length.is_finite() || half_length <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "half_length must be positive and finite, got {half_length}"
            )));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self { dim, points, half_length, sigma })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Total number of samples `N^dim`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `dx = 2L/N`, identical along every axis.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    /// Volume element `dx^dim` of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Physical coordinate of sample `index` along one axis: `-L + index * dx`.
    pub fn coordinate(&self, index: usize) -> f64 {
        -self.half_length + index as f64 * self.spacing()
    }

    /// Signed mode number for a storage index, mapping `[0, N)` onto `[-N/2, N/2)`.
    pub fn signed_mode(&self, index: usize) -> i64 {
        let n = self.points as i64;
        let i = index as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Wavenumber `xi = (pi / L) * k` for a storage index along one axis.
    pub fn wavenumber(&self, index: usize) -> f64 {
        std::f64::consts::PI / self.half_length * self.signed_mode(index) as f64
    }

    /// Decompose a flat row-major index into per-axis indices.
    pub fn unravel(&self, flat: usize) -> [usize; 3] {
        let n = self.points;
        let mut out = [0usize; 3];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = rem % n;
            rem /= n;
        }
        out
    }

    /// `|xi|^2` for a flat coefficient index.
    pub fn xi_squared(&self, flat: usize) -> f64 {
        let idx = self.unravel(flat);
        let mut s = 0.0;
        for &i in idx.iter().take(self.dim) {
            let xi = self.wavenumber(i);
            s += xi * xi;
        }
        s
    }

    /// `mu = |xi|^{2 sigma}`, the symbol of `(-Delta)^sigma` at a flat index.
    pub fn mu(&self, flat: usize) -> f64 {
        self.xi_squared(flat).powf(self.sigma)
    }

    /// Flat index of the conjugate mode `-k` (per-axis `i -> (N - i) mod N`).
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let n = self.points;
        let idx = self.unravel(flat);
        let mut out = 0usize;
        for &i in idx.iter().take(self.dim) {
            let j = if i == 0 { 0 } else { n - i };
            out = out * n + j;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(GridSpec::new(0, 16, 1.0, 1.0).is_err());
        assert!(GridSpec::new(4, 16, 1.0, 1.0).is_err());
        assert!(GridSpec::new(1, 12, 1.0, 1.0).is_err());
        assert!(GridSpec::new(1, 2, 1.0, 1.0).is_err());
        assert!(GridSpec::new(1, 16, 0.0, 1.0).is_err());
        assert!(GridSpec::new(1, 16, 1.0, -1.0).is_err());
    }

    #[test]
    fn wavenumbers_cover_signed_range() {
        let g = GridSpec::new(1, 8, std::f64::consts::PI, 1.0).unwrap();
        let modes: Vec<i64> = (0..8).map(|i| g.signed_mode(i)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        // L = pi makes xi_k = k exactly
        assert_eq!(g.wavenumber(1), 1.0);
        assert_eq!(g.wavenumber(7), -1.0);
    }

    #[test]
    fn conjugate_index_is_involutive() {
        let g = GridSpec::new(2, 8, 1.0, 1.0).unwrap();
        for flat in 0..g.len() {
            let c = g.conjugate_index(flat);
            assert_eq!(g.conjugate_index(c), flat);
        }
    }

    #[test]
    fn spacing_and_volume() {
        let g = GridSpec::new(2, 16, 20.0, 1.0).unwrap();
        assert_eq!(g.spacing(), 2.5);
        assert_eq!(g.cell_volume(), 6.25);
        assert_eq!(g.len(), 256);
        assert_eq!(g.coordinate(0), -20.0);
    }
}
