//! Transforms, fractional-Laplacian multipliers and norm approximations on the
//! periodic box.
//!
//! Conventions, fixed once for the whole crate:
//! - forward transform divides by `N^dim`, so `coeff(0)` is the field mean and
//!   `f(x) = sum_k coeff(k) e^{i xi_k . x}`;
//! - Parseval reads `dx^dim * sum |f|^2 = (2L)^dim * sum |coeff|^2`;
//! - the Nyquist mode `k = -N/2` enters multipliers through `|xi|` like any
//!   other mode (every multiplier here is a function of `|xi|` alone).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{parity_sign, transform_all_axes};
use crate::field::{RealField, SpectralField};

/// Relative Hermitian-symmetry tolerance accepted by [`inverse_transform`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative imaginary residue discarded silently by [`inverse_transform`].
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;
/// Relative size below which the zero mode counts as vanishing.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

/// Forward discrete Fourier transform of a real field.
pub fn forward_transform(f: &RealField) -> Result<SpectralField> {
    let grid = *f.grid();
    let mut buf: Vec<Complex64> =
        f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_all_axes(&grid, &mut buf, true);
    let scale = 1.0 / grid.len() as f64;
    for (flat, c) in buf.iter_mut().enumerate() {
        *c *= scale * parity_sign(&grid, flat);
    }
    SpectralField::new(grid, buf)
}

/// Inverse transform back to a real field.
///
/// Rejects inputs whose Hermitian symmetry is broken beyond [`HERMITIAN_TOL`]
/// (relative to the largest coefficient), naming the worst offending mode.
/// Any imaginary residue after the transform is discarded when below
/// [`IMAG_RESIDUE_TOL`] relative to the real part, and is an error above it.
pub fn inverse_transform(f: &SpectralField) -> Result<RealField> {
    let grid = *f.grid();
    let max_coeff = f.max_abs();
    if max_coeff > 0.0 {
        let (violation, mode) = f.hermitian_violation();
        if violation > HERMITIAN_TOL * max_coeff {
            return Err(Error::HermitianViolation {
                mode,
                violation: violation / max_coeff,
                tolerance: HERMITIAN_TOL,
            });
        }
    }
    let mut buf: Vec<Complex64> = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(flat, &c)| c * parity_sign(&grid, flat))
        .collect();
    transform_all_axes(&grid, &mut buf, false);

    let max_re = buf.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
    let max_im = buf.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    if max_im > IMAG_RESIDUE_TOL * max_re.max(f64::MIN_POSITIVE) {
        return Err(Error::ImaginaryResidue {
            residue: max_im / max_re.max(f64::MIN_POSITIVE),
            tolerance: IMAG_RESIDUE_TOL,
        });
    }
    RealField::new(grid, buf.into_iter().map(|c| c.re).collect())
}

/// Apply the Fourier multiplier `|xi|^{2s}` of `(-Delta)^s`.
///
/// For `s < 0` the zero mode must vanish (relative to the largest coefficient);
/// it is then pinned to exactly zero in the output.
pub fn frac_laplacian(f: &SpectralField, s: f64) -> Result<SpectralField> {
    let grid = *f.grid();
    if s < 0.0 {
        let zero_mode = f.coeffs()[0].norm();
        let max_coeff = f.max_abs();
        if zero_mode > MEAN_ZERO_TOL * max_coeff {
            return Err(Error::MeanZeroRequired { zero_mode, max_coeff });
        }
    }
    let mut coeffs = f.coeffs().to_vec();
    for (flat, c) in coeffs.iter_mut().enumerate() {
        *c *= grid.xi_squared(flat).powf(s);
    }
    if s < 0.0 {
        coeffs[0] = Complex64::new(0.0, 0.0);
    }
    SpectralField::new(grid, coeffs)
}

/// Exponent selector for [`lq_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lq {
    One,
    Two,
    Infinity,
    /// General finite exponent `q >= 1`.
    Power(f64),
}

/// Riemann-sum approximation of the whole-space `L^q` norm:
/// `(dx^dim * sum |f|^q)^(1/q)` for finite `q`, `max |f|` for `q = infinity`.
pub fn lq_norm(f: &RealField, q: Lq) -> f64 {
    let dv = f.grid().cell_volume();
    match q {
        Lq::One => dv * pairwise_sum(f.values(), |v| v.abs()),
        Lq::Two => (dv * pairwise_sum(f.values(), |v| v * v)).sqrt(),
        Lq::Infinity => f.max_abs(),
        Lq::Power(p) => {
            assert!(p >= 1.0, "L^q norm needs q >= 1, got {p}");
            (dv * pairwise_sum(f.values(), |v| v.abs().powf(p))).powf(1.0 / p)
        }
    }
}

/// `L^2` norm evaluated from spectral coefficients via Parseval:
/// `((2L)^dim * sum |coeff|^2)^(1/2)`.
pub fn l2_norm_spectral(f: &SpectralField) -> f64 {
    let grid = f.grid();
    let vol = (2.0 * grid.half_length()).powi(grid.dim() as i32);
    (vol * pairwise_sum_complex(f.coeffs())).sqrt()
}

/// Project onto the Hermitian subspace: `c(k), c(-k) <- (c(k) + conj(c(-k)))/2`,
/// self-conjugate modes forced real. Combinations of transformed fields pick up
/// round-off asymmetry at the scale of their inputs; when the combination is
/// itself exponentially small this restores exact symmetry before inversion.
pub fn symmetrize_hermitian(grid: &crate::grid::GridSpec, coeffs: &mut [Complex64]) {
    for flat in 0..coeffs.len() {
        let conj_flat = grid.conjugate_index(flat);
        if conj_flat > flat {
            let avg = 0.5 * (coeffs[flat] + coeffs[conj_flat].conj());
            coeffs[flat] = avg;
            coeffs[conj_flat] = avg.conj();
        } else if conj_flat == flat {
            coeffs[flat] = Complex64::new(coeffs[flat].re, 0.0);
        }
    }
}

/// Inverse transform of a derived combination that is real by construction.
/// Projects onto the Hermitian subspace first: multiplier powers amplify the
/// round-off asymmetry of the inputs (by up to the Nyquist symbol), which
/// would otherwise trip the symmetry gate once the combination itself decays.
pub fn inverse_transform_symmetrized(f: &SpectralField) -> Result<RealField> {
    let mut coeffs = f.coeffs().to_vec();
    symmetrize_hermitian(f.grid(), &mut coeffs);
    inverse_transform(&SpectralField::new(*f.grid(), coeffs)?)
}

/// Pairwise summation with a fixed association order, so results do not depend
/// on any parallel schedule and round-off stays `O(log N)`.
fn pairwise_sum(values: &[f64], f: impl Fn(f64) -> f64 + Copy) -> f64 {
    fn go(values: &[f64], f: impl Fn(f64) -> f64 + Copy) -> f64 {
        if values.len() <= 8 {
            values.iter().map(|&v| f(v)).sum()
        } else {
            let mid = values.len() / 2;
            go(&values[..mid], f) + go(&values[mid..], f)
        }
    }
    go(values, f)
}

fn pairwise_sum_complex(values: &[Complex64]) -> f64 {
    fn go(values: &[Complex64]) -> f64 {
        if values.len() <= 8 {
            values.iter().map(|c| c.norm_sqr()).sum()
        } else {
            let mid = values.len() / 2;
            go(&values[..mid]) + go(&values[mid..])
        }
    }
    go(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::f64::consts::PI;

    fn grid_1d(n: usize, l: f64) -> GridSpec {
        GridSpec::new(1, n, l, 1.0).unwrap()
    }

    #[test]
    fn constant_field_transforms_to_pure_mean() {
        for dim in 1..=3 {
            let g = GridSpec::new(dim, 8, 2.0, 1.0).unwrap();
            let f = RealField::from_fn(g, |_| 1.0).unwrap();
            let spec = forward_transform(&f).unwrap();
            assert!((spec.coeffs()[0].re - 1.0).abs() < 1e-14);
            assert!(spec.coeffs()[0].im.abs() < 1e-14);
            for &c in &spec.coeffs()[1..] {
                assert!(c.norm() < 1e-13);
            }
        }
    }

    #[test]
    fn cosine_splits_into_two_half_modes() {
        let g = grid_1d(64, 5.0);
        let f = RealField::from_fn(g, |x| (PI * x[0] / 5.0).cos()).unwrap();
        let spec = forward_transform(&f).unwrap();
        for flat in 0..g.len() {
            let k = g.signed_mode(flat);
            let c = spec.coeffs()[flat];
            if k == 1 || k == -1 {
                assert!((c.re - 0.5).abs() < 1e-13, "mode {k}: {c}");
                assert!(c.im.abs() < 1e-13);
            } else {
                assert!(c.norm() < 1e-13, "mode {k}: {c}");
            }
        }
    }

    #[test]
    fn laplacian_eigenfunction_on_pi_box() {
        // L = pi makes xi_k = k; sin(x) is an eigenfunction of -Delta with eigenvalue 1.
        let g = grid_1d(64, PI);
        let f = RealField::from_fn(g, |x| x[0].sin()).unwrap();
        let spec = forward_transform(&f).unwrap();
        let lap = frac_laplacian(&spec, 1.0).unwrap();
        let back = inverse_transform(&lap).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sin_2x_with_sigma_2_multiplier_is_16() {
        let g = GridSpec::new(1, 64, PI, 2.0).unwrap();
        let f = RealField::from_fn(g, |x| (2.0 * x[0]).sin()).unwrap();
        let spec = forward_transform(&f).unwrap();
        // s = sigma = 2 gives |xi|^{2s} = |2|^4 = 16 on the active modes
        let lap = frac_laplacian(&spec, 2.0).unwrap();
        for flat in 0..g.len() {
            if g.signed_mode(flat).abs() == 2 {
                let ratio = lap.coeffs()[flat].norm() / spec.coeffs()[flat].norm();
                assert!((ratio - 16.0).abs() < 1e-12, "ratio = {ratio}");
            }
        }
        // round-off on silent modes is amplified by up to (N/2)^4; stay coarse here
        let back = inverse_transform(&lap).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - 16.0 * b).abs() < 1e-8);
        }
    }

    #[test]
    fn unit_xi_modes_are_fixed_points_of_any_power() {
        // L = pi puts |xi| = 1 at k = +-1 for sigma arbitrary.
        let g = grid_1d(32, PI);
        let f = RealField::from_fn(g, |x| x[0].cos()).unwrap();
        let spec = forward_transform(&f).unwrap();
        for s in [-1.5, -0.5, 0.0, 0.7, 2.0, 3.25] {
            let out = frac_laplacian(&spec, s).unwrap();
            for flat in 0..g.len() {
                let k = g.signed_mode(flat);
                if k.abs() == 1 {
                    assert!((out.coeffs()[flat] - spec.coeffs()[flat]).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn negative_power_rejects_nonzero_mean() {
        let g = grid_1d(16, 1.0);
        let f = RealField::from_fn(g, |_| 1.0).unwrap();
        let spec = forward_transform(&f).unwrap();
        let err = frac_laplacian(&spec, -1.0).unwrap_err();
        assert!(matches!(err, Error::MeanZeroRequired { .. }));
    }

    #[test]
    fn gaussian_l2_and_l1_norms_match_closed_forms() {
        let g = grid_1d(512, 20.0);
        let f = RealField::from_fn(g, |x| (-x[0] * x[0] / 2.0).exp()).unwrap();
        // integral of e^{-x^2} is sqrt(pi); L2 norm is pi^{1/4}
        let l2 = lq_norm(&f, Lq::Two);
        assert!((l2 - PI.powf(0.25)).abs() < 1e-8, "L2 = {l2}");
        let l1 = lq_norm(&f, Lq::One);
        assert!((l1 - (2.0 * PI).sqrt()).abs() < 1e-8, "L1 = {l1}");
        assert!((lq_norm(&f, Lq::Infinity) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_l2_norm_is_sqrt_volume() {
        let g = GridSpec::new(2, 16, 3.0, 1.0).unwrap();
        let c = 2.5;
        let f = RealField::from_fn(g, |_| c).unwrap();
        let vol: f64 = 6.0 * 6.0;
        assert!((lq_norm(&f, Lq::Two) - c * vol.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hermitian_violation_is_reported_with_worst_mode() {
        let g = grid_1d(8, 1.0);
        let mut spec = SpectralField::zeros(g);
        spec.coeffs_mut()[1] = Complex64::new(0.0, 1.0);
        // conjugate partner left at zero: symmetry broken at k = +-1
        let err = inverse_transform(&spec).unwrap_err();
        match err {
            Error::HermitianViolation { mode, .. } => assert_eq!(mode[0].abs(), 1),
            other => panic!("unexpected error {other}"),
        }
    }
}
