//! Property tests for the transform layer: round trips, Parseval, and the
//! semigroup law of the fractional Laplacian powers.

use dampwave::spectral::{
    forward_transform, frac_laplacian, inverse_transform, l2_norm_spectral, lq_norm, Lq,
};
use dampwave::{GridSpec, RealField};
use proptest::prelude::*;

fn field_strategy(dim: usize, n: usize) -> impl Strategy<Value = RealField> {
    let len = n.pow(dim as u32);
    prop::collection::vec(-1.0f64..1.0, len).prop_map(move |values| {
        let grid = GridSpec::new(dim, n, 5.0, 1.0).unwrap();
        RealField::new(grid, values).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn round_trip_is_identity_1d(f in field_strategy(1, 64)) {
        let back = inverse_transform(&forward_transform(&f).unwrap()).unwrap();
        let scale = f.max_abs().max(1e-12);
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn parseval_identity_1d(f in field_strategy(1, 64)) {
        let spec = forward_transform(&f).unwrap();
        let direct = lq_norm(&f, Lq::Two);
        let via_coeffs = l2_norm_spectral(&spec);
        prop_assert!((direct - via_coeffs).abs() <= 1e-12 * direct.max(1e-12));
    }

    #[test]
    fn multiplier_powers_compose_on_mean_zero_fields(
        f in field_strategy(1, 64),
        s1 in -0.75f64..1.5,
        s2 in 0.25f64..1.5,
    ) {
        // remove the mean so negative powers are admissible
        let mean = f.values().iter().sum::<f64>() / f.values().len() as f64;
        let f = f.map(|v| v - mean).unwrap();
        let spec = forward_transform(&f).unwrap();
        let composed = frac_laplacian(&frac_laplacian(&spec, s2).unwrap(), s1).unwrap();
        let direct = frac_laplacian(&spec, s1 + s2).unwrap();
        let scale = direct.max_abs().max(1e-12);
        for (a, b) in composed.coeffs().iter().zip(direct.coeffs()) {
            prop_assert!((a - b).norm() <= 1e-12 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn round_trip_is_identity_2d(f in field_strategy(2, 16)) {
        let back = inverse_transform(&forward_transform(&f).unwrap()).unwrap();
        let scale = f.max_abs().max(1e-12);
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn round_trip_is_identity_3d(f in field_strategy(3, 8)) {
        let back = inverse_transform(&forward_transform(&f).unwrap()).unwrap();
        let scale = f.max_abs().max(1e-12);
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn parseval_identity_2d(f in field_strategy(2, 16)) {
        let spec = forward_transform(&f).unwrap();
        let direct = lq_norm(&f, Lq::Two);
        let via_coeffs = l2_norm_spectral(&spec);
        prop_assert!((direct - via_coeffs).abs() <= 1e-12 * direct.max(1e-12));
    }
}
