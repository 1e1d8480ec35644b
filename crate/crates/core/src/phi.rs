//! The entire family `phi_k(z) = sum_{j>=0} z^j / (j+k)!` of exponential-
//! integrator kernels, `phi_0 = exp`, `phi_1(z) = (e^z - 1)/z`.
//!
//! Near zero the upward recurrence `phi_k = (phi_{k-1} - 1/(k-1)!)/z` cancels
//! catastrophically, so below `|z| = 0.5` each value comes from the Taylor
//! series instead (terms fall off faster than 2^-j, machine precision well
//! before 30 terms).

const SERIES_CUTOFF: f64 = 0.5;

/// Inverse factorials 1/0!, 1/1!, ... used by both branches.
fn inv_factorial(n: usize) -> f64 {
    const TABLE: [f64; 24] = [
        1.0,
        1.0,
        0.5,
        1.6666666666666666e-1,
        4.1666666666666664e-2,
        8.333333333333333e-3,
        1.388888888888889e-3,
        1.984126984126984e-4,
        2.48015873015873e-5,
        2.7557319223985893e-6,
        2.755731922398589e-7,
        2.505210838544172e-8,
        2.08767569878681e-9,
        1.6059043836821613e-10,
        1.1470745597729725e-11,
        7.647163731819816e-13,
        4.779477332387385e-14,
        2.8114572543455206e-15,
        1.5619206968586225e-16,
        8.22063524662433e-18,
        4.110317623312165e-19,
        1.9572941063391263e-20,
        8.896791392450574e-22,
        3.868170170630684e-23,
    ];
    if n < TABLE.len() {
        TABLE[n]
    } else {
        let mut v = TABLE[TABLE.len() - 1];
        for m in TABLE.len()..=n {
            v /= m as f64;
        }
        v
    }
}

fn phi_series(k: usize, z: f64) -> f64 {
    let mut term = inv_factorial(k);
    let mut sum = term;
    let mut j = 1usize;
    loop {
        term *= z / (j + k) as f64;
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() || j > 40 {
            return sum;
        }
        j += 1;
    }
}

/// `phi_k(z)` for `k <= 8`, stable on the whole real line.
pub fn phi(k: usize, z: f64) -> f64 {
    debug_assert!(k <= 8, "phi implemented for k <= 8");
    if k == 0 {
        return z.exp();
    }
    if z.abs() < SERIES_CUTOFF {
        return phi_series(k, z);
    }
    let mut v = z.exp();
    for m in 1..=k {
        v = (v - inv_factorial(m - 1)) / z;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi1_matches_expm1_ratio() {
        for &z in &[-30.0f64, -2.0, -0.6, 0.6, 3.0, 20.0] {
            let expect = z.exp_m1() / z;
            assert!((phi(1, z) - expect).abs() <= 1e-14 * expect.abs());
        }
    }

    #[test]
    fn values_at_zero_are_inverse_factorials() {
        assert_eq!(phi(1, 0.0), 1.0);
        assert_eq!(phi(2, 0.0), 0.5);
        assert!((phi(3, 0.0) - 1.0 / 6.0).abs() < 1e-16);
        assert!((phi(8, 0.0) - 1.0 / 40320.0).abs() < 1e-19);
    }

    #[test]
    fn recurrence_consistency_across_the_cutoff() {
        // phi_{k+1}(z) = (phi_k(z) - 1/k!)/z must hold on both sides of 0.5
        for &z in &[0.4999, 0.5001, -0.4999, -0.5001, 1.3, -7.0] {
            for k in 1..8 {
                let lhs = phi(k + 1, z);
                let rhs = (phi(k, z) - inv_factorial(k)) / z;
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1e-300),
                    "k={k} z={z}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn large_negative_arguments_decay_like_inverse_powers() {
        // for x -> infinity: phi_1(-x) = 1/x, phi_2(-x) = (x - 1)/x^2 exactly
        // once e^{-x} underflows
        let x = 1e5;
        assert!((phi(1, -x) - 1.0 / x).abs() < 1e-18);
        assert!((phi(2, -x) - (x - 1.0) / (x * x)).abs() < 1e-18);
    }
}
