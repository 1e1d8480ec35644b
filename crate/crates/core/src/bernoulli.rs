//! Exact solution of the scalar Bernoulli problem `w' = -w + w^p`, `w(0) = w0 > 0`.
//!
//! With `v = w^{1-p}` the equation linearizes: `v(t) = (w0^{1-p} - 1) e^{(p-1)t} + 1`,
//! and `w = v^{-1/(p-1)}` while `v > 0`. Data above the unstable equilibrium
//! `w = 1` blow up at `T* = ln(w0^{p-1} / (w0^{p-1} - 1)) / (p - 1)`.
//!
//! This is the pointwise reduction of the semilinear model whose forcing is
//! `|u_t + (-Delta)^sigma u|^p`, which makes it the independent benchmark for
//! the field solver.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BernoulliOutcome {
    Value(f64),
    /// The solution has already escaped to infinity at the requested time.
    BlownUp,
}

fn check_params(w0: f64, p: f64) -> Result<()> {
    if !w0.is_finite() || w0 <= 0.0 {
        return Err(Error::Domain(format!(
            "Bernoulli oracle is restricted to positive data, got w0 = {w0}"
        )));
    }
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::Domain(format!("exponent must satisfy p > 1, got {p}")));
    }
    Ok(())
}

/// `w(t)` for the exact flow, or `BlownUp` when `t >= T*`.
pub fn bernoulli_oracle(w0: f64, p: f64, t: f64) -> Result<BernoulliOutcome> {
    check_params(w0, p)?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("t must be nonnegative, got {t}")));
    }
    let v = (w0.powf(1.0 - p) - 1.0) * ((p - 1.0) * t).exp() + 1.0;
    if v > 0.0 {
        Ok(BernoulliOutcome::Value(v.powf(-1.0 / (p - 1.0))))
    } else {
        Ok(BernoulliOutcome::BlownUp)
    }
}

/// Blow-up time `T*`, or `None` for data with `w0 <= 1` (global decay).
pub fn bernoulli_blowup_time(w0: f64, p: f64) -> Result<Option<f64>> {
    check_params(w0, p)?;
    if w0 <= 1.0 {
        return Ok(None);
    }
    let a = w0.powf(p - 1.0);
    Ok(Some((a / (a - 1.0)).ln() / (p - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::excessive_precision)] // constant frozen from a 50-digit oracle
    fn half_with_square_nonlinearity_at_t_one() {
        // closed form gives w(1) = 1/(e + 1)
        match bernoulli_oracle(0.5, 2.0, 1.0).unwrap() {
            BernoulliOutcome::Value(w) => {
                assert!((w - 1.0 / (1f64.exp() + 1.0)).abs() < 1e-16);
                assert!((w - 0.26894142136999512).abs() < 1e-15);
            }
            BernoulliOutcome::BlownUp => panic!("should not blow up"),
        }
    }

    #[test]
    fn unit_data_is_a_fixed_point() {
        for &p in &[1.5, 2.0, 3.0, 4.7] {
            for &t in &[0.0, 1.0, 100.0] {
                match bernoulli_oracle(1.0, p, t).unwrap() {
                    BernoulliOutcome::Value(w) => assert_eq!(w, 1.0),
                    BernoulliOutcome::BlownUp => panic!("fixed point left"),
                }
            }
        }
    }

    #[test]
    fn doubling_data_blows_up_at_ln_two() {
        let t_star = bernoulli_blowup_time(2.0, 2.0).unwrap().unwrap();
        assert!((t_star - std::f64::consts::LN_2).abs() < 1e-16);
        assert!(matches!(
            bernoulli_oracle(2.0, 2.0, 0.8).unwrap(),
            BernoulliOutcome::BlownUp
        ));
        assert!(matches!(
            bernoulli_oracle(2.0, 2.0, 0.5).unwrap(),
            BernoulliOutcome::Value(_)
        ));
    }

    #[test]
    fn small_data_decays_like_exp_minus_t() {
        // w(t) * e^t converges to (w0^{1-p} - 1)^{-1/(p-1)}
        let (w0, p) = (0.3f64, 2.0f64);
        let c = (w0.powf(1.0 - p) - 1.0f64).powf(-1.0 / (p - 1.0));
        for &t in &[20.0, 40.0] {
            match bernoulli_oracle(w0, p, t).unwrap() {
                BernoulliOutcome::Value(w) => {
                    assert!((w * t.exp() - c).abs() < 1e-6 * c);
                }
                _ => panic!(),
            }
        }
    }

    #[test]
    fn rejects_nonpositive_data() {
        assert!(bernoulli_oracle(0.0, 2.0, 1.0).is_err());
        assert!(bernoulli_oracle(-0.5, 2.0, 1.0).is_err());
        assert!(bernoulli_oracle(0.5, 1.0, 1.0).is_err());
        assert!(bernoulli_blowup_time(1.0, 2.0).unwrap().is_none());
    }
}
