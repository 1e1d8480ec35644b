//! Scalar diagnostics of a state: norms, energies and the damped combinations
//! whose decay the rate analysis checks.
//!
//! `u_tt` is never finite-differenced; wherever it appears it is reconstructed
//! from the equation itself,
//! `u_tt = -(-Delta)^sigma u - u_t - (-Delta)^sigma u_t + F`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{RealField, StatePair};
use crate::spectral::{
    forward_transform, frac_laplacian, inverse_transform_symmetrized, lq_norm, Lq, MEAN_ZERO_TOL,
};

/// Registry of every observable, in the order columns appear in reports.
pub const OBSERVABLE_NAMES: [&str; 13] = [
    "l2_u",
    "l1_u",
    "linf_u",
    "l2_ut",
    "l2_elastic",
    "l2_elastic2",
    "energy",
    "q_l2",
    "q_linf",
    "l2_ut_plus_u",
    "l2_diff",
    "l2_utt_combo",
    "l2_inv_combo",
];

/// A named scalar time series.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ObservableSeries {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), times: Vec::new(), values: Vec::new() }
    }

    pub fn push(&mut self, t: f64, v: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::Domain(format!(
                    "series times must be strictly increasing, got {t} after {last}"
                )));
            }
        }
        if !v.is_finite() {
            return Err(Error::Domain(format!("series value must be finite, got {v} at t={t}")));
        }
        self.times.push(t);
        self.values.push(v);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// The combination `w = u_t + (-Delta)^sigma u` as a real field.
pub fn q_combo_field(state: &StatePair) -> Result<RealField> {
    let u_hat = forward_transform(&state.u)?;
    let lap = frac_laplacian(&u_hat, state.grid().sigma())?;
    let lap_real = inverse_transform_symmetrized(&lap)?;
    state.ut.linear_comb(1.0, &lap_real, 1.0)
}

/// Every registered observable of a state.
///
/// `rhs` is the current value of the nonlinearity; it only enters the
/// `u_tt`-based combination and defaults to zero forcing when absent. The
/// `(-Delta)^{-sigma}`-based entry requires `u_t` to be mean-zero and is
/// omitted from the map (not an error) when the precondition fails; all other
/// entries are always present.
pub fn observe(
    state: &StatePair,
    rhs: Option<&RealField>,
) -> Result<BTreeMap<&'static str, f64>> {
    let grid = state.grid();
    let sigma = grid.sigma();
    let mut out = BTreeMap::new();

    let u_hat = forward_transform(&state.u)?;
    let ut_hat = forward_transform(&state.ut)?;

    let elastic_half = inverse_transform_symmetrized(&frac_laplacian(&u_hat, sigma / 2.0)?)?;
    let elastic_full = inverse_transform_symmetrized(&frac_laplacian(&u_hat, sigma)?)?;

    let l2_ut = lq_norm(&state.ut, Lq::Two);
    let l2_elastic = lq_norm(&elastic_half, Lq::Two);

    out.insert("l2_u", lq_norm(&state.u, Lq::Two));
    out.insert("l1_u", lq_norm(&state.u, Lq::One));
    out.insert("linf_u", lq_norm(&state.u, Lq::Infinity));
    out.insert("l2_ut", l2_ut);
    out.insert("l2_elastic", l2_elastic);
    out.insert("l2_elastic2", lq_norm(&elastic_full, Lq::Two));
    out.insert("energy", l2_ut * l2_ut + l2_elastic * l2_elastic);

    let w = state.ut.linear_comb(1.0, &elastic_full, 1.0)?;
    out.insert("q_l2", lq_norm(&w, Lq::Two));
    out.insert("q_linf", lq_norm(&w, Lq::Infinity));

    let ut_plus_u = state.ut.linear_comb(1.0, &state.u, 1.0)?;
    out.insert("l2_ut_plus_u", lq_norm(&ut_plus_u, Lq::Two));

    let diff = state.ut.linear_comb(1.0, &elastic_full, -1.0)?;
    out.insert("l2_diff", lq_norm(&diff, Lq::Two));

    // u_tt + (-Delta)^sigma u_t = F - w from the equation
    let utt_combo = match rhs {
        Some(f) => f.linear_comb(1.0, &w, -1.0)?,
        None => w.scale(-1.0)?,
    };
    out.insert("l2_utt_combo", lq_norm(&utt_combo, Lq::Two));

    // u + (-Delta)^{-sigma} u_t needs a mean-zero velocity
    let zero_mode = ut_hat.coeffs()[0].norm();
    if zero_mode <= MEAN_ZERO_TOL * ut_hat.max_abs() {
        let inv = inverse_transform_symmetrized(&frac_laplacian(&ut_hat, -sigma)?)?;
        let combo = state.u.linear_comb(1.0, &inv, 1.0)?;
        out.insert("l2_inv_combo", lq_norm(&combo, Lq::Two));
    }

    Ok(out)
}

/// Spectral check of the diffusion factorization: after an exact linear
/// evolution from `(u0, u1)`, `u_t + u` must equal the pure diffusion flow
/// `e^{-mu t} (u0 + u1)` mode by mode. Returns the worst relative deviation.
pub fn diffusion_identity_error(
    evolved: &StatePair,
    u0: &RealField,
    u1: &RealField,
) -> Result<f64> {
    let grid = evolved.grid();
    let t = evolved.time;
    let sum_hat = forward_transform(&u0.linear_comb(1.0, u1, 1.0)?)?;
    let u_hat = forward_transform(&evolved.u)?;
    let ut_hat = forward_transform(&evolved.ut)?;
    let scale = sum_hat.max_abs().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for flat in 0..grid.len() {
        let mu = grid.mu(flat);
        let expect = sum_hat.coeffs()[flat] * (-mu * t).exp();
        let got = ut_hat.coeffs()[flat] + u_hat.coeffs()[flat];
        worst = worst.max((got - expect).norm() / scale);
    }
    Ok(worst)
}

/// Test helper used across the crate: a smooth positive bump with unit peak.
pub fn gaussian_field(grid: crate::grid::GridSpec, amp: f64, width: f64) -> Result<RealField> {
    RealField::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|&c| c * c).sum();
        amp * (-r2 / (2.0 * width * width)).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::propagator::evolve_linear;

    #[test]
    fn zero_state_reports_all_zero() {
        let g = GridSpec::new(1, 32, 5.0, 1.0).unwrap();
        let s = StatePair::new(RealField::zeros(g), RealField::zeros(g), 0.0).unwrap();
        let obs = observe(&s, None).unwrap();
        assert_eq!(obs.len(), OBSERVABLE_NAMES.len());
        for (name, v) in obs {
            assert_eq!(v, 0.0, "{name}");
        }
    }

    #[test]
    fn linear_run_q_and_utt_track_exponential_decay() {
        let g = GridSpec::new(1, 256, 20.0, 1.0).unwrap();
        let u1 = gaussian_field(g, 1.0, 1.0).unwrap();
        let norm_u1 = lq_norm(&u1, Lq::Two);
        let state = StatePair::new(RealField::zeros(g), u1, 0.0).unwrap();
        for &t in &[0.5, 2.0, 7.0] {
            let s = evolve_linear(&state, t).unwrap();
            let obs = observe(&s, None).unwrap();
            let expect = (-t).exp() * norm_u1;
            assert!((obs["q_l2"] - expect).abs() <= 1e-10 * expect, "t={t}");
            assert!((obs["l2_utt_combo"] - expect).abs() <= 1e-10 * expect, "t={t}");
            // triangle bound | ||u_t|| - ||(-Delta)^sigma u|| | <= Q
            let gap = (obs["l2_ut"] - obs["l2_elastic2"]).abs();
            assert!(gap <= obs["q_l2"] * (1.0 + 1e-12), "t={t}");
        }
    }

    #[test]
    fn linear_energy_is_nonincreasing() {
        let g = GridSpec::new(1, 128, 15.0, 1.0).unwrap();
        let u1 = gaussian_field(g, 1.0, 1.5).unwrap();
        let mut state = StatePair::new(RealField::zeros(g), u1, 0.0).unwrap();
        let mut prev = f64::INFINITY;
        for _ in 0..40 {
            state = evolve_linear(&state, 0.25).unwrap();
            let e = observe(&state, None).unwrap()["energy"];
            assert!(e <= prev * (1.0 + 1e-12));
            prev = e;
        }
    }

    #[test]
    fn diffusion_identity_holds_mode_by_mode() {
        let g = GridSpec::new(1, 128, 15.0, 1.0).unwrap();
        let u0 = gaussian_field(g, 0.7, 2.0).unwrap();
        let u1 = gaussian_field(g, 1.0, 1.0).unwrap();
        let state = StatePair::new(u0.clone(), u1.clone(), 0.0).unwrap();
        for &t in &[0.3, 1.0, 4.0] {
            let s = evolve_linear(&state, t - state.time).unwrap();
            let err = diffusion_identity_error(&s, &u0, &u1).unwrap();
            assert!(err < 1e-12, "t={t}: {err}");
        }
    }

    #[test]
    fn inv_combo_requires_mean_zero_velocity() {
        let g = GridSpec::new(1, 64, 10.0, 1.0).unwrap();
        let u1 = gaussian_field(g, 1.0, 1.0).unwrap();
        let s = StatePair::new(RealField::zeros(g), u1.clone(), 0.0).unwrap();
        let obs = observe(&s, None).unwrap();
        assert!(!obs.contains_key("l2_inv_combo"), "nonzero-mean data");

        // subtracting the mean restores the entry
        let mean = u1.values().iter().sum::<f64>() / u1.values().len() as f64;
        let zeroed = u1.map(|v| v - mean).unwrap();
        let s = StatePair::new(RealField::zeros(g), zeroed, 0.0).unwrap();
        let obs = observe(&s, None).unwrap();
        assert!(obs.contains_key("l2_inv_combo"));
    }

    #[test]
    fn series_rejects_non_monotone_times() {
        let mut s = ObservableSeries::new("l2_u");
        s.push(0.0, 1.0).unwrap();
        s.push(1.0, 0.5).unwrap();
        assert!(s.push(1.0, 0.4).is_err());
        assert!(s.push(2.0, f64::NAN).is_err());
    }
}
