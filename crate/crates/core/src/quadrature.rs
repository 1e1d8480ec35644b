//! Adaptive Simpson quadrature with Richardson correction, used by the
//! continuum norm backend and the integral-inequality checks.

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 52;

struct Work<'a, F: Fn(f64) -> f64> {
    f: &'a F,
    /// Absolute tolerance for the whole interval, split per recursion level.
    eps: f64,
    /// Accumulated error estimate of depth-capped panels.
    overrun: f64,
}

impl<F: Fn(f64) -> f64> Work<'_, F> {
    fn simpson(&self, a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)] // endpoint/midpoint samples travel together
    fn recurse(
        &mut self,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        eps: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = self.simpson(a, fa, m, fm, flm);
        let right = self.simpson(m, fm, b, fb, frm);
        let err = (left + right - whole) / 15.0;
        if err.abs() <= eps || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && err.abs() > eps {
                self.overrun += err.abs();
            }
            return left + right + err;
        }
        self.recurse(a, fa, m, fm, flm, left, 0.5 * eps, depth + 1)
            + self.recurse(m, fm, b, fb, frm, right, 0.5 * eps, depth + 1)
    }
}

/// Integrate `f` over the union of `[nodes[i], nodes[i+1]]` panels to the given
/// relative tolerance. Nodes let the caller pin known features (peaks, the
/// removable point of a multiplier) so the initial estimate cannot miss them.
pub fn integrate(f: impl Fn(f64) -> f64, nodes: &[f64], rel_tol: f64) -> Result<f64> {
    assert!(nodes.len() >= 2, "need at least one panel");
    assert!(nodes.windows(2).all(|w| w[0] < w[1]), "nodes must increase");

    // coarse pass fixes the absolute tolerance scale
    let mut coarse = 0.0;
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = 0.5 * (a + b);
        coarse += (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
    }
    let eps_total = rel_tol * coarse.abs().max(f64::MIN_POSITIVE);

    let mut work = Work { f: &f, eps: eps_total, overrun: 0.0 };
    let mut total = 0.0;
    let span: f64 = nodes.last().unwrap() - nodes[0];
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (f(a), f(b));
        let m = 0.5 * (a + b);
        let fm = f(m);
        let whole = work.simpson(a, fa, b, fb, fm);
        let eps = work.eps * ((b - a) / span).max(1e-3);
        total += work.recurse(a, fa, b, fb, fm, whole, eps, 0);
    }

    let requested = rel_tol * total.abs().max(f64::MIN_POSITIVE);
    if work.overrun > 4.0 * requested {
        return Err(Error::QuadratureNoConvergence {
            achieved: work.overrun / total.abs().max(f64::MIN_POSITIVE),
            requested: rel_tol,
        });
    }
    Ok(total)
}
