//! Thin engine over `rustfft`: cached plans plus axis-by-axis application for
//! 1-3 dimensional row-major arrays.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridSpec;

type PlanMap = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

thread_local! {
    static PLANS: RefCell<PlanMap> = RefCell::new(HashMap::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut map = cell.borrow_mut();
        map.entry((n, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if forward {
                    planner.plan_fft_forward(n)
                } else {
                    planner.plan_fft_inverse(n)
                }
            })
            .clone()
    })
}

/// Unnormalized transform along every axis of a row-major `[N; dim]` array.
/// Forward applies `sum_j x_j e^{-2 pi i jk/N}` per axis, inverse the conjugate
/// kernel with no scaling.
pub fn transform_all_axes(grid: &GridSpec, data: &mut [Complex64], forward: bool) {
    let n = grid.points();
    let dim = grid.dim();
    debug_assert_eq!(data.len(), grid.len());
    let fft = plan(n, forward);
    let mut line = vec![Complex64::new(0.0, 0.0); n];

    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let lines = data.len() / n;
        for l in 0..lines {
            // Base offset of line `l` along `axis`: enumerate all index tuples
            // with the axis coordinate removed.
            let block = stride * n;
            let base = (l / stride) * block + (l % stride);
            if stride == 1 {
                let seg = &mut data[base..base + n];
                fft.process(seg);
            } else {
                for t in 0..n {
                    line[t] = data[base + t * stride];
                }
                fft.process(&mut line);
                for t in 0..n {
                    data[base + t * stride] = line[t];
                }
            }
        }
    }
}

/// Parity factor `(-1)^(i_0 + ... + i_{dim-1})` translating between the raw DFT
/// phase (samples indexed from 0) and coefficients of `e^{i xi_k x}` on the box
/// `[-L, L)` (samples indexed from `-L`).
pub fn parity_sign(grid: &GridSpec, flat: usize) -> f64 {
    let idx = grid.unravel(flat);
    let mut s = 0usize;
    for &i in idx.iter().take(grid.dim()) {
        s += i;
    }
    if s.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}
