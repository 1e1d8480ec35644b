//! The propagator is an exact semigroup: composing steps must agree with the
//! single combined step to transform round-off, for any state and any split.

use dampwave::propagator::evolve_linear;
use dampwave::spectral::{lq_norm, Lq};
use dampwave::{GridSpec, RealField, StatePair};
use proptest::prelude::*;

fn random_state(dim: usize, n: usize, sigma: f64) -> impl Strategy<Value = StatePair> {
    let len = n.pow(dim as u32);
    (
        prop::collection::vec(-1.0f64..1.0, len),
        prop::collection::vec(-1.0f64..1.0, len),
    )
        .prop_map(move |(u, ut)| {
            let grid = GridSpec::new(dim, n, 5.0, sigma).unwrap();
            StatePair::new(
                RealField::new(grid, u).unwrap(),
                RealField::new(grid, ut).unwrap(),
                0.0,
            )
            .unwrap()
        })
}

fn semigroup_discrepancy(state: &StatePair, t1: f64, t2: f64) -> f64 {
    let two_step = evolve_linear(&evolve_linear(state, t1).unwrap(), t2).unwrap();
    let one_step = evolve_linear(state, t1 + t2).unwrap();
    let du = two_step.u.linear_comb(1.0, &one_step.u, -1.0).unwrap();
    let dut = two_step.ut.linear_comb(1.0, &one_step.ut, -1.0).unwrap();
    let scale = lq_norm(&one_step.u, Lq::Two) + lq_norm(&one_step.ut, Lq::Two);
    (lq_norm(&du, Lq::Two) + lq_norm(&dut, Lq::Two)) / scale.max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn semigroup_1d(state in random_state(1, 64, 1.0), split in 0.05f64..0.95) {
        let t = 1.0;
        let d = semigroup_discrepancy(&state, split * t, (1.0 - split) * t);
        prop_assert!(d <= 1e-12, "relative discrepancy {d}");
    }

    #[test]
    fn semigroup_2d(state in random_state(2, 16, 1.0), split in 0.05f64..0.95) {
        let t = 1.0;
        let d = semigroup_discrepancy(&state, split * t, (1.0 - split) * t);
        prop_assert!(d <= 1e-12, "relative discrepancy {d}");
    }

    #[test]
    fn semigroup_beam_case(state in random_state(1, 64, 2.0), split in 0.05f64..0.95) {
        let t = 0.7;
        let d = semigroup_discrepancy(&state, split * t, (1.0 - split) * t);
        prop_assert!(d <= 1e-12, "relative discrepancy {d}");
    }
}

#[test]
fn spec_split_three_tenths_seven_tenths() {
    // the canonical split 0.3 + 0.7 = 1.0 on a deterministic random state
    let grid = GridSpec::new(1, 128, 5.0, 1.0).unwrap();
    let mut lcg = 0xDEADBEEFu64;
    let mut next = move || {
        lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (lcg >> 33) as f64 / (1u64 << 31) as f64 - 0.5
    };
    let u = RealField::from_fn(grid, |_| next()).unwrap();
    let ut = RealField::from_fn(grid, |_| next()).unwrap();
    let state = StatePair::new(u, ut, 0.0).unwrap();
    let d = semigroup_discrepancy(&state, 0.3, 0.7);
    assert!(d <= 1e-12, "relative discrepancy {d}");
}
