//! Pseudospectral laboratory for the doubly damped evolution equation
//! `u_tt + (-Delta)^sigma u + u_t + (-Delta)^sigma u_t = F(u, u_t)`
//! on a periodic box: exact per-mode linear propagation, exponential time
//! differencing for the semilinear models, decay-rate verification against
//! the sharp dissipation theory, and numeric checks of the auxiliary
//! inequalities that theory rests on.

pub mod bernoulli;
pub mod continuum;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod inequalities;
pub mod nonlinear;
pub mod observables;
pub mod phi;
pub mod picard;
pub mod propagator;
pub mod quadrature;
pub mod rates;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{RealField, SpectralField, StatePair};
pub use grid::GridSpec;
