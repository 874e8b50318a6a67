//! Three-dimensional geometry-based stochastic channel model (GSCM) for
//! urban macro (UMa) and urban micro (UMi) deployments.
//!
//! The crate is split along the channel generation pipeline:
//!
//! - [`geometry`]: hexagonal layout, UE dropping with floor-dependent heights,
//!   per-link distances and line-of-sight angles.
//! - [`antenna`]: parabolic element pattern, polarization field patterns and
//!   planar array element positions.
//! - [`largescale`]: LOS probability (type-1 / type-2), environmental height,
//!   LOS / NLOS / outdoor-to-indoor pathloss and shadow fading.
//! - [`fastfading`]: correlated large-scale parameters, clusters, rays,
//!   elevation modelling and the channel coefficient equation.
//! - [`statistics`]: coupling loss, serving-cell association and empirical
//!   distributions of the zenith statistics.
//! - [`config`], [`rng`], [`run`]: declarative configuration, counter-based
//!   random substreams and the seeded drop orchestrator.

pub mod antenna;
pub mod config;
pub mod error;
pub mod fastfading;
pub mod geometry;
pub mod largescale;
pub mod output;
pub mod rng;
pub mod run;
pub mod statistics;

pub use error::{Error, Result};

/// Speed of light used for wavelengths and breakpoint distances (m/s).
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Wrap an angle in degrees into `(-180, 180]`.
pub fn wrap_degrees(angle: f64) -> f64 {
    let mut a = angle % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

/// Fold a zenith angle in degrees into `[0, 180]`.
pub fn fold_zenith(angle: f64) -> f64 {
    let a = angle.rem_euclid(360.0);
    if a > 180.0 {
        360.0 - a
    } else {
        a
    }
}
