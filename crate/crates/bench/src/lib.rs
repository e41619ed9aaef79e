//! Shared fixtures for the benchmarks.

use limcyc::{Family, IntegratorConfig, VectorField2};

/// Quintic Lienard field with a single unstable cycle near y = 1.2.
pub fn quintic() -> VectorField2 {
    Family::QuinticLienard { a: 0.0, b: 1.0, c: -1.0 }.build().expect("valid parameters")
}

/// Slow-fast field at the default time-scale ratio.
pub fn slow_fast(a: f64) -> VectorField2 {
    Family::SlowFast { a, eps: 0.1 }.build().expect("valid parameters")
}

pub fn config() -> IntegratorConfig {
    IntegratorConfig::default()
}
