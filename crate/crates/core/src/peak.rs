//! Frequency peaks: one encoded or predicted spectral component.

use serde::{Deserialize, Serialize};

/// One frequency component: signed Cartesian coordinate, amplitude and phase.
///
/// Coordinates are real-valued so predictions can carry sub-bin positions;
/// encoded peaks sit on integer bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPeak {
    pub u: f64,
    pub v: f64,
    #[serde(rename = "amp")]
    pub amplitude: f64,
    #[serde(rename = "phase_deg", default)]
    pub phase_deg: f64,
}

impl FrequencyPeak {
    pub fn new(u: f64, v: f64, amplitude: f64, phase_deg: f64) -> Self {
        Self {
            u,
            v,
            amplitude,
            phase_deg: wrap_degrees_signed(phase_deg),
        }
    }

    /// Integer-bin peak with zero phase.
    pub fn at(u: i64, v: i64, amplitude: f64) -> Self {
        Self::new(u as f64, v as f64, amplitude, 0.0)
    }
}

/// Wraps an angle in degrees to `[-180, 180)`.
pub fn wrap_degrees_signed(deg: f64) -> f64 {
    let w = (deg + 180.0).rem_euclid(360.0) - 180.0;
    if w == 180.0 {
        -180.0
    } else {
        w
    }
}

/// Wraps an angle in degrees to `[0, 360)`.
pub fn wrap_degrees_unsigned(deg: f64) -> f64 {
    deg.rem_euclid(360.0)
}

/// Circular distance between two angles in degrees, in `[0, 180]`.
pub fn circular_distance_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}
