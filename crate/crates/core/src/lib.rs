//! Spatial-Fourier transformation pairs: encode known frequency peaks into
//! images, apply 3D perspective transforms, and predict, capture and invert
//! the induced motion of peaks in the discrete Fourier spectrum.
//!
//! Everything here is a pure function over immutable inputs and safe to call
//! concurrently. The `parallel` feature (on by default) runs transform inner
//! loops on rayon; results are identical to the sequential fallback.

pub mod dft;
pub mod error;
pub mod estimate;
pub mod geometry;
pub mod image;
pub mod pattern;
pub mod peak;
pub mod predict;

pub use dft::{
    center_spectrum, dft_forward, dft_forward_reference, dft_forward_sequential, dft_inverse,
    phase_degrees, uncenter_spectrum, ComplexSpectrum, InverseOutcome, EPS_MAGNITUDE,
};
pub use error::{Error, Result};
pub use estimate::{
    detect_peaks, estimate_affine, measure_phase_set, recover_translation, Detections,
    EstimatedTransform, PeakDetection, Template, TransformClass, DEFAULT_EPS_CLASS,
    DEFAULT_NMS_RADIUS,
};
pub use geometry::{
    center_anchor, perspective_divide, round_half_away, warp_image, warp_image_anchored,
    Coefficients, DecomposedTransform, Interpolation, PerspectiveTransform,
};
pub use image::SpatialImage;
pub use pattern::{crop_window, encode_peaks, tile_periodic, PatternSpec};
pub use peak::{
    circular_distance_deg, wrap_degrees_signed, wrap_degrees_unsigned, FrequencyPeak,
};
pub use predict::{
    build_frequency_map, pair_rotation, pair_scale, pair_shear, predict_peak,
    predict_translation_phase, predict_warp, reference_warp_anchor, FrequencyMap, PredictedPeak,
};
