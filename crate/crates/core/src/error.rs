//! Crate-wide error type.

/// Errors raised by transform construction, spectral analysis and estimation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("image dimensions must be non-zero")]
    EmptyImage,

    #[error("sample grid holds {got} values, expected {expected}")]
    SampleCount { expected: usize, got: usize },

    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),

    #[error("normalization range invalid: max ({max}) must exceed min ({min})")]
    InvalidRange { min: f64, max: f64 },

    #[error("spectrum is centered; uncenter it before inversion")]
    CenteredSpectrum,

    #[error("coordinate ({u}, {v}) outside the centered bounds of a {width}x{height} spectrum")]
    OutOfBounds {
        u: i64,
        v: i64,
        width: usize,
        height: usize,
    },

    #[error("phase undefined at ({u}, {v}): magnitude {magnitude:.3e} below threshold {threshold:.3e}")]
    UndefinedPhase {
        u: i64,
        v: i64,
        magnitude: f64,
        threshold: f64,
    },

    #[error("matrix is singular (|det| = {det:.3e})")]
    SingularMatrix { det: f64 },

    #[error("perspective divide hit a point at infinity (z' = {z:.3e})")]
    PointAtInfinity { z: f64 },

    #[error("peak list is not closed under conjugate reflection: no partner for ({u}, {v})")]
    ConjugateAsymmetry { u: i64, v: i64 },

    #[error("window origin ({x0}, {y0}) size {width}x{height} exceeds image bounds {image_width}x{image_height}")]
    WindowOutOfBounds {
        x0: usize,
        y0: usize,
        width: usize,
        height: usize,
        image_width: usize,
        image_height: usize,
    },

    #[error("tiling factors must be positive")]
    EmptyTiling,

    #[error("frequency map is spatially varying (z-row shear present); use the warp estimate instead")]
    SpatiallyVaryingMap,

    #[error("shear coefficients give a zero determinant (psi_yx * psi_xy = 1)")]
    DegenerateShear,

    #[error("warp scale denominator vanished at the anchor point")]
    ZeroWarpDenominator,

    #[error("template must be smaller than the searched grid")]
    TemplateTooLarge,

    #[error("need at least {min} correspondences, got {got}")]
    TooFewCorrespondences { min: usize, got: usize },

    #[error("correspondence sets differ in length ({before} vs {after})")]
    CorrespondenceMismatch { before: usize, after: usize },

    #[error("correspondences are collinear; transform underdetermined")]
    CollinearCorrespondences,

    #[error("translation unrecoverable: peak directions are degenerate")]
    UnderdeterminedTranslation,

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
