//! Exact 2D discrete Fourier analysis.
//!
//! The reference transform is the literal double summation
//! `F(u,v) = sum_x sum_y f(x,y) e^{-2pi i (ux/M + vy/N)}`; the default path
//! factors it into row and column passes, which computes the same sums in a
//! different order and is verified bin-for-bin against the reference.

use crate::error::{Error, Result};
use crate::image::SpatialImage;
use num_complex::Complex64;
use std::f64::consts::PI;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default magnitude threshold below which a bin's phase is undefined.
pub const EPS_MAGNITUDE: f64 = 1e-6;

/// A complex spectrum: `width` columns by `height` rows, row-major samples.
///
/// With `centered == false` the zero frequency sits at bin (0, 0); with
/// `centered == true` the quadrants are relabeled so the zero frequency sits
/// at the Cartesian origin and bin indices map to signed coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    width: usize,
    height: usize,
    samples: Vec<Complex64>,
    centered: bool,
}

impl ComplexSpectrum {
    pub fn new(
        width: usize,
        height: usize,
        samples: Vec<Complex64>,
        centered: bool,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if samples.len() != width * height {
            return Err(Error::SampleCount {
                expected: width * height,
                got: samples.len(),
            });
        }
        Ok(Self {
            width,
            height,
            samples,
            centered,
        })
    }

    /// All-zero uncentered spectrum.
    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![Complex64::ZERO; width * height], false)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    /// Cartesian offsets of the origin in the centered layout:
    /// `(floor(M/2), floor(N/2))`.
    pub fn center_offsets(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }

    /// Signed Cartesian bounds of the centered layout, inclusive:
    /// `u in [-floor(M/2), M-1-floor(M/2)]` and likewise for `v`.
    pub fn cartesian_bounds(&self) -> ((i64, i64), (i64, i64)) {
        let (cx, cy) = self.center_offsets();
        (
            (-(cx as i64), (self.width - 1 - cx) as i64),
            (-(cy as i64), (self.height - 1 - cy) as i64),
        )
    }

    fn index_of_cartesian(&self, u: i64, v: i64) -> Result<usize> {
        let ((ulo, uhi), (vlo, vhi)) = self.cartesian_bounds();
        if u < ulo || u > uhi || v < vlo || v > vhi {
            return Err(Error::OutOfBounds {
                u,
                v,
                width: self.width,
                height: self.height,
            });
        }
        let (m, n) = (self.width as i64, self.height as i64);
        let (ix, iy) = if self.centered {
            let (cx, cy) = self.center_offsets();
            ((u + cx as i64) as usize, (v + cy as i64) as usize)
        } else {
            (u.rem_euclid(m) as usize, v.rem_euclid(n) as usize)
        };
        Ok(iy * self.width + ix)
    }

    /// Complex value at a signed Cartesian coordinate, valid in either layout.
    pub fn at_cartesian(&self, u: i64, v: i64) -> Result<Complex64> {
        Ok(self.samples[self.index_of_cartesian(u, v)?])
    }

    pub fn set_cartesian(&mut self, u: i64, v: i64, value: Complex64) -> Result<()> {
        let idx = self.index_of_cartesian(u, v)?;
        self.samples[idx] = value;
        Ok(())
    }

    /// Per-bin magnitude `sqrt(re^2 + im^2)`, same layout as the spectrum.
    pub fn magnitude(&self) -> Vec<f64> {
        self.samples.iter().map(|c| c.norm()).collect()
    }

    /// Phase at a Cartesian coordinate, in degrees in `[-180, 180)`.
    ///
    /// Bins with magnitude below `threshold` have no meaningful angle and
    /// produce [`Error::UndefinedPhase`] instead of a garbage value.
    pub fn phase_at(&self, u: i64, v: i64, threshold: f64) -> Result<f64> {
        let c = self.at_cartesian(u, v)?;
        let magnitude = c.norm();
        if magnitude < threshold {
            return Err(Error::UndefinedPhase {
                u,
                v,
                magnitude,
                threshold,
            });
        }
        Ok(phase_degrees(c))
    }

    /// Zeroes the zero-frequency bin; the visualization path does this before
    /// min-max normalization so the DC term does not crush the value range.
    pub fn zero_dc(&mut self) {
        let idx = self.index_of_cartesian(0, 0).expect("origin always valid");
        self.samples[idx] = Complex64::ZERO;
    }
}

/// Four-quadrant phase of a complex value in degrees, mapped to `[-180, 180)`.
pub fn phase_degrees(c: Complex64) -> f64 {
    let d = c.im.atan2(c.re).to_degrees();
    if d >= 180.0 {
        d - 360.0
    } else {
        d
    }
}

fn twiddle_table(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64))
        .collect()
}

fn transform_2d(
    width: usize,
    height: usize,
    input: &[Complex64],
    sign: f64,
    parallel: bool,
) -> Vec<Complex64> {
    let wm = twiddle_table(width, sign);
    let wn = twiddle_table(height, sign);

    // Row pass: G[y][u] = sum_x in[y][x] * wm[(u*x) mod M].
    let row_pass = |y: usize| -> Vec<Complex64> {
        let row = &input[y * width..(y + 1) * width];
        (0..width)
            .map(|u| {
                let mut acc = Complex64::ZERO;
                for (x, &value) in row.iter().enumerate() {
                    acc += value * wm[(u * x) % width];
                }
                acc
            })
            .collect()
    };
    let mid: Vec<Vec<Complex64>> = run_indexed(height, parallel, row_pass);

    // Column pass: F[v][u] = sum_y G[y][u] * wn[(v*y) mod N].
    let col_pass = |v: usize| -> Vec<Complex64> {
        (0..width)
            .map(|u| {
                let mut acc = Complex64::ZERO;
                for (y, row) in mid.iter().enumerate() {
                    acc += row[u] * wn[(v * y) % height];
                }
                acc
            })
            .collect()
    };
    let rows: Vec<Vec<Complex64>> = run_indexed(height, parallel, col_pass);
    rows.into_iter().flatten().collect()
}

#[cfg(feature = "parallel")]
fn run_indexed<T: Send>(n: usize, parallel: bool, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_indexed<T>(n: usize, _parallel: bool, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Forward DFT of a real image; returns the uncentered spectrum.
pub fn dft_forward(image: &SpatialImage) -> ComplexSpectrum {
    forward_impl(image, cfg!(feature = "parallel"))
}

/// Forward DFT on a single thread. Bin-for-bin identical to [`dft_forward`];
/// kept public so benchmarks can compare the two paths.
pub fn dft_forward_sequential(image: &SpatialImage) -> ComplexSpectrum {
    forward_impl(image, false)
}

fn forward_impl(image: &SpatialImage, parallel: bool) -> ComplexSpectrum {
    let (m, n) = (image.width(), image.height());
    let input: Vec<Complex64> = image
        .samples()
        .iter()
        .map(|&s| Complex64::new(s, 0.0))
        .collect();
    let samples = transform_2d(m, n, &input, -1.0, parallel);
    ComplexSpectrum::new(m, n, samples, false).expect("image dimensions already validated")
}

/// Literal double-summation forward DFT, kept as the slow reference
/// implementation for bin-for-bin verification of the factored path.
pub fn dft_forward_reference(image: &SpatialImage) -> ComplexSpectrum {
    let (m, n) = (image.width(), image.height());
    let (mf, nf) = (m as f64, n as f64);
    let mut samples = vec![Complex64::ZERO; m * n];
    for v in 0..n {
        for u in 0..m {
            let mut acc = Complex64::ZERO;
            for y in 0..n {
                for x in 0..m {
                    let angle = -2.0 * PI * (u as f64 * x as f64 / mf + v as f64 * y as f64 / nf);
                    acc += image.get(x, y) * Complex64::from_polar(1.0, angle);
                }
            }
            samples[v * m + u] = acc;
        }
    }
    ComplexSpectrum::new(m, n, samples, false).expect("image dimensions already validated")
}

/// Result of an inverse DFT: the real image plus the largest absolute
/// imaginary residue encountered, which a conjugate-symmetric spectrum keeps
/// at rounding level.
#[derive(Debug, Clone)]
pub struct InverseOutcome {
    pub image: SpatialImage,
    pub imag_residue: f64,
}

/// Inverse DFT, `(1/MN) sum F(u,v) e^{+2pi i (ux/M + vy/N)}`, returning the
/// real part. Rejects centered spectra so bin indices cannot be silently
/// misread; uncenter first.
pub fn dft_inverse(spectrum: &ComplexSpectrum) -> Result<InverseOutcome> {
    if spectrum.is_centered() {
        return Err(Error::CenteredSpectrum);
    }
    let (m, n) = (spectrum.width(), spectrum.height());
    let values = transform_2d(
        m,
        n,
        spectrum.samples(),
        1.0,
        cfg!(feature = "parallel"),
    );
    let scale = 1.0 / (m * n) as f64;
    let mut imag_residue: f64 = 0.0;
    let mut samples = Vec::with_capacity(m * n);
    for c in values {
        imag_residue = imag_residue.max((c.im * scale).abs());
        samples.push(c.re * scale);
    }
    Ok(InverseOutcome {
        image: SpatialImage::new(m, n, samples, 0.0)?,
        imag_residue,
    })
}

/// Quadrant relabeling that moves bin (0,0) to the Cartesian origin.
fn shift_layout(
    width: usize,
    height: usize,
    samples: &[Complex64],
    to_centered: bool,
) -> Vec<Complex64> {
    let (cx, cy) = (width / 2, height / 2);
    let mut out = vec![Complex64::ZERO; samples.len()];
    for oy in 0..height {
        for ox in 0..width {
            let (sx, sy) = if to_centered {
                ((ox + width - cx) % width, (oy + height - cy) % height)
            } else {
                ((ox + cx) % width, (oy + cy) % height)
            };
            out[oy * width + ox] = samples[sy * width + sx];
        }
    }
    out
}

/// Moves the zero frequency to the Cartesian origin (no-op when already
/// centered). `uncenter_spectrum(center_spectrum(s)) == s` exactly.
pub fn center_spectrum(spectrum: &ComplexSpectrum) -> ComplexSpectrum {
    if spectrum.is_centered() {
        return spectrum.clone();
    }
    let samples = shift_layout(spectrum.width(), spectrum.height(), spectrum.samples(), true);
    ComplexSpectrum::new(spectrum.width(), spectrum.height(), samples, true).expect("same shape")
}

/// Undoes [`center_spectrum`] (no-op when already uncentered).
pub fn uncenter_spectrum(spectrum: &ComplexSpectrum) -> ComplexSpectrum {
    if !spectrum.is_centered() {
        return spectrum.clone();
    }
    let samples = shift_layout(spectrum.width(), spectrum.height(), spectrum.samples(), false);
    ComplexSpectrum::new(spectrum.width(), spectrum.height(), samples, false).expect("same shape")
}
