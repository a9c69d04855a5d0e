//! Synthesis of pattern images with known spectral content, periodic tiling
//! and window cropping.

use crate::dft::{dft_inverse, uncenter_spectrum, ComplexSpectrum};
use crate::error::{Error, Result};
use crate::image::SpatialImage;
use crate::peak::{circular_distance_deg, FrequencyPeak};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A pattern description: grid size plus the peaks to place in the spectrum.
///
/// The peak list must be closed under conjugate reflection
/// `(u, v) <-> (-u, -v)` so the synthesized image is real; callers list every
/// peak explicitly rather than having partners auto-completed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternSpec {
    #[serde(rename = "M")]
    pub width: usize,
    #[serde(rename = "N")]
    pub height: usize,
    pub peaks: Vec<FrequencyPeak>,
}

impl PatternSpec {
    /// The four-peak layout the experiments use: amplitude `amp` at
    /// `(k, k), (-k, -k), (k, -k), (-k, k)` on an `size x size` grid.
    pub fn quad(size: usize, k: i64, amp: f64) -> Self {
        Self {
            width: size,
            height: size,
            peaks: vec![
                FrequencyPeak::at(k, k, amp),
                FrequencyPeak::at(-k, -k, amp),
                FrequencyPeak::at(k, -k, amp),
                FrequencyPeak::at(-k, k, amp),
            ],
        }
    }

    /// Checks bounds, integer coordinates and conjugate closure.
    pub fn validate(&self) -> Result<()> {
        let probe = ComplexSpectrum::zeros(self.width, self.height)?;
        for p in &self.peaks {
            if p.u.fract() != 0.0 || p.v.fract() != 0.0 {
                return Err(Error::Parse {
                    what: "pattern spec",
                    detail: format!("peak ({}, {}) is not on an integer bin", p.u, p.v),
                });
            }
            probe.at_cartesian(p.u as i64, p.v as i64)?;
        }
        for p in &self.peaks {
            let partner = self.peaks.iter().find(|q| {
                q.u == -p.u
                    && q.v == -p.v
                    && (q.amplitude - p.amplitude).abs() <= 1e-9 * p.amplitude.abs().max(1.0)
                    && circular_distance_deg(q.phase_deg, -p.phase_deg) <= 1e-9
            });
            if partner.is_none() {
                return Err(Error::ConjugateAsymmetry {
                    u: p.u as i64,
                    v: p.v as i64,
                });
            }
        }
        Ok(())
    }
}

/// Synthesizes the spatial image whose spectrum holds exactly the requested
/// peaks: builds the centered spectrum, uncenters it and inverts.
///
/// The result is real to rounding level; its fill value is set to the
/// midpoint of the realized intensity range so out-of-range reads during
/// warping read as neutral grey.
pub fn encode_peaks(spec: &PatternSpec) -> Result<SpatialImage> {
    spec.validate()?;
    let mut centered = ComplexSpectrum::new(
        spec.width,
        spec.height,
        vec![Complex64::ZERO; spec.width * spec.height],
        true,
    )?;
    for p in &spec.peaks {
        let (u, v) = (p.u as i64, p.v as i64);
        let value = centered.at_cartesian(u, v)?
            + Complex64::from_polar(p.amplitude, p.phase_deg.to_radians());
        centered.set_cartesian(u, v, value)?;
    }
    let outcome = dft_inverse(&uncenter_spectrum(&centered))?;
    debug_assert!(outcome.imag_residue <= 1e-9, "conjugate-closed spectra invert to real images");
    let mut image = outcome.image;
    let (lo, hi) = image.min_max();
    image.set_fill_value((lo + hi) / 2.0);
    Ok(image)
}

/// Repeats the image `kx` times horizontally and `ky` times vertically.
/// Every aligned window of the original size equals the input exactly.
pub fn tile_periodic(image: &SpatialImage, kx: usize, ky: usize) -> Result<SpatialImage> {
    if kx == 0 || ky == 0 {
        return Err(Error::EmptyTiling);
    }
    let (m, n) = (image.width(), image.height());
    let (out_w, out_h) = (kx * m, ky * n);
    let mut samples = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        for x in 0..out_w {
            samples.push(image.get(x % m, y % n));
        }
    }
    SpatialImage::new(out_w, out_h, samples, image.fill_value())
}

/// Exact sub-grid copy; the window must lie fully inside the image.
pub fn crop_window(
    image: &SpatialImage,
    origin: (usize, usize),
    size: (usize, usize),
) -> Result<SpatialImage> {
    let (x0, y0) = origin;
    let (w, h) = size;
    if w == 0 || h == 0 {
        return Err(Error::EmptyImage);
    }
    if x0 + w > image.width() || y0 + h > image.height() {
        return Err(Error::WindowOutOfBounds {
            x0,
            y0,
            width: w,
            height: h,
            image_width: image.width(),
            image_height: image.height(),
        });
    }
    let mut samples = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            samples.push(image.get(x0 + x, y0 + y));
        }
    }
    SpatialImage::new(w, h, samples, image.fill_value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::{center_spectrum, dft_forward};

    #[test]
    fn empty_peak_list_gives_zero_image() {
        let spec = PatternSpec {
            width: 8,
            height: 8,
            peaks: vec![],
        };
        let img = encode_peaks(&spec).unwrap();
        assert!(img.samples().iter().all(|&s| s.abs() < 1e-12));
    }

    #[test]
    fn conjugate_pair_is_a_cosine_with_known_extremum() {
        // Two conjugate impulses of amplitude 10000 on a 25x25 grid form a
        // cosine whose maximum is 2 * 10000 / 625 = 32.
        let spec = PatternSpec {
            width: 25,
            height: 25,
            peaks: vec![
                FrequencyPeak::at(6, 6, 10000.0),
                FrequencyPeak::at(-6, -6, 10000.0),
            ],
        };
        let img = encode_peaks(&spec).unwrap();
        let max = img.samples().iter().cloned().fold(f64::MIN, f64::max);
        assert!((max - 32.0).abs() < 1e-9, "max {max}");
        // Cosine of both indices zero: value at the origin is the maximum.
        assert!((img.get(0, 0) - 32.0).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_peaks_rejected() {
        let spec = PatternSpec {
            width: 25,
            height: 25,
            peaks: vec![FrequencyPeak::at(6, 6, 10000.0)],
        };
        assert!(matches!(
            encode_peaks(&spec),
            Err(Error::ConjugateAsymmetry { u: 6, v: 6 })
        ));
    }

    #[test]
    fn out_of_bounds_peak_rejected() {
        let spec = PatternSpec {
            width: 25,
            height: 25,
            peaks: vec![
                FrequencyPeak::at(13, 0, 1.0),
                FrequencyPeak::at(-13, 0, 1.0),
            ],
        };
        assert!(matches!(encode_peaks(&spec), Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn encode_analyze_round_trip_recovers_amplitudes() {
        let spec = PatternSpec::quad(25, 6, 10000.0);
        let img = encode_peaks(&spec).unwrap();
        let f = center_spectrum(&dft_forward(&img));
        for p in &spec.peaks {
            let got = f.at_cartesian(p.u as i64, p.v as i64).unwrap().norm();
            assert!((got - 10000.0).abs() <= 1e-6, "peak ({},{}) -> {got}", p.u, p.v);
        }
        // All other bins are numerically empty.
        let (cx, cy) = f.center_offsets();
        for (i, c) in f.samples().iter().enumerate() {
            let u = (i % 25) as i64 - cx as i64;
            let v = (i / 25) as i64 - cy as i64;
            if !spec.peaks.iter().any(|p| p.u as i64 == u && p.v as i64 == v) {
                assert!(c.norm() <= 1e-6, "bin ({u},{v}) holds {}", c.norm());
            }
        }
    }

    #[test]
    fn tiling_repeats_exactly() {
        let base = encode_peaks(&PatternSpec::quad(25, 6, 10000.0)).unwrap();
        assert_eq!(tile_periodic(&base, 1, 1).unwrap(), base);
        let tiled = tile_periodic(&base, 3, 3).unwrap();
        assert_eq!(tiled.width(), 75);
        for (ox, oy) in [(0, 0), (25, 25), (50, 0), (0, 50)] {
            let window = crop_window(&tiled, (ox, oy), (25, 25)).unwrap();
            assert_eq!(window.samples(), base.samples());
        }
        assert!(matches!(tile_periodic(&base, 0, 2), Err(Error::EmptyTiling)));
    }

    #[test]
    fn crop_checks_bounds() {
        let base = SpatialImage::constant(10, 10, 1.0).unwrap();
        assert_eq!(
            crop_window(&base, (0, 0), (10, 10)).unwrap().samples(),
            base.samples()
        );
        assert!(matches!(
            crop_window(&base, (5, 5), (6, 6)),
            Err(Error::WindowOutOfBounds { .. })
        ));
    }
}
