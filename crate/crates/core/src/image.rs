//! Real-valued sample grids and their serialization.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};

/// A real-valued image: `width` columns by `height` rows, row-major samples.
///
/// `fill_value` is the intensity returned for reads outside the grid, used by
/// geometric resampling when a source position falls off the edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialImage {
    width: usize,
    height: usize,
    samples: Vec<f64>,
    fill_value: f64,
}

impl SpatialImage {
    /// Builds an image from row-major samples, validating shape and finiteness.
    pub fn new(width: usize, height: usize, samples: Vec<f64>, fill_value: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if samples.len() != width * height {
            return Err(Error::SampleCount {
                expected: width * height,
                got: samples.len(),
            });
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Self {
            width,
            height,
            samples,
            fill_value,
        })
    }

    /// An all-`value` image.
    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height], value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn fill_value(&self) -> f64 {
        self.fill_value
    }

    pub fn set_fill_value(&mut self, fill: f64) {
        self.fill_value = fill;
    }

    /// In-bounds sample access.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.samples[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.samples[y * self.width + x] = value;
    }

    /// Signed-index read; positions outside the grid return `fill_value`.
    pub fn get_or_fill(&self, x: i64, y: i64) -> f64 {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            self.fill_value
        } else {
            self.get(x as usize, y as usize)
        }
    }

    /// Bilinear read at a fractional position; out-of-range neighbours
    /// contribute `fill_value`.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (x0, y0) = (x0 as i64, y0 as i64);
        let v00 = self.get_or_fill(x0, y0);
        let v10 = self.get_or_fill(x0 + 1, y0);
        let v01 = self.get_or_fill(x0, y0 + 1);
        let v11 = self.get_or_fill(x0 + 1, y0 + 1);
        (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11)
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &s in &self.samples {
            lo = lo.min(s);
            hi = hi.max(s);
        }
        (lo, hi)
    }

    /// Affine rescale of the value range onto `[min, max]`.
    ///
    /// A flat image maps every pixel to `min`; this keeps the degenerate case
    /// deterministic.
    pub fn normalize_minmax(&self, min: f64, max: f64) -> Result<SpatialImage> {
        if !(max > min) {
            return Err(Error::InvalidRange { min, max });
        }
        let (lo, hi) = self.min_max();
        let samples = if hi > lo {
            let scale = (max - min) / (hi - lo);
            self.samples.iter().map(|&s| min + (s - lo) * scale).collect()
        } else {
            vec![min; self.samples.len()]
        };
        SpatialImage::new(self.width, self.height, samples, min)
    }

    /// Plain (ASCII `P2`) 8-bit PGM of the image as-is; values are clamped to
    /// `[0, 255]` and rounded. Normalize first for visualization.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "P2")?;
        writeln!(out, "{} {}", self.width, self.height)?;
        writeln!(out, "255")?;
        for row in self.samples.chunks(self.width) {
            let line: Vec<String> = row
                .iter()
                .map(|&v| format!("{}", v.round().clamp(0.0, 255.0) as u8))
                .collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// Lossless CSV: a `width,height` header line, then one row of samples per
    /// image row. Floats are printed with shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{},{}", self.width, self.height)?;
        for row in self.samples.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Reads the CSV layout produced by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: BufRead>(reader: R) -> Result<SpatialImage> {
        let parse_err = |detail: String| Error::Parse {
            what: "image csv",
            detail,
        };
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err("empty input".into()))??;
        let mut dims = header.split(',');
        let width: usize = dims
            .next()
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| parse_err(format!("bad header {header:?}")))?;
        let height: usize = dims
            .next()
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| parse_err(format!("bad header {header:?}")))?;
        let mut samples = Vec::with_capacity(width * height);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            for tok in line.split(',') {
                let v: f64 = tok
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(format!("bad value {tok:?}")))?;
                samples.push(v);
            }
        }
        SpatialImage::new(width, height, samples, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            SpatialImage::new(0, 3, vec![], 0.0),
            Err(Error::EmptyImage)
        ));
        assert!(matches!(
            SpatialImage::new(2, 2, vec![1.0; 3], 0.0),
            Err(Error::SampleCount { .. })
        ));
        assert!(matches!(
            SpatialImage::new(2, 1, vec![1.0, f64::NAN], 0.0),
            Err(Error::NonFiniteSample(1))
        ));
    }

    #[test]
    fn normalize_redistributes_range() {
        let img = SpatialImage::new(3, 1, vec![0.0, 5.0, 10.0], 0.0).unwrap();
        let n = img.normalize_minmax(0.0, 255.0).unwrap();
        assert_eq!(n.samples(), &[0.0, 127.5, 255.0]);
    }

    #[test]
    fn normalize_flat_maps_to_min() {
        let img = SpatialImage::constant(4, 4, 7.0).unwrap();
        let n = img.normalize_minmax(0.0, 255.0).unwrap();
        assert!(n.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalize_rejects_inverted_range() {
        let img = SpatialImage::constant(2, 2, 1.0).unwrap();
        assert!(matches!(
            img.normalize_minmax(5.0, 5.0),
            Err(Error::InvalidRange { .. })
        ));
    }

    #[test]
    fn bilinear_interpolates_and_fills() {
        let img = SpatialImage::new(2, 2, vec![0.0, 1.0, 2.0, 3.0], -1.0).unwrap();
        assert_eq!(img.sample_bilinear(0.5, 0.5), 1.5);
        assert_eq!(img.sample_bilinear(0.0, 0.0), 0.0);
        // Fully outside: every neighbour is the fill value.
        assert_eq!(img.sample_bilinear(-5.0, -5.0), -1.0);
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let img =
            SpatialImage::new(3, 2, vec![0.1, -2.5e-17, 3.0, 4.25, 5.0, 6.125], 0.5).unwrap();
        let mut buf = Vec::new();
        img.write_csv(&mut buf).unwrap();
        let back = SpatialImage::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.samples(), img.samples());
        assert_eq!((back.width(), back.height()), (3, 2));
    }

    #[test]
    fn pgm_has_plain_header() {
        let img = SpatialImage::new(2, 1, vec![0.0, 255.0], 0.0).unwrap();
        let mut buf = Vec::new();
        img.write_pgm(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("P2\n2 1\n255\n"));
        assert!(text.contains("0 255"));
    }
}
