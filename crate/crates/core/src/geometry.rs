//! 3D perspective transforms applied to 2D planes.
//!
//! The matrix layout is
//!
//! ```text
//! [ chi_x   psi_yx  tau_x ]
//! [ psi_xy  chi_y   tau_y ]
//! [ psi_xz  psi_yz  chi_z ]
//! ```
//!
//! with scaling `chi`, shear `psi` and translation `tau` coefficients. Points
//! transform as `P' = A P` in homogeneous coordinates followed by a
//! perspective divide `P'' = P' / z'`. Images transform forward: a warp moves
//! pattern content the way `apply_point` moves points, anchored by default at
//! the image centre so scaling and rotation act about the pattern centre.

use crate::error::{Error, Result};
use crate::image::SpatialImage;
use serde::{Deserialize, Serialize};

/// Determinant magnitude below which a transform is treated as singular.
pub const EPS_DETERMINANT: f64 = 1e-12;

/// Divisor magnitude below which a perspective divide is a point at infinity.
pub const EPS_DIVIDE: f64 = 1e-12;

type Matrix3 = [[f64; 3]; 3];

const IDENTITY: Matrix3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Interpolation used when resampling a warped image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Inverse mapping: every output pixel samples the source bilinearly.
    Bilinear,
    /// Forward splatting: every source pixel adds its value into the output
    /// bin it lands in; bins nobody lands in keep the fill value.
    ArithmeticSum,
}

/// Invertible 3x3 perspective transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerspectiveTransform {
    matrix: Matrix3,
}

/// Named coefficients for the JSON form; omitted fields default to identity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    #[serde(default = "one")]
    pub chi_x: f64,
    #[serde(default = "one")]
    pub chi_y: f64,
    #[serde(default = "one")]
    pub chi_z: f64,
    #[serde(default)]
    pub psi_yx: f64,
    #[serde(default)]
    pub psi_xy: f64,
    #[serde(default)]
    pub psi_xz: f64,
    #[serde(default)]
    pub psi_yz: f64,
    #[serde(default)]
    pub tau_x: f64,
    #[serde(default)]
    pub tau_y: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for Coefficients {
    fn default() -> Self {
        Self {
            chi_x: 1.0,
            chi_y: 1.0,
            chi_z: 1.0,
            psi_yx: 0.0,
            psi_xy: 0.0,
            psi_xz: 0.0,
            psi_yz: 0.0,
            tau_x: 0.0,
            tau_y: 0.0,
        }
    }
}

impl PerspectiveTransform {
    /// Validates invertibility and wraps the matrix.
    pub fn new(matrix: Matrix3) -> Result<Self> {
        let det = det3(&matrix);
        if det.abs() <= EPS_DETERMINANT {
            return Err(Error::SingularMatrix { det });
        }
        Ok(Self { matrix })
    }

    pub fn identity() -> Self {
        Self { matrix: IDENTITY }
    }

    /// Populates the matrix from named coefficients at their canonical
    /// positions; all defaults produce the identity.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        chi_x: f64,
        chi_y: f64,
        chi_z: f64,
        psi_yx: f64,
        psi_xy: f64,
        psi_xz: f64,
        psi_yz: f64,
        tau_x: f64,
        tau_y: f64,
    ) -> Result<Self> {
        Self::new([
            [chi_x, psi_yx, tau_x],
            [psi_xy, chi_y, tau_y],
            [psi_xz, psi_yz, chi_z],
        ])
    }

    pub fn from_coefficients(c: &Coefficients) -> Result<Self> {
        Self::build(
            c.chi_x, c.chi_y, c.chi_z, c.psi_yx, c.psi_xy, c.psi_xz, c.psi_yz, c.tau_x, c.tau_y,
        )
    }

    /// Axis scaling. `chi_z` scales the homogeneous coordinate, so after the
    /// perspective divide it magnifies the plane by `1/chi_z`.
    pub fn scale(chi_x: f64, chi_y: f64, chi_z: f64) -> Result<Self> {
        Self::build(chi_x, chi_y, chi_z, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// In-plane rotation by `theta` degrees; frequency content rotates by the
    /// same angle.
    pub fn rotation(theta_deg: f64) -> Self {
        let (s, c) = theta_deg.to_radians().sin_cos();
        Self {
            matrix: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// In-plane shear, oriented so that a peak at frequency `(u, v)` moves to
    /// `((u + psi_xy v) / (1 - psi_yx psi_xy), (v + psi_yx u) / (1 - psi_yx psi_xy))`.
    ///
    /// Spatially this samples the source along `x + psi_yx y` / `y + psi_xy x`
    /// lines, which is the direction the reference measurements use.
    pub fn shear(psi_yx: f64, psi_xy: f64) -> Result<Self> {
        if (1.0 - psi_yx * psi_xy).abs() <= EPS_DETERMINANT {
            return Err(Error::DegenerateShear);
        }
        Self::build(1.0, 1.0, 1.0, -psi_yx, -psi_xy, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn translation(tau_x: f64, tau_y: f64) -> Self {
        Self {
            matrix: [[1.0, 0.0, tau_x], [0.0, 1.0, tau_y], [0.0, 0.0, 1.0]],
        }
    }

    /// Shear of the plane onto the z-axis; the divide turns it into a
    /// spatially varying magnification.
    pub fn warp(psi_xz: f64, psi_yz: f64) -> Result<Self> {
        Self::build(1.0, 1.0, 1.0, 0.0, 0.0, psi_xz, psi_yz, 0.0, 0.0)
    }

    pub fn matrix(&self) -> &Matrix3 {
        &self.matrix
    }

    /// Row-major flattening of the matrix.
    pub fn flat(&self) -> [f64; 9] {
        let m = &self.matrix;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    // Named accessors, matching the matrix layout above.
    pub fn chi_x(&self) -> f64 {
        self.matrix[0][0]
    }
    pub fn chi_y(&self) -> f64 {
        self.matrix[1][1]
    }
    pub fn chi_z(&self) -> f64 {
        self.matrix[2][2]
    }
    pub fn psi_yx(&self) -> f64 {
        self.matrix[0][1]
    }
    pub fn psi_xy(&self) -> f64 {
        self.matrix[1][0]
    }
    pub fn psi_xz(&self) -> f64 {
        self.matrix[2][0]
    }
    pub fn psi_yz(&self) -> f64 {
        self.matrix[2][1]
    }
    pub fn tau_x(&self) -> f64 {
        self.matrix[0][2]
    }
    pub fn tau_y(&self) -> f64 {
        self.matrix[1][2]
    }

    pub fn determinant(&self) -> f64 {
        det3(&self.matrix)
    }

    pub fn inverse(&self) -> Result<Self> {
        Self::new(invert3(&self.matrix)?)
    }

    /// Matrix product: `self.compose(other)` applies `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum();
            }
        }
        Self::new(out)
    }

    /// Splits the transform into the linear part `B` (translation column
    /// zeroed) and the translation vector `C = (tau_x, tau_y, 0)`.
    pub fn decompose(&self) -> DecomposedTransform {
        let mut b = self.matrix;
        b[0][2] = 0.0;
        b[1][2] = 0.0;
        DecomposedTransform {
            b,
            c: [self.matrix[0][2], self.matrix[1][2], 0.0],
        }
    }

    /// Applies `P' = A P` followed by the perspective divide; returns
    /// `(x'/z', y'/z', 1)`.
    pub fn apply_point(&self, p: [f64; 3]) -> Result<[f64; 3]> {
        let m = &self.matrix;
        let x = m[0][0] * p[0] + m[0][1] * p[1] + m[0][2] * p[2];
        let y = m[1][0] * p[0] + m[1][1] * p[1] + m[1][2] * p[2];
        let z = m[2][0] * p[0] + m[2][1] * p[1] + m[2][2] * p[2];
        perspective_divide([x, y, z])
    }
}

/// Normalizes a homogeneous point by its third coordinate. Idempotent on
/// already-divided points.
pub fn perspective_divide(p: [f64; 3]) -> Result<[f64; 3]> {
    if p[2].abs() <= EPS_DIVIDE {
        return Err(Error::PointAtInfinity { z: p[2] });
    }
    Ok([p[0] / p[2], p[1] / p[2], 1.0])
}

/// Linear/translation split of a transform: `P' = B P + C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposedTransform {
    b: Matrix3,
    c: [f64; 3],
}

impl DecomposedTransform {
    pub fn b(&self) -> &Matrix3 {
        &self.b
    }

    pub fn c(&self) -> [f64; 3] {
        self.c
    }

    /// Inverse of the linear part, computed with partial pivoting.
    pub fn b_inverse(&self) -> Result<Matrix3> {
        invert3(&self.b)
    }

    /// Reassembles the original transform; exact inverse of `decompose`.
    pub fn recompose(&self) -> Result<PerspectiveTransform> {
        let mut m = self.b;
        m[0][2] = self.c[0];
        m[1][2] = self.c[1];
        PerspectiveTransform::new(m)
    }

    /// Recovers `P = B^-1 (P' - C)` for an affine image of `P`.
    pub fn invert_point(&self, p_prime: [f64; 3]) -> Result<[f64; 3]> {
        let inv = self.b_inverse()?;
        let d = [self.c[0], self.c[1], self.c[2]];
        let shifted = [p_prime[0] - d[0], p_prime[1] - d[1], p_prime[2] - d[2]];
        Ok(mat_vec(&inv, shifted))
    }
}

pub(crate) fn mat_vec(m: &Matrix3, v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn det3(m: &Matrix3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Gauss-Jordan inverse with partial pivoting.
pub(crate) fn invert3(m: &Matrix3) -> Result<Matrix3> {
    let mut a = *m;
    let mut inv = IDENTITY;
    for col in 0..3 {
        let pivot_row = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot_row][col].abs() <= EPS_DETERMINANT {
            return Err(Error::SingularMatrix { det: det3(m) });
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pivot = a[col][col];
        for j in 0..3 {
            a[col][j] /= pivot;
            inv[col][j] /= pivot;
        }
        for row in 0..3 {
            if row != col {
                let factor = a[row][col];
                for j in 0..3 {
                    a[row][j] -= factor * a[col][j];
                    inv[row][j] -= factor * inv[col][j];
                }
            }
        }
    }
    Ok(inv)
}

/// Rounds half away from zero, the tie rule used for integer binning of
/// splat targets and predicted coordinates.
pub fn round_half_away(x: f64) -> i64 {
    x.round() as i64
}

/// Centre anchor of an image: `((M-1)/2, (N-1)/2)`.
pub fn center_anchor(image: &SpatialImage) -> (f64, f64) {
    (
        (image.width() as f64 - 1.0) / 2.0,
        (image.height() as f64 - 1.0) / 2.0,
    )
}

/// Warps an image, anchored at the image centre so scaling and rotation act
/// about the pattern centre.
pub fn warp_image(
    image: &SpatialImage,
    transform: &PerspectiveTransform,
    scheme: Interpolation,
) -> Result<SpatialImage> {
    warp_image_anchored(image, transform, scheme, center_anchor(image))
}

/// Warps an image about an explicit anchor point.
///
/// The transform acts on anchor-relative coordinates: content moves the way
/// `apply_point` moves points. Bilinear output pixels sample the source
/// through the inverse map; arithmetic-sum splats source pixels forward,
/// summing collisions without normalization, and leaves untouched bins at the
/// fill value.
pub fn warp_image_anchored(
    image: &SpatialImage,
    transform: &PerspectiveTransform,
    scheme: Interpolation,
    anchor: (f64, f64),
) -> Result<SpatialImage> {
    let (m, n) = (image.width(), image.height());
    let (ax, ay) = anchor;
    let fill = image.fill_value();
    match scheme {
        Interpolation::Bilinear => {
            let inverse = transform.inverse()?;
            let mut samples = Vec::with_capacity(m * n);
            for y in 0..n {
                for x in 0..m {
                    let rel = [x as f64 - ax, y as f64 - ay, 1.0];
                    let value = match inverse.apply_point(rel) {
                        Ok(src) => image.sample_bilinear(src[0] + ax, src[1] + ay),
                        Err(_) => fill,
                    };
                    samples.push(value);
                }
            }
            SpatialImage::new(m, n, samples, fill)
        }
        Interpolation::ArithmeticSum => {
            let mut acc = vec![0.0; m * n];
            let mut covered = vec![false; m * n];
            for y in 0..n {
                for x in 0..m {
                    let rel = [x as f64 - ax, y as f64 - ay, 1.0];
                    let Ok(dst) = transform.apply_point(rel) else {
                        continue;
                    };
                    let tx = round_half_away(dst[0] + ax);
                    let ty = round_half_away(dst[1] + ay);
                    if tx >= 0 && ty >= 0 && (tx as usize) < m && (ty as usize) < n {
                        let idx = ty as usize * m + tx as usize;
                        acc[idx] += image.get(x, y);
                        covered[idx] = true;
                    }
                }
            }
            let samples = acc
                .into_iter()
                .zip(covered)
                .map(|(v, hit)| if hit { v } else { fill })
                .collect();
            SpatialImage::new(m, n, samples, fill)
        }
    }
}

impl Serialize for PerspectiveTransform {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.flat().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PerspectiveTransform {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Flat([f64; 9]),
            Named(Coefficients),
        }
        let out = match Repr::deserialize(deserializer)? {
            Repr::Flat(f) => PerspectiveTransform::new([
                [f[0], f[1], f[2]],
                [f[3], f[4], f[5]],
                [f[6], f[7], f[8]],
            ]),
            Repr::Named(c) => PerspectiveTransform::from_coefficients(&c),
        };
        out.map_err(serde::de::Error::custom)
    }
}
