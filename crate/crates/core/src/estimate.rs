//! The inverse path: find encoded peaks in a captured magnitude spectrum and
//! estimate transform coefficients from peak correspondences.

use crate::dft::ComplexSpectrum;
use crate::error::{Error, Result};
use crate::peak::{circular_distance_deg, wrap_degrees_unsigned};
use serde::Serialize;

/// Default classification threshold for naming a fitted map.
pub const DEFAULT_EPS_CLASS: f64 = 0.05;

/// Default non-maximum-suppression radius in bins.
pub const DEFAULT_NMS_RADIUS: usize = 1;

/// One detected peak: integer Cartesian bin, correlation score, magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakDetection {
    pub u: i64,
    pub v: i64,
    pub ncc: f64,
    pub magnitude: f64,
}

/// Detection output; `truncated` is set when fewer than the requested number
/// of local maxima exist.
#[derive(Debug, Clone)]
pub struct Detections {
    pub peaks: Vec<PeakDetection>,
    pub truncated: bool,
}

/// A small matching template for peak detection.
#[derive(Debug, Clone)]
pub struct Template {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Template {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::SampleCount {
                expected: width * height,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// 3x3 single-impulse template: a one over zeros. Zero-normalized
    /// correlation against it degenerates to local contrast, which is what
    /// point-like encoded peaks look like.
    pub fn impulse3() -> Self {
        let mut data = vec![0.0; 9];
        data[4] = 1.0;
        Self {
            width: 3,
            height: 3,
            data,
        }
    }
}

/// Slides `template` over the centered magnitude grid and returns the top-`k`
/// template-matched peaks with non-maximum suppression.
///
/// Each position gets a zero-normalized cross-correlation score, which is
/// invariant to affine intensity rescaling of the grid; positions whose score
/// is not positive (no local contrast) are discarded. Ranking is by matched
/// correlation height — for the impulse template, the bin magnitude — so a
/// tall split lobe beats a faint resampling side lobe of sharper shape. The
/// zero-frequency bin is excluded from candidacy. Ties sort lexicographically
/// by `(u, v)`; the returned list is ordered by decreasing score.
pub fn detect_peaks(
    magnitude: &[f64],
    width: usize,
    height: usize,
    template: &Template,
    k: usize,
    nms_radius: usize,
) -> Result<Detections> {
    if template.width >= width || template.height >= height {
        return Err(Error::TemplateTooLarge);
    }
    if magnitude.len() != width * height {
        return Err(Error::SampleCount {
            expected: width * height,
            got: magnitude.len(),
        });
    }
    let t_mean = template.data.iter().sum::<f64>() / template.data.len() as f64;
    let t_dev: Vec<f64> = template.data.iter().map(|&t| t - t_mean).collect();
    let t_norm = t_dev.iter().map(|d| d * d).sum::<f64>().sqrt();
    if t_norm == 0.0 {
        return Err(Error::TemplateTooLarge);
    }

    let (cx, cy) = (width / 2, height / 2);
    let (mx, my) = (template.width / 2, template.height / 2);
    let mut candidates: Vec<PeakDetection> = Vec::new();
    for iy in my..height - (template.height - 1 - my) {
        for ix in mx..width - (template.width - 1 - mx) {
            let (u, v) = (ix as i64 - cx as i64, iy as i64 - cy as i64);
            if (u, v) == (0, 0) {
                continue;
            }
            let mut w_sum = 0.0;
            for ty in 0..template.height {
                for tx in 0..template.width {
                    w_sum += magnitude[(iy + ty - my) * width + (ix + tx - mx)];
                }
            }
            let w_mean = w_sum / template.data.len() as f64;
            let mut num = 0.0;
            let mut w_sq = 0.0;
            for ty in 0..template.height {
                for tx in 0..template.width {
                    let w = magnitude[(iy + ty - my) * width + (ix + tx - mx)] - w_mean;
                    num += w * t_dev[ty * template.width + tx];
                    w_sq += w * w;
                }
            }
            if w_sq <= 0.0 {
                continue; // flat window: correlation undefined
            }
            let ncc = num / (w_sq.sqrt() * t_norm);
            if ncc <= 0.0 {
                continue; // no local contrast at this position
            }
            candidates.push(PeakDetection {
                u,
                v,
                ncc,
                magnitude: magnitude[iy * width + ix],
            });
        }
    }

    // Correlation height for the impulse template is the bin magnitude.
    candidates.sort_by(|a, b| {
        b.magnitude
            .total_cmp(&a.magnitude)
            .then_with(|| b.ncc.total_cmp(&a.ncc))
            .then_with(|| (a.u, a.v).cmp(&(b.u, b.v)))
    });

    let mut accepted: Vec<PeakDetection> = Vec::new();
    for c in candidates {
        if accepted.len() >= k {
            break;
        }
        let suppressed = accepted.iter().any(|a| {
            (a.u - c.u).unsigned_abs() <= nms_radius as u64
                && (a.v - c.v).unsigned_abs() <= nms_radius as u64
        });
        if !suppressed {
            accepted.push(c);
        }
    }
    let truncated = accepted.len() < k;
    accepted.sort_by(|a, b| {
        b.ncc
            .total_cmp(&a.ncc)
            .then_with(|| (a.u, a.v).cmp(&(b.u, b.v)))
    });
    Ok(Detections {
        peaks: accepted,
        truncated,
    })
}

/// Named interpretation of a fitted frequency-coordinate map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformClass {
    Scale { chi_x: f64, chi_y: f64 },
    /// A uniform map is either in-plane scaling by `chi_xy` or homogeneous
    /// scaling by `chi_z`; both namings are reported.
    UniformScale { chi_xy: f64, chi_z: f64 },
    Rotation { theta_deg: f64 },
    Shear { psi_yx: f64, psi_xy: f64 },
    General { chi_x: f64, chi_y: f64, psi_yx: f64, psi_xy: f64 },
}

/// Least-squares fit of the frequency-domain map between two peak sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatedTransform {
    pub class: TransformClass,
    /// The fitted 2x2 map from source to transformed coordinates.
    pub map: [[f64; 2]; 2],
    /// RMS residual of the fit, in frequency-bin units.
    pub residual: f64,
}

impl EstimatedTransform {
    /// Coefficient names and values for reporting.
    pub fn coefficients(&self) -> Vec<(&'static str, f64)> {
        match self.class {
            TransformClass::Scale { chi_x, chi_y } => {
                vec![("chi_x", chi_x), ("chi_y", chi_y)]
            }
            TransformClass::UniformScale { chi_xy, chi_z } => {
                vec![("chi_xy", chi_xy), ("chi_z", chi_z)]
            }
            TransformClass::Rotation { theta_deg } => vec![("theta_deg", theta_deg)],
            TransformClass::Shear { psi_yx, psi_xy } => {
                vec![("psi_yx", psi_yx), ("psi_xy", psi_xy)]
            }
            TransformClass::General {
                chi_x,
                chi_y,
                psi_yx,
                psi_xy,
            } => vec![
                ("chi_x", chi_x),
                ("chi_y", chi_y),
                ("psi_yx", psi_yx),
                ("psi_xy", psi_xy),
            ],
        }
    }
}

/// Fits the 2x2 frequency map taking `before` peaks to `after` peaks and
/// names the spatial coefficients it corresponds to.
///
/// Needs at least three non-collinear correspondences; four conjugate-closed
/// peaks qualify. `eps_class` controls how far off-pattern residual entries
/// may stray before the fit is reported as a general map.
pub fn estimate_affine(
    before: &[(f64, f64)],
    after: &[(f64, f64)],
    eps_class: f64,
) -> Result<EstimatedTransform> {
    if before.len() != after.len() {
        return Err(Error::CorrespondenceMismatch {
            before: before.len(),
            after: after.len(),
        });
    }
    if before.len() < 3 {
        return Err(Error::TooFewCorrespondences {
            min: 3,
            got: before.len(),
        });
    }

    // Normal equations: G = (sum a b^T)(sum b b^T)^-1.
    let mut bbt = [[0.0f64; 2]; 2];
    let mut abt = [[0.0f64; 2]; 2];
    for ((bu, bv), (au, av)) in before.iter().zip(after) {
        bbt[0][0] += bu * bu;
        bbt[0][1] += bu * bv;
        bbt[1][0] += bv * bu;
        bbt[1][1] += bv * bv;
        abt[0][0] += au * bu;
        abt[0][1] += au * bv;
        abt[1][0] += av * bu;
        abt[1][1] += av * bv;
    }
    let det = bbt[0][0] * bbt[1][1] - bbt[0][1] * bbt[1][0];
    let scale = bbt[0][0].max(bbt[1][1]).max(1.0);
    if det.abs() <= 1e-12 * scale * scale {
        return Err(Error::CollinearCorrespondences);
    }
    let inv = [
        [bbt[1][1] / det, -bbt[0][1] / det],
        [-bbt[1][0] / det, bbt[0][0] / det],
    ];
    let mut g = [[0.0f64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = abt[i][0] * inv[0][j] + abt[i][1] * inv[1][j];
        }
    }

    let mut sq = 0.0;
    for ((bu, bv), (au, av)) in before.iter().zip(after) {
        let pu = g[0][0] * bu + g[0][1] * bv;
        let pv = g[1][0] * bu + g[1][1] * bv;
        sq += (pu - au).powi(2) + (pv - av).powi(2);
    }
    let residual = (sq / before.len() as f64).sqrt();

    Ok(EstimatedTransform {
        class: classify_map(&g, eps_class),
        map: g,
        residual,
    })
}

fn classify_map(g: &[[f64; 2]; 2], eps: f64) -> TransformClass {
    let diag_like = g[0][1].abs() <= eps && g[1][0].abs() <= eps;
    if diag_like {
        if (g[0][0] - g[1][1]).abs() <= eps {
            let mean = (g[0][0] + g[1][1]) / 2.0;
            return TransformClass::UniformScale {
                chi_xy: 1.0 / mean,
                chi_z: mean,
            };
        }
        return TransformClass::Scale {
            chi_x: 1.0 / g[0][0],
            chi_y: 1.0 / g[1][1],
        };
    }
    // Rotation: orthogonal shape with column norm near one.
    let rot_like = (g[0][0] - g[1][1]).abs() <= eps
        && (g[0][1] + g[1][0]).abs() <= eps
        && ((g[0][0].powi(2) + g[1][0].powi(2)).sqrt() - 1.0).abs() <= eps;
    if rot_like {
        return TransformClass::Rotation {
            theta_deg: g[1][0].atan2(g[0][0]).to_degrees(),
        };
    }
    // Shear: equal diagonal consistent with 1 / (1 - psi_yx psi_xy).
    if (g[0][0] - g[1][1]).abs() <= eps {
        let psi_xy = g[0][1] / g[0][0];
        let psi_yx = g[1][0] / g[0][0];
        if (g[0][0] * (1.0 - psi_yx * psi_xy) - 1.0).abs() <= eps {
            return TransformClass::Shear { psi_yx, psi_xy };
        }
    }
    // General map, reported through the spatial-side coefficients: the
    // in-plane linear part is the inverse transpose of the map, with shear
    // entries carried in the negated orientation the constructors use.
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let b = [
        [g[1][1] / det, -g[1][0] / det],
        [-g[0][1] / det, g[0][0] / det],
    ];
    TransformClass::General {
        chi_x: b[0][0],
        chi_y: b[1][1],
        psi_yx: -b[0][1],
        psi_xy: -b[1][0],
    }
}

/// Phase at each requested coordinate, in degrees in `[-180, 180)`.
///
/// Reflected peak pairs can destructively interfere; any coordinate whose
/// magnitude falls below `threshold` is flagged with an undefined-phase error
/// in its slot instead of producing a garbage angle.
pub fn measure_phase_set(
    spectrum: &ComplexSpectrum,
    coords: &[(i64, i64)],
    threshold: f64,
) -> Vec<Result<f64>> {
    coords
        .iter()
        .map(|&(u, v)| spectrum.phase_at(u, v, threshold))
        .collect()
}

/// Recovers the sampling-origin translation from measured peak phases.
///
/// Each peak constrains `u tau_x / M + v tau_y / N` modulo one period; the
/// integer lattice `[0, M) x [0, N)` is enumerated for the best circular fit
/// and then refined by unwrapped least squares. The result is the
/// representative in `[0, M) x [0, N)`.
pub fn recover_translation(
    peaks: &[(i64, i64)],
    phases_deg: &[f64],
    dims: (usize, usize),
) -> Result<(f64, f64)> {
    if peaks.len() != phases_deg.len() {
        return Err(Error::CorrespondenceMismatch {
            before: peaks.len(),
            after: phases_deg.len(),
        });
    }
    if peaks.len() < 2 {
        return Err(Error::TooFewCorrespondences {
            min: 2,
            got: peaks.len(),
        });
    }
    // Two independent directions are needed; all-parallel peaks only pin one
    // linear combination of (tau_x, tau_y).
    let independent = peaks
        .iter()
        .any(|&(u0, v0)| peaks.iter().any(|&(u1, v1)| u0 * v1 - v0 * u1 != 0));
    if !independent {
        return Err(Error::UnderdeterminedTranslation);
    }

    let (m, n) = (dims.0 as f64, dims.1 as f64);
    let predicted = |tx: f64, ty: f64, u: f64, v: f64| 360.0 * (u * tx / m + v * ty / n);

    let mut best = (0usize, 0usize);
    let mut best_cost = f64::INFINITY;
    for ty in 0..dims.1 {
        for tx in 0..dims.0 {
            let cost: f64 = peaks
                .iter()
                .zip(phases_deg)
                .map(|(&(u, v), &phi)| {
                    circular_distance_deg(
                        predicted(tx as f64, ty as f64, u as f64, v as f64),
                        phi,
                    )
                    .powi(2)
                })
                .sum();
            if cost < best_cost {
                best_cost = cost;
                best = (tx, ty);
            }
        }
    }

    // Unwrap each measurement against the integer solution and solve the
    // 2-unknown least squares exactly.
    let mut ata = [[0.0f64; 2]; 2];
    let mut atb = [0.0f64; 2];
    for (&(u, v), &phi) in peaks.iter().zip(phases_deg) {
        let (uf, vf) = (u as f64, v as f64);
        let guess = predicted(best.0 as f64, best.1 as f64, uf, vf);
        let turns = ((guess - phi) / 360.0).round();
        let target = phi + 360.0 * turns; // unwrapped measurement in degrees
        let a = [360.0 * uf / m, 360.0 * vf / n];
        ata[0][0] += a[0] * a[0];
        ata[0][1] += a[0] * a[1];
        ata[1][0] += a[1] * a[0];
        ata[1][1] += a[1] * a[1];
        atb[0] += a[0] * target;
        atb[1] += a[1] * target;
    }
    let det = ata[0][0] * ata[1][1] - ata[0][1] * ata[1][0];
    if det.abs() <= 1e-9 {
        return Err(Error::UnderdeterminedTranslation);
    }
    let tx = (ata[1][1] * atb[0] - ata[0][1] * atb[1]) / det;
    let ty = (ata[0][0] * atb[1] - ata[1][0] * atb[0]) / det;
    Ok((tx.rem_euclid(m), ty.rem_euclid(n)))
}

/// Convenience wrapper used by the analysis pipeline: predicted phase for a
/// candidate translation, for diagnostics.
pub fn translation_phase(tau: (f64, f64), dims: (usize, usize), peak: (i64, i64)) -> f64 {
    wrap_degrees_unsigned(
        360.0 * (peak.0 as f64 * tau.0 / dims.0 as f64 + peak.1 as f64 * tau.1 / dims.1 as f64),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_with_peaks(width: usize, height: usize, peaks: &[(i64, i64, f64)]) -> Vec<f64> {
        let (cx, cy) = (width / 2, height / 2);
        let mut grid = vec![0.0; width * height];
        for &(u, v, mag) in peaks {
            let ix = (u + cx as i64) as usize;
            let iy = (v + cy as i64) as usize;
            grid[iy * width + ix] = mag;
        }
        grid
    }

    #[test]
    fn detects_four_isolated_peaks() {
        let grid = grid_with_peaks(
            25,
            25,
            &[
                (6, 6, 10000.0),
                (-6, -6, 10000.0),
                (6, -6, 10000.0),
                (-6, 6, 10000.0),
            ],
        );
        let det = detect_peaks(&grid, 25, 25, &Template::impulse3(), 4, 1).unwrap();
        assert!(!det.truncated);
        let mut coords: Vec<(i64, i64)> = det.peaks.iter().map(|p| (p.u, p.v)).collect();
        coords.sort_unstable();
        assert_eq!(coords, vec![(-6, -6), (-6, 6), (6, -6), (6, 6)]);
        assert!(det.peaks.iter().all(|p| (p.magnitude - 10000.0).abs() < 1e-9));
    }

    #[test]
    fn zero_frequency_is_excluded() {
        let grid = grid_with_peaks(25, 25, &[(0, 0, 1e9), (6, 6, 10.0), (-6, -6, 10.0)]);
        let det = detect_peaks(&grid, 25, 25, &Template::impulse3(), 2, 1).unwrap();
        assert!(det.peaks.iter().all(|p| (p.u, p.v) != (0, 0)));
    }

    #[test]
    fn ncc_is_invariant_to_intensity_rescaling() {
        let grid = grid_with_peaks(25, 25, &[(6, 6, 100.0), (-6, -6, 100.0)]);
        let rescaled: Vec<f64> = grid.iter().map(|&v| 3.5 * v + 11.0).collect();
        let a = detect_peaks(&grid, 25, 25, &Template::impulse3(), 2, 1).unwrap();
        let b = detect_peaks(&rescaled, 25, 25, &Template::impulse3(), 2, 1).unwrap();
        for (pa, pb) in a.peaks.iter().zip(&b.peaks) {
            assert_eq!((pa.u, pa.v), (pb.u, pb.v));
            assert!((pa.ncc - pb.ncc).abs() < 1e-9);
        }
    }

    #[test]
    fn requesting_more_peaks_than_exist_truncates() {
        let grid = grid_with_peaks(25, 25, &[(6, 6, 10.0), (-6, -6, 10.0)]);
        let det = detect_peaks(&grid, 25, 25, &Template::impulse3(), 10, 1).unwrap();
        assert!(det.truncated);
        assert!(det.peaks.len() >= 2);
    }

    #[test]
    fn identity_estimate_has_zero_residual() {
        let pts = [(6.0, 6.0), (-6.0, -6.0), (6.0, -6.0), (-6.0, 6.0)];
        let est = estimate_affine(&pts, &pts, DEFAULT_EPS_CLASS).unwrap();
        assert!(est.residual < 1e-12);
        match est.class {
            TransformClass::UniformScale { chi_xy, chi_z } => {
                assert!((chi_xy - 1.0).abs() < 1e-12);
                assert!((chi_z - 1.0).abs() < 1e-12);
            }
            other => panic!("expected uniform scale, got {other:?}"),
        }
    }

    #[test]
    fn scale_estimate_from_binned_points_stays_near_truth() {
        let before = [(6.0, 6.0), (-6.0, -6.0), (6.0, -6.0), (-6.0, 6.0)];
        // chi_x = 1.25 maps u = 6 to 4.8, captured as the bin 5.
        let after = [(5.0, 6.0), (-5.0, -6.0), (5.0, -6.0), (-5.0, 6.0)];
        let est = estimate_affine(&before, &after, DEFAULT_EPS_CLASS).unwrap();
        match est.class {
            TransformClass::Scale { chi_x, chi_y } => {
                assert!((1.2..=1.3).contains(&chi_x), "chi_x {chi_x}");
                assert!((chi_y - 1.0).abs() < 1e-9);
            }
            other => panic!("expected scale, got {other:?}"),
        }
    }

    #[test]
    fn rotation_estimate_from_binned_points() {
        let before = [(6.0, 6.0), (-6.0, -6.0), (6.0, -6.0), (-6.0, 6.0)];
        let after = [(2.0, 8.0), (-2.0, -8.0), (8.0, -2.0), (-8.0, 2.0)];
        let est = estimate_affine(&before, &after, DEFAULT_EPS_CLASS).unwrap();
        match est.class {
            TransformClass::Rotation { theta_deg } => {
                assert!((theta_deg - 30.0).abs() <= 2.0, "theta {theta_deg}");
            }
            other => panic!("expected rotation, got {other:?}"),
        }
    }

    #[test]
    fn collinear_points_are_rejected() {
        let before = [(6.0, 6.0), (-6.0, -6.0), (3.0, 3.0)];
        let after = before;
        assert!(matches!(
            estimate_affine(&before, &after, DEFAULT_EPS_CLASS),
            Err(Error::CollinearCorrespondences)
        ));
    }

    #[test]
    fn translation_recovery_is_exact_on_integers() {
        let peaks = [(6i64, 6i64), (-6, -6), (6, -6), (-6, 6)];
        for shift in [(0usize, 0usize), (6, 6), (13, 2), (24, 24)] {
            let phases: Vec<f64> = peaks
                .iter()
                .map(|&(u, v)| {
                    translation_phase((shift.0 as f64, shift.1 as f64), (25, 25), (u, v))
                })
                .collect();
            let (tx, ty) = recover_translation(&peaks, &phases, (25, 25)).unwrap();
            assert!((tx - shift.0 as f64).abs() < 1e-9, "tx {tx} vs {}", shift.0);
            assert!((ty - shift.1 as f64).abs() < 1e-9, "ty {ty} vs {}", shift.1);
        }
    }

    #[test]
    fn parallel_peaks_cannot_pin_translation() {
        let peaks = [(6i64, 6i64), (-6, -6)];
        let phases = [10.0, -10.0];
        assert!(matches!(
            recover_translation(&peaks, &phases, (25, 25)),
            Err(Error::UnderdeterminedTranslation)
        ));
    }
}
