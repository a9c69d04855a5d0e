//! Scratch calibration runs (not part of the deliverable).

use sftp_core::*;

const AMP: f64 = 10000.0;

fn quad() -> [FrequencyPeak; 4] {
    [
        FrequencyPeak::at(6, 6, AMP),
        FrequencyPeak::at(-6, -6, AMP),
        FrequencyPeak::at(6, -6, AMP),
        FrequencyPeak::at(-6, 6, AMP),
    ]
}

fn capture(img: &SpatialImage, t: &PerspectiveTransform, scheme: Interpolation, anchor: Option<(f64, f64)>) -> Vec<(i64, i64)> {
    let warped = match anchor {
        Some(a) => warp_image_anchored(img, t, scheme, a).unwrap(),
        None => warp_image(img, t, scheme).unwrap(),
    };
    let spec = center_spectrum(&dft_forward(&warped));
    let mag = spec.magnitude();
    let det = detect_peaks(&mag, 25, 25, &Template::impulse3(), 4, 1).unwrap();
    let mut c: Vec<(i64, i64)> = det.peaks.iter().map(|p| (p.u, p.v)).collect();
    c.sort_unstable();
    c
}

fn predicted_set(t: &PerspectiveTransform) -> Vec<(i64, i64)> {
    let map = build_frequency_map(t, 25, 25).unwrap();
    let mut c: Vec<(i64, i64)> = quad()
        .iter()
        .map(|p| predict_peak(&map, p).bin())
        .collect();
    c.sort_unstable();
    c
}

fn main() {
    let base = encode_peaks(&PatternSpec::quad(25, 6, AMP)).unwrap();
    println!("pattern range {:?} fill {}", base.min_max(), base.fill_value());
    let anchor_mode: Option<(f64, f64)> = match std::env::args().nth(1).as_deref() {
        Some("corner") => Some((0.0, 0.0)),
        _ => None,
    };
    println!("anchor: {:?}", anchor_mode);

    println!("== table rows (captured vs paper) ==");
    let rows: Vec<(&str, PerspectiveTransform, Vec<(i64, i64)>)> = vec![
        ("chi_x=1.25", PerspectiveTransform::scale(1.25, 1.0, 1.0).unwrap(),
         vec![(5, 6), (-5, -6), (5, -6), (-5, 6)]),
        ("chi_y=1.25", PerspectiveTransform::scale(1.0, 1.25, 1.0).unwrap(),
         vec![(6, 5), (-6, -5), (6, -5), (-6, 5)]),
        ("chi_z=0.75", PerspectiveTransform::scale(1.0, 1.0, 0.75).unwrap(),
         vec![(5, 5), (-5, -5), (5, -5), (-5, 5)]),
        ("chi_xy=0.8", PerspectiveTransform::scale(0.8, 0.8, 1.0).unwrap(),
         vec![(7, 7), (-7, -7), (7, -7), (-7, 7)]),
        ("chi_xyz=0.75", PerspectiveTransform::scale(0.75, 0.75, 0.75).unwrap(),
         vec![(6, 6), (-6, -6), (6, -6), (-6, 6)]),
        ("psi_yx=0.3", PerspectiveTransform::shear(0.3, 0.0).unwrap(),
         vec![(6, 8), (-6, -8), (6, -4), (-6, 4)]),
        ("psi_xy=0.3", PerspectiveTransform::shear(0.0, 0.3).unwrap(),
         vec![(8, 6), (-8, -6), (4, -6), (-4, 6)]),
        ("psi_sym=0.2", PerspectiveTransform::shear(0.2, 0.2).unwrap(),
         vec![(7, 7), (-7, -7), (5, -5), (-5, 5)]),
        ("rot30", PerspectiveTransform::rotation(30.0),
         vec![(2, 8), (-2, -8), (8, -2), (-8, 2)]),
        ("rot60", PerspectiveTransform::rotation(60.0),
         vec![(8, 2), (-8, -2), (2, -8), (-2, 8)]),
    ];
    for (name, t, mut paper) in rows {
        paper.sort_unstable();
        let cap = capture(&base, &t, Interpolation::Bilinear, anchor_mode);
        let pred = predicted_set(&t);
        println!(
            "{name:14} cap {cap:?} paper-match {} pred {pred:?} congruent {}",
            cap == paper,
            cap == pred
        );
    }

    println!("== full sweeps congruence per family x anchor ==");
    for (label, anchor) in [("centre", None), ("corner", Some((0.0, 0.0)))] {
        let mut mismatches: Vec<String> = Vec::new();
        {
            let mut check = |name: &str, t: PerspectiveTransform| {
                let cap = capture(&base, &t, Interpolation::Bilinear, anchor);
                let pred = predicted_set(&t);
                if cap != pred {
                    mismatches.push(format!("{name}: cap {cap:?} pred {pred:?}"));
                }
            };
            for i in 0..=100 {
                let chi = 0.75 + 0.005 * i as f64;
                check(&format!("scale_x {chi}"), PerspectiveTransform::scale(chi, 1.0, 1.0).unwrap());
                check(&format!("scale_y {chi}"), PerspectiveTransform::scale(1.0, chi, 1.0).unwrap());
                check(&format!("scale_z {chi}"), PerspectiveTransform::scale(1.0, 1.0, chi).unwrap());
                check(&format!("scale_xy {chi}"), PerspectiveTransform::scale(chi, chi, 1.0).unwrap());
                check(&format!("scale_xyz {chi}"), PerspectiveTransform::scale(chi, chi, chi).unwrap());
            }
            for i in 0..150 {
                let psi = 0.002 + 0.002 * i as f64;
                check(&format!("shear_yx {psi}"), PerspectiveTransform::shear(psi, 0.0).unwrap());
                check(&format!("shear_xy {psi}"), PerspectiveTransform::shear(0.0, psi).unwrap());
                check(&format!("shear_sym {psi}"), PerspectiveTransform::shear(psi, psi).unwrap());
            }
            for d in 0..=360 {
                check(&format!("rot {d}"), PerspectiveTransform::rotation(d as f64));
            }
        }
        let count = |prefix: &str| mismatches.iter().filter(|m| m.starts_with(prefix)).count();
        println!(
            "{label}: total {}  scale_x {} scale_y {} scale_z {} scale_xy {} scale_xyz {} shear_yx {} shear_xy {} shear_sym {} rot {}",
            mismatches.len(),
            count("scale_x "), count("scale_y "), count("scale_z "),
            count("scale_xy "), count("scale_xyz "),
            count("shear_yx "), count("shear_xy "), count("shear_sym "), count("rot ")
        );
        for m in &mismatches {
            println!("  [{label}] {m}");
        }
    }

    println!("== exactly-half predicted coordinates: what does capture pick? ==");
    let halves: Vec<(&str, PerspectiveTransform)> = vec![
        ("scale_x 0.8   (7.5, 6)", PerspectiveTransform::scale(0.8, 1.0, 1.0).unwrap()),
        ("scale_y 0.8   (6, 7.5)", PerspectiveTransform::scale(1.0, 0.8, 1.0).unwrap()),
        ("scale_xy 0.8  (7.5, 7.5)", PerspectiveTransform::scale(0.8, 0.8, 1.0).unwrap()),
        ("scale_z 0.75  (4.5, 4.5)", PerspectiveTransform::scale(1.0, 1.0, 0.75).unwrap()),
        ("scale_z 1.25  (7.5, 7.5)", PerspectiveTransform::scale(1.0, 1.0, 1.25).unwrap()),
        ("shear_yx 0.25 (6, 7.5)/(6,-4.5)", PerspectiveTransform::shear(0.25, 0.0).unwrap()),
        ("shear_xy 0.25 (7.5, 6)/(-4.5,-6)", PerspectiveTransform::shear(0.0, 0.25).unwrap()),
        ("shear_sym 0.2 (7.5, 7.5)/(5,-5)", PerspectiveTransform::shear(0.2, 0.2).unwrap()),
    ];
    for (name, t) in halves {
        let cap = capture(&base, &t, Interpolation::Bilinear, anchor_mode);
        println!("{name:34} cap {cap:?}");
    }

    println!("== warp vertex scan ==");
    for (label, anchor) in [("centre", None), ("corner", Some((0.0, 0.0)))] {
        for scheme in [Interpolation::Bilinear, Interpolation::ArithmeticSum] {
            // psi_xz only
            let mut prev: Option<Vec<(i64, i64)>> = None;
            let mut vertices_x: Vec<f64> = Vec::new();
            let mut vertices_xy: Vec<f64> = Vec::new();
            for i in 0..=200 {
                let psi = 0.00005 * i as f64;
                let t = PerspectiveTransform::warp(psi, 0.0).unwrap();
                let cap = capture(&base, &t, scheme, anchor);
                if let Some(p) = &prev {
                    if *p != cap {
                        vertices_x.push(psi);
                    }
                }
                prev = Some(cap);
            }
            prev = None;
            for i in 0..=200 {
                let psi = 0.00005 * i as f64;
                let t = PerspectiveTransform::warp(psi, psi).unwrap();
                let cap = capture(&base, &t, scheme, anchor);
                if let Some(p) = &prev {
                    if *p != cap {
                        vertices_xy.push(psi);
                    }
                }
                prev = Some(cap);
            }
            println!(
                "{label} {scheme:?}: x-vertices {:?} xy-vertices {:?}",
                &vertices_x[..vertices_x.len().min(6)],
                &vertices_xy[..vertices_xy.len().min(8)]
            );
        }
    }
}
