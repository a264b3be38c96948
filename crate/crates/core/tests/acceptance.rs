//! End-to-end acceptance checks, one test per criterion. Each prints a
//! `criterion N: PASS|FAIL` line (visible with `--nocapture`) before asserting.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use irs_core::coverage::{
    angle_sweep_replica, coverage_map, panel_link, CoverageMap, IrsPanel, Point, ReplicaSetup,
    RxGrid, Scene2D, Segment, Transmitter,
};
use irs_core::far_field::{
    build_profile, efficiency_vs_pec, field_at, peak_angle, scattered_pattern, ApertureElement,
    ApertureProfile, AngleGrid,
};
use irs_core::gradient::{
    anomalous_angle, design_supercell, parallel_wavevector_ratio, period_for_angle,
    table2_reference_spec, SupercellSpec, PUBLISHED_SIZES_MM,
};
use irs_core::mask::{layout_panel, render_svg, PatchShape};
use irs_core::unit_cell::{
    default_surrogate_curve, reflection_coefficient, Layer, LayerStack, PatchCell, PhaseCurve,
    UniformResponse,
};
use irs_core::{Angle, Frequency, Polarization};

fn report(n: usize, what: &str, ok: bool, detail: String) {
    println!("criterion {n}: {} ({what}) {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {what} {detail}");
}

fn f5() -> Frequency {
    Frequency::from_ghz(5.0).unwrap()
}

fn surrogate_design() -> (SupercellSpec, PhaseCurve) {
    let f = f5();
    let theta = Angle::from_degrees(30.0);
    let pitch = period_for_angle(f, theta).unwrap() / 10.0;
    let curve = default_surrogate_curve(&LayerStack::paper_on_mdf(), pitch, f).unwrap();
    let spec = design_supercell(f, theta, 10, &curve).unwrap();
    (spec, curve)
}

#[test]
fn criterion_1_parallel_wavevector_ratio() {
    let r = parallel_wavevector_ratio(0.120, f5()).unwrap();
    report(1, "rho/k0 at 120 mm, 5 GHz", (r - 0.4997).abs() <= 0.001, format!("ratio={r:.5}"));
}

#[test]
fn criterion_2_normal_incidence_angle() {
    let a = anomalous_angle(Angle::ZERO, 0.120, f5()).unwrap().degrees();
    report(2, "anomalous angle at normal incidence", (a - 30.0).abs() <= 0.1, format!("{a:.3} deg"));
}

#[test]
fn criterion_3_oblique_angles() {
    let mut ok = true;
    let mut detail = String::new();
    for (ti, want) in [(5.0, 36.0), (10.0, 42.0), (15.0, 49.0)] {
        let a = anomalous_angle(Angle::from_degrees(ti), 0.120, f5()).unwrap().degrees();
        ok &= (a - want).abs() <= 0.5;
        detail += &format!("{ti}->{a:.2} ");
    }
    report(3, "oblique incidence angles", ok, detail);
}

#[test]
fn criterion_4_far_field_peaks() {
    let (spec, curve) = surrogate_design();
    let profile = build_profile(&spec, &curve, 10).unwrap();
    let grid = AngleGrid::default_grid();
    let mut ok = true;
    let mut detail = String::new();
    for (ti, want) in [(0.0, 30.0), (5.0, 36.0), (10.0, 42.0), (15.0, 49.0)] {
        let p = scattered_pattern(&profile, Angle::from_degrees(ti), f5(), &grid);
        let peak = peak_angle(&p).degrees();
        ok &= (peak - want).abs() <= 2.0;
        detail += &format!("{ti}->{peak:.1} ");
    }
    report(4, "far-field peak of the synthesized design", ok, detail);
}

#[test]
fn criterion_5_panel_beats_copper_plate() {
    let (spec, curve) = surrogate_design();
    let setup = ReplicaSetup::default();
    let freqs: Vec<Frequency> =
        (0..5).map(|i| Frequency::from_ghz(5.16 + 0.01 * i as f64).unwrap()).collect();
    let rx = [Angle::from_degrees(30.0)];
    let design = angle_sweep_replica(&spec, &curve, 3, &setup, &freqs, &rx).unwrap();
    let plate = angle_sweep_replica(&spec, &UniformResponse::pec(), 3, &setup, &freqs, &rx).unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for ((d, p), f) in design.iter().zip(&plate).zip(&freqs) {
        let (d, p) = (d.power_dbm.unwrap(), p.power_dbm.unwrap());
        ok &= d > p;
        detail += &format!("{:.2}GHz:{d:.1}>{p:.1} ", f.ghz());
    }
    report(5, "designed panel above copper plate at 30 deg", ok, detail);
}

#[test]
fn criterion_6_quantization_efficiency() {
    let f = f5();
    // Lossless, linear phase source covering a full turn.
    let points: Vec<(f64, f64, f64)> = (0..=200)
        .map(|i| {
            let t = i as f64 / 200.0;
            (1e-3 + t * 10e-3, 1.0, -359.0f64.to_radians() * t)
        })
        .collect();
    let curve = PhaseCurve::from_polar(&points, f).unwrap();
    let spec = design_supercell(f, Angle::from_degrees(30.0), 10, &curve).unwrap();
    let eff = efficiency_vs_pec(&spec, &curve, Angle::ZERO, &[f], 10).unwrap()[0];
    let x = PI / 10.0;
    let oracle = (x.sin() / x).powi(2);
    report(
        6,
        "efficiency of exact 10-level phases",
        (eff - oracle).abs() <= 0.01,
        format!("eff={eff:.4} oracle={oracle:.4}"),
    );
}

fn run(cases: u32, test: impl Fn(&mut TestRunner) -> Result<(), String>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    test(&mut runner)
}

fn passivity() -> Result<(), String> {
    run(1000, |r| {
        let strat = (
            5e-3..40e-3f64,
            0.05..0.99f64,
            (1e-5..3e-3f64, 1.0..12.0f64, 0.0..0.1f64),
            (1e-4..5e-3f64, 1.0..12.0f64, 0.0..0.1f64),
            1.0..20.0f64,
            0.0..85.0f64,
            any::<bool>(),
        );
        r.run(&strat, |(pitch, fill, l1, l2, ghz, deg, te)| {
            let stack = LayerStack::new(vec![
                Layer::new(l1.0, l1.1, l1.2).unwrap(),
                Layer::new(l2.0, l2.1, l2.2).unwrap(),
            ])
            .unwrap();
            let cell = PatchCell::new(pitch, pitch, pitch * fill, stack).unwrap();
            let pol = if te { Polarization::Te } else { Polarization::Tm };
            let g = reflection_coefficient(
                &cell,
                Frequency::from_ghz(ghz).unwrap(),
                Angle::from_degrees(deg),
                pol,
            )
            .unwrap();
            prop_assert!(g.norm() <= 1.0 + 1e-9, "|gamma| = {}", g.norm());
            Ok(())
        })
        .map_err(|e| format!("passivity: {e}"))
    })
}

fn random_profile() -> impl Strategy<Value = ApertureProfile> {
    prop::collection::vec((0.2..1.0f64, -PI..PI), 2..30).prop_map(|cells| {
        let pitch = 0.012;
        let elements = cells
            .iter()
            .enumerate()
            .map(|(i, &(m, ph))| ApertureElement {
                x: i as f64 * pitch,
                width: pitch,
                gamma: Complex64::from_polar(m, ph),
            })
            .collect();
        ApertureProfile::new(elements).unwrap()
    })
}

fn pattern_reciprocity() -> Result<(), String> {
    run(200, |r| {
        r.run(&(random_profile(), -80.0..80.0f64, -80.0..80.0f64), |(p, a, b)| {
            let f = f5();
            let e1 = field_at(&p, Angle::from_degrees(a), Angle::from_degrees(b), f).norm();
            let e2 = field_at(&p, Angle::from_degrees(-b), Angle::from_degrees(-a), f).norm();
            prop_assert!((e1 - e2).abs() <= 1e-9 * e1.max(e2).max(1e-300));
            Ok(())
        })
        .map_err(|e| format!("pattern reciprocity: {e}"))
    })
}

fn open_scene(tx: Point, panel: IrsPanel, f: Frequency) -> Scene2D {
    Scene2D::new(
        Vec::new(),
        Transmitter { position: tx, power_dbm: 10.0, gain_dbi: 0.0 },
        0.0,
        vec![panel],
        RxGrid { origin: Point::new(-5.0, -5.0), extent: Point::new(10.0, 10.0), resolution: 1.0 },
        f,
    )
    .unwrap()
}

fn link_reciprocity() -> Result<(), String> {
    let (spec, curve) = surrogate_design();
    let profile = build_profile(&spec, &curve, 3).unwrap();
    run(200, |r| {
        let pt = || (-4.0..4.0f64, 0.3..5.0f64);
        r.run(&(pt(), pt()), |((ax, ay), (bx, by))| {
            let panel =
                IrsPanel::new(Point::default(), Point::new(0.0, 1.0), profile.clone(), 0.24, false)
                    .unwrap();
            let (a, b) = (Point::new(ax, ay), Point::new(bx, by));
            let forward = panel_link(&open_scene(a, panel.clone(), f5()), 0, b).unwrap();
            let backward = panel_link(&open_scene(b, panel, f5()), 0, a).unwrap();
            let (p1, p2) = (forward.received_power_dbm.unwrap(), backward.received_power_dbm.unwrap());
            prop_assert!((p1 - p2).abs() <= 1e-9, "{p1} vs {p2}");
            Ok(())
        })
        .map_err(|e| format!("link reciprocity: {e}"))
    })
}

fn specular_identity() -> Result<(), String> {
    let grid = AngleGrid::default_grid();
    run(100, |r| {
        let strat = (2usize..60, 2e-3..30e-3f64, 0.1..1.0f64, -PI..PI, -70.0..70.0f64);
        r.run(&strat, |(n, w, m, ph, ti)| {
            let p = ApertureProfile::uniform(n, w, Complex64::from_polar(m, ph)).unwrap();
            let pat = scattered_pattern(&p, Angle::from_degrees(ti), f5(), &grid);
            let peak = peak_angle(&pat).degrees();
            prop_assert!((peak - ti).abs() <= 0.1 + 1e-9, "peak {peak} for theta_i {ti}");
            Ok(())
        })
        .map_err(|e| format!("specular identity: {e}"))
    })
}

fn monotone_shadowing() -> Result<(), String> {
    let (spec, curve) = surrogate_design();
    let profile = build_profile(&spec, &curve, 2).unwrap();
    run(40, |r| {
        let pt = || (0.0..8.0f64, 0.0..8.0f64);
        r.run(&(pt(), pt(), pt()), |(tx, a, b)| {
            let panel =
                IrsPanel::new(Point::new(4.0, 8.5), Point::new(0.0, -1.0), profile.clone(), 0.24, false)
                    .unwrap();
            let base = Scene2D::new(
                Vec::new(),
                Transmitter { position: Point::new(tx.0, tx.1), power_dbm: 10.0, gain_dbi: 0.0 },
                0.0,
                vec![panel],
                RxGrid { origin: Point::default(), extent: Point::new(8.0, 8.0), resolution: 0.5 },
                f5(),
            )
            .unwrap();
            let wall = Segment::new(Point::new(a.0, a.1), Point::new(b.0, b.1));
            let blocked = base.with_obstacle(wall).unwrap();
            let (m0, m1) = (coverage_map(&base).unwrap(), coverage_map(&blocked).unwrap());
            for (v0, v1) in m0.values.iter().zip(&m1.values) {
                match (v0, v1) {
                    (_, None) => {}
                    (Some(p0), Some(p1)) => prop_assert!(p1 <= &(p0 + 1e-9)),
                    (None, Some(_)) => prop_assert!(false, "obstacle created coverage"),
                }
            }
            Ok(())
        })
        .map_err(|e| format!("monotone shadowing: {e}"))
    })
}

fn grating_equivalence() -> Result<(), String> {
    let f = f5();
    for m in 2..=8 {
        let period = m as f64 * f.wavelength();
        let got = anomalous_angle(Angle::ZERO, period, f).map_err(|e| e.to_string())?;
        // m-th order of a grating with spacing P: P sin θ = λ, i.e. sin θ = 1/m.
        let want = (1.0 / m as f64).asin();
        if (got.radians() - want).abs() > 1e-12 {
            return Err(format!("grating m={m}: {} vs {}", got.degrees(), want.to_degrees()));
        }
    }
    Ok(())
}

#[test]
fn criterion_7_property_suites() {
    let results = [
        ("passivity", passivity()),
        ("pattern reciprocity", pattern_reciprocity()),
        ("link reciprocity", link_reciprocity()),
        ("specular identity", specular_identity()),
        ("monotone shadowing", monotone_shadowing()),
        ("grating equivalence", grating_equivalence()),
    ];
    let failures: Vec<String> =
        results.iter().filter_map(|(_, r)| r.as_ref().err().cloned()).collect();
    let names: Vec<&str> = results.iter().map(|(n, _)| *n).collect();
    report(7, "property suites", failures.is_empty(), format!("{names:?} {failures:?}"));
}

#[test]
fn criterion_8_mask_fidelity() {
    let strip = PatchShape::TransverseStrip { gradient_extent: 11e-3 };
    let layout = layout_panel(&table2_reference_spec(), 12, 2, 30e-3, strip).unwrap();
    let svg = render_svg(&layout).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let root = doc.root_element();
    let mm = |attr: &str| root.attribute(attr).unwrap().trim_end_matches("mm").parse::<f64>().unwrap();
    let (w, h) = (mm("width"), mm("height"));
    let rects: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("rect")).collect();
    let mut sizes: Vec<f64> =
        rects.iter().map(|r| r.attribute("height").unwrap().parse().unwrap()).collect();
    sizes.sort_by(f64::total_cmp);
    sizes.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let recovered = sizes.len() == PUBLISHED_SIZES_MM.len()
        && sizes.iter().zip(PUBLISHED_SIZES_MM).all(|(a, b)| (a - b).abs() <= 0.01);
    let ok = rects.len() == 240 && (w - 240.0).abs() < 1e-9 && (h - 360.0).abs() < 1e-9 && recovered;
    report(8, "mask parse-back", ok, format!("{} rects, {w} x {h} mm, sizes {sizes:?}", rects.len()));
}

/// Room 10 m x 8 m with a wall at x = 5 shadowing the lower right region
/// from a transmitter at (2, 4), and a panel high on the far side.
fn shadow_scene(panel_normal: Option<Point>) -> Scene2D {
    let (spec, curve) = surrogate_design();
    let panels = panel_normal
        .map(|n| {
            vec![IrsPanel::new(
                Point::new(6.0, 7.9),
                n,
                build_profile(&spec, &curve, 3).unwrap(),
                0.24,
                false,
            )
            .unwrap()]
        })
        .unwrap_or_default();
    Scene2D::new(
        vec![Segment::new(Point::new(5.0, 0.0), Point::new(5.0, 5.0))],
        Transmitter { position: Point::new(2.0, 4.0), power_dbm: 14.0, gain_dbi: 0.0 },
        0.0,
        panels,
        RxGrid { origin: Point::default(), extent: Point::new(10.0, 8.0), resolution: 0.1 },
        f5(),
    )
    .unwrap()
}

fn shadow_values(map: &CoverageMap) -> Vec<Option<f64>> {
    map.points()
        .filter(|(p, _)| p.x > 5.5 && p.x < 9.5 && p.y > 0.5 && p.y < 3.0)
        .map(|(_, v)| v)
        .collect()
}

fn median_dbm(values: &[Option<f64>]) -> Option<f64> {
    let mut finite: Vec<f64> = values.iter().flatten().copied().collect();
    if finite.len() * 2 <= values.len() {
        return None;
    }
    finite.sort_by(f64::total_cmp);
    // Cells without coverage rank below every finite value.
    let missing = values.len() - finite.len();
    Some(finite[values.len() / 2 - missing])
}

#[test]
fn criterion_9_coverage_shadow_fill() {
    let bare = shadow_values(&coverage_map(&shadow_scene(None)).unwrap());
    let aimed = shadow_values(&coverage_map(&shadow_scene(Some(Point::new(0.0, -1.0)))).unwrap());
    let (s, c) = (60f64.to_radians().sin(), 60f64.to_radians().cos());
    let rotated = Point::new(s, -c);
    let off = shadow_values(&coverage_map(&shadow_scene(Some(rotated))).unwrap());

    let bare_dark = bare.iter().all(Option::is_none);
    let aimed_median = median_dbm(&aimed);
    let off_gain = off.iter().any(Option::is_some);
    let ok = !bare.is_empty() && bare_dark && aimed_median.is_some() && !off_gain;
    report(
        9,
        "panel fills the shadow, a 60 deg misaimed panel does not",
        ok,
        format!(
            "cells={} bare_dark={bare_dark} aimed_median={aimed_median:?} misaimed_gain={off_gain}",
            bare.len()
        ),
    );
}
