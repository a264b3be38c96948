//! Two-dimensional indoor link budget with opaque obstacles and passive
//! reflecting panels.
//!
//! A panel path is modelled as two free-space hops joined by the panel's
//! bistatic scattering gain
//!
//! ```text
//! S = 10 log10(4π A / λ²) + 20 log10(|E(θ_dep; θ_inc)| / Σ w_n)
//! ```
//!
//! where `E` is the aperture sum from [`crate::far_field`] and `Σ w_n` is the
//! peak of a uniform metal plate of the same aperture. Paths combine as a power
//! sum.

use std::fmt::Write as _;
use std::fs;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::em::{db10, db20, Angle, Frequency};
use crate::error::{Error, Result};
use crate::far_field::{build_profile, build_profile_at, field_at, ApertureProfile};
use crate::gradient::SupercellSpec;
use crate::unit_cell::{default_surrogate_curve, load_phase_table, CellResponse, LayerStack};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Point) -> f64 {
        (self - o).norm()
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[Point; 2]", into = "[Point; 2]")]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl From<[Point; 2]> for Segment {
    fn from([a, b]: [Point; 2]) -> Self {
        Self { a, b }
    }
}

impl From<Segment> for [Point; 2] {
    fn from(s: Segment) -> Self {
        [s.a, s.b]
    }
}

fn orientation(a: Point, b: Point, c: Point) -> i8 {
    let v = (b - a).cross(c - a);
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// `c` lies in the bounding box of `a`–`b` (used for collinear points).
fn within_box(a: Point, b: Point, c: Point) -> bool {
    c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    /// Closed-segment intersection; touching endpoints count.
    pub fn intersects(&self, other: &Segment) -> bool {
        let (p1, p2, q1, q2) = (self.a, self.b, other.a, other.b);
        let o1 = orientation(p1, p2, q1);
        let o2 = orientation(p1, p2, q2);
        let o3 = orientation(q1, q2, p1);
        let o4 = orientation(q1, q2, p2);
        if o1 != o2 && o3 != o4 {
            return true;
        }
        (o1 == 0 && within_box(p1, p2, q1))
            || (o2 == 0 && within_box(p1, p2, q2))
            || (o3 == 0 && within_box(q1, q2, p1))
            || (o4 == 0 && within_box(q1, q2, p2))
    }
}

/// Free-space path loss `20 log10(4π d / λ)` in dB.
pub fn friis_loss(f: Frequency, d: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidInput(format!("distance must be positive, got {d} m")));
    }
    Ok(db20(4.0 * std::f64::consts::PI * d / f.wavelength()))
}

/// Loss used inside link budgets: never negative, so a passive hop cannot
/// add power even inside the reactive near zone.
fn hop_loss(f: Frequency, d: f64) -> Result<f64> {
    Ok(friis_loss(f, d)?.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transmitter {
    pub position: Point,
    pub power_dbm: f64,
    #[serde(default)]
    pub gain_dbi: f64,
}

/// A wall-mounted reflecting panel. The gradient axis runs along
/// [`tangent`](Self::tangent); positive departure angles lie on that side of
/// the normal.
#[derive(Debug, Clone, PartialEq)]
pub struct IrsPanel {
    center: Point,
    normal: Point,
    mirrored: bool,
    profile: ApertureProfile,
    /// Transverse panel height in metres, used for the effective area.
    height: f64,
}

/// Transverse height of the printed panel, 240 mm.
pub const DEFAULT_PANEL_HEIGHT: f64 = 0.24;

impl IrsPanel {
    pub fn new(
        center: Point,
        normal: Point,
        profile: ApertureProfile,
        height: f64,
        mirrored: bool,
    ) -> Result<Self> {
        let len = normal.norm();
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::InvalidInput("panel normal must be non-zero".into()));
        }
        if !(height > 0.0) {
            return Err(Error::InvalidInput(format!("panel height must be positive, got {height}")));
        }
        Ok(Self { center, normal: normal * (1.0 / len), mirrored, profile, height })
    }

    /// Panel built from a design tiled `tiles` times.
    pub fn from_design(
        center: Point,
        normal: Point,
        spec: &SupercellSpec,
        source: &dyn CellResponse,
        tiles: usize,
    ) -> Result<Self> {
        Self::new(center, normal, build_profile(spec, source, tiles)?, DEFAULT_PANEL_HEIGHT, false)
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn normal(&self) -> Point {
        self.normal
    }

    /// Gradient axis: the normal rotated clockwise, reversed when mirrored.
    pub fn tangent(&self) -> Point {
        let t = Point::new(self.normal.y, -self.normal.x);
        if self.mirrored {
            t * -1.0
        } else {
            t
        }
    }

    pub fn profile(&self) -> &ApertureProfile {
        &self.profile
    }

    pub fn aperture_length(&self) -> f64 {
        self.profile.length()
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn aperture(&self) -> Segment {
        let half = self.tangent() * (0.5 * self.aperture_length());
        Segment::new(self.center - half, self.center + half)
    }

    /// Signed angle of `p` from the normal, positive toward the tangent.
    pub fn angle_to(&self, p: Point) -> Angle {
        let v = p - self.center;
        Angle::from_radians(v.dot(self.tangent()).atan2(v.dot(self.normal)))
    }

    fn in_front(&self, p: Point) -> bool {
        (p - self.center).dot(self.normal) > 0.0
    }

    /// Broadside scattering gain `10 log10(4π A/λ²)` in dB.
    pub fn reference_gain_db(&self, f: Frequency) -> f64 {
        let area = self.aperture_length() * self.height;
        db10(4.0 * std::f64::consts::PI * area / f.wavelength().powi(2))
    }

    /// Bistatic gain for a source at physical angle `from` and an observer at
    /// `to`, both measured from the normal.
    pub fn scattering_gain_db(&self, from: Angle, to: Angle, f: Frequency) -> f64 {
        // A source at +α illuminates like a mirror-side incidence of -α.
        let incidence = Angle::from_radians(-from.radians());
        let e = field_at(&self.profile, incidence, to, f);
        self.reference_gain_db(f) + db20(e.norm() / self.profile.reference_peak())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RxGrid {
    pub origin: Point,
    pub extent: Point,
    pub resolution: f64,
}

impl RxGrid {
    pub fn dims(&self) -> (usize, usize) {
        let n = |e: f64| ((e / self.resolution).round() as usize).max(1);
        (n(self.extent.x), n(self.extent.y))
    }

    /// Centre of cell `(ix, iy)`.
    pub fn point(&self, ix: usize, iy: usize) -> Point {
        self.origin
            + Point::new((ix as f64 + 0.5) * self.resolution, (iy as f64 + 0.5) * self.resolution)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene2D {
    obstacles: Vec<Segment>,
    tx: Transmitter,
    rx_gain_dbi: f64,
    panels: Vec<IrsPanel>,
    grid: RxGrid,
    frequency: Frequency,
}

impl Scene2D {
    pub fn new(
        obstacles: Vec<Segment>,
        tx: Transmitter,
        rx_gain_dbi: f64,
        panels: Vec<IrsPanel>,
        grid: RxGrid,
        frequency: Frequency,
    ) -> Result<Self> {
        if !(grid.resolution > 0.0 && grid.resolution.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "grid resolution must be positive, got {}",
                grid.resolution
            )));
        }
        if !(grid.extent.x > 0.0 && grid.extent.y > 0.0) {
            return Err(Error::InvalidInput("grid extent must be positive".into()));
        }
        for (i, panel) in panels.iter().enumerate() {
            let aperture = panel.aperture();
            if let Some(j) = obstacles.iter().position(|o| o.intersects(&aperture)) {
                return Err(Error::InvalidGeometry(format!(
                    "panel {i} aperture intersects obstacle {j}"
                )));
            }
        }
        Ok(Self { obstacles, tx, rx_gain_dbi, panels, grid, frequency })
    }

    pub fn obstacles(&self) -> &[Segment] {
        &self.obstacles
    }

    pub fn tx(&self) -> &Transmitter {
        &self.tx
    }

    pub fn panels(&self) -> &[IrsPanel] {
        &self.panels
    }

    pub fn grid(&self) -> &RxGrid {
        &self.grid
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn rx_gain_dbi(&self) -> f64 {
        self.rx_gain_dbi
    }

    /// Copy with an additional obstacle, revalidated.
    pub fn with_obstacle(&self, obstacle: Segment) -> Result<Self> {
        let mut obstacles = self.obstacles.clone();
        obstacles.push(obstacle);
        Self::new(obstacles, self.tx, self.rx_gain_dbi, self.panels.clone(), self.grid, self.frequency)
    }

    /// Copy with a different panel set.
    pub fn with_panels(&self, panels: Vec<IrsPanel>) -> Result<Self> {
        Self::new(self.obstacles.clone(), self.tx, self.rx_gain_dbi, panels, self.grid, self.frequency)
    }

    /// Upper bound on what any passive panel path can deliver.
    pub fn power_ceiling_dbm(&self, panel: usize) -> f64 {
        self.tx.power_dbm
            + self.tx.gain_dbi
            + self.rx_gain_dbi
            + self.panels[panel].reference_gain_db(self.frequency)
    }
}

/// `true` iff the closed segment `a`–`b` touches no obstacle.
pub fn los_visible(scene: &Scene2D, a: Point, b: Point) -> bool {
    let s = Segment::new(a, b);
    !scene.obstacles.iter().any(|o| o.intersects(&s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkPath {
    Direct,
    ViaPanel(usize),
    Blocked,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkResult {
    pub path: LinkPath,
    /// `None` when blocked.
    pub received_power_dbm: Option<f64>,
    /// Physical angle of the transmitter from the panel normal.
    pub incidence: Option<Angle>,
    /// Physical angle of the receiver from the panel normal.
    pub departure: Option<Angle>,
}

impl LinkResult {
    fn blocked() -> Self {
        Self { path: LinkPath::Blocked, received_power_dbm: None, incidence: None, departure: None }
    }
}

/// Direct Tx→Rx link, blocked when an obstacle intervenes or Rx sits on Tx.
pub fn direct_link(scene: &Scene2D, rx: Point) -> Result<LinkResult> {
    let d = scene.tx.position.distance(rx);
    if d == 0.0 || !los_visible(scene, scene.tx.position, rx) {
        return Ok(LinkResult::blocked());
    }
    let power =
        scene.tx.power_dbm + scene.tx.gain_dbi + scene.rx_gain_dbi - hop_loss(scene.frequency, d)?;
    Ok(LinkResult {
        path: LinkPath::Direct,
        received_power_dbm: Some(power),
        incidence: None,
        departure: None,
    })
}

/// Two-hop Tx→panel→Rx link through panel `panel_index`.
pub fn panel_link(scene: &Scene2D, panel_index: usize, rx: Point) -> Result<LinkResult> {
    let panel = scene.panels.get(panel_index).ok_or_else(|| {
        Error::InvalidInput(format!("no panel {panel_index}; scene has {}", scene.panels.len()))
    })?;
    let tx = scene.tx.position;
    let c = panel.center;
    if !panel.in_front(tx) || !panel.in_front(rx) {
        return Ok(LinkResult::blocked());
    }
    if !los_visible(scene, tx, c) || !los_visible(scene, c, rx) {
        return Ok(LinkResult::blocked());
    }
    let f = scene.frequency;
    let from = panel.angle_to(tx);
    let to = panel.angle_to(rx);
    let power = scene.tx.power_dbm + scene.tx.gain_dbi + scene.rx_gain_dbi
        - hop_loss(f, tx.distance(c))?
        - hop_loss(f, c.distance(rx))?
        + panel.scattering_gain_db(from, to, f);
    Ok(LinkResult {
        path: LinkPath::ViaPanel(panel_index),
        received_power_dbm: Some(power),
        incidence: Some(from),
        departure: Some(to),
    })
}

/// Received power over the scene grid; `None` marks cells with no path.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMap {
    pub grid: RxGrid,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `iy * nx + ix`.
    pub values: Vec<Option<f64>>,
}

impl CoverageMap {
    pub fn get(&self, ix: usize, iy: usize) -> Option<f64> {
        self.values[iy * self.nx + ix]
    }

    pub fn points(&self) -> impl Iterator<Item = (Point, Option<f64>)> + '_ {
        (0..self.ny).flat_map(move |iy| {
            (0..self.nx).map(move |ix| (self.grid.point(ix, iy), self.get(ix, iy)))
        })
    }

    /// CSV `x_m, y_m, power_dbm` with `NOCOV` for uncovered cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_m, y_m, power_dbm\n");
        for (p, v) in self.points() {
            match v {
                Some(dbm) => {
                    let _ = writeln!(out, "{:.4}, {:.4}, {:.4}", p.x, p.y, dbm);
                }
                None => {
                    let _ = writeln!(out, "{:.4}, {:.4}, NOCOV", p.x, p.y);
                }
            }
        }
        out
    }
}

fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn coverage_map(scene: &Scene2D) -> Result<CoverageMap> {
    let (nx, ny) = scene.grid.dims();
    let mut values = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let rx = scene.grid.point(ix, iy);
            let mut total_mw = 0.0;
            let mut any = false;
            let links = std::iter::once(direct_link(scene, rx))
                .chain((0..scene.panels.len()).map(|k| panel_link(scene, k, rx)));
            for link in links {
                if let Some(dbm) = link?.received_power_dbm {
                    any = true;
                    total_mw += dbm_to_mw(dbm);
                }
            }
            values.push(any.then(|| db10(total_mw)));
        }
    }
    Ok(CoverageMap { grid: scene.grid, nx, ny, values })
}

/// Geometry and source settings of the anechoic-chamber style measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicaSetup {
    /// Tx and Rx distance from the panel centre, metres.
    pub distance: f64,
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    /// Incidence angle on the mirror side: a uniform plate peaks at this Rx
    /// angle.
    pub theta_i: Angle,
    pub panel_height: f64,
}

impl Default for ReplicaSetup {
    fn default() -> Self {
        Self {
            distance: 1.5,
            tx_power_dbm: 14.0,
            tx_gain_dbi: 0.0,
            rx_gain_dbi: 0.0,
            theta_i: Angle::ZERO,
            panel_height: DEFAULT_PANEL_HEIGHT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicaRow {
    pub frequency: Frequency,
    pub rx_angle: Angle,
    pub power_dbm: Option<f64>,
}

/// Received power versus frequency and Rx angle with the panel at the
/// origin, Tx at `setup.distance` on the incidence direction and Rx swept on
/// a circle of the same radius.
pub fn angle_sweep_replica(
    spec: &SupercellSpec,
    source: &dyn CellResponse,
    tiles: usize,
    setup: &ReplicaSetup,
    freqs: &[Frequency],
    rx_angles: &[Angle],
) -> Result<Vec<ReplicaRow>> {
    if !(setup.distance > 0.0) {
        return Err(Error::InvalidInput("replica distance must be positive".into()));
    }
    let normal = Point::new(0.0, 1.0);
    let on_circle = |a: Angle| Point::new(a.sin(), a.cos()) * setup.distance;
    let tx_pos = on_circle(Angle::from_radians(-setup.theta_i.radians()));
    let mut rows = Vec::with_capacity(freqs.len() * rx_angles.len());
    for &f in freqs {
        let profile = build_profile_at(spec, source, tiles, f)?;
        let panel = IrsPanel::new(Point::default(), normal, profile, setup.panel_height, false)?;
        let extent = setup.distance * 2.0;
        let scene = Scene2D::new(
            Vec::new(),
            Transmitter {
                position: tx_pos,
                power_dbm: setup.tx_power_dbm,
                gain_dbi: setup.tx_gain_dbi,
            },
            setup.rx_gain_dbi,
            vec![panel],
            RxGrid {
                origin: Point::new(-extent, 0.0),
                extent: Point::new(2.0 * extent, extent),
                resolution: extent,
            },
            f,
        )?;
        for &a in rx_angles {
            let link = panel_link(&scene, 0, on_circle(a))?;
            rows.push(ReplicaRow { frequency: f, rx_angle: a, power_dbm: link.received_power_dbm });
        }
    }
    Ok(rows)
}

/// CSV `freq_ghz, rx_angle_deg, power_dbm`.
pub fn replica_csv(rows: &[ReplicaRow]) -> String {
    let mut out = String::from("freq_ghz, rx_angle_deg, power_dbm\n");
    for r in rows {
        let power = r.power_dbm.map_or_else(|| "NOCOV".to_string(), |p| format!("{p:.4}"));
        let _ = writeln!(out, "{:.6}, {:.4}, {}", r.frequency.ghz(), r.rx_angle.degrees(), power);
    }
    out
}

/// Rx angle of maximum power per frequency, in input order.
pub fn replica_argmax(rows: &[ReplicaRow]) -> Vec<(Frequency, Angle)> {
    let mut out: Vec<(Frequency, Angle, f64)> = Vec::new();
    for r in rows {
        let Some(p) = r.power_dbm else { continue };
        match out.iter_mut().find(|(f, _, _)| *f == r.frequency) {
            Some(entry) if p > entry.2 => *entry = (r.frequency, r.rx_angle, p),
            Some(_) => {}
            None => out.push((r.frequency, r.rx_angle, p)),
        }
    }
    out.into_iter().map(|(f, a, _)| (f, a)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelDocument {
    pub center: Point,
    pub normal: Point,
    pub tiles: usize,
    /// Design-export file, relative to the scene file.
    pub design: String,
    /// Optional phase table; the analytical surrogate is used otherwise.
    #[serde(default)]
    pub phase_table: Option<String>,
    #[serde(default = "default_height")]
    pub height_m: f64,
    #[serde(default)]
    pub mirrored: bool,
}

fn default_height() -> f64 {
    DEFAULT_PANEL_HEIGHT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDocument {
    pub frequency_ghz: f64,
    pub tx: Transmitter,
    #[serde(default)]
    pub rx_gain_dbi: f64,
    #[serde(default)]
    pub obstacles: Vec<Segment>,
    #[serde(default)]
    pub panels: Vec<PanelDocument>,
    pub grid: RxGrid,
}

/// Reads a scene document and resolves its panels' design files.
pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene2D> {
    let path = path.as_ref();
    let doc: SceneDocument = serde_json::from_str(&fs::read_to_string(path)?)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let frequency = Frequency::from_ghz(doc.frequency_ghz)?;
    let panels = doc
        .panels
        .iter()
        .map(|p| {
            let spec = SupercellSpec::load(base.join(&p.design))?;
            let profile = match &p.phase_table {
                Some(table) => {
                    let curve = load_phase_table(base.join(table), spec.frequency())?;
                    build_profile(&spec, &curve, p.tiles)?
                }
                None => {
                    let curve = default_surrogate_curve(
                        &LayerStack::paper_on_mdf(),
                        spec.pitch(),
                        spec.frequency(),
                    )?;
                    build_profile(&spec, &curve, p.tiles)?
                }
            };
            IrsPanel::new(p.center, p.normal, profile, p.height_m, p.mirrored)
        })
        .collect::<Result<Vec<_>>>()?;
    Scene2D::new(doc.obstacles, doc.tx, doc.rx_gain_dbi, panels, doc.grid, frequency)
}

/// Uniform metal plate of `count` cells of `width`, centred on the origin.
pub fn metal_plate(count: usize, width: f64) -> Result<ApertureProfile> {
    ApertureProfile::uniform(count, width, Complex64::new(-1.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> Frequency {
        Frequency::from_ghz(5.0).unwrap()
    }

    fn scene(obstacles: Vec<Segment>, panels: Vec<IrsPanel>) -> Scene2D {
        Scene2D::new(
            obstacles,
            Transmitter { position: Point::new(1.0, 1.0), power_dbm: 14.0, gain_dbi: 0.0 },
            0.0,
            panels,
            RxGrid { origin: Point::new(0.0, 0.0), extent: Point::new(4.0, 3.0), resolution: 0.5 },
            f5(),
        )
        .unwrap()
    }

    #[test]
    fn friis_examples() {
        let f = f5();
        let d0 = f.wavelength() / (4.0 * std::f64::consts::PI);
        assert!(friis_loss(f, d0).unwrap().abs() < 1e-12);
        let l = friis_loss(Frequency::from_ghz(5.18).unwrap(), 1.5).unwrap();
        assert!((l - 50.25).abs() < 0.05, "{l}");
        let step = friis_loss(f, 2.0).unwrap() - friis_loss(f, 1.0).unwrap();
        assert!((step - 6.0206).abs() < 1e-4);
        assert!(friis_loss(f, 0.0).is_err());
    }

    #[test]
    fn visibility_basics() {
        let empty = scene(vec![], vec![]);
        assert!(los_visible(&empty, Point::new(0.0, 0.0), Point::new(3.0, 2.0)));
        let wall = Segment::new(Point::new(2.0, -1.0), Point::new(2.0, 5.0));
        let s = scene(vec![wall], vec![]);
        assert!(!los_visible(&s, Point::new(1.0, 1.0), Point::new(3.0, 1.0)));
        let parallel = scene(vec![Segment::new(Point::new(0.0, 2.0), Point::new(4.0, 2.0))], vec![]);
        assert!(los_visible(&parallel, Point::new(0.0, 1.0), Point::new(4.0, 1.0)));
    }

    #[test]
    fn endpoint_touch_blocks() {
        let s = scene(vec![Segment::new(Point::new(2.0, 1.0), Point::new(2.0, 3.0))], vec![]);
        assert!(!los_visible(&s, Point::new(1.0, 1.0), Point::new(3.0, 1.0)));
        // Collinear overlap.
        let s = scene(vec![Segment::new(Point::new(2.0, 1.0), Point::new(5.0, 1.0))], vec![]);
        assert!(!los_visible(&s, Point::new(1.0, 1.0), Point::new(3.0, 1.0)));
        // Collinear but disjoint.
        assert!(los_visible(&s, Point::new(0.0, 1.0), Point::new(1.5, 1.0)));
    }

    #[test]
    fn rx_behind_panel_is_blocked() {
        let plate = metal_plate(10, 12e-3).unwrap();
        let panel =
            IrsPanel::new(Point::new(2.0, 0.1), Point::new(0.0, 1.0), plate, 0.24, false).unwrap();
        let s = scene(vec![], vec![panel]);
        let r = panel_link(&s, 0, Point::new(2.5, -1.0)).unwrap();
        assert_eq!(r.path, LinkPath::Blocked);
        assert!(panel_link(&s, 3, Point::new(2.5, 1.0)).is_err());
    }

    #[test]
    fn specular_receiver_sees_peak_gain() {
        let plate = metal_plate(30, 12e-3).unwrap();
        let panel =
            IrsPanel::new(Point::new(2.0, 0.0), Point::new(0.0, 1.0), plate, 0.24, false).unwrap();
        let s = scene(vec![], vec![panel]);
        // Tx at (1,1) is 45 deg on the -x side; specular Rx sits on the +x side.
        let on_ray = Point::new(3.5, 1.5);
        let gain = |rx: Point| {
            let r = panel_link(&s, 0, rx).unwrap();
            let p = &s.panels()[0];
            p.scattering_gain_db(r.incidence.unwrap(), r.departure.unwrap(), s.frequency())
        };
        let peak = s.panels()[0].reference_gain_db(f5());
        assert!((gain(on_ray) - peak).abs() < 1e-9);
        // Walk off the specular ray inside the main lobe.
        let at = |deg: f64| {
            let a = Angle::from_degrees(deg);
            Point::new(2.0 + a.sin(), a.cos())
        };
        assert!(gain(at(43.0)) < gain(on_ray));
        assert!(gain(at(41.0)) < gain(at(43.0)));
    }

    #[test]
    fn open_room_map_is_pure_friis() {
        let s = scene(vec![], vec![]);
        let map = coverage_map(&s).unwrap();
        for (p, v) in map.points() {
            let expected = 14.0 - friis_loss(f5(), p.distance(Point::new(1.0, 1.0))).unwrap();
            assert!((v.unwrap() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn shadowed_cells_have_no_coverage() {
        let wall = Segment::new(Point::new(2.0, -1.0), Point::new(2.0, 5.0));
        let map = coverage_map(&scene(vec![wall], vec![])).unwrap();
        for (p, v) in map.points() {
            assert_eq!(v.is_none(), p.x > 2.0, "{p:?}");
        }
        assert!(map.to_csv().contains("NOCOV"));
    }
}
