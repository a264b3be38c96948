//! Printable vector masks for a tiled supercell.
//!
//! The sheet's `x` axis is the gradient axis (SVG width), `y` the transverse
//! axis (SVG height). All coordinates are millimetres.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gradient::SupercellSpec;

/// How a cell's size `D_n` maps onto the patch rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PatchShape {
    /// `D_n × D_n`.
    #[default]
    Square,
    /// Fixed extent along the gradient axis, `D_n` along the transverse axis.
    TransverseStrip { gradient_extent: f64 },
}

impl PatchShape {
    fn extents(self, size: f64) -> (f64, f64) {
        match self {
            PatchShape::Square => (size, size),
            PatchShape::TransverseStrip { gradient_extent } => (gradient_extent, size),
        }
    }

    fn note(self) -> String {
        match self {
            PatchShape::Square => "patches assumed square, side D_n".to_string(),
            PatchShape::TransverseStrip { gradient_extent } => format!(
                "patches assumed rectangular: {} mm along the gradient axis, D_n along the transverse axis",
                fmt_mm(gradient_extent)
            ),
        }
    }
}

/// One placed patch, metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedPatch {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelLayout {
    rows: usize,
    cols_periods: usize,
    transverse_pitch: f64,
    shape: PatchShape,
    spec: SupercellSpec,
    patches: Vec<PlacedPatch>,
}

impl PanelLayout {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols_periods(&self) -> usize {
        self.cols_periods
    }

    pub fn spec(&self) -> &SupercellSpec {
        &self.spec
    }

    pub fn patches(&self) -> &[PlacedPatch] {
        &self.patches
    }

    /// `(width, height)` of the sheet in metres.
    pub fn sheet_size(&self) -> (f64, f64) {
        (
            self.cols_periods as f64 * self.spec.period(),
            self.rows as f64 * self.transverse_pitch,
        )
    }

    /// Smallest edge-to-edge clearance between neighbouring patches.
    pub fn min_gap(&self) -> f64 {
        let pitch = self.spec.pitch();
        let along = self
            .patches
            .iter()
            .take(self.spec.n_cells() * self.cols_periods)
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| (w[1].cx - w[0].cx) - 0.5 * (w[0].width + w[1].width))
            .fold(f64::INFINITY, f64::min);
        let across = self
            .patches
            .iter()
            .map(|p| self.transverse_pitch - p.height)
            .fold(f64::INFINITY, f64::min);
        // Wrap-around between the last cell of one period and the first of the next.
        let edge = pitch - 0.5 * (self.patches[0].width + self.patches[self.spec.n_cells() - 1].width);
        along.min(across).min(edge)
    }
}

/// Places `rows × cols_periods` copies of the supercell: cell `n` of period
/// `c` in row `r` is centred at `(c·P + (n+½)·pitch, (r+½)·transverse_pitch)`.
pub fn layout_panel(
    spec: &SupercellSpec,
    rows: usize,
    cols_periods: usize,
    transverse_pitch: f64,
    shape: PatchShape,
) -> Result<PanelLayout> {
    if rows == 0 || cols_periods == 0 {
        return Err(Error::LayoutInvalid("rows and periods must be at least 1".into()));
    }
    if !(transverse_pitch > 0.0) {
        return Err(Error::LayoutInvalid("transverse pitch must be positive".into()));
    }
    if let PatchShape::TransverseStrip { gradient_extent } = shape {
        if !(gradient_extent > 0.0) {
            return Err(Error::LayoutInvalid("strip extent must be positive".into()));
        }
    }
    let pitch = spec.pitch();
    for (n, &d) in spec.patch_sizes().iter().enumerate() {
        let (w, h) = shape.extents(d);
        if w >= pitch {
            return Err(Error::LayoutInvalid(format!(
                "cell {n}: patch extent {} mm >= pitch {} mm along the gradient axis",
                fmt_mm(w),
                fmt_mm(pitch)
            )));
        }
        if h >= transverse_pitch {
            return Err(Error::LayoutInvalid(format!(
                "cell {n}: patch extent {} mm >= transverse pitch {} mm",
                fmt_mm(h),
                fmt_mm(transverse_pitch)
            )));
        }
    }
    let mut patches = Vec::with_capacity(rows * cols_periods * spec.n_cells());
    for r in 0..rows {
        let cy = (r as f64 + 0.5) * transverse_pitch;
        for c in 0..cols_periods {
            for (n, &d) in spec.patch_sizes().iter().enumerate() {
                let (width, height) = shape.extents(d);
                let cx = c as f64 * spec.period() + (n as f64 + 0.5) * pitch;
                patches.push(PlacedPatch { cx, cy, width, height });
            }
        }
    }
    Ok(PanelLayout { rows, cols_periods, transverse_pitch, shape, spec: spec.clone(), patches })
}

/// Millimetres with up to six decimals, trailing zeros trimmed.
fn fmt_mm(metres: f64) -> String {
    let s = format!("{:.6}", metres * 1e3);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// `--` may not appear inside an XML comment; JSON allows `-` in strings.
fn comment_safe(json: &str) -> String {
    let mut out = String::with_capacity(json.len());
    let mut prev_dash = false;
    for ch in json.chars() {
        if ch == '-' && prev_dash {
            out.push_str("\\u002d");
            prev_dash = false;
        } else {
            prev_dash = ch == '-';
            out.push(ch);
        }
    }
    out
}

/// SVG 1.1 document, one filled rectangle per patch. Output is a pure
/// function of the layout.
pub fn render_svg(layout: &PanelLayout) -> Result<String> {
    let (w, h) = layout.sheet_size();
    let (w, h) = (fmt_mm(w), fmt_mm(h));
    let design = comment_safe(&layout.spec.to_json()?);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}mm" height="{h}mm" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, "<!-- irs-layout rows={} periods={} transverse_pitch_mm={}; {} -->",
        layout.rows, layout.cols_periods, fmt_mm(layout.transverse_pitch), layout.shape.note());
    let _ = writeln!(out, "<!-- irs-design\n{design}\n-->");
    let _ = writeln!(out, r#"<g fill="black" stroke="none">"#);
    for p in &layout.patches {
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
            fmt_mm(p.cx - 0.5 * p.width),
            fmt_mm(p.cy - 0.5 * p.height),
            fmt_mm(p.width),
            fmt_mm(p.height)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

pub fn export_svg(layout: &PanelLayout, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render_svg(layout)?)?;
    Ok(())
}

/// Extracts the design document embedded in a rendered mask.
pub fn embedded_design(svg: &str) -> Option<SupercellSpec> {
    let start = svg.find("<!-- irs-design\n")? + "<!-- irs-design\n".len();
    let end = start + svg[start..].find("\n-->")?;
    SupercellSpec::from_json(&svg[start..end]).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradient::table2_reference_spec;

    fn strip() -> PatchShape {
        PatchShape::TransverseStrip { gradient_extent: 11e-3 }
    }

    #[test]
    fn paper_sheet_dimensions() {
        let layout = layout_panel(&table2_reference_spec(), 12, 2, 30e-3, strip()).unwrap();
        let (w, h) = layout.sheet_size();
        assert!((w - 0.24).abs() < 1e-12 && (h - 0.36).abs() < 1e-12);
        assert_eq!(layout.patches().len(), 240);
        assert!(layout.min_gap() > 0.0);
    }

    #[test]
    fn single_strip() {
        let layout = layout_panel(&table2_reference_spec(), 1, 1, 30e-3, strip()).unwrap();
        assert_eq!(layout.patches().len(), 10);
    }

    #[test]
    fn patch_equal_to_pitch_is_invalid() {
        let spec = table2_reference_spec().with_patch_sizes(vec![12e-3; 10]).unwrap();
        assert!(matches!(
            layout_panel(&spec, 1, 1, 30e-3, PatchShape::Square),
            Err(Error::LayoutInvalid(_))
        ));
        // Published sizes exceed the 12 mm pitch as squares.
        assert!(layout_panel(&table2_reference_spec(), 1, 1, 30e-3, PatchShape::Square).is_err());
        assert!(layout_panel(&table2_reference_spec(), 0, 1, 30e-3, strip()).is_err());
    }

    #[test]
    fn formatting() {
        assert_eq!(fmt_mm(21.3e-3), "21.3");
        assert_eq!(fmt_mm(0.24), "240");
        assert_eq!(fmt_mm(2e-9), "0.000002");
        assert_eq!(comment_safe(r#"{"a":"x--y"}"#), r#"{"a":"x-\u002dy"}"#);
        let v: serde_json::Value = serde_json::from_str(&comment_safe(r#"{"a":"x--y"}"#)).unwrap();
        assert_eq!(v["a"], "x--y");
    }

    #[test]
    fn deterministic_and_self_describing() {
        let layout = layout_panel(&table2_reference_spec(), 12, 2, 30e-3, strip()).unwrap();
        let a = render_svg(&layout).unwrap();
        let b = render_svg(&layout).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.matches("<rect ").count(), 240);
        assert!(a.contains(r#"height="21.3""#));
        let design = embedded_design(&a).unwrap();
        assert_eq!(design.n_cells(), 10);
    }
}
