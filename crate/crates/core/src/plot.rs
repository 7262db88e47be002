//! Standalone SVG plots for three-component collections.
//!
//! Simplex coordinates `(y1, y2)` are drawn on an equilateral triangle with
//! `V1` bottom-left, `V2` on top and `V3` (the origin) bottom-right. Influence
//! areas are delimited by the medians, drawn dashed through the centroid.

use std::fmt::Write;

use crate::markers::TrendSummary;
use crate::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 3] = ["#1b9e77", "#d95f02", "#7570b3"];
const WALK_COLORS: [&str; 6] = ["#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628"];

/// One labeled entity position in the simplex.
#[derive(Debug, Clone, Copy)]
pub struct PlotPoint<'a> {
    pub label: &'a str,
    pub coords: &'a [f64],
    /// 1-based leading component, used for coloring.
    pub leading: usize,
}

/// One entity's walk, optional trend arrow and optional attributed point.
#[derive(Debug, Clone, Copy)]
pub struct WalkPlot<'a> {
    pub entity_id: &'a str,
    pub walk: &'a [Vec<f64>],
    pub trend: Option<&'a TrendSummary>,
    pub holdout: Option<&'a [f64]>,
}

fn vertices() -> [(f64, f64); 3] {
    let side = WIDTH - 2.0 * MARGIN;
    let base = HEIGHT - MARGIN;
    [(MARGIN, base), (WIDTH / 2.0, base - side * 3f64.sqrt() / 2.0), (WIDTH - MARGIN, base)]
}

fn to_screen(coords: &[f64]) -> (f64, f64) {
    let b = [coords[0], coords[1], 1.0 - coords[0] - coords[1]];
    let v = vertices();
    (0..3).fold((0.0, 0.0), |(x, y), i| (x + b[i] * v[i].0, y + b[i] * v[i].1))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn check_coords(c: &[f64]) -> Result<()> {
    if c.len() != 2 {
        return Err(Error::PlotDimension(c.len() + 1));
    }
    Ok(())
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
}

fn frame(out: &mut String, labels: &[String]) {
    let v = vertices();
    let _ = writeln!(
        out,
        r#"<polygon points="{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        v[0].0, v[0].1, v[1].0, v[1].1, v[2].0, v[2].1
    );
    // Medians: vertex -> centroid -> opposite midpoint.
    for i in 0..3 {
        let (a, b) = (v[(i + 1) % 3], v[(i + 2) % 3]);
        let mid = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
        let _ = writeln!(
            out,
            r##"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#888" stroke-dasharray="5,4"/>"##,
            v[i].0, v[i].1, mid.0, mid.1
        );
    }
    let g = to_screen(&[1.0 / 3.0, 1.0 / 3.0]);
    let _ = writeln!(out, r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="black"/>"#, g.0, g.1);
    let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}">G</text>"#, g.0 + 5.0, g.1 - 5.0);
    let offsets = [(-10.0, 18.0, "end"), (0.0, -10.0, "middle"), (10.0, 18.0, "start")];
    for (i, label) in labels.iter().enumerate() {
        let (dx, dy, anchor) = offsets[i];
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="{anchor}" font-size="13">V{} {}</text>"#,
            v[i].0 + dx,
            v[i].1 + dy,
            i + 1,
            escape(label)
        );
    }
}

/// Scatter of entity positions over the influence areas.
pub fn simplex_svg(component_labels: &[String], points: &[PlotPoint<'_>]) -> Result<String> {
    if component_labels.len() != 3 {
        return Err(Error::PlotDimension(component_labels.len()));
    }
    points.iter().try_for_each(|p| check_coords(p.coords))?;
    let mut out = String::new();
    header(&mut out, "Entropy vectors in the simplex");
    frame(&mut out, component_labels);
    for p in points {
        let (x, y) = to_screen(p.coords);
        let color = COLORS[(p.leading.max(1) - 1) % COLORS.len()];
        let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="4" fill="{color}" fill-opacity="0.8"/>"#);
        let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}" font-size="9">{}</text>"#, x + 5.0, y - 4.0, escape(p.label));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn marker(out: &mut String, shape: usize, (x, y): (f64, f64), color: &str, filled: bool) {
    let fill = if filled { color } else { "white" };
    let _ = match shape % 3 {
        0 => writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="8" height="8" fill="{fill}" stroke="{color}" stroke-width="1.5"/>"#,
            x - 4.0,
            y - 4.0
        ),
        1 => writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="4.5" fill="{fill}" stroke="{color}" stroke-width="1.5"/>"#),
        _ => writeln!(
            out,
            r#"<polygon points="{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}" fill="{fill}" stroke="{color}" stroke-width="1.5"/>"#,
            x,
            y - 5.0,
            x - 5.0,
            y + 4.0,
            x + 5.0,
            y + 4.0
        ),
    };
}

/// Walk polylines with trend arrows and attributed points.
pub fn walk_svg(component_labels: &[String], walks: &[WalkPlot<'_>]) -> Result<String> {
    if component_labels.len() != 3 {
        return Err(Error::PlotDimension(component_labels.len()));
    }
    for w in walks {
        w.walk.iter().try_for_each(|p| check_coords(p))?;
        if let Some(q) = w.holdout {
            check_coords(q)?;
        }
        if let Some(t) = w.trend {
            check_coords(&t.direction)?;
        }
    }
    let mut out = String::new();
    header(&mut out, "Entropy walks and trends");
    let _ = writeln!(
        out,
        r#"<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" markerHeight="7" orient="auto-start-reverse"><path d="M0,0 L10,5 L0,10 z" fill="context-stroke"/></marker></defs>"#
    );
    frame(&mut out, component_labels);
    for (i, w) in walks.iter().enumerate() {
        let color = WALK_COLORS[i % WALK_COLORS.len()];
        let pts: Vec<(f64, f64)> = w.walk.iter().map(|p| to_screen(p)).collect();
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        for &p in &pts {
            marker(&mut out, i, p, color, true);
        }
        if let Some(t) = w.trend {
            // Arrow spans the walk's extent along the fitted direction.
            let reach = w
                .walk
                .iter()
                .map(|p| ((p[0] - t.line_point[0]) * t.direction[0] + (p[1] - t.line_point[1]) * t.direction[1]).abs())
                .fold(0.0, f64::max)
                .max(0.02);
            let from = to_screen(&[t.line_point[0] - reach * t.direction[0], t.line_point[1] - reach * t.direction[1]]);
            let to = to_screen(&[t.line_point[0] + reach * t.direction[0], t.line_point[1] + reach * t.direction[1]]);
            let _ = writeln!(
                out,
                r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{color}" stroke-width="2.5" stroke-opacity="0.6" marker-end="url(#arrow)"/>"#,
                from.0, from.1, to.0, to.1
            );
        }
        if let Some(q) = w.holdout {
            let p = to_screen(q);
            marker(&mut out, i, p, color, false);
            let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}" fill="{color}">Q</text>"#, p.0 + 6.0, p.1 + 4.0);
        }
        if let Some(&last) = pts.last() {
            let _ = writeln!(
                out,
                r#"<text x="{:.3}" y="{:.3}" fill="{color}" font-size="10">{}</text>"#,
                last.0 + 6.0,
                last.1 - 6.0,
                escape(w.entity_id)
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
