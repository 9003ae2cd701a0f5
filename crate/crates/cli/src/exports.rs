//! Output writers: contour CSV and SVG, bitmap overlay, JSON-lines log.

use serde::Serialize;

use segment_core::evolution::StepDiagnostics;
use segment_core::force::{Domain, IntensityGrid};
use segment_core::geometry::PolygonalCurve;

/// Curve vertices as CSV, one row per vertex with 15 significant digits.
pub fn contour_csv(curve: &PolygonalCurve) -> String {
    let mut out = String::from("i,x,y\n");
    for (i, v) in curve.vertices().iter().enumerate() {
        out.push_str(&format!("{},{:.14e},{:.14e}\n", i, v.x, v.y));
    }
    out
}

/// Closed contour as a standalone SVG whose viewBox is the image domain.
///
/// SVG y grows downward, so vertex y-coordinates are negated to keep the
/// drawing in the usual orientation.
pub fn contour_svg(curve: &PolygonalCurve, domain: &Domain) -> String {
    let mut points = String::new();
    for (i, v) in curve.vertices().iter().enumerate() {
        if i > 0 {
            points.push(' ');
        }
        points.push_str(&format!("{:.6},{:.6}", v.x, -v.y));
    }
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" ",
            "viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
            "  <polygon points=\"{}\" fill=\"none\" stroke=\"black\" ",
            "stroke-width=\"0.01\"/>\n",
            "</svg>\n"
        ),
        domain.x_min,
        -domain.y_max,
        domain.width(),
        domain.height(),
        points
    )
}

/// Copy of the grid with the curve rasterized on top at gray value 128.
///
/// Each edge is drawn with Bresenham's algorithm between the pixels under
/// its endpoints, so the contour stays connected even where edges span
/// several pixels.
pub fn render_overlay(
    curve: &PolygonalCurve,
    grid: &IntensityGrid,
    domain: &Domain,
) -> IntensityGrid {
    let mut overlay = grid.clone();
    let width = grid.width();
    let height = grid.height();
    let vertices = curve.vertices();
    let n = vertices.len();
    for v in 0..n {
        let (r0, c0) = domain.pixel_under(vertices[v], width, height);
        let (r1, c1) = domain.pixel_under(vertices[(v + 1) % n], width, height);
        draw_line(&mut overlay, r0 as i64, c0 as i64, r1 as i64, c1 as i64);
    }
    overlay
}

fn draw_line(grid: &mut IntensityGrid, mut r0: i64, mut c0: i64, r1: i64, c1: i64) {
    let dc = (c1 - c0).abs();
    let dr = -(r1 - r0).abs();
    let step_c = if c0 < c1 { 1 } else { -1 };
    let step_r = if r0 < r1 { 1 } else { -1 };
    let mut err = dc + dr;
    loop {
        grid.set(r0 as usize, c0 as usize, 128);
        if r0 == r1 && c0 == c1 {
            return;
        }
        let doubled = 2 * err;
        if doubled >= dr {
            err += dr;
            c0 += step_c;
        }
        if doubled <= dc {
            err += dc;
            r0 += step_r;
        }
    }
}

/// One log record per time step, serialized as a JSON line.
#[derive(Debug, Serialize)]
pub struct LogRecord {
    pub step: u64,
    pub time: f64,
    pub tau: f64,
    pub length: f64,
    pub r_min: f64,
    pub alpha_max: f64,
    pub max_speed: f64,
    pub mean_zero_residual: f64,
    pub dominance_margin: f64,
}

impl From<&StepDiagnostics> for LogRecord {
    fn from(d: &StepDiagnostics) -> Self {
        LogRecord {
            step: d.step_index,
            time: d.time,
            tau: d.tau,
            length: d.length,
            r_min: d.r_min,
            alpha_max: d.alpha_max,
            max_speed: d.max_speed,
            mean_zero_residual: d.mean_zero_residual,
            dominance_margin: d.dominance_margin,
        }
    }
}

pub fn log_line(diagnostics: &StepDiagnostics) -> String {
    let record = LogRecord::from(diagnostics);
    let mut line = serde_json::to_string(&record).expect("log record serializes");
    line.push('\n');
    line
}
