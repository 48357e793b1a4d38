//! CSV and SVG serialization of logs, grids and moment curves.

use std::fmt::Write as _;
use std::io::{Read, Write};

use thiserror::Error;

use crate::model::{JointState, Violation};
use crate::simulator::TrajectoryLog;
use crate::stiffness::MomentSample;
use crate::units::format_sig;
use crate::workspace::{contour_segments, WorkspaceGrid};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },
}

pub const LOG_HEADER: [&str; 12] = [
    "t_s",
    "q1_m",
    "q2_m",
    "cL_m",
    "cR_m",
    "l1_m",
    "l2_m",
    "theta_rad",
    "x_m",
    "y_m",
    "eq3_residual_m",
    "violations",
];

pub const GRID_HEADER: [&str; 4] = ["x_m", "y_m", "reachable", "min_angle_rad"];

pub const MOMENT_HEADER: [&str; 2] = ["theta_rad", "moment_Nm"];

fn violation_codes(v: &[Violation]) -> String {
    v.iter().map(|v| v.code()).collect::<Vec<_>>().join(";")
}

/// One row per logged step. Violated bounds are listed by code,
/// separated by `;`.
pub fn write_log_csv<W: Write>(log: &TrajectoryLog, out: W) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LOG_HEADER)?;
    for row in &log.rows {
        let s = &row.state;
        w.write_record([
            format_sig(s.time),
            format_sig(s.control.q1),
            format_sig(s.control.q2),
            format_sig(s.cables.c_l),
            format_sig(s.cables.c_r),
            format_sig(s.joint.l1),
            format_sig(s.joint.l2),
            format_sig(s.joint.theta),
            format_sig(s.pose.x),
            format_sig(s.pose.y),
            format_sig(row.cable_residual),
            violation_codes(&row.violations),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Unreachable cells leave the angle column empty.
pub fn write_grid_csv<W: Write>(grid: &WorkspaceGrid, out: W) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GRID_HEADER)?;
    for c in &grid.cells {
        w.write_record([
            format_sig(c.x),
            format_sig(c.y),
            (c.reachable as u8).to_string(),
            c.min_angle.map(format_sig).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_moment_csv<W: Write>(samples: &[MomentSample], out: W) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MOMENT_HEADER)?;
    for s in samples {
        w.write_record([format_sig(s.theta), format_sig(s.moment)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `theta_rad,moment_Nm` samples. Both columns must be finite.
pub fn read_moment_csv<R: Read>(input: R) -> Result<Vec<MomentSample>, ExportError> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(MOMENT_HEADER) {
        return Err(ExportError::Parse {
            line: 1,
            reason: format!("expected header {}", MOMENT_HEADER.join(",")),
        });
    }
    let mut samples = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| -> Result<f64, ExportError> {
            let text = record.get(i).unwrap_or("");
            text.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| ExportError::Parse {
                    line,
                    reason: format!("'{text}' is not a finite number"),
                })
        };
        samples.push(MomentSample::new(field(0)?, field(1)?));
    }
    Ok(samples)
}

const SVG_SIZE: f64 = 600.0;
const SVG_MARGIN: f64 = 20.0;

/// Maps world coordinates to an SVG canvas with `y` pointing up.
struct Canvas {
    x0: f64,
    y0: f64,
    scale: f64,
    width: f64,
    height: f64,
}

impl Canvas {
    fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        let span = (x_max - x_min).max(y_max - y_min).max(1e-9);
        let scale = (SVG_SIZE - 2.0 * SVG_MARGIN) / span;
        Canvas {
            x0: x_min,
            y0: y_max,
            scale,
            width: (x_max - x_min) * scale + 2.0 * SVG_MARGIN,
            height: (y_max - y_min) * scale + 2.0 * SVG_MARGIN,
        }
    }

    fn px(&self, x: f64) -> f64 {
        SVG_MARGIN + (x - self.x0) * self.scale
    }

    fn py(&self, y: f64) -> f64 {
        SVG_MARGIN + (self.y0 - y) * self.scale
    }

    fn open(&self, out: &mut String) {
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.1}" height="{:.1}" viewBox="0 0 {:.1} {:.1}">"#,
            self.width, self.height, self.width, self.height
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    }
}

/// Blue (small angle) to red (large angle).
fn heat(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("rgb({r},64,{b})")
}

/// Reachable cells shaded by minimum end-effector angle, with contour
/// lines at each of `levels` (radians).
pub fn workspace_svg(grid: &WorkspaceGrid, theta_limit: f64, levels: &[f64]) -> String {
    let b = &grid.bounds;
    let canvas = Canvas::new(b.x_min, b.x_max, b.y_min, b.y_max);
    let mut out = String::new();
    canvas.open(&mut out);
    let w = grid.dx * canvas.scale;
    let h = grid.dy * canvas.scale;
    for c in grid.cells.iter() {
        let Some(a) = c.min_angle else { continue };
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            canvas.px(c.x - grid.dx / 2.0),
            canvas.py(c.y + grid.dy / 2.0),
            w,
            h,
            heat(a.abs() / theta_limit)
        );
    }
    for &level in levels {
        for [(x1, y1), (x2, y2)] in contour_segments(grid, level) {
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
                canvas.px(x1),
                canvas.py(y1),
                canvas.px(x2),
                canvas.py(y2)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Link 1 and link 2 of each configuration drawn from the base.
pub fn configurations_svg(states: &[JointState]) -> String {
    let mut pts = vec![(0.0, 0.0)];
    for s in states {
        let (bx, by) = s.bend_point();
        let tip = s.pose();
        pts.push((bx, by));
        pts.push((tip.x, tip.y));
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, sel: fn(&(f64, f64)) -> f64| pts.iter().map(sel).fold(init, f);
    let pad = 0.05;
    let canvas = Canvas::new(
        fold(f64::min, f64::INFINITY, |p| p.0) - pad,
        fold(f64::max, f64::NEG_INFINITY, |p| p.0) + pad,
        fold(f64::min, f64::INFINITY, |p| p.1) - pad,
        fold(f64::max, f64::NEG_INFINITY, |p| p.1) + pad,
    );
    let mut out = String::new();
    canvas.open(&mut out);
    let n = states.len().max(2) - 1;
    for (k, s) in states.iter().enumerate() {
        let (bx, by) = s.bend_point();
        let tip = s.pose();
        let _ = writeln!(
            out,
            r#"<polyline points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="{}" stroke-width="3"/>"#,
            canvas.px(0.0),
            canvas.py(0.0),
            canvas.px(bx),
            canvas.py(by),
            canvas.px(tip.x),
            canvas.py(tip.y),
            heat(k as f64 / n as f64)
        );
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="black"/>"#,
            canvas.px(bx),
            canvas.py(by)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ManipulatorParams;
    use crate::simulator::{builtin_scenario, run_scenario};
    use crate::workspace::{compute_grid, Bounds};

    #[test]
    fn log_csv_shape() {
        let log = run_scenario(&builtin_scenario("stationary-bend").unwrap()).unwrap();
        let mut buf = Vec::new();
        write_log_csv(&log, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), LOG_HEADER.join(","));
        assert_eq!(lines.count(), log.rows.len());
    }

    #[test]
    fn grid_csv_blank_angle_when_unreachable() {
        let p = ManipulatorParams::default();
        let grid = compute_grid(&p, Bounds::new(-0.5, 0.5, 0.0, 0.5), 0.1).unwrap();
        let mut buf = Vec::new();
        write_grid_csv(&grid, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().skip(1).any(|l| l.ends_with(",0,")));
        assert!(text.lines().skip(1).any(|l| l.contains(",1,")));
    }

    #[test]
    fn moment_csv_roundtrip() {
        let samples = vec![
            MomentSample::new(0.0, 0.0),
            MomentSample::new(0.1, 0.25),
            MomentSample::new(-0.2, -1e-5),
        ];
        let mut buf = Vec::new();
        write_moment_csv(&samples, &mut buf).unwrap();
        assert_eq!(read_moment_csv(buf.as_slice()).unwrap(), samples);
    }

    #[test]
    fn moment_csv_rejects_bad_input() {
        for bad in [
            "theta,moment\n0,0\n",
            "theta_rad,moment_Nm\n0,nan\n",
            "theta_rad,moment_Nm\n0\n",
            "theta_rad,moment_Nm\nabc,1\n",
        ] {
            assert!(read_moment_csv(bad.as_bytes()).is_err(), "{bad:?}");
        }
        let ok = "# comment\ntheta_rad, moment_Nm\n 0.1 , 0.2\n";
        assert_eq!(
            read_moment_csv(ok.as_bytes()).unwrap(),
            vec![MomentSample::new(0.1, 0.2)]
        );
    }

    #[test]
    fn svgs_are_well_formed() {
        let p = ManipulatorParams::default();
        let grid = compute_grid(&p, Bounds::new(-1.0, 1.0, 0.0, 1.0), 0.1).unwrap();
        let svg = workspace_svg(&grid, p.theta_limit, &[0.2, 0.5]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<line"));
        let svg = configurations_svg(&[JointState::new(0.1, 0.5, 0.1), JointState::new(0.3, 0.3, 0.2)]);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
