//! Point patterns as `x,y` CSV with the window in a sidecar JSON file.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{Point, PointConfiguration, Window};

pub const HEADER: &str = "x,y";

/// CSV text of the pattern; coordinates use the shortest representation
/// that parses back to the same `f64`.
pub fn write_csv(config: &PointConfiguration) -> String {
    let mut out = String::with_capacity(16 * (config.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for p in config.points() {
        out.push_str(&format!("{:?},{:?}\n", p.x, p.y));
    }
    out
}

/// Points of a CSV text; errors carry 1-based line numbers.
pub fn parse_csv(text: &str) -> Result<Vec<Point>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim().replace(' ', "") == HEADER => {}
        Some((_, h)) => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{HEADER}`, found `{h}`"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: format!("empty file; expected header `{HEADER}`"),
            })
        }
    }
    let mut points = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let mut coords = [0.0; 2];
        for (c, f) in coords.iter_mut().zip(&fields) {
            *c = f.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("`{f}` is not a number"),
            })?;
            if !c.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("`{f}` is not finite"),
                });
            }
        }
        points.push(Point::new(coords[0], coords[1]));
    }
    Ok(points)
}

pub fn window_json(window: &Window) -> String {
    serde_json::to_string_pretty(window).expect("window serializes")
}

/// Window from a sidecar `{"lo":[..],"hi":[..]}`, validated.
pub fn parse_window(text: &str) -> Result<Window> {
    let w: Window = serde_json::from_str(text)?;
    Window::new(w.lo, w.hi)
}

/// Pattern from CSV and sidecar texts, indexed with cell side `cell`.
pub fn parse_pattern(csv: &str, window_json: &str, cell: f64) -> Result<PointConfiguration> {
    let window = parse_window(window_json)?;
    PointConfiguration::from_points(window, cell, parse_csv(csv)?)
}

/// Sidecar path next to a pattern: `p.csv` gives `p.window.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("window.json")
}

/// Writes `path` and its sidecar.
pub fn save_pattern(config: &PointConfiguration, path: &Path) -> Result<()> {
    fs::write(path, write_csv(config))?;
    fs::write(sidecar_path(path), window_json(config.window()))?;
    Ok(())
}

/// Reads a pattern; the window comes from `window_path`, or the sidecar
/// next to `path` when omitted.
pub fn load_pattern(path: &Path, window_path: Option<&Path>, cell: f64) -> Result<PointConfiguration> {
    let csv = fs::read_to_string(path)?;
    let side = window_path.map(Path::to_path_buf).unwrap_or_else(|| sidecar_path(path));
    let win = fs::read_to_string(side)?;
    parse_pattern(&csv, &win, cell)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_pattern_is_header_only() {
        let c = PointConfiguration::empty(Window::square(1.0).unwrap(), 0.5);
        assert_eq!(write_csv(&c), "x,y\n");
        assert!(parse_csv("x,y\n").unwrap().is_empty());
    }

    #[test]
    fn missing_field_reports_line() {
        match parse_csv("x,y\n1.0,\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_csv("x,y\n1,2\n3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_header_rejected() {
        assert!(matches!(parse_csv("a,b\n1,2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_csv(""), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn bad_window_rejected() {
        assert!(parse_window(r#"{"lo":[0,0],"hi":[0,1]}"#).is_err());
        assert!(parse_window(r#"{"lo":[0,0]}"#).is_err());
        let w = parse_window(r#"{"lo":[0,-1],"hi":[2,1]}"#).unwrap();
        assert_eq!(w.area(), 4.0);
    }
}
