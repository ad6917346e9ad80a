use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const CANVAS: f64 = 800.0;
pub const MARGIN: f64 = 0.05;
pub const RADIUS: f64 = 4.0;
pub const DEFAULT_COLOR: [u8; 3] = [128, 128, 128];

/// Maps data coordinates onto the canvas: one scale for both axes, the data
/// centered, a 5% margin on the longer side, and y pointing up.
pub fn canvas_transform(coords: &[[f64; 2]]) -> impl Fn([f64; 2]) -> [f64; 2] {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for c in coords {
        for a in 0..2 {
            lo[a] = lo[a].min(c[a]);
            hi[a] = hi[a].max(c[a]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let scale = if span > 0.0 { CANVAS * (1.0 - 2.0 * MARGIN) / span } else { 1.0 };
    let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    move |p| {
        [
            CANVAS / 2.0 + (p[0] - mid[0]) * scale,
            CANVAS / 2.0 - (p[1] - mid[1]) * scale,
        ]
    }
}

/// Standalone SVG scatter plot of 2-D points.
pub fn render_svg(coords: &[[f64; 2]], colors: Option<&[[u8; 3]]>) -> Result<String> {
    if coords.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Contract("scatter coordinates must be finite".into()));
    }
    if let Some(c) = colors {
        if c.len() != coords.len() {
            return Err(Error::Contract(format!("{} colors for {} points", c.len(), coords.len())));
        }
    }
    let map = canvas_transform(coords);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, &p) in coords.iter().enumerate() {
        let [x, y] = map(p);
        let [r, g, b] = colors.map_or(DEFAULT_COLOR, |c| c[i]);
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{RADIUS}" fill="rgb({r},{g},{b})"/>"#
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg_scatter(coords: &[[f64; 2]], colors: Option<&[[u8; 3]]>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_svg(coords, colors)?).map_err(|e| Error::io(path, e))
}

/// Linear map of up to two parameter columns to the red and green channels.
pub fn param_colors(params: &[Vec<f64>]) -> Vec<[u8; 3]> {
    let channel = |col: usize| -> Vec<u8> {
        let vals: Vec<f64> = params.iter().map(|p| p.get(col).copied().unwrap_or(0.0)).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        vals.iter()
            .map(|v| if hi > lo { (255.0 * (v - lo) / (hi - lo)).round() as u8 } else { 0 })
            .collect()
    };
    let (red, green) = (channel(0), channel(1));
    red.into_iter().zip(green).map(|(r, g)| [r, g, 0]).collect()
}
