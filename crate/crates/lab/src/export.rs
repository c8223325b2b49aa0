//! CSV, JSON and SVG output.

use std::fmt::Write as _;
use std::path::Path;

use annealpath_core::bayesopt::{Observation, SurrogateGrid};
use serde::Serialize;

use crate::compare::ResultRow;
use crate::error::{LabError, Result};
use crate::tuning::ScalingRow;

pub const RESULTS_HEADER: [&str; 4] = ["method", "T", "density", "mean_improvement"];

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| LabError::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(annealpath_core::Error::from)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)
        .map_err(annealpath_core::Error::from)?;
    for r in rows {
        w.write_record(&r).map_err(annealpath_core::Error::from)?;
    }
    w.into_inner()
        .map_err(|e| LabError::Config(format!("csv buffer: {e}")))
}

/// Table with header `method,T,density,mean_improvement`.
pub fn results_csv(rows: &[ResultRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &RESULTS_HEADER,
        rows.iter().map(|r| {
            vec![
                r.method.to_string(),
                r.t.to_string(),
                r.density.to_string(),
                r.mean_improvement.to_string(),
            ]
        }),
    )
}

pub fn write_results_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    write_file(path, &results_csv(rows)?)
}

pub fn write_scaling_csv(rows: &[ScalingRow], path: &Path) -> Result<()> {
    let bytes = csv_bytes(
        &["alpha1", "mean_improvement"],
        rows.iter()
            .map(|r| vec![r.alpha1.to_string(), r.mean_improvement.to_string()]),
    )?;
    write_file(path, &bytes)
}

pub fn write_heatmap_csv(grid: &SurrogateGrid, path: &Path) -> Result<()> {
    write_file(path, grid.to_csv()?.as_bytes())
}

pub fn write_svg(svg: &str, path: &Path) -> Result<()> {
    write_file(path, svg.as_bytes())
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn svg_open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (MARGIN, W - MARGIN, H - MARGIN, MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{x0}" y="{}" text-anchor="middle">{}</text>"#,
        y0 + 16.0,
        fmt_num(x.0)
    );
    let _ = writeln!(
        out,
        r#"<text x="{x1}" y="{}" text-anchor="middle">{}</text>"#,
        y0 + 16.0,
        fmt_num(x.1)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{y0}" text-anchor="end">{}</text>"#,
        x0 - 4.0,
        fmt_num(y.0)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        x0 - 4.0,
        y1 + 4.0,
        fmt_num(y.1)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

fn fmt_num(v: f64) -> String {
    format!("{:.3}", v)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn project(v: f64, (lo, hi): (f64, f64), a: f64, b: f64) -> f64 {
    a + (v - lo) / (hi - lo) * (b - a)
}

/// Line plot of named `(x, y)` series.
pub fn line_plot_svg(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[(String, Vec<(f64, f64)>)],
) -> String {
    let xs = extent(series.iter().flat_map(|s| s.1.iter().map(|p| p.0)));
    let ys = extent(series.iter().flat_map(|s| s.1.iter().map(|p| p.1)));
    let mut out = String::new();
    svg_open(&mut out, title);
    axes(&mut out, xs, ys, xlabel, ylabel);
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|&(x, y)| {
                format!(
                    "{:.2},{:.2}",
                    project(x, xs, MARGIN, W - MARGIN),
                    project(y, ys, H - MARGIN, MARGIN)
                )
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
        let ly = MARGIN + 14.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{}</text>"#,
            W - MARGIN,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn scaling_svg(title: &str, rows: &[ScalingRow]) -> String {
    let pts = rows
        .iter()
        .map(|r| (r.alpha1, r.mean_improvement))
        .collect();
    line_plot_svg(
        title,
        "alpha1",
        "mean improvement",
        &[("fitness".to_string(), pts)],
    )
}

/// Mean improvement against density, one line per method and duration.
pub fn results_svg(rows: &[ResultRow]) -> String {
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for r in rows {
        let name = format!("{} T={}", r.method, r.t);
        match series.iter_mut().find(|s| s.0 == name) {
            Some(s) => s.1.push((r.density, r.mean_improvement)),
            None => series.push((name, vec![(r.density, r.mean_improvement)])),
        }
    }
    for s in &mut series {
        s.1.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    line_plot_svg(
        "Improvement over baseline",
        "density",
        "mean improvement",
        &series,
    )
}

fn color_ramp(t: f64) -> String {
    // dark blue -> teal -> yellow
    let stops = [
        (68.0, 1.0, 84.0),
        (33.0, 145.0, 140.0),
        (253.0, 231.0, 37.0),
    ];
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (i, f) = if t >= 0.5 {
        (1, (t - 0.5) * 2.0)
    } else {
        (0, t * 2.0)
    };
    let (a, b) = (stops[i], stops[i + 1]);
    let c = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(a.0, b.0), c(a.1, b.1), c(a.2, b.2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeatLayer {
    Mean,
    Variance,
}

/// Surrogate heatmap of a 2-D grid with the evaluated points overlaid.
pub fn heatmap_svg(
    grid: &SurrogateGrid,
    layer: HeatLayer,
    observations: &[Observation],
) -> Option<String> {
    if grid.names.len() != 2 || grid.cells.is_empty() {
        return None;
    }
    let value = |c: &annealpath_core::bayesopt::GridCell| match layer {
        HeatLayer::Mean => c.mean,
        HeatLayer::Variance => c.variance,
    };
    let xs = extent(grid.cells.iter().map(|c| c.point[0]));
    let ys = extent(grid.cells.iter().map(|c| c.point[1]));
    let vs = extent(grid.cells.iter().map(value));
    let res = grid.resolution as f64;
    let cw = (W - 2.0 * MARGIN) / res;
    let ch = (H - 2.0 * MARGIN) / res;
    let title = match layer {
        HeatLayer::Mean => "Surrogate mean",
        HeatLayer::Variance => "Surrogate variance",
    };
    let mut out = String::new();
    svg_open(
        &mut out,
        &format!("{title} ({} to {})", fmt_num(vs.0), fmt_num(vs.1)),
    );
    for c in &grid.cells {
        let px = project(c.point[0], xs, MARGIN, W - MARGIN - cw);
        let py = project(c.point[1], ys, H - MARGIN - ch, MARGIN);
        let t = (value(c) - vs.0) / (vs.1 - vs.0);
        let _ = writeln!(
            out,
            r#"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            cw + 0.5,
            ch + 0.5,
            color_ramp(t)
        );
    }
    axes(&mut out, xs, ys, &grid.names[0], &grid.names[1]);
    for o in observations.iter().filter(|o| o.point.len() == 2) {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="white" stroke="black" stroke-width="0.5"/>"#,
            project(o.point[0], xs, MARGIN + cw / 2.0, W - MARGIN - cw / 2.0),
            project(o.point[1], ys, H - MARGIN - ch / 2.0, MARGIN + ch / 2.0)
        );
    }
    out.push_str("</svg>\n");
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compare::RowMeta;
    use crate::config::Method;
    use crate::params::MethodParams;

    fn row(method: Method, density: f64, v: f64) -> ResultRow {
        ResultRow {
            method,
            t: 1.0,
            density,
            mean_improvement: v,
            per_instance: vec![v],
            meta: RowMeta {
                instances: 1,
                excluded: vec![],
                sentinel: false,
                z_plus_fraction: 1.0,
                params: MethodParams::fixed(method, 1.0),
            },
        }
    }

    #[test]
    fn results_csv_header() {
        let bytes = results_csv(&[row(Method::RaHg, 0.5, 1.25)]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("method,T,density,mean_improvement"));
        assert_eq!(lines.next(), Some("RA+HG,1,0.5,1.25"));
    }

    #[test]
    fn svgs_are_well_formed() {
        let svg = results_svg(&[
            row(Method::Hg, 0.1, 1.0),
            row(Method::Hg, 0.5, 2.0),
            row(Method::Ra, 0.1, 0.5),
        ]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(color_ramp(0.0), "#440154");
        assert_eq!(color_ramp(1.0), "#fde725");
        assert_eq!(color_ramp(f64::NAN), "#440154");
    }

    #[test]
    fn io_errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = write_json(&1, &blocker.join("nested.json")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
